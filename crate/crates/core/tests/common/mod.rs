#![allow(dead_code)]

use infomenu_core::continuous::{regularity_check, REGULARITY_GRID};
use infomenu_core::dist::{Linear, Mixture, TruncatedExponential, TruncatedNormal, TypeDistribution, Uniform};
use infomenu_core::game::GameConfig;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Scenario {
    pub dist: Box<dyn TypeDistribution>,
    pub cfg: GameConfig,
}

fn random_dist(rng: &mut ChaCha8Rng) -> Box<dyn TypeDistribution> {
    match rng.gen_range(0..5) {
        0 => Box::new(Uniform),
        1 => Box::new(Linear::new(rng.gen_range(-2.0..=2.0)).unwrap()),
        2 => {
            let mut rate: f64 = rng.gen_range(-3.0..3.0);
            if rate.abs() < 1e-3 {
                rate = 1.0;
            }
            Box::new(TruncatedExponential::new(rate).unwrap())
        }
        3 => Box::new(TruncatedNormal::new(rng.gen_range(0.2..0.8), rng.gen_range(0.2..0.6)).unwrap()),
        _ => Box::new(
            Mixture::new(&[
                (rng.gen_range(0.2..1.0), rng.gen_range(0.2..0.5), rng.gen_range(0.25..0.5)),
                (rng.gen_range(0.2..1.0), rng.gen_range(0.5..0.8), rng.gen_range(0.25..0.5)),
            ])
            .unwrap(),
        ),
    }
}

/// `count` scenarios whose virtual values are monotone, drawn from a fixed seed.
pub fn regular_scenarios(count: usize, seed: u64) -> Vec<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let dist = random_dist(&mut rng);
        let cfg = GameConfig::new(rng.gen_range(0.0..3.0), rng.gen_range(0.0..=1.0)).unwrap();
        if regularity_check(dist.as_ref(), &cfg, REGULARITY_GRID) {
            out.push(Scenario { dist, cfg });
        }
    }
    out
}
