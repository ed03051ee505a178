//! Independent checks of the closed forms: Monte-Carlo estimators, brute
//! force menu searches and envelope conditions.
//!
//! Nothing here calls the solver under test except to build a report.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::binary::{BinaryMenu, BinaryScenario};
use crate::continuous::{virtual_values, StepMenu};
use crate::dist::TypeDistribution;
use crate::error::{Error, Result};
use crate::game::{strategy, Action, Belief, GameConfig, State};
use crate::rules::{
    concentrate, externality_cost, feasible_band, gain, message_marginal, message_posterior, Informativeness,
    LikelihoodTable, Message,
};

/// Samples drawn from one RNG stream.
const CHUNK: u64 = 1 << 16;
/// Absorbs round-off in closed forms that should equal a degenerate estimate.
const MC_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct McConfig {
    samples: u64,
    seed: u64,
}

impl McConfig {
    pub fn new(samples: u64, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidParameter {
                name: "samples",
                value: 0.0,
                reason: "need at least one sample",
            });
        }
        Ok(McConfig { samples, seed })
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleReport {
    pub quantity: String,
    pub closed_form: f64,
    pub estimate: f64,
    /// Standard error for sampled estimates, grid gap for searches.
    pub std_error: f64,
    pub tolerance: f64,
    pub pass: bool,
    /// Reported for comparison only; never fails a battery.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub informational: bool,
}

impl OracleReport {
    /// Passes iff `|closed_form - estimate| <= max(3 std_error, tolerance)`.
    pub fn new(quantity: impl Into<String>, closed_form: f64, estimate: f64, std_error: f64, tolerance: f64) -> Self {
        let pass = (closed_form - estimate).abs() <= (3.0 * std_error).max(tolerance);
        OracleReport {
            quantity: quantity.into(),
            closed_form,
            estimate,
            std_error,
            tolerance,
            pass,
            informational: false,
        }
    }

    /// AND an extra condition into `pass`.
    pub fn require(mut self, ok: bool) -> Self {
        self.pass &= ok;
        self
    }

    pub fn informational(mut self) -> Self {
        self.informational = true;
        self
    }
}

/// Counts of a per-sample score in `{-1, 0, 1}`: `(sum, sum of squares)`.
fn sample_scores<F>(mc: &McConfig, score: F) -> (i64, i64)
where
    F: Fn(&mut ChaCha8Rng) -> i64 + Sync,
{
    let streams = mc.samples.div_ceil(CHUNK);
    (0..streams)
        .into_par_iter()
        .map(|stream| {
            let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
            rng.set_stream(stream);
            let n = CHUNK.min(mc.samples - stream * CHUNK);
            let (mut sum, mut sq) = (0i64, 0i64);
            for _ in 0..n {
                let s = score(&mut rng);
                sum += s;
                sq += s * s;
            }
            (sum, sq)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1))
}

fn mean_and_se(sum: i64, sq: i64, n: u64) -> (f64, f64) {
    let n_f = n as f64;
    let mean = sum as f64 / n_f;
    let var = if n > 1 {
        ((sq as f64 - n_f * mean * mean) / (n_f - 1.0)).max(0.0)
    } else {
        0.0
    };
    (mean, (var / n_f).sqrt())
}

fn draw_state(rng: &mut ChaCha8Rng, belief: f64) -> State {
    if rng.gen::<f64>() < belief {
        State::Zero
    } else {
        State::One
    }
}

fn draw_message(rng: &mut ChaCha8Rng, p_m0: f64) -> Message {
    if rng.gen::<f64>() < p_m0 {
        Message::M0
    } else {
        Message::M1
    }
}

fn hit(a: Action, x: State) -> i64 {
    a.matches(x) as i64
}

/// Simulate a buyer with belief `v_b` who best-responds to messages from
/// `concentrate(i)`, and compare the gain over acting on the prior with
/// [`gain`].
pub fn mc_gain(i: f64, v_b: f64, mc: &McConfig) -> Result<OracleReport> {
    let belief = Belief::new(v_b)?;
    let info = Informativeness::new(i)?;
    if !feasible_band(belief).contains(i) {
        return Err(Error::InvalidParameter {
            name: "I",
            value: i,
            reason: "outside the buyer's feasible band",
        });
    }
    let rule = concentrate(info);
    let prior_action = strategy(belief);
    let act = |m: Message| match message_posterior(&rule, belief, m) {
        Ok(post) => strategy(post),
        Err(_) => prior_action,
    };
    let (a0, a1) = (act(Message::M0), act(Message::M1));
    let (sum, sq) = sample_scores(mc, |rng| {
        let x = draw_state(rng, v_b);
        let p_m0 = match x {
            State::Zero => rule.i0(),
            State::One => 1.0 - rule.i1(),
        };
        let a = match draw_message(rng, p_m0) {
            Message::M0 => a0,
            Message::M1 => a1,
        };
        hit(a, x) - hit(prior_action, x)
    });
    let (est, se) = mean_and_se(sum, sq, mc.samples);
    Ok(OracleReport::new(format!("gain(I={i}, v_b={v_b})"), gain(i, belief), est, se, MC_FLOOR))
}

/// Estimate the seller's cost by drawing the message from its marginal and
/// the state from the seller's belief independently, with the buyer obeying
/// the recommendation.
pub fn mc_cost(i: f64, cfg: &GameConfig, mc: &McConfig) -> Result<OracleReport> {
    let info = Informativeness::new(i)?;
    let rule = concentrate(info);
    let v_s = cfg.v_s();
    let (p_m0, _) = message_marginal(&rule, cfg.seller());
    let (sum, sq) = sample_scores(mc, |rng| {
        let m = draw_message(rng, p_m0);
        let x = draw_state(rng, v_s);
        hit(m.recommended(), x)
    });
    let (mean, se) = mean_and_se(sum, sq, mc.samples);
    let tau = cfg.tau();
    Ok(OracleReport::new(
        format!("cost(I={i}, tau={tau}, v_s={v_s})"),
        externality_cost(info, cfg),
        tau * mean,
        tau * se,
        MC_FLOOR,
    ))
}

/// Cost with the message drawn conditional on the state, against
/// `tau (v_s i0 + (1 - v_s) i1)`. Differs from the optimized cost away
/// from full information, so it is informational only.
pub fn mc_cost_coupled(i: f64, cfg: &GameConfig, mc: &McConfig) -> Result<OracleReport> {
    let rule = concentrate(Informativeness::new(i)?);
    let v_s = cfg.v_s();
    let (sum, sq) = sample_scores(mc, |rng| {
        let x = draw_state(rng, v_s);
        let p_m0 = match x {
            State::Zero => rule.i0(),
            State::One => 1.0 - rule.i1(),
        };
        hit(draw_message(rng, p_m0).recommended(), x)
    });
    let (mean, se) = mean_and_se(sum, sq, mc.samples);
    let tau = cfg.tau();
    let closed = tau * (v_s * rule.i0() + (1.0 - v_s) * rule.i1());
    Ok(OracleReport::new(
        format!("cost_coupled(I={i}, tau={tau}, v_s={v_s})"),
        closed,
        tau * mean,
        tau * se,
        MC_FLOOR,
    )
    .informational())
}

/// Value of a concentrated rule to a best-responding buyer, obedient or not.
fn best_response_gain(i: f64, v: Belief) -> f64 {
    LikelihoodTable::from_direct(&concentrate(Informativeness::new(i).unwrap())).gain(v)
}

fn linspace_with_zero(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..n)
        .map(|k| {
            if k + 1 == n {
                hi
            } else {
                lo + (hi - lo) * k as f64 / (n - 1) as f64
            }
        })
        .collect();
    if lo <= 0.0 && 0.0 <= hi && !xs.contains(&0.0) {
        xs.push(0.0);
        xs.sort_by(f64::total_cmp);
    }
    xs
}

/// Largest-profit transfers for fixed allocations, maximizing
/// `w_l t_l + w_h t_h` subject to
/// `0 <= t_l <= a_l`, `0 <= t_h <= a_h`, `t_l - t_h <= b_l`, `t_h - t_l <= b_h`.
/// Solved by intersecting every pair of constraint lines.
fn best_transfers(w_l: f64, w_h: f64, a_l: f64, a_h: f64, b_l: f64, b_h: f64) -> Option<(f64, f64)> {
    // Lines as (c_l, c_h, rhs) for c_l t_l + c_h t_h <= rhs.
    let lines = [
        (1.0, 0.0, a_l),
        (0.0, 1.0, a_h),
        (-1.0, 0.0, 0.0),
        (0.0, -1.0, 0.0),
        (1.0, -1.0, b_l),
        (-1.0, 1.0, b_h),
    ];
    let feasible = |t_l: f64, t_h: f64| {
        lines
            .iter()
            .all(|&(cl, ch, r)| cl * t_l + ch * t_h <= r + 1e-12 * (1.0 + r.abs()))
    };
    let mut best: Option<(f64, f64, f64)> = None;
    for p in 0..lines.len() {
        for q in p + 1..lines.len() {
            let (a1, b1, r1) = lines[p];
            let (a2, b2, r2) = lines[q];
            let det = a1 * b2 - a2 * b1;
            if det.abs() < 1e-14 {
                continue;
            }
            let t_l = (r1 * b2 - r2 * b1) / det;
            let t_h = (a1 * r2 - a2 * r1) / det;
            if !feasible(t_l, t_h) {
                continue;
            }
            let value = w_l * t_l + w_h * t_h;
            if best.is_none_or(|b| value > b.2) {
                best = Some((t_l, t_h, value));
            }
        }
    }
    best.map(|(t_l, t_h, _)| (t_l.max(0.0), t_h.max(0.0)))
}

/// Best menu over a `grid_n x grid_n` grid of allocations spanning each
/// type's feasible band (zero added when missing), with transfers chosen
/// optimally for each allocation pair.
pub fn brute_force_binary(scenario: &BinaryScenario, grid_n: usize) -> Result<BinaryMenu> {
    if grid_n < 2 {
        return Err(Error::InvalidParameter {
            name: "grid_n",
            value: grid_n as f64,
            reason: "need at least two grid points",
        });
    }
    let (vl, vh, phi) = (scenario.v_low(), scenario.v_high(), scenario.phi());
    let cfg = *scenario.cfg();
    let (band_l, band_h) = (feasible_band(vl), feasible_band(vh));
    let grid_l = linspace_with_zero(band_l.lo, band_l.hi, grid_n);
    let grid_h = linspace_with_zero(band_h.lo, band_h.hi, grid_n);
    let cost = |i: f64| externality_cost(Informativeness::new(i).unwrap(), &cfg);
    let gains_h: Vec<(f64, f64, f64)> = grid_h
        .iter()
        .map(|&ih| (best_response_gain(ih, vl), best_response_gain(ih, vh), cost(ih)))
        .collect();

    let best = grid_l
        .par_iter()
        .enumerate()
        .filter_map(|(row, &il)| {
            let (gl_l, gh_l, c_l) = (best_response_gain(il, vl), best_response_gain(il, vh), cost(il));
            let mut best: Option<(usize, usize, BinaryMenu)> = None;
            for (col, (&ih, &(gl_h, gh_h, c_h))) in grid_h.iter().zip(&gains_h).enumerate() {
                let Some((t_l, t_h)) = best_transfers(1.0 - phi, phi, gl_l, gh_h, gl_l - gl_h, gh_h - gh_l) else {
                    continue;
                };
                let profit = phi * (t_h - c_h) + (1.0 - phi) * (t_l - c_l);
                if best.as_ref().is_none_or(|b| profit > b.2.expected_profit) {
                    best = Some((
                        row,
                        col,
                        BinaryMenu {
                            i_low: il,
                            i_high: ih,
                            t_low: t_l,
                            t_high: t_h,
                            expected_profit: profit,
                        },
                    ));
                }
            }
            best
        })
        .reduce_with(|a, b| {
            let later_wins = b.2.expected_profit > a.2.expected_profit
                || (b.2.expected_profit == a.2.expected_profit && (b.0, b.1) < (a.0, a.1));
            if later_wins {
                b
            } else {
                a
            }
        });
    best.map(|b| b.2).ok_or(Error::InfeasibleScenario)
}

/// Spacing-based bound on how far the grid optimum can fall below the
/// exact one: profit moves by at most `(2 + tau)` per unit of allocation.
pub fn binary_grid_gap(scenario: &BinaryScenario, grid_n: usize) -> f64 {
    let step = |v: Belief| feasible_band(v).width() / (grid_n.max(2) - 1) as f64;
    (2.0 + scenario.cfg().tau()) * 0.5 * (step(scenario.v_low()) + step(scenario.v_high()))
}

/// Compare an exact binary menu with the grid search. Passes when the grid
/// never beats the exact profit and trails it by at most `tolerance`.
pub fn binary_report(scenario: &BinaryScenario, exact: &BinaryMenu, grid_n: usize, tolerance: f64) -> Result<OracleReport> {
    let grid = brute_force_binary(scenario, grid_n)?;
    let ok = grid.expected_profit <= exact.expected_profit + 1e-9;
    Ok(OracleReport::new(
        format!(
            "binary_profit(v_l={}, v_h={}, phi={}, tau={}, v_s={})",
            scenario.v_low().p0(),
            scenario.v_high().p0(),
            scenario.phi(),
            scenario.cfg().tau(),
            scenario.cfg().v_s()
        ),
        exact.expected_profit,
        grid.expected_profit,
        binary_grid_gap(scenario, grid_n),
        tolerance,
    )
    .require(ok))
}

/// Best profit over monotone step menus taking `levels` equally spaced
/// values in `[-1, 1]`, with thresholds on a grid of `grid_n` points and
/// allocations integrating to zero.
///
/// Integrating to zero means the thresholds sum to `(levels - 1) / 2`, so
/// the last threshold is determined by the others.
pub fn brute_force_continuous(
    dist: &dyn TypeDistribution,
    cfg: &GameConfig,
    grid_n: usize,
    levels: usize,
) -> Result<f64> {
    if levels < 3 || levels % 2 == 0 {
        return Err(Error::InvalidParameter {
            name: "levels",
            value: levels as f64,
            reason: "must be odd and at least 3",
        });
    }
    if grid_n < 2 {
        return Err(Error::InvalidParameter {
            name: "grid_n",
            value: grid_n as f64,
            reason: "need at least two grid points",
        });
    }
    let vv = virtual_values(dist, cfg);
    let top = grid_n - 1;
    let grid: Vec<f64> = (0..grid_n).map(|k| k as f64 / top as f64).collect();
    // Antiderivatives of the virtual values: d/dv [(k + v) F(v)] = pi(v).
    let big_minus: Vec<f64> = grid.iter().map(|&v| (vv.k_minus() + v) * dist.cdf(v)).collect();
    let big_plus: Vec<f64> = grid.iter().map(|&v| (vv.k_plus() - 1.0 + v) * dist.cdf(v)).collect();
    let level: Vec<f64> = (0..levels).map(|j| -1.0 + 2.0 * j as f64 / (levels - 1) as f64).collect();
    let segment = |j: usize, a: usize, b: usize| -> f64 {
        let l = level[j];
        if l < 0.0 {
            l * (big_minus[b] - big_minus[a])
        } else if l > 0.0 {
            l * (big_plus[b] - big_plus[a])
        } else {
            0.0
        }
    };
    let n_thresholds = levels - 1;
    let target = n_thresholds * top / 2;

    // Depth-first over nondecreasing threshold indices.
    fn search<S: Fn(usize, usize, usize) -> f64>(
        segment: &S,
        idx: &mut Vec<usize>,
        n_thresholds: usize,
        remaining: usize,
        top: usize,
        acc: f64,
    ) -> f64 {
        let k = idx.len();
        let prev = if k == 0 { 0 } else { idx[k - 1] };
        let left = n_thresholds - k;
        if left == 1 {
            let last = remaining;
            if last < prev || last > top {
                return f64::NEG_INFINITY;
            }
            return acc + segment(k, prev, last) + segment(k + 1, last, top);
        }
        let mut best = f64::NEG_INFINITY;
        for a in prev..=top {
            // The rest must fit between `a` and `top`.
            if a * left > remaining {
                break;
            }
            if remaining - a > top * (left - 1) {
                continue;
            }
            idx.push(a);
            best = best.max(search(segment, idx, n_thresholds, remaining - a, top, acc + segment(k, prev, a)));
            idx.pop();
        }
        best
    }

    let best = (0..=top)
        .into_par_iter()
        .map(|a| {
            if a * n_thresholds > target || target - a > top * (n_thresholds - 1) {
                return f64::NEG_INFINITY;
            }
            let mut idx = vec![a];
            search(&segment, &mut idx, n_thresholds, target - a, top, segment(0, 0, a))
        })
        .reduce(|| f64::NEG_INFINITY, f64::max);
    let c0 = externality_cost(Informativeness::new(0.0).unwrap(), cfg);
    Ok(best - c0)
}

/// Allocation and price schedule over types in `[0, 1]`.
pub trait MenuSchedule {
    fn allocation(&self, v: f64) -> f64;
    fn transfer(&self, v: f64) -> f64;
    /// `int_0^v I(z) dz`.
    fn allocation_integral(&self, v: f64) -> f64;
    /// Types where the allocation jumps.
    fn kinks(&self) -> Vec<f64>;
}

impl MenuSchedule for StepMenu {
    fn allocation(&self, v: f64) -> f64 {
        crate::continuous::allocation(self, Belief::new(v).unwrap())
    }

    fn transfer(&self, v: f64) -> f64 {
        crate::continuous::transfer(self, Belief::new(v).unwrap())
    }

    fn allocation_integral(&self, v: f64) -> f64 {
        crate::continuous::allocation_integral(self, v)
    }

    fn kinks(&self) -> Vec<f64> {
        vec![self.v_lo, self.v_hi]
    }
}

/// A step menu whose price is shifted by `bump` on `[from, to]`.
/// Negative control for [`envelope_check`].
#[derive(Debug, Clone, Copy)]
pub struct CorruptedTransfer {
    pub menu: StepMenu,
    pub from: f64,
    pub to: f64,
    pub bump: f64,
}

impl MenuSchedule for CorruptedTransfer {
    fn allocation(&self, v: f64) -> f64 {
        self.menu.allocation(v)
    }

    fn transfer(&self, v: f64) -> f64 {
        let t = self.menu.transfer(v);
        if (self.from..=self.to).contains(&v) {
            t + self.bump
        } else {
            t
        }
    }

    fn allocation_integral(&self, v: f64) -> f64 {
        self.menu.allocation_integral(v)
    }

    fn kinks(&self) -> Vec<f64> {
        let mut k = self.menu.kinks();
        k.extend([self.from, self.to]);
        k
    }
}

fn rent_of<M: MenuSchedule + ?Sized>(menu: &M, v: f64) -> f64 {
    gain(menu.allocation(v), Belief::new(v).unwrap()) - menu.transfer(v)
}

/// Envelope condition on the rent `Delta(v) = gain(I(v), v) - t(v)`:
/// slope `I(v) + 1` below 1/2 and `I(v) - 1` above, `Delta(0) = Delta(1) = 0`.
///
/// Away from kinks and 1/2 the finite-difference slope is compared with
/// the envelope slope. Within two steps of them, where finite differences
/// straddle a jump in `I`, the rent increment is compared with the exact
/// integral of the envelope slope instead, so price jumps are caught too.
/// The estimate is the largest deviation in slope units.
pub fn envelope_check<M: MenuSchedule + ?Sized>(menu: &M, step: f64, tolerance: f64) -> Result<OracleReport> {
    if !(step > 0.0 && step < 0.5) {
        return Err(Error::InvalidParameter {
            name: "step",
            value: step,
            reason: "must lie in (0, 1/2)",
        });
    }
    let n = (1.0 / step).round() as usize;
    let h = 1.0 / n as f64;
    let mut special = menu.kinks();
    special.push(0.5);
    let near = |a: f64, b: f64| special.iter().any(|&k| k > a - 2.0 * h && k < b + 2.0 * h);
    let signed_length = |a: f64, b: f64| (b.min(0.5) - a.min(0.5)) - (b.max(0.5) - a.max(0.5));
    let mut worst: f64 = 0.0;
    let mut prev = rent_of(menu, 0.0);
    for k in 0..n {
        let (a, b) = (k as f64 * h, if k + 1 == n { 1.0 } else { (k + 1) as f64 * h });
        let next = rent_of(menu, b);
        let dev = if near(a, b) {
            let expected = menu.allocation_integral(b) - menu.allocation_integral(a) + signed_length(a, b);
            (next - prev - expected).abs() / h
        } else {
            let mid = 0.5 * (a + b);
            let slope = menu.allocation(mid) + if mid < 0.5 { 1.0 } else { -1.0 };
            ((next - prev) / h - slope).abs()
        };
        worst = worst.max(dev);
        prev = next;
    }
    worst = worst.max(rent_of(menu, 0.0).abs()).max(rent_of(menu, 1.0).abs());
    Ok(OracleReport::new("envelope", 0.0, worst, 0.0, tolerance))
}

/// Largest gain from misreporting on a `grid_n` grid of true types and
/// reports, with the misreporting type free to disobey the rule it buys.
pub fn truthfulness_check<M: MenuSchedule + Sync + ?Sized>(menu: &M, grid_n: usize, tolerance: f64) -> OracleReport {
    let n = grid_n.max(2);
    let grid: Vec<f64> = (0..n).map(|k| k as f64 / (n - 1) as f64).collect();
    let offers: Vec<(f64, f64)> = grid.iter().map(|&b| (menu.allocation(b), menu.transfer(b))).collect();
    let worst = grid
        .par_iter()
        .zip(&offers)
        .map(|(&v, &(i_v, t_v))| {
            let belief = Belief::new(v).unwrap();
            let truthful = best_response_gain(i_v, belief) - t_v;
            offers
                .iter()
                .map(|&(i_b, t_b)| best_response_gain(i_b, belief) - t_b - truthful)
                .fold(0.0, f64::max)
        })
        .reduce(|| 0.0, f64::max);
    OracleReport::new("truthfulness", 0.0, worst, 0.0, tolerance)
}
