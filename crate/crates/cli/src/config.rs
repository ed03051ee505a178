//! Scenario files.
//!
//! ```toml
//! [game]
//! tau = 0.0
//! seller_belief = 0.0
//!
//! [buyer.binary]
//! v_low = 0.8333333333333334
//! v_high = 0.6666666666666666
//! phi = 0.3333333333333333
//!
//! [[sweep]]
//! axis = "tau"
//! from = 0.0
//! to = 1.0
//! steps = 101
//!
//! [mc]
//! samples = 1000000
//! seed = 7
//! ```
//!
//! A continuous buyer replaces `[buyer.binary]` with `[buyer.continuous]`,
//! whose `family` key picks the distribution (`uniform`, `linear`,
//! `truncated_exponential`, `truncated_normal`, `mixture`, `bimodal`).

use std::path::Path;

use infomenu_core::binary::BinaryScenario;
use infomenu_core::dist::DistributionSpec;
use infomenu_core::game::GameConfig;
use infomenu_core::oracle::McConfig;
use serde::Deserialize;

use crate::CliError;

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub game: GameSection,
    pub buyer: BuyerSection,
    #[serde(default)]
    pub sweep: Vec<Sweep>,
    pub mc: Option<McSection>,
    pub continuous: Option<ContinuousSection>,
    pub verify: Option<VerifySection>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GameSection {
    pub tau: f64,
    pub seller_belief: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BuyerSection {
    pub binary: Option<BinaryBuyer>,
    pub continuous: Option<DistributionSpec>,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BinaryBuyer {
    pub v_low: f64,
    pub v_high: f64,
    pub phi: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
pub enum Axis {
    #[serde(rename = "tau")]
    Tau,
    #[serde(rename = "v_s")]
    SellerBelief,
    #[serde(rename = "phi")]
    Phi,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

impl Sweep {
    /// `steps` evenly spaced values from `from` to `to` inclusive.
    pub fn values(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.from];
        }
        let last = self.steps - 1;
        (0..self.steps)
            .map(|k| {
                if k == last {
                    self.to
                } else {
                    self.from + (self.to - self.from) * k as f64 / last as f64
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McSection {
    pub samples: u64,
    pub seed: u64,
}

#[derive(Debug, Clone, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ContinuousSection {
    /// Extra menus at these multiples of the competition threshold.
    #[serde(default)]
    pub tau_prime_fractions: Vec<f64>,
    pub surplus: Option<SurplusSection>,
}

/// Virtual surplus of one type as a function of its allocation.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SurplusSection {
    pub belief: f64,
    pub seller_beliefs: Vec<f64>,
    pub taus: Vec<f64>,
    #[serde(default = "default_surplus_points")]
    pub points: usize,
}

fn default_surplus_points() -> usize {
    201
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifySection {
    /// Shift the price on one menu segment by this much before checking.
    pub corrupt_transfer: Option<f64>,
}

pub enum Buyer {
    Binary(BinaryScenario),
    Continuous(DistributionSpec),
}

impl ScenarioFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let file: ScenarioFile =
            toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        file.check()?;
        Ok(file)
    }

    fn check(&self) -> Result<(), CliError> {
        match (&self.buyer.binary, &self.buyer.continuous) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => {
                return Err(CliError::Config(
                    "exactly one of [buyer.binary] and [buyer.continuous] must be present".into(),
                ))
            }
        }
        for (k, s) in self.sweep.iter().enumerate() {
            if s.steps == 0 || !s.from.is_finite() || !s.to.is_finite() {
                return Err(CliError::Config(format!("sweep #{k}: steps must be positive and bounds finite")));
            }
            if self.sweep[..k].iter().any(|t| t.axis == s.axis) {
                return Err(CliError::Config(format!("sweep #{k}: axis {:?} repeated", s.axis)));
            }
        }
        if self.buyer.continuous.is_some() && self.sweep.iter().any(|s| s.axis != Axis::Tau) {
            return Err(CliError::Config("continuous scenarios sweep tau only".into()));
        }
        Ok(())
    }

    pub fn game(&self) -> Result<GameConfig, CliError> {
        Ok(GameConfig::new(self.game.tau, self.game.seller_belief)?)
    }

    pub fn buyer(&self) -> Result<Buyer, CliError> {
        match (&self.buyer.binary, &self.buyer.continuous) {
            (Some(b), _) => Ok(Buyer::Binary(BinaryScenario::new(b.v_low, b.v_high, b.phi, self.game()?)?)),
            (_, Some(d)) => Ok(Buyer::Continuous(d.clone())),
            (None, None) => unreachable!("checked on load"),
        }
    }

    pub fn sweep(&self, axis: Axis) -> Option<&Sweep> {
        self.sweep.iter().find(|s| s.axis == axis)
    }

    pub fn mc(&self, samples: Option<u64>, seed: Option<u64>) -> Result<McConfig, CliError> {
        let base = self.mc.unwrap_or(McSection {
            samples: 1_000_000,
            seed: 1,
        });
        Ok(McConfig::new(samples.unwrap_or(base.samples), seed.unwrap_or(base.seed))?)
    }
}
