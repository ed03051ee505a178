//! Optimal menus for a market with two buyer types.
//!
//! The seller offers each type a concentrated rule and a price, and
//! maximizes `phi (t_h - c_h) + (1 - phi)(t_l - c_l)` subject to individual
//! rationality and incentive compatibility for both types, with allocations
//! kept inside each type's feasible band.
//!
//! Gains and costs are affine in the allocation on each side of zero, so on
//! each of the four sign orthants of `(I_l, I_h)` the program is a linear
//! program in `(I_l, I_h, t_l, t_h)`. [`solve`] enumerates the vertices of
//! all four and keeps the best, which makes it exact.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::game::{Belief, GameConfig};
use crate::lp::{vertices, Halfspace};
use crate::rules::{externality_cost, feasible_band, gain, FeasibleBand, Informativeness};

/// Profit ties closer than this are broken by informativeness.
const TIE_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryScenario {
    v_low: Belief,
    v_high: Belief,
    phi: f64,
    cfg: GameConfig,
}

impl BinaryScenario {
    /// `v_low` is the more precise type (further from 1/2) and `phi` the
    /// probability of the high type.
    pub fn new(v_low: f64, v_high: f64, phi: f64, cfg: GameConfig) -> Result<Self> {
        let v_low = Belief::new(v_low)?;
        let v_high = Belief::new(v_high)?;
        check_probability("phi", phi)?;
        if v_high.p0() == 0.5 {
            return Err(Error::InvalidParameter {
                name: "v_high",
                value: 0.5,
                reason: "the high type must hold a strict prior action",
            });
        }
        if (v_high.p0() - 0.5).abs() >= (v_low.p0() - 0.5).abs() {
            return Err(Error::InvalidParameter {
                name: "v_low",
                value: v_low.p0(),
                reason: "the low type must be strictly more precise than the high type",
            });
        }
        Ok(BinaryScenario {
            v_low,
            v_high,
            phi,
            cfg,
        })
    }

    pub fn v_low(&self) -> Belief {
        self.v_low
    }

    pub fn v_high(&self) -> Belief {
        self.v_high
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }

    pub fn cfg(&self) -> &GameConfig {
        &self.cfg
    }

    pub fn with_cfg(&self, cfg: GameConfig) -> Self {
        BinaryScenario { cfg, ..*self }
    }

    pub fn with_phi(&self, phi: f64) -> Result<Self> {
        BinaryScenario::new(self.v_low.p0(), self.v_high.p0(), phi, self.cfg)
    }

    /// Swap the state labels so that the high type prefers action 0.
    fn normalized(&self) -> (BinaryScenario, bool) {
        if self.v_high.p0() > 0.5 {
            (*self, false)
        } else {
            let cfg = GameConfig::new(self.cfg.tau(), 1.0 - self.cfg.v_s())
                .expect("reflected belief stays in range");
            (
                BinaryScenario {
                    v_low: self.v_low.reflect(),
                    v_high: self.v_high.reflect(),
                    phi: self.phi,
                    cfg,
                },
                true,
            )
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Congruence {
    /// Both types take the same action without extra information.
    Congruent,
    /// The types take different actions without extra information.
    Noncongruent,
}

/// Classify a type pair by the actions they take on their priors.
pub fn classify_types(v_low: f64, v_high: f64) -> Result<Congruence> {
    if v_low == 0.5 || v_high == 0.5 {
        return Err(Error::Unclassifiable);
    }
    if (v_low > 0.5) == (v_high > 0.5) {
        Ok(Congruence::Congruent)
    } else {
        Ok(Congruence::Noncongruent)
    }
}

pub fn classify(scenario: &BinaryScenario) -> Result<Congruence> {
    classify_types(scenario.v_low.p0(), scenario.v_high.p0())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BinaryMenu {
    pub i_low: f64,
    pub i_high: f64,
    pub t_low: f64,
    pub t_high: f64,
    pub expected_profit: f64,
}

/// Expected profit of allocations and transfers under `scenario`.
pub fn menu_profit(scenario: &BinaryScenario, i_low: f64, i_high: f64, t_low: f64, t_high: f64) -> f64 {
    let cost = |i: f64| externality_cost(Informativeness::new(i.clamp(-1.0, 1.0)).unwrap(), &scenario.cfg);
    scenario.phi * (t_high - cost(i_high)) + (1.0 - scenario.phi) * (t_low - cost(i_low))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Side {
    Neg,
    Pos,
}

/// Affine piece `value(I) = at_zero + slope * I` on one side of zero.
#[derive(Debug, Clone, Copy)]
struct Piece {
    at_zero: f64,
    slope: f64,
}

fn gain_piece(v: Belief, side: Side) -> Piece {
    let at_zero = gain(0.0, v);
    let slope = match side {
        Side::Pos => gain(1.0, v) - at_zero,
        Side::Neg => at_zero - gain(-1.0, v),
    };
    Piece { at_zero, slope }
}

fn cost_piece(cfg: &GameConfig, side: Side) -> Piece {
    let c = |i: f64| externality_cost(Informativeness::new(i).unwrap(), cfg);
    let at_zero = c(0.0);
    let slope = match side {
        Side::Pos => c(1.0) - at_zero,
        Side::Neg => at_zero - c(-1.0),
    };
    Piece { at_zero, slope }
}

fn side_bounds(band: FeasibleBand, side: Side) -> (f64, f64) {
    match side {
        Side::Neg => (band.lo, band.hi.min(0.0)),
        Side::Pos => (band.lo.max(0.0), band.hi),
    }
}

/// Candidate menus at the vertices of one sign orthant.
/// Variables are `x = [I_l, I_h, t_l, t_h]`.
fn orthant_candidates(s: &BinaryScenario, side_l: Side, side_h: Side) -> Vec<[f64; 4]> {
    let (vl, vh) = (s.v_low, s.v_high);
    let (lo_l, hi_l) = side_bounds(feasible_band(vl), side_l);
    let (lo_h, hi_h) = side_bounds(feasible_band(vh), side_h);

    // Each type's value of its own rule and of the other type's rule.
    let gl_own = gain_piece(vl, side_l);
    let gl_other = gain_piece(vl, side_h);
    let gh_own = gain_piece(vh, side_h);
    let gh_other = gain_piece(vh, side_l);

    let cs = [
        Halfspace::new([-1.0, 0.0, 0.0, 0.0], -lo_l),
        Halfspace::new([1.0, 0.0, 0.0, 0.0], hi_l),
        Halfspace::new([0.0, -1.0, 0.0, 0.0], -lo_h),
        Halfspace::new([0.0, 1.0, 0.0, 0.0], hi_h),
        Halfspace::new([0.0, 0.0, -1.0, 0.0], 0.0),
        Halfspace::new([0.0, 0.0, 0.0, -1.0], 0.0),
        // Participation: t_k <= gain_k(I_k).
        Halfspace::new([-gl_own.slope, 0.0, 1.0, 0.0], gl_own.at_zero),
        Halfspace::new([0.0, -gh_own.slope, 0.0, 1.0], gh_own.at_zero),
        // Truthfulness: gain_k(I_k) - t_k >= gain_k(I_k') - t_k'.
        Halfspace::new(
            [-gl_own.slope, gl_other.slope, 1.0, -1.0],
            gl_own.at_zero - gl_other.at_zero,
        ),
        Halfspace::new(
            [gh_other.slope, -gh_own.slope, -1.0, 1.0],
            gh_own.at_zero - gh_other.at_zero,
        ),
    ];
    if lo_l > hi_l || lo_h > hi_h {
        return Vec::new();
    }
    vertices(&cs)
}

fn profit_of(s: &BinaryScenario, x: &[f64; 4], side_l: Side, side_h: Side) -> f64 {
    let cl = cost_piece(&s.cfg, side_l);
    let ch = cost_piece(&s.cfg, side_h);
    s.phi * (x[3] - ch.at_zero - ch.slope * x[1])
        + (1.0 - s.phi) * (x[2] - cl.at_zero - cl.slope * x[0])
}

fn snap(i: f64, band: FeasibleBand) -> f64 {
    for target in [0.0, band.lo, band.hi] {
        if (i - target).abs() < 1e-12 {
            return target;
        }
    }
    i.clamp(band.lo, band.hi)
}

fn best_over(s: &BinaryScenario, orthants: &[(Side, Side)]) -> Result<BinaryMenu> {
    let mut best: Option<([f64; 4], f64)> = None;
    for &(side_l, side_h) in orthants {
        for x in orthant_candidates(s, side_l, side_h) {
            let p = profit_of(s, &x, side_l, side_h);
            best = match best {
                None => Some((x, p)),
                Some((y, q)) => {
                    let key = |z: &[f64; 4]| (z[1].abs(), z[0].abs());
                    if p > q + TIE_EPS || (p >= q - TIE_EPS && key(&x) < key(&y)) {
                        Some((x, p))
                    } else {
                        Some((y, q))
                    }
                }
            };
        }
    }
    let (x, _) = best.ok_or(Error::InfeasibleScenario)?;
    let i_low = snap(x[0], feasible_band(s.v_low));
    let i_high = snap(x[1], feasible_band(s.v_high));
    let t_low = x[2].max(0.0);
    let t_high = x[3].max(0.0);
    Ok(BinaryMenu {
        i_low,
        i_high,
        t_low,
        t_high,
        expected_profit: menu_profit(s, i_low, i_high, t_low, t_high),
    })
}

const ALL_ORTHANTS: [(Side, Side); 4] = [
    (Side::Neg, Side::Neg),
    (Side::Neg, Side::Pos),
    (Side::Pos, Side::Neg),
    (Side::Pos, Side::Pos),
];

/// Exact profit-maximizing menu over all feasible allocations.
///
/// Among menus with equal profit the one giving the high type, then the low
/// type, the smaller `|I|` is returned.
pub fn solve(scenario: &BinaryScenario) -> Result<BinaryMenu> {
    best_over(scenario, &ALL_ORTHANTS)
}

/// Optimum when allocations are confined to the sign pattern of the
/// textbook screening argument: both `I >= 0` for congruent types, and
/// `I_l <= 0 <= I_h` for noncongruent types (after normalizing the high
/// type to prefer action 0).
///
/// Agrees with [`solve`] whenever the seller's belief leans away from the
/// types' shared action; when it leans toward it, [`solve`] can do strictly
/// better by selling obedient rules that obfuscate the other state.
pub fn solve_restricted(scenario: &BinaryScenario) -> Result<BinaryMenu> {
    let (norm, flipped) = scenario.normalized();
    let orthant = match classify(&norm)? {
        Congruence::Congruent => (Side::Pos, Side::Pos),
        Congruence::Noncongruent => (Side::Neg, Side::Pos),
    };
    let menu = best_over(&norm, &[orthant])?;
    Ok(if flipped {
        BinaryMenu {
            i_low: -menu.i_low,
            i_high: -menu.i_high,
            ..menu
        }
    } else {
        menu
    })
}

/// Closed-form competition thresholds at which the allocations switch.
/// `+inf` where the closed form's denominator vanishes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Boundaries {
    pub tau_low: f64,
    pub tau_high: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        f64::INFINITY
    } else {
        num / den
    }
}

pub fn boundaries(scenario: &BinaryScenario) -> Result<Boundaries> {
    let (s, _) = scenario.normalized();
    let (vl, vh, phi, v_s) = (s.v_low.p0(), s.v_high.p0(), s.phi, s.cfg.v_s());
    Ok(match classify(&s)? {
        Congruence::Congruent => Boundaries {
            tau_low: ratio(
                (1.0 - vl) - phi * (1.0 - vh),
                (1.0 - phi) * (v_s - 1.0) * (2.0 * v_s - 1.0),
            ),
            tau_high: ratio(1.0 - vh, (v_s - 1.0) * (2.0 * v_s - 1.0)),
        },
        Congruence::Noncongruent => Boundaries {
            tau_low: ratio(vl, v_s * (2.0 * v_s - 1.0)),
            tau_high: ratio(1.0 - vh, (1.0 - v_s) * (1.0 - 2.0 * v_s)),
        },
    })
}

/// Allocation offered to the low type of a noncongruent pair at which the
/// high type is exactly indifferent between the two offers when both pay
/// their full valuation: `(2 v_h - 1) / (v_h - v_l) - 1`.
pub fn noncongruent_partial_allocation(scenario: &BinaryScenario) -> Result<f64> {
    let (s, flipped) = scenario.normalized();
    if classify(&s)? != Congruence::Noncongruent {
        return Err(Error::InvalidParameter {
            name: "v_low",
            value: scenario.v_low.p0(),
            reason: "partial allocation is defined for noncongruent types only",
        });
    }
    let (vl, vh) = (s.v_low.p0(), s.v_high.p0());
    let i = (2.0 * vh - 1.0) / (vh - vl) - 1.0;
    Ok(if flipped { -i } else { i })
}

/// What a single type receives.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Offer {
    /// The fully informative rule.
    Full,
    /// A rule worth nothing to this type.
    None,
    /// Anything in between.
    Partial,
}

impl Offer {
    pub fn of(i: f64, v: Belief) -> Offer {
        if i == 0.0 {
            Offer::Full
        } else if gain(i, v) <= 1e-12 {
            Offer::None
        } else {
            Offer::Partial
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Offer::Full => "full",
            Offer::None => "none",
            Offer::Partial => "partial",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Regime {
    pub low: Offer,
    pub high: Offer,
}

impl Regime {
    pub fn of(scenario: &BinaryScenario, menu: &BinaryMenu) -> Regime {
        Regime {
            low: Offer::of(menu.i_low, scenario.v_low),
            high: Offer::of(menu.i_high, scenario.v_high),
        }
    }

    /// `low-high`, e.g. `none-full`.
    pub fn label(&self) -> String {
        format!("{}-{}", self.low.label(), self.high.label())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridCell {
    pub v_s: f64,
    pub tau: f64,
    pub menu: BinaryMenu,
    pub regime: Regime,
}

/// Solve the template scenario at every `(v_s, tau)` pair, row-major in `v_s`.
pub fn boundary_grid(template: &BinaryScenario, v_s_grid: &[f64], tau_grid: &[f64]) -> Result<Vec<GridCell>> {
    if v_s_grid.is_empty() || tau_grid.is_empty() {
        return Err(Error::InvalidParameter {
            name: "grid length",
            value: 0.0,
            reason: "grids must be nonempty",
        });
    }
    let cells: Vec<(f64, f64)> = v_s_grid
        .iter()
        .flat_map(|&v| tau_grid.iter().map(move |&t| (v, t)))
        .collect();
    cells
        .into_par_iter()
        .map(|(v_s, tau)| {
            let scenario = template.with_cfg(GameConfig::new(tau, v_s)?);
            let menu = solve(&scenario)?;
            Ok(GridCell {
                v_s,
                tau,
                menu,
                regime: Regime::of(&scenario, &menu),
            })
        })
        .collect()
}
