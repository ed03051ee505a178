//! Optimal menus for a continuum of buyer types.
//!
//! With regular virtual values the seller offers at most three rules: the
//! uninformative rule obfuscating state 1 to low types, full information to
//! a middle band and the uninformative rule obfuscating state 0 to high
//! types. The thresholds come from a single multiplier on the constraint
//! that allocations integrate to zero.

use serde::{Deserialize, Serialize};

use crate::dist::TypeDistribution;
use crate::error::{Error, Result};
use crate::game::{Belief, GameConfig};
use crate::quad;
use crate::rules::{externality_cost, gain, Informativeness};

const DUAL_TOL: f64 = 1e-10;
const MAX_BISECTIONS: usize = 200;
const QUAD_TOL: f64 = 1e-13;
/// Grid used by the solver's own regularity screen.
pub const REGULARITY_GRID: usize = 1001;

/// Virtual values of raising a type's allocation below and above zero.
pub struct VirtualValues<'a> {
    dist: &'a dyn TypeDistribution,
    k_minus: f64,
    k_plus: f64,
}

impl<'a> VirtualValues<'a> {
    /// `pi_minus(v) = p(v) (k_minus + v) + F(v)`, the marginal value of `I` on `[-1, 0]`.
    pub fn pi_minus(&self, v: f64) -> f64 {
        self.dist.density(v) * (self.k_minus + v) + self.dist.cdf(v)
    }

    /// `pi_plus(v) = p(v) (k_plus - 1 + v) + F(v)`, the marginal value of `I` on `[0, 1]`.
    pub fn pi_plus(&self, v: f64) -> f64 {
        self.dist.density(v) * (self.k_plus - 1.0 + v) + self.dist.cdf(v)
    }

    pub fn k_minus(&self) -> f64 {
        self.k_minus
    }

    pub fn k_plus(&self) -> f64 {
        self.k_plus
    }
}

pub fn virtual_values<'a>(dist: &'a dyn TypeDistribution, cfg: &GameConfig) -> VirtualValues<'a> {
    let (tau, v_s) = (cfg.tau(), cfg.v_s());
    VirtualValues {
        dist,
        k_minus: tau * v_s * (1.0 - 2.0 * v_s),
        k_plus: tau * (1.0 - v_s) * (1.0 - 2.0 * v_s),
    }
}

/// Competition level `(1 - 2 v_s)^-2` above which no information is sold.
pub fn tau_prime(cfg: &GameConfig) -> f64 {
    let d = 1.0 - 2.0 * cfg.v_s();
    if d == 0.0 {
        f64::INFINITY
    } else {
        1.0 / (d * d)
    }
}

fn no_information(cfg: &GameConfig) -> bool {
    let d = 1.0 - 2.0 * cfg.v_s();
    cfg.tau() * d * d >= 1.0 - 1e-12
}

/// First grid point where either virtual value drops, with its name.
pub fn regularity_violation(dist: &dyn TypeDistribution, cfg: &GameConfig, grid_n: usize) -> Option<(f64, &'static str)> {
    let vv = virtual_values(dist, cfg);
    let n = grid_n.max(2);
    let at = |k: usize| k as f64 / (n - 1) as f64;
    let (mut prev_m, mut prev_p) = (vv.pi_minus(0.0), vv.pi_plus(0.0));
    for k in 1..n {
        let v = at(k);
        let (m, p) = (vv.pi_minus(v), vv.pi_plus(v));
        if m - prev_m < -1e-9 {
            return Some((v, "pi_minus"));
        }
        if p - prev_p < -1e-9 {
            return Some((v, "pi_plus"));
        }
        prev_m = m;
        prev_p = p;
    }
    None
}

/// Both virtual values are nondecreasing on a grid of `grid_n` points.
pub fn regularity_check(dist: &dyn TypeDistribution, cfg: &GameConfig, grid_n: usize) -> bool {
    regularity_violation(dist, cfg, grid_n).is_none()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MenuRegime {
    Screening,
    NoInformation,
}

/// Three-step menu: `I = -1` below `v_lo`, `0` on `[v_lo, v_hi]`, `+1` above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepMenu {
    pub v_lo: f64,
    pub v_hi: f64,
    pub lambda_star: f64,
    pub regime: MenuRegime,
}

impl StepMenu {
    /// Symmetric screening menu; `v_hi` is set so that `1 - v_hi == v_lo`
    /// holds exactly in floating point.
    pub fn screening(v_lo: f64, lambda_star: f64) -> Self {
        let v_lo = 1.0 - (1.0 - v_lo.clamp(0.0, 0.5));
        StepMenu {
            v_lo,
            v_hi: 1.0 - v_lo,
            lambda_star,
            regime: MenuRegime::Screening,
        }
    }

    pub fn no_information(lambda_star: f64) -> Self {
        StepMenu {
            v_lo: 0.5,
            v_hi: 0.5,
            lambda_star,
            regime: MenuRegime::NoInformation,
        }
    }

    /// Constant-allocation pieces `(from, to, I)`, empty ones dropped.
    pub fn segments(&self) -> Vec<(f64, f64, f64)> {
        [(0.0, self.v_lo, -1.0), (self.v_lo, self.v_hi, 0.0), (self.v_hi, 1.0, 1.0)]
            .into_iter()
            .filter(|s| s.1 > s.0)
            .collect()
    }
}

/// Smallest `v` in `[0, 1]` with `f(v) >= level`, for nondecreasing `f`.
fn threshold<F: Fn(f64) -> f64>(f: F, level: f64) -> f64 {
    if f(0.0) >= level {
        return 0.0;
    }
    if f(1.0) < level {
        return 1.0;
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) >= level {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn thresholds_at(vv: &VirtualValues, lambda: f64) -> (f64, f64) {
    (threshold(|v| vv.pi_minus(v), lambda), threshold(|v| vv.pi_plus(v), lambda))
}

/// Multiplier by nested bisection on `g(lambda) = v_minus + v_plus - 1`,
/// where `pi_minus(v_minus) = lambda = pi_plus(v_plus)`.
/// Returns `(lambda, v_minus, v_plus)`.
pub fn dual_by_bisection(dist: &dyn TypeDistribution, cfg: &GameConfig) -> Result<(f64, f64, f64)> {
    let vv = virtual_values(dist, cfg);
    let ends = [vv.pi_minus(0.0), vv.pi_plus(0.0), vv.pi_minus(1.0), vv.pi_plus(1.0)];
    let mut lo = ends.iter().cloned().fold(f64::INFINITY, f64::min) - 1.0;
    let mut hi = ends.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 1.0;
    let g = |lambda: f64| {
        let (a, b) = thresholds_at(&vv, lambda);
        a + b - 1.0
    };
    let (g_lo, g_hi) = (g(lo), g(hi));
    if !(g_lo < 0.0 && g_hi > 0.0) {
        return Err(Error::NotBracketed { lo, hi, g_lo, g_hi });
    }
    for _ in 0..MAX_BISECTIONS {
        let mid = 0.5 * (lo + hi);
        let gm = g(mid);
        if gm.abs() <= DUAL_TOL {
            lo = mid;
            hi = mid;
            break;
        }
        if gm < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi.abs().max(1.0) {
            break;
        }
    }
    let lambda = 0.5 * (lo + hi);
    let (a, b) = thresholds_at(&vv, lambda);
    Ok((lambda, a, b))
}

/// `lambda* = (pi_minus(1/2) + pi_plus(1/2)) / 2`, exact for the uniform law.
pub fn lambda_closed_form(dist: &dyn TypeDistribution, cfg: &GameConfig) -> f64 {
    let vv = virtual_values(dist, cfg);
    0.5 * (vv.pi_minus(0.5) + vv.pi_plus(0.5))
}

/// Profit-maximizing step menu.
///
/// Above the competition level [`tau_prime`] every type gets an
/// uninformative rule matching its prior action. Otherwise the multiplier
/// is found by bisection, or in closed form for the uniform law.
pub fn solve_dual(dist: &dyn TypeDistribution, cfg: &GameConfig) -> Result<StepMenu> {
    if let Some((at, which)) = regularity_violation(dist, cfg, REGULARITY_GRID) {
        return Err(Error::Irregular { at, which });
    }
    let vv = virtual_values(dist, cfg);
    if no_information(cfg) {
        return Ok(StepMenu::no_information(vv.pi_plus(0.5)));
    }
    if dist.is_uniform() {
        let lambda = lambda_closed_form(dist, cfg);
        let v_lo = (lambda - vv.k_minus()) / 2.0;
        return Ok(StepMenu::screening(v_lo, lambda));
    }
    let (lambda, v_minus, _) = dual_by_bisection(dist, cfg)?;
    Ok(StepMenu::screening(v_minus, lambda))
}

/// `I*(v)`; types exactly at a threshold get the more informative rule.
pub fn allocation(menu: &StepMenu, v_b: Belief) -> f64 {
    let v = v_b.p0();
    match menu.regime {
        MenuRegime::NoInformation => {
            if v <= 0.5 {
                -1.0
            } else {
                1.0
            }
        }
        MenuRegime::Screening => {
            if v < menu.v_lo {
                -1.0
            } else if v <= menu.v_hi {
                0.0
            } else {
                1.0
            }
        }
    }
}

/// `int_0^v I*(z) dz`, in closed form.
pub fn allocation_integral(menu: &StepMenu, v: f64) -> f64 {
    let v = v.clamp(0.0, 1.0);
    let below = v.min(menu.v_lo);
    let above = (v - menu.v_hi).max(0.0);
    above - below
}

/// Price from the envelope condition:
/// `t(v) = I(v) (v - 1{I >= 0}) - int_0^v I(z) dz`.
pub fn transfer(menu: &StepMenu, v_b: Belief) -> f64 {
    segment_transfer(menu, v_b.p0(), allocation(menu, v_b))
}

fn segment_transfer(menu: &StepMenu, v: f64, i: f64) -> f64 {
    let indicator = if i >= 0.0 { 1.0 } else { 0.0 };
    let t = i * (v - indicator) - allocation_integral(menu, v);
    // Round-off can push a zero price a hair below zero.
    if t < 0.0 && t > -1e-15 {
        0.0
    } else {
        t
    }
}

/// Information rent `gain(I*(v), v) - t(v)`.
pub fn rent(menu: &StepMenu, v_b: Belief) -> f64 {
    gain(allocation(menu, v_b), v_b) - transfer(menu, v_b)
}

fn cost(i: f64, cfg: &GameConfig) -> f64 {
    externality_cost(Informativeness::new(i).expect("step allocations lie in [-1, 1]"), cfg)
}

/// Expected profit `E[t - c(I)]`, computed as the integral of the virtual
/// surplus `I(v) pi(v)` over the constant segments minus `c(0)`.
pub fn expected_profit(menu: &StepMenu, dist: &dyn TypeDistribution, cfg: &GameConfig) -> Result<f64> {
    let vv = virtual_values(dist, cfg);
    let mut total = -cost(0.0, cfg);
    for (a, b, i) in menu.segments() {
        if i < 0.0 {
            total -= quad::integrate(|v| vv.pi_minus(v), a, b, QUAD_TOL)?;
        } else if i > 0.0 {
            total += quad::integrate(|v| vv.pi_plus(v), a, b, QUAD_TOL)?;
        }
    }
    Ok(total)
}

/// `E[t(v) - c(I(v))]` integrated directly from prices and costs.
pub fn expected_profit_direct(menu: &StepMenu, dist: &dyn TypeDistribution, cfg: &GameConfig) -> Result<f64> {
    let mut total = 0.0;
    for (a, b, i) in menu.segments() {
        let c = cost(i, cfg);
        total += quad::integrate(
            |v| (segment_transfer(menu, v, i) - c) * dist.density(v),
            a,
            b,
            QUAD_TOL,
        )?;
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Baselines {
    pub versioning: f64,
    pub full_info: f64,
    pub no_info: f64,
}

/// Profit of the optimal menu against giving full information away and
/// staying silent.
pub fn profit_baselines(dist: &dyn TypeDistribution, cfg: &GameConfig) -> Result<Baselines> {
    let menu = solve_dual(dist, cfg)?;
    let (tau, v_s) = (cfg.tau(), cfg.v_s());
    let f_half = dist.cdf(0.5);
    Ok(Baselines {
        versioning: expected_profit(&menu, dist, cfg)?,
        full_info: -cost(0.0, cfg),
        no_info: -tau * (v_s * (1.0 - f_half) + (1.0 - v_s) * f_half),
    })
}
