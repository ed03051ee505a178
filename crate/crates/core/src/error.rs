use thiserror::Error;

/// Errors raised by the solvers and oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("message has zero probability under the given belief")]
    ZeroProbabilityMessage,
    #[error("type pair cannot be classified: a belief sits exactly at 1/2")]
    Unclassifiable,
    #[error("no feasible menu found for the binary scenario")]
    InfeasibleScenario,
    #[error("virtual values are decreasing near v_b = {at} ({which})")]
    Irregular { at: f64, which: &'static str },
    #[error("distribution `{name}` is inconsistent: {reason}")]
    InvalidDistribution { name: String, reason: String },
    #[error("dual bisection failed to bracket a root: g({lo}) = {g_lo}, g({hi}) = {g_hi}")]
    NotBracketed { lo: f64, hi: f64, g_lo: f64, g_hi: f64 },
    #[error("adaptive quadrature did not converge on [{a}, {b}]")]
    QuadratureDiverged { a: f64, b: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_probability(name: &'static str, value: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&value) {
        Ok(value)
    } else {
        Err(Error::InvalidParameter {
            name,
            value,
            reason: "must lie in [0, 1]",
        })
    }
}
