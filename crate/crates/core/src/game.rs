//! The binary competitive game: payoffs, Bernoulli beliefs, Bayesian
//! updating and the dominant strategy.
//!
//! Beliefs are always stored as the probability of state `X = 0`.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};

/// Binary state of the world.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum State {
    Zero,
    One,
}

/// Binary action. A player wants their action to match the state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Zero,
    One,
}

impl State {
    pub const ALL: [State; 2] = [State::Zero, State::One];

    pub fn index(self) -> usize {
        match self {
            State::Zero => 0,
            State::One => 1,
        }
    }
}

impl Action {
    pub const ALL: [Action; 2] = [Action::Zero, Action::One];

    pub fn index(self) -> usize {
        match self {
            Action::Zero => 0,
            Action::One => 1,
        }
    }

    /// Whether playing this action matches state `x`.
    pub fn matches(self, x: State) -> bool {
        self.index() == x.index()
    }
}

/// A Bernoulli belief, `p0 = P(X = 0)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Belief(f64);

impl Belief {
    pub fn new(p0: f64) -> Result<Self> {
        check_probability("belief", p0).map(Belief)
    }

    pub fn p0(self) -> f64 {
        self.0
    }

    pub fn p1(self) -> f64 {
        1.0 - self.0
    }

    /// Probability mass of state `x`.
    pub fn mass(self, x: State) -> f64 {
        match x {
            State::Zero => self.0,
            State::One => 1.0 - self.0,
        }
    }

    /// Belief with the state labels swapped.
    pub fn reflect(self) -> Belief {
        Belief(1.0 - self.0)
    }
}

/// Competition intensity and the seller's belief.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GameConfig {
    tau: f64,
    seller_belief: Belief,
}

impl GameConfig {
    pub fn new(tau: f64, seller_belief: f64) -> Result<Self> {
        if !(tau >= 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter {
                name: "tau",
                value: tau,
                reason: "competition intensity must be finite and nonnegative",
            });
        }
        Ok(GameConfig {
            tau,
            seller_belief: Belief::new(seller_belief)?,
        })
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    /// The seller's belief `v_s`.
    pub fn seller(&self) -> Belief {
        self.seller_belief
    }

    pub fn v_s(&self) -> f64 {
        self.seller_belief.p0()
    }

    pub fn with_tau(&self, tau: f64) -> Result<Self> {
        GameConfig::new(tau, self.v_s())
    }

    pub fn with_seller_belief(&self, v_s: f64) -> Result<Self> {
        GameConfig::new(self.tau, v_s)
    }
}

/// Own-action part of the payoff: one if the action matches the state.
pub fn own_payoff(a_self: Action, x: State) -> f64 {
    if a_self.matches(x) {
        1.0
    } else {
        0.0
    }
}

/// Rival part of the payoff: `-tau` whenever the other player matches the state.
pub fn rival_penalty(a_other: Action, x: State, tau: f64) -> f64 {
    if a_other.matches(x) {
        -tau
    } else {
        0.0
    }
}

/// Ex-post payoff `1{a_self = x} - tau * 1{a_other = x}`.
pub fn utility(a_self: Action, a_other: Action, x: State, tau: f64) -> f64 {
    own_payoff(a_self, x) + rival_penalty(a_other, x, tau)
}

/// Bayes update of `prior` after evidence with likelihoods
/// `lik0 = P(e | X=0)` and `lik1 = P(e | X=1)`.
pub fn posterior_update(prior: Belief, lik0: f64, lik1: f64) -> Result<Belief> {
    check_probability("lik0", lik0)?;
    check_probability("lik1", lik1)?;
    let joint0 = lik0 * prior.p0();
    let evidence = joint0 + lik1 * prior.p1();
    if evidence <= 0.0 {
        return Err(Error::ZeroProbabilityMessage);
    }
    Ok(Belief((joint0 / evidence).clamp(0.0, 1.0)))
}

/// Dominant strategy: play 1 iff `P(X=0) < 1/2`. A tie plays 0.
pub fn strategy(belief: Belief) -> Action {
    if belief.p0() < 0.5 {
        Action::One
    } else {
        Action::Zero
    }
}

/// Expected own payoff when acting on `v_b` alone: `max(v_b, 1 - v_b)`.
pub fn no_info_value(v_b: Belief) -> f64 {
    v_b.p0().max(v_b.p1())
}
