//! Communication rules sold by the seller.
//!
//! A direct rule sends one of two messages, `m0` recommending action 0 and
//! `m1` recommending action 1. Rules that reveal at least one state with
//! certainty are described by a single informativeness scalar
//! `I = P(m0 | X=0) - P(m1 | X=1)` in `[-1, 1]`: `I = 0` reveals the state,
//! `I = +-1` reveals nothing.

use serde::{Deserialize, Serialize};

use crate::error::{check_probability, Error, Result};
use crate::game::{no_info_value, posterior_update, Action, Belief, GameConfig, State};

/// Slack allowed on `i0 + i1 >= 1` for rules built from rounded inputs.
const DIRECTNESS_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Message {
    M0,
    M1,
}

impl Message {
    pub const ALL: [Message; 2] = [Message::M0, Message::M1];

    /// The action this message recommends.
    pub fn recommended(self) -> Action {
        match self {
            Message::M0 => Action::Zero,
            Message::M1 => Action::One,
        }
    }
}

/// Scalar informativeness of a concentrated direct rule.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct Informativeness(f64);

impl Informativeness {
    pub fn new(value: f64) -> Result<Self> {
        if (-1.0..=1.0).contains(&value) {
            Ok(Informativeness(value))
        } else {
            Err(Error::InvalidParameter {
                name: "informativeness",
                value,
                reason: "must lie in [-1, 1]",
            })
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    pub const FULL: Informativeness = Informativeness(0.0);
}

/// Two-message rule `(i0, i1) = (P(m0 | X=0), P(m1 | X=1))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectRule {
    i0: f64,
    i1: f64,
}

impl DirectRule {
    pub fn new(i0: f64, i1: f64) -> Result<Self> {
        check_probability("i0", i0)?;
        check_probability("i1", i1)?;
        if i0 + i1 < 1.0 - DIRECTNESS_SLACK {
            return Err(Error::InvalidParameter {
                name: "i0 + i1",
                value: i0 + i1,
                reason: "a direct rule needs i0 + i1 >= 1",
            });
        }
        Ok(DirectRule { i0, i1 })
    }

    pub fn i0(&self) -> f64 {
        self.i0
    }

    pub fn i1(&self) -> f64 {
        self.i1
    }

    /// `P(m | X = x)`.
    pub fn likelihood(&self, m: Message, x: State) -> f64 {
        match (m, x) {
            (Message::M0, State::Zero) => self.i0,
            (Message::M1, State::Zero) => 1.0 - self.i0,
            (Message::M0, State::One) => 1.0 - self.i1,
            (Message::M1, State::One) => self.i1,
        }
    }
}

/// Concentrated rule with the given informativeness: `I >= 0` reveals
/// `X = 0` with certainty (`i0 = 1`), `I < 0` reveals `X = 1` (`i1 = 1`).
pub fn concentrate(info: Informativeness) -> DirectRule {
    let i = info.value();
    if i >= 0.0 {
        DirectRule { i0: 1.0, i1: 1.0 - i }
    } else {
        DirectRule { i0: 1.0 + i, i1: 1.0 }
    }
}

pub fn informativeness(rule: &DirectRule) -> Informativeness {
    Informativeness((rule.i0 - rule.i1).clamp(-1.0, 1.0))
}

/// `(P(m0), P(m1))` for a holder of `belief`.
pub fn message_marginal(rule: &DirectRule, belief: Belief) -> (f64, f64) {
    let p1 = belief.p0() * (1.0 - rule.i0) + belief.p1() * rule.i1;
    (1.0 - p1, p1)
}

/// Posterior `P(X=0 | m)` of a holder of `belief`.
pub fn message_posterior(rule: &DirectRule, belief: Belief, m: Message) -> Result<Belief> {
    posterior_update(
        belief,
        rule.likelihood(m, State::Zero),
        rule.likelihood(m, State::One),
    )
}

/// Interval of informativeness values a type can be sold without
/// making the recommendations disobeyed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeasibleBand {
    pub lo: f64,
    pub hi: f64,
}

impl FeasibleBand {
    pub fn contains(&self, i: f64) -> bool {
        i >= self.lo && i <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

pub fn feasible_band(v_b: Belief) -> FeasibleBand {
    let v = v_b.p0();
    if v <= 0.5 {
        FeasibleBand {
            lo: -1.0,
            hi: if v == 0.5 { 1.0 } else { v / (1.0 - v) },
        }
    } else {
        FeasibleBand {
            lo: -(1.0 - v) / v,
            hi: 1.0,
        }
    }
}

/// Buyer's gain from following the concentrated rule with informativeness
/// `i`, relative to acting on `v_b` alone:
/// `1 - max(v_b, 1 - v_b) - i (1{i >= 0} - v_b)`.
///
/// Defined on all of `[-1, 1]`; outside the feasible band it can be negative.
pub fn gain(i: f64, v_b: Belief) -> f64 {
    let v = v_b.p0();
    let indicator = if i >= 0.0 { 1.0 } else { 0.0 };
    1.0 - no_info_value(v_b) - i * (indicator - v)
}

/// Seller's expected externality when the buyer obeys `concentrate(i)`:
/// `tau [v_s P(m0; v_s) + (1 - v_s) P(m1; v_s)]`, with the message marginal
/// taken under the seller's belief.
pub fn externality_cost(i: Informativeness, cfg: &GameConfig) -> f64 {
    let rule = concentrate(i);
    let (p_m0, p_m1) = message_marginal(&rule, cfg.seller());
    let v_s = cfg.v_s();
    cfg.tau() * (v_s * p_m0 + (1.0 - v_s) * p_m1)
}

/// Both recommendations are followed by a holder of `v_b`: the posterior
/// after `m0` is at least 1/2 and after `m1` at most 1/2. Compared on
/// unnormalized posteriors so zero-probability messages pass.
pub fn obedience_check(rule: &DirectRule, v_b: Belief) -> bool {
    let v = v_b.p0();
    let m0_ok = rule.i0 * v >= (1.0 - rule.i1) * (1.0 - v);
    let m1_ok = (1.0 - rule.i0) * v <= rule.i1 * (1.0 - v);
    m0_ok && m1_ok
}

/// A rule with any number of messages, as rows `[P(m | X=0), P(m | X=1)]`.
#[derive(Debug, Clone, PartialEq)]
pub struct LikelihoodTable {
    rows: Vec<[f64; 2]>,
}

impl LikelihoodTable {
    /// Columns must each sum to one.
    pub fn new(rows: Vec<[f64; 2]>) -> Result<Self> {
        for col in 0..2 {
            let total: f64 = rows.iter().map(|r| r[col]).sum();
            if (total - 1.0).abs() > 1e-9 || rows.iter().any(|r| r[col] < 0.0) {
                return Err(Error::InvalidParameter {
                    name: "likelihood column sum",
                    value: total,
                    reason: "each state's message distribution must sum to one",
                });
            }
        }
        Ok(LikelihoodTable { rows })
    }

    pub fn from_direct(rule: &DirectRule) -> Self {
        LikelihoodTable {
            rows: Message::ALL
                .iter()
                .map(|&m| [rule.likelihood(m, State::Zero), rule.likelihood(m, State::One)])
                .collect(),
        }
    }

    pub fn rows(&self) -> &[[f64; 2]] {
        &self.rows
    }

    /// Expected own payoff of a holder of `v_b` who best-responds to each message.
    pub fn best_response_value(&self, v_b: Belief) -> f64 {
        self.rows
            .iter()
            .map(|r| (v_b.p0() * r[0]).max(v_b.p1() * r[1]))
            .sum()
    }

    /// Gain of the table over acting on `v_b`, with best responses.
    pub fn gain(&self, v_b: Belief) -> f64 {
        self.best_response_value(v_b) - no_info_value(v_b)
    }

    /// Action a holder of `v_b` takes after message `k`.
    pub fn induced_action(&self, k: usize, v_b: Belief) -> Action {
        let r = self.rows[k];
        if v_b.p0() * r[0] >= v_b.p1() * r[1] {
            Action::Zero
        } else {
            Action::One
        }
    }

    /// Merge all messages that induce the same action for `v_b` into one.
    pub fn merge_by_action(&self, v_b: Belief) -> LikelihoodTable {
        let mut merged = [[0.0; 2]; 2];
        for (k, r) in self.rows.iter().enumerate() {
            let a = self.induced_action(k, v_b).index();
            merged[a][0] += r[0];
            merged[a][1] += r[1];
        }
        LikelihoodTable {
            rows: merged.to_vec(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn b(p: f64) -> Belief {
        Belief::new(p).unwrap()
    }

    fn info(i: f64) -> Informativeness {
        Informativeness::new(i).unwrap()
    }

    fn close(a: f64, e: f64) -> bool {
        (a - e).abs() < 1e-12
    }

    #[test]
    fn concentrate_examples() {
        assert_eq!(concentrate(info(0.0)), DirectRule::new(1.0, 1.0).unwrap());
        assert_eq!(concentrate(info(0.5)), DirectRule::new(1.0, 0.5).unwrap());
        assert_eq!(concentrate(info(-0.5)), DirectRule::new(0.5, 1.0).unwrap());
    }

    #[test]
    fn informativeness_examples() {
        let r = |a, c| DirectRule::new(a, c).unwrap();
        assert_eq!(informativeness(&r(1.0, 1.0)).value(), 0.0);
        assert_eq!(informativeness(&r(1.0, 0.5)).value(), 0.5);
        assert_eq!(informativeness(&r(0.5, 1.0)).value(), -0.5);
    }

    #[test]
    fn rejects_indirect_rules() {
        assert!(DirectRule::new(0.3, 0.3).is_err());
        assert!(DirectRule::new(1.2, 0.3).is_err());
        assert!(Informativeness::new(1.5).is_err());
    }

    #[test]
    fn marginal_examples() {
        let full = concentrate(info(0.0));
        let (p0, p1) = message_marginal(&full, b(0.3));
        assert!(close(p0, 0.3) && close(p1, 0.7));
        let (p0, p1) = message_marginal(&concentrate(info(0.5)), b(0.75));
        assert!(close(p0, 0.875) && close(p1, 0.125));
        let (p0, p1) = message_marginal(&concentrate(info(-0.5)), b(0.5));
        assert!(close(p0, 0.25) && close(p1, 0.75));
    }

    #[test]
    fn marginal_matches_closed_form_for_concentrated_rules() {
        for k in 0..=40 {
            let i = -1.0 + k as f64 / 20.0;
            for j in 0..=10 {
                let v_s = j as f64 / 10.0;
                let (_, p1) = message_marginal(&concentrate(info(i)), b(v_s));
                let closed = 1.0 - v_s - v_s * i - (1.0 - 2.0 * v_s) * i.max(0.0);
                assert!((p1 - closed).abs() < 1e-14, "i={i} v_s={v_s}");
            }
        }
    }

    #[test]
    fn posterior_examples() {
        let rule = concentrate(info(0.5));
        let th0 = message_posterior(&rule, b(0.75), Message::M0).unwrap();
        assert!(close(th0.p0(), 6.0 / 7.0));
        let th1 = message_posterior(&rule, b(0.75), Message::M1).unwrap();
        assert_eq!(th1.p0(), 0.0);
        let full = concentrate(info(0.0));
        assert_eq!(message_posterior(&full, b(0.3), Message::M0).unwrap().p0(), 1.0);
        assert_eq!(
            message_posterior(&concentrate(info(1.0)), b(0.4), Message::M1),
            Err(Error::ZeroProbabilityMessage)
        );
    }

    #[test]
    fn band_examples() {
        let band = feasible_band(b(1.0 / 3.0));
        assert!(close(band.lo, -1.0) && close(band.hi, 0.5));
        let band = feasible_band(b(2.0 / 3.0));
        assert!(close(band.lo, -0.5) && close(band.hi, 1.0));
        assert_eq!(feasible_band(b(0.5)), FeasibleBand { lo: -1.0, hi: 1.0 });
    }

    #[test]
    fn gain_examples() {
        assert_eq!(gain(0.0, b(0.5)), 0.5);
        assert_eq!(gain(0.0, b(0.0)), 0.0);
        assert_eq!(gain(-1.0, b(0.0)), 0.0);
        assert!(close(gain(0.5, b(0.75)), 0.125));
    }

    /// Enumerate the two messages, let the buyer best-respond to each
    /// posterior, and subtract the prior-only value.
    fn gain_by_enumeration(i: f64, v: f64) -> f64 {
        let rule = concentrate(info(i));
        let belief = b(v);
        let (pm0, pm1) = message_marginal(&rule, belief);
        let mut value = 0.0;
        for (m, pm) in [(Message::M0, pm0), (Message::M1, pm1)] {
            if pm > 0.0 {
                let th = message_posterior(&rule, belief, m).unwrap().p0();
                value += pm * th.max(1.0 - th);
            }
        }
        value - no_info_value(belief)
    }

    #[test]
    fn gain_matches_enumeration_inside_band() {
        assert!(close(gain_by_enumeration(0.5, 0.75), 0.125));
        for j in 0..=50 {
            let v = j as f64 / 50.0;
            let band = feasible_band(b(v));
            for k in 0..=40 {
                let i = band.lo + band.width() * k as f64 / 40.0;
                let expected = gain_by_enumeration(i, v);
                assert!((gain(i, b(v)) - expected).abs() < 1e-12, "i={i} v={v}");
                assert!(gain(i, b(v)) >= -1e-15);
            }
        }
    }

    #[test]
    fn cost_examples() {
        for &(tau, v_s) in &[(0.8, 0.3), (1.0, 0.0), (2.0, 0.9), (0.5, 0.5)] {
            let cfg = GameConfig::new(tau, v_s).unwrap();
            assert!(close(externality_cost(info(1.0), &cfg), tau * v_s));
            assert!(close(externality_cost(info(-1.0), &cfg), tau * (1.0 - v_s)));
            let full = tau * (v_s * v_s + (1.0 - v_s) * (1.0 - v_s));
            assert!(close(externality_cost(info(0.0), &cfg), full));
        }
        let cfg = GameConfig::new(1.7, 0.5).unwrap();
        for k in 0..=20 {
            let i = -1.0 + k as f64 / 10.0;
            assert!(close(externality_cost(info(i), &cfg), 0.85));
        }
    }

    #[test]
    fn cost_matches_piecewise_linear_form() {
        // tau v_s + tau (1 - 2 v_s)(1 - v_s) - tau (1 - 2 v_s) I (v_s + 1{I >= 0}(1 - 2 v_s))
        for j in 0..=20 {
            let v_s = j as f64 / 20.0;
            let cfg = GameConfig::new(1.3, v_s).unwrap();
            for k in 0..=40 {
                let i = -1.0 + k as f64 / 20.0;
                let tau = cfg.tau();
                let ind = if i >= 0.0 { 1.0 - 2.0 * v_s } else { 0.0 };
                let closed = tau * v_s + tau * (1.0 - 2.0 * v_s) * (1.0 - v_s)
                    - tau * (1.0 - 2.0 * v_s) * i * (v_s + ind);
                assert!((externality_cost(info(i), &cfg) - closed).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn obedience_examples() {
        for v in [0.0, 0.2, 0.5, 0.9, 1.0] {
            assert!(obedience_check(&concentrate(info(0.0)), b(v)));
        }
        assert!(obedience_check(&concentrate(info(0.5)), b(0.75)));
        assert!(!obedience_check(&concentrate(info(0.9)), b(0.1)));
    }

    #[test]
    fn band_is_the_obedient_set() {
        for j in 1..50 {
            let v = j as f64 / 50.0;
            let band = feasible_band(b(v));
            for k in 0..=200 {
                let i = -1.0 + k as f64 / 100.0;
                let inside = band.contains(i);
                let obeyed = obedience_check(&concentrate(info(i)), b(v));
                // Endpoints are ties; allow either answer within rounding of the bounds.
                if (i - band.lo).abs() > 1e-9 && (i - band.hi).abs() > 1e-9 {
                    assert_eq!(inside, obeyed, "i={i} v={v}");
                }
            }
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn random_table(n: usize) -> impl Strategy<Value = LikelihoodTable> {
            (
                proptest::collection::vec(0.01f64..1.0, n),
                proptest::collection::vec(0.01f64..1.0, n),
            )
                .prop_map(|(a, c)| {
                    let sa: f64 = a.iter().sum();
                    let sc: f64 = c.iter().sum();
                    let rows = a.iter().zip(&c).map(|(x, y)| [x / sa, y / sc]).collect();
                    LikelihoodTable::new(rows).unwrap()
                })
        }

        proptest! {
            #[test]
            fn round_trip(i in -1.0f64..=1.0) {
                prop_assert!((informativeness(&concentrate(info(i))).value() - i).abs() <= f64::EPSILON);
            }

            #[test]
            fn gain_nonnegative_in_band(v in 0.0f64..=1.0, u in 0.0f64..=1.0) {
                let band = feasible_band(b(v));
                let i = band.lo + u * band.width();
                prop_assert!(gain(i, b(v)) >= -1e-14);
            }

            #[test]
            fn cost_within_zero_and_tau(i in -1.0f64..=1.0, tau in 0.0f64..10.0, v_s in 0.0f64..=1.0) {
                let cfg = GameConfig::new(tau, v_s).unwrap();
                let c = externality_cost(info(i), &cfg);
                prop_assert!(c >= -1e-15 && c <= tau + 1e-12);
            }

            #[test]
            fn merging_messages_is_a_garbling(
                table in (3usize..7).prop_flat_map(random_table),
                truth in 0.0f64..=1.0,
            ) {
                let true_type = b(truth);
                let merged = table.merge_by_action(true_type);
                prop_assert!((merged.gain(true_type) - table.gain(true_type)).abs() < 1e-12);
                for k in 0..=50 {
                    let other = b(k as f64 / 50.0);
                    prop_assert!(merged.gain(other) <= table.gain(other) + 1e-12);
                }
            }

            /// An interior direct rule and the concentrated rule with the same
            /// informativeness differ in value by a constant that does not
            /// depend on the type, so moving to the ceiling never changes
            /// incentives and weakly raises every obedient type's gain.
            #[test]
            fn concentration_shifts_gain_uniformly(i0 in 0.0f64..=1.0, i1 in 0.0f64..=1.0) {
                prop_assume!(i0 + i1 >= 1.0);
                let interior = DirectRule::new(i0, i1).unwrap();
                let ceiling = concentrate(informativeness(&interior));
                let shift = (1.0 - i0).min(1.0 - i1);
                let table_in = LikelihoodTable::from_direct(&interior);
                let table_top = LikelihoodTable::from_direct(&ceiling);
                for k in 0..=100 {
                    let v = b(k as f64 / 100.0);
                    if obedience_check(&interior, v) && obedience_check(&ceiling, v) {
                        let d = table_top.gain(v) - table_in.gain(v);
                        prop_assert!((d - shift).abs() < 1e-12, "v={} d={} shift={}", v.p0(), d, shift);
                        let closed = gain(informativeness(&interior).value(), v);
                        prop_assert!((table_top.gain(v) - closed).abs() < 1e-12);
                    }
                }
            }
        }
    }
}
