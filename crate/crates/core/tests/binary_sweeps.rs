use infomenu_core::binary::{boundaries, boundary_grid, solve, solve_restricted, BinaryScenario, Offer, Regime};
use infomenu_core::game::GameConfig;
use infomenu_core::oracle::binary_report;

fn scenario(v_low: f64, v_high: f64, phi: f64, tau: f64, v_s: f64) -> BinaryScenario {
    BinaryScenario::new(v_low, v_high, phi, GameConfig::new(tau, v_s).unwrap()).unwrap()
}

/// First tau on the grid where the regime differs from tau = 0.
fn first_switch(s: &BinaryScenario, step: f64, tau_max: f64) -> Option<f64> {
    let base = Regime::of(s, &solve(s).unwrap());
    let n = (tau_max / step).round() as usize;
    (1..=n).map(|k| k as f64 * step).find(|&tau| {
        let sc = s.with_cfg(GameConfig::new(tau, s.cfg().v_s()).unwrap());
        Regime::of(&sc, &solve(&sc).unwrap()) != base
    })
}

#[test]
fn noncongruent_switch_follows_closed_form() {
    for phi in [0.5, 2.0 / 3.0] {
        for v_s in [0.0, 0.1, 0.3, 0.7, 0.9, 1.0] {
            let s = scenario(1.0 / 6.0, 2.0 / 3.0, phi, 0.0, v_s);
            let bd = boundaries(&s).unwrap();
            let expected = if v_s < 0.5 { bd.tau_high } else { bd.tau_low };
            let got = first_switch(&s, 1e-3, 5.0).unwrap();
            assert!(got >= expected && got - expected <= 1e-3 + 1e-12, "phi={phi} v_s={v_s}: {got} vs {expected}");
        }
    }
}

#[test]
fn rare_high_type_can_leave_closed_form_early() {
    // Giving the low type full information, and so charging the high type
    // less, beats the closed-form regime before tau_high is reached.
    let s = scenario(1.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0, 0.0, 0.3);
    let bd = boundaries(&s).unwrap();
    let got = first_switch(&s, 1e-3, 5.0).unwrap();
    assert!(got < bd.tau_high - 0.1);
    let at = s.with_cfg(GameConfig::new(got, 0.3).unwrap());
    let m = solve(&at).unwrap();
    assert_eq!((m.i_low, m.i_high), (0.0, 0.0));
    assert!(binary_report(&at, &m, 201, 0.0).unwrap().pass);
}

#[test]
fn neutral_seller_never_switches() {
    for (vl, vh) in [(5.0 / 6.0, 2.0 / 3.0), (1.0 / 6.0, 2.0 / 3.0)] {
        let s = scenario(vl, vh, 0.4, 0.0, 0.5);
        assert_eq!(first_switch(&s, 1e-2, 10.0), None);
    }
}

#[test]
fn congruent_grid_search_agrees_for_several_type_pairs() {
    for (vl, vh) in [(5.0 / 6.0, 2.0 / 3.0), (0.95, 0.55), (0.1, 0.3)] {
        for phi in [0.2, 0.7] {
            for j in 0..=4 {
                for k in 0..=4 {
                    let s = scenario(vl, vh, phi, k as f64 / 2.0, j as f64 / 4.0);
                    let r = binary_report(&s, &solve(&s).unwrap(), 101, 0.0).unwrap();
                    assert!(r.pass, "{r:?}");
                }
            }
        }
    }
}

#[test]
fn low_seller_belief_keeps_sign_pattern() {
    // With v_s <= 1/2 the optimum uses the allocations the screening
    // argument assumes, so the restricted program finds it.
    for (vl, vh) in [(5.0 / 6.0, 2.0 / 3.0), (1.0 / 6.0, 2.0 / 3.0)] {
        for j in 0..=5 {
            for k in 0..=30 {
                let s = scenario(vl, vh, 0.45, k as f64 / 10.0, j as f64 / 10.0);
                let (a, b) = (solve(&s).unwrap(), solve_restricted(&s).unwrap());
                assert!((a.expected_profit - b.expected_profit).abs() < 1e-12, "{a:?} {b:?}");
            }
        }
    }
}

#[test]
fn grid_rows_follow_input_order() {
    let template = scenario(5.0 / 6.0, 2.0 / 3.0, 1.0 / 3.0, 0.0, 0.0);
    let v_s: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let tau: Vec<f64> = (0..=10).map(|k| k as f64 / 10.0).collect();
    let cells = boundary_grid(&template, &v_s, &tau).unwrap();
    assert_eq!(cells.len(), 121);
    for (n, cell) in cells.iter().enumerate() {
        assert_eq!((cell.v_s, cell.tau), (v_s[n / 11], tau[n % 11]));
    }
    let low_competition = &cells[0];
    assert_eq!((low_competition.regime.low, low_competition.regime.high), (Offer::Full, Offer::Full));
}
