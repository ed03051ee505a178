//! The oracle battery behind `infomenu verify`.

use infomenu_core::binary::{solve, BinaryMenu, BinaryScenario};
use infomenu_core::continuous::{
    allocation, allocation_integral, dual_by_bisection, expected_profit, expected_profit_direct,
    lambda_closed_form, solve_dual, MenuRegime, StepMenu,
};
use infomenu_core::dist::TypeDistribution;
use infomenu_core::game::{Belief, GameConfig};
use infomenu_core::oracle::{
    binary_report, brute_force_continuous, envelope_check, mc_cost, mc_cost_coupled, mc_gain,
    truthfulness_check, CorruptedTransfer, McConfig, MenuSchedule, OracleReport,
};
use infomenu_core::rules::gain;

use crate::config::{Buyer, ScenarioFile};
use crate::CliError;

pub const DEFAULT_GRID: usize = 201;

pub fn battery(file: &ScenarioFile, mc: &McConfig, grid: Option<usize>) -> Result<Vec<OracleReport>, CliError> {
    let grid = grid.unwrap_or(DEFAULT_GRID);
    let cfg = file.game()?;
    let mut reports = Vec::new();
    for (i, v) in [(0.0, 0.5), (-1.0, 0.3), (0.5, 0.75)] {
        reports.push(mc_gain(i, v, mc)?);
    }
    for i in [-1.0, 0.0, 1.0] {
        reports.push(mc_cost(i, &cfg, mc)?);
    }
    reports.push(mc_cost_coupled(0.5, &cfg, mc)?);

    match file.buyer()? {
        Buyer::Binary(s) => binary_battery(&s, mc, grid, &mut reports)?,
        Buyer::Continuous(spec) => {
            let dist = spec.build()?;
            let corrupt = file.verify.and_then(|v| v.corrupt_transfer);
            continuous_battery(dist.as_ref(), &cfg, mc, grid, corrupt, &mut reports)?
        }
    }
    Ok(reports)
}

fn incentive_violation(s: &BinaryScenario, m: &BinaryMenu) -> f64 {
    let (vl, vh) = (s.v_low(), s.v_high());
    let rent_l = gain(m.i_low, vl) - m.t_low;
    let rent_h = gain(m.i_high, vh) - m.t_high;
    [
        -rent_l,
        -rent_h,
        gain(m.i_high, vl) - m.t_high - rent_l,
        gain(m.i_low, vh) - m.t_low - rent_h,
        -m.t_low,
        -m.t_high,
    ]
    .into_iter()
    .fold(0.0, f64::max)
}

fn binary_battery(
    s: &BinaryScenario,
    mc: &McConfig,
    grid: usize,
    reports: &mut Vec<OracleReport>,
) -> Result<(), CliError> {
    let menu = solve(s)?;
    reports.push(binary_report(s, &menu, grid, 0.0)?);
    reports.push(OracleReport::new("binary_incentives", 0.0, incentive_violation(s, &menu), 0.0, 1e-9));
    for (i, v) in [(menu.i_low, s.v_low()), (menu.i_high, s.v_high())] {
        reports.push(mc_gain(i, v.p0(), mc)?);
        reports.push(mc_cost(i, s.cfg(), mc)?);
    }
    Ok(())
}

fn corrupted(menu: &StepMenu, bump: f64) -> CorruptedTransfer {
    let (from, to) = if menu.v_hi > menu.v_lo {
        (menu.v_lo, menu.v_hi)
    } else {
        (menu.v_hi, 1.0)
    };
    CorruptedTransfer {
        menu: *menu,
        from,
        to,
        bump,
    }
}

fn continuous_battery(
    dist: &dyn TypeDistribution,
    cfg: &GameConfig,
    mc: &McConfig,
    grid: usize,
    corrupt: Option<f64>,
    reports: &mut Vec<OracleReport>,
) -> Result<(), CliError> {
    let menu = solve_dual(dist, cfg)?;
    reports.push(OracleReport::new("allocation_integral", 0.0, allocation_integral(&menu, 1.0), 0.0, 0.0));

    let profit = expected_profit(&menu, dist, cfg)?;
    let direct = expected_profit_direct(&menu, dist, cfg)?;
    reports.push(OracleReport::new("profit_two_ways", profit, direct, 0.0, 1e-7));

    let schedule: Box<dyn MenuScheduleSync> = match corrupt {
        Some(bump) => Box::new(corrupted(&menu, bump)),
        None => Box::new(menu),
    };
    reports.push(envelope_check(schedule.as_ref(), 1e-4, 1e-5)?);
    reports.push(truthfulness_check(schedule.as_ref(), grid, 1e-9));

    let best_grid = brute_force_continuous(dist, cfg, grid, 5)?;
    reports.push(
        OracleReport::new("step_optimality", profit, best_grid, 0.0, f64::INFINITY)
            .require(best_grid <= profit + 1e-5),
    );

    if dist.is_uniform() && menu.regime == MenuRegime::Screening {
        let (lambda, _, _) = dual_by_bisection(dist, cfg)?;
        reports.push(OracleReport::new("lambda_closed_form", lambda_closed_form(dist, cfg), lambda, 0.0, 1e-9));
    }

    for v in [0.1, 0.5, 0.9] {
        let i = allocation(&menu, Belief::new(v)?);
        reports.push(mc_gain(i, v, mc)?);
    }
    Ok(())
}

/// Schedules the battery can check from worker threads.
trait MenuScheduleSync: MenuSchedule + Sync {}

impl<T: MenuSchedule + Sync> MenuScheduleSync for T {}
