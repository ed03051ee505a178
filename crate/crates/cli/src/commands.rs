//! Figure-data subcommands.

use std::path::{Path, PathBuf};

use infomenu_core::binary::{boundaries, boundary_grid, solve, BinaryScenario};
use infomenu_core::continuous::{
    allocation, profit_baselines, solve_dual, tau_prime, transfer, virtual_values, StepMenu,
};
use infomenu_core::dist::{DistributionSpec, TypeDistribution};
use infomenu_core::game::{Belief, GameConfig};
use infomenu_core::rules::gain;

use crate::config::{Axis, Buyer, ScenarioFile};
use crate::output::{num, write_menu_json, Table};
use crate::CliError;

pub const DEFAULT_BELIEF_GRID: usize = 501;

fn belief_grid(n: usize) -> Vec<f64> {
    let n = n.max(2);
    (0..n).map(|k| k as f64 / (n - 1) as f64).collect()
}

pub fn gain_curve(values: &[f64], grid: usize, out: Option<&Path>) -> Result<(), CliError> {
    let header = ["v_b", "I", "gain"];
    let mut table = match out {
        Some(path) => Table::create(path, &header)?,
        None => Table::from_writer(Box::new(std::io::stdout()), &header)?,
    };
    for &i in values {
        for v in belief_grid(grid) {
            table.row([num(v), num(i), num(gain(i, Belief::new(v)?))])?;
        }
    }
    table.finish()
}

fn prepare_dir(out: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(out)?;
    Ok(())
}

fn sweep_or(file: &ScenarioFile, axis: Axis, grid: Option<usize>, fallback: f64) -> Vec<f64> {
    match file.sweep(axis) {
        Some(s) => {
            let mut s = *s;
            if let (Some(n), true) = (grid, axis != Axis::Phi) {
                s.steps = n;
            }
            s.values()
        }
        None => vec![fallback],
    }
}

pub fn binary(file: &ScenarioFile, out: &Path, grid: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let Buyer::Binary(scenario) = file.buyer()? else {
        return Err(CliError::Config("the binary command needs [buyer.binary]".into()));
    };
    prepare_dir(out)?;
    let mut written = Vec::new();

    let menu = solve(&scenario)?;
    let path = out.join("menu.json");
    write_menu_json(&path, &menu)?;
    written.push(path);

    if file.sweep.is_empty() {
        return Ok(written);
    }
    let cfg = scenario.cfg();
    let phis = sweep_or(file, Axis::Phi, grid, scenario.phi());
    let v_s = sweep_or(file, Axis::SellerBelief, grid, cfg.v_s());
    let taus = sweep_or(file, Axis::Tau, grid, cfg.tau());
    let panels: Vec<BinaryScenario> = phis.iter().map(|&phi| scenario.with_phi(phi)).collect::<Result<_, _>>()?;

    let path = out.join("boundary_grid.csv");
    let mut table = Table::create(
        &path,
        &["phi", "v_s", "tau", "I_low", "I_high", "t_low", "t_high", "profit", "regime"],
    )?;
    for panel in &panels {
        for cell in boundary_grid(panel, &v_s, &taus)? {
            let m = cell.menu;
            table.row([
                num(panel.phi()),
                num(cell.v_s),
                num(cell.tau),
                num(m.i_low),
                num(m.i_high),
                num(m.t_low),
                num(m.t_high),
                num(m.expected_profit),
                cell.regime.label(),
            ])?;
        }
    }
    table.finish()?;
    written.push(path);

    let path = out.join("boundaries.csv");
    let mut table = Table::create(&path, &["phi", "v_s", "tau_low", "tau_high"])?;
    for panel in &panels {
        for &v in &v_s {
            let b = boundaries(&panel.with_cfg(GameConfig::new(cfg.tau(), v)?))?;
            table.row([num(panel.phi()), num(v), num(b.tau_low), num(b.tau_high)])?;
        }
    }
    table.finish()?;
    written.push(path);
    Ok(written)
}

fn write_menu_files(
    out: &Path,
    suffix: &str,
    dist: &dyn TypeDistribution,
    cfg: &GameConfig,
    grid: usize,
) -> Result<Vec<PathBuf>, CliError> {
    let menu: StepMenu = solve_dual(dist, cfg)?;
    let vv = virtual_values(dist, cfg);
    let vv_path = out.join(format!("virtual_values{suffix}.csv"));
    let mut table = Table::create(&vv_path, &["v_b", "pi_minus", "pi_plus", "lambda_star"])?;
    for v in belief_grid(grid) {
        table.row([num(v), num(vv.pi_minus(v)), num(vv.pi_plus(v)), num(menu.lambda_star)])?;
    }
    table.finish()?;

    let menu_path = out.join(format!("menu{suffix}.csv"));
    let mut table = Table::create(&menu_path, &["v_b", "I_star", "transfer"])?;
    for v in belief_grid(grid) {
        let b = Belief::new(v)?;
        table.row([num(v), num(allocation(&menu, b)), num(transfer(&menu, b))])?;
    }
    table.finish()?;
    Ok(vec![vv_path, menu_path])
}

fn surplus_table(
    out: &Path,
    dist: &dyn TypeDistribution,
    section: &crate::config::SurplusSection,
) -> Result<PathBuf, CliError> {
    let belief = Belief::new(section.belief)?.p0();
    let path = out.join("virtual_surplus.csv");
    let mut table = Table::create(&path, &["v_s", "tau", "I", "surplus"])?;
    let points = section.points.max(2);
    for &v_s in &section.seller_beliefs {
        for &tau in &section.taus {
            let cfg = GameConfig::new(tau, v_s)?;
            let vv = virtual_values(dist, &cfg);
            for k in 0..points {
                let i = -1.0 + 2.0 * k as f64 / (points - 1) as f64;
                let slope = if i <= 0.0 { vv.pi_minus(belief) } else { vv.pi_plus(belief) };
                table.row([num(v_s), num(tau), num(i), num(i * slope)])?;
            }
        }
    }
    table.finish()?;
    Ok(path)
}

fn fraction_label(f: f64) -> String {
    format!("_frac{f}")
}

pub fn continuous(file: &ScenarioFile, out: &Path, grid: Option<usize>) -> Result<Vec<PathBuf>, CliError> {
    let Buyer::Continuous(spec) = file.buyer()? else {
        return Err(CliError::Config("the continuous command needs [buyer.continuous]".into()));
    };
    let dist = build(&spec)?;
    let cfg = file.game()?;
    let grid = grid.unwrap_or(DEFAULT_BELIEF_GRID);
    let section = file.continuous.clone().unwrap_or_default();

    let mut variants = vec![(String::new(), cfg)];
    for &f in &section.tau_prime_fractions {
        let tp = tau_prime(&cfg);
        if !tp.is_finite() || !(f >= 0.0) {
            return Err(CliError::Config(format!(
                "tau_prime_fractions needs a finite threshold and nonnegative fractions (tau' = {tp}, fraction {f})"
            )));
        }
        variants.push((fraction_label(f), cfg.with_tau(f * tp)?));
    }
    let taus: Vec<f64> = file.sweep(Axis::Tau).map(|s| s.values()).unwrap_or_default();
    let swept = taus.iter().map(|&tau| cfg.with_tau(tau)).collect::<Result<Vec<_>, _>>()?;

    // Fail on irregular inputs before anything is written.
    for c in variants.iter().map(|(_, c)| c).chain(&swept) {
        solve_dual(dist.as_ref(), c)?;
    }
    prepare_dir(out)?;

    let mut written = Vec::new();
    for (label, c) in &variants {
        written.extend(write_menu_files(out, label, dist.as_ref(), c, grid)?);
    }

    if !swept.is_empty() {
        let path = out.join("profits.csv");
        let mut table = Table::create(&path, &["tau", "profit_versioning", "profit_full", "profit_none"])?;
        for c in &swept {
            let base = profit_baselines(dist.as_ref(), c)?;
            table.row([num(c.tau()), num(base.versioning), num(base.full_info), num(base.no_info)])?;
        }
        table.finish()?;
        written.push(path);
    }

    if let Some(surplus) = &section.surplus {
        written.push(surplus_table(out, dist.as_ref(), surplus)?);
    }
    Ok(written)
}

pub fn build(spec: &DistributionSpec) -> Result<Box<dyn TypeDistribution>, CliError> {
    Ok(spec.build()?)
}
