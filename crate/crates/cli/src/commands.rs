//! One function per subcommand. Each computes everything first and only
//! then writes its files.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::Path;

use bktc_core::{solve, sweep, ConditionReport, CvaReport, GreeksReport, Problem, Warning};

use crate::config::ScenarioConfig;
use crate::error::CliError;

fn write_file(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), CliError> {
    let path = dir.join(name);
    let io_err = |source| CliError::Io {
        path: path.clone(),
        source,
    };
    let mut out = BufWriter::new(File::create(&path).map_err(io_err)?);
    body(&mut out).and_then(|_| out.flush()).map_err(io_err)
}

/// Creates `dir` and writes the fully resolved configuration into it.
pub fn prepare_output(cfg: &ScenarioConfig, dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|source| CliError::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let resolved = cfg.resolved(dir);
    write_file(dir, "resolved_config.json", |out| {
        serde_json::to_writer_pretty(&mut *out, &resolved)?;
        writeln!(out)
    })
}

fn report_warnings(warnings: &[Warning]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn condition_report(prob: &Problem) -> ConditionReport {
    let p = prob.effective_params();
    ConditionReport::evaluate(
        &p,
        prob.options.condition2_constant,
        prob.grid_spec.x_plus.exp(),
    )
}

pub fn validate(cfg: &ScenarioConfig) -> Result<(), CliError> {
    let prob = cfg.problem();
    let report = condition_report(&prob);
    println!("variant {:?}", prob.variant);
    for check in report.checks() {
        let verdict = if check.passed { "PASS" } else { "FAIL" };
        println!("{:<10} {verdict}  {}", check.name, check.description);
    }
    if !report.condition1.passed {
        return Err(prob
            .effective_params()
            .modified_variance()
            .unwrap_err()
            .into());
    }
    Ok(())
}

pub fn price(cfg: &ScenarioConfig, dir: &Path) -> Result<(), CliError> {
    let prob = cfg.problem();
    let surface = solve(&prob)?;
    report_warnings(&surface.warnings);
    write_file(dir, "surface.csv", |out| surface.write_csv(out))?;
    let (node, spot, value) = surface.price_near(prob.instrument.strike);
    println!(
        "price {value:.10} at S = {spot:.6} (node {node}, tau = {}) variant {:?}, {} sub-steps per step",
        surface.times[surface.levels() - 1],
        prob.variant,
        surface.substeps
    );
    Ok(())
}

pub fn greeks(cfg: &ScenarioConfig, dir: &Path) -> Result<(), CliError> {
    let prob = cfg.problem();
    let report = GreeksReport::compute(&prob, &cfg.greeks)?;
    write_file(dir, "greeks.csv", |out| report.write_csv(out))?;
    let i = nearest(&report.spot, prob.instrument.strike);
    println!(
        "greeks at S = {:.6}, tau = {}: value {:.8}, delta {:.8}, gamma {:.8}, vega {:.8}, rho {:.8}",
        report.spot[i], report.tau, report.value[i], report.delta[i], report.gamma[i], report.vega[i], report.rho[i]
    );
    let h = &report.hedge;
    println!(
        "hedge at S = {:.6}: {:.8} shares, own bond {:.8}, counterparty bond {:.8}",
        report.spot[i], h.delta_shares[i], h.own_bond_value[i], h.cpty_bond_value[i]
    );
    Ok(())
}

pub fn cva(cfg: &ScenarioConfig, dir: &Path) -> Result<(), CliError> {
    let prob = cfg.problem();
    let report = CvaReport::compute(&prob)?;
    write_file(dir, "cva.csv", |out| report.write_csv(out))?;
    let i = nearest(&report.spot, prob.instrument.strike);
    println!(
        "cva {:.10} at S = {:.6} ({:?} {:.10} vs RiskFree {:.10})",
        report.cva[i], report.spot[i], prob.variant, report.price[i], report.risk_free[i]
    );
    Ok(())
}

pub fn run_sweep(cfg: &ScenarioConfig, dir: &Path) -> Result<(), CliError> {
    let spec = cfg.sweep.as_ref().ok_or_else(|| CliError::Config {
        field: Some("sweep".into()),
        reason: "the sweep command needs a `sweep` object with `parameter` and `values`".into(),
    })?;
    let result = sweep(&cfg.problem(), spec.parameter, &spec.values)?;
    for (value, err) in result.failures() {
        eprintln!("warning: {} = {value} failed: {err}", spec.parameter);
    }
    write_file(dir, "sweep.csv", |out| result.write_csv(out))?;
    let i = nearest(&result.spot, cfg.instrument.strike);
    println!(
        "sweep over {} at S = {:.6}:",
        spec.parameter, result.spot[i]
    );
    for (k, value) in result.values.iter().enumerate() {
        match result.curve(k) {
            Some(c) => println!(
                "  {value:<12} price {:.10}  cva {:.10}",
                c.price[i], c.cva[i]
            ),
            None => println!("  {value:<12} failed"),
        }
    }
    Ok(())
}

fn nearest(spots: &[f64], s: f64) -> usize {
    spots
        .iter()
        .enumerate()
        .min_by(|a, b| (a.1 - s).abs().total_cmp(&(b.1 - s).abs()))
        .map(|(i, _)| i)
        .unwrap_or(0)
}
