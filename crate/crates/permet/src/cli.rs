//! Command-line entry points: config loading, subcommand dispatch, CSV and
//! SVG emission.
//!
//! Exit codes: 0 success, 1 usage or config error, 2 infeasible or
//! disconnected query, 3 resource limit.

use crate::coefficient::{MetricParams, PExponent};
use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::experiments::{
    gap_envelope, run_bounds_suite, run_critical, run_rate, CriticalReport, CriticalRunConfig,
    Parity, RowStatus,
};
use crate::geometry::Point2;
use crate::grid_solver::distance_folded;
use crate::homogenization::{check_norm_properties, psi_table};
use crate::opacity::{estimate_lambda, verify_avoidance};
use crate::output::{file_header, fmt_f64, line_chart, polar_chart, write_csv};
use crate::tolerances::TOL_GRID;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};

/// Boundary samples used by the `lambda` subcommand.
const LAMBDA_CLI_SAMPLES: usize = 512;

#[derive(Debug, Parser)]
#[command(name = "permet", version, about = "Geodesics and homogenized norms of two-phase periodic planar media")]
pub struct Cli {
    /// Config file (TOML); defaults apply when absent.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory override.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed override for random endpoint sampling.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Also emit SVG charts.
    #[arg(long, global = true)]
    pub svg: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Geodesic distance between two points in folded coordinates.
    Distance {
        #[arg(long, value_parser = parse_point)]
        from: Point2,
        #[arg(long, value_parser = parse_point)]
        to: Point2,
    },
    /// Sample the homogenized norm over directions and check its properties.
    Homogenize,
    /// Estimate the high opacity coefficient of the configured shape.
    Lambda,
    /// Verify that geodesics avoid the inclusions at the configured contrast.
    Avoidance,
    /// Two-sequence critical-exponent sweep.
    Critical,
    /// Convergence-rate fit below the critical exponent.
    Rate,
    /// Growth-bound suite over random endpoint pairs.
    Bounds,
}

fn parse_point(s: &str) -> std::result::Result<Point2, String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err(format!("expected `x,y`, got `{s}`"));
    }
    let x: f64 = parts[0].trim().parse().map_err(|e| format!("bad x: {e}"))?;
    let y: f64 = parts[1].trim().parse().map_err(|e| format!("bad y: {e}"))?;
    Ok(Point2::new(x, y))
}

/// Runs a parsed invocation and returns the process exit code.
pub fn run(cli: Cli) -> u8 {
    match run_inner(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn run_inner(cli: Cli) -> Result<()> {
    let mut config = match &cli.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(out) = &cli.out {
        config.output.out_dir = out.to_string_lossy().into_owned();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if cli.svg {
        config.output.emit_svg = true;
    }
    let header = file_header(config.hash(), config.seed);
    let out_dir = PathBuf::from(&config.output.out_dir);
    match cli.command {
        Command::Distance { from, to } => cmd_distance(&config, &header, &out_dir, from, to),
        Command::Homogenize => cmd_homogenize(&config, &header, &out_dir),
        Command::Lambda => cmd_lambda(&config, &header, &out_dir),
        Command::Avoidance => cmd_avoidance(&config, &header, &out_dir),
        Command::Critical => cmd_critical(&config, &header, &out_dir),
        Command::Rate => cmd_rate(&config, &header, &out_dir),
        Command::Bounds => cmd_bounds(&config, &header, &out_dir),
    }
}

fn cmd_distance(
    config: &RunConfig,
    header: &str,
    out_dir: &Path,
    from: Point2,
    to: Point2,
) -> Result<()> {
    let shape = config.shape()?;
    let params = MetricParams::new(config.metric.beta, config.p_exponent()?, config.metric.epsilon)?;
    let settings = config.solver_settings()?;
    let res = distance_folded(&shape, &params, from, to, &settings)?;
    println!("distance = {}", res.value);
    println!("vertices = {}", res.path.vertices().len());
    println!(
        "nodes_expanded = {}, runtime_ms = {:.1}",
        res.stats.nodes_expanded, res.stats.runtime_ms
    );
    write_csv(
        &out_dir.join("geodesic.csv"),
        header,
        &["x", "y"],
        res.path
            .vertices()
            .iter()
            .map(|v| vec![fmt_f64(v.x), fmt_f64(v.y)]),
    )?;
    Ok(())
}

fn cmd_homogenize(config: &RunConfig, header: &str, out_dir: &Path) -> Result<()> {
    let shape = config.shape()?;
    let settings = config.solver_settings()?;
    let table = psi_table(
        &shape,
        config.metric.beta,
        config.experiment.directions,
        &config.experiment.r_list,
        &settings,
    )?;
    let report = check_norm_properties(&table, TOL_GRID);
    write_csv(
        &out_dir.join("psi.csv"),
        header,
        &["angle", "psi", "R_last", "cauchy_tail", "converged"],
        table.entries.iter().map(|e| {
            vec![
                fmt_f64(e.direction.angle()),
                fmt_f64(e.value),
                fmt_f64(e.estimates.last().unwrap().0),
                fmt_f64(e.cauchy_tail),
                e.converged.to_string(),
            ]
        }),
    )?;
    for e in &table.entries {
        println!(
            "theta = {:.4}: psi = {:.6} ({})",
            e.direction.angle(),
            e.value,
            if e.converged { "converged" } else { "tail open" }
        );
    }
    println!(
        "norm properties: homogeneity residual {:.4}, triangle violation {:.4}, range [{:.4}, {:.4}] -> {}",
        report.homogeneity_residual,
        report.triangle_violation,
        report.min_value,
        report.max_value,
        if report.pass { "pass" } else { "FAIL" }
    );
    if config.output.emit_svg {
        polar_chart(
            &out_dir.join("psi_polar.svg"),
            "homogenized norm",
            &table
                .entries
                .iter()
                .map(|e| (e.direction.angle(), e.value))
                .collect::<Vec<_>>(),
        )?;
    }
    Ok(())
}

fn cmd_lambda(config: &RunConfig, header: &str, out_dir: &Path) -> Result<()> {
    let shape = config.shape()?;
    let est = estimate_lambda(&shape, LAMBDA_CLI_SAMPLES)?;
    println!("lambda_hat = {}", est.lambda_hat);
    println!(
        "worst pair = ({}, {}) -- ({}, {})",
        est.worst_pair.0.x, est.worst_pair.0.y, est.worst_pair.1.x, est.worst_pair.1.y
    );
    write_csv(
        &out_dir.join("lambda.csv"),
        header,
        &["lambda_hat", "ax", "ay", "bx", "by", "n_samples"],
        std::iter::once(vec![
            fmt_f64(est.lambda_hat),
            fmt_f64(est.worst_pair.0.x),
            fmt_f64(est.worst_pair.0.y),
            fmt_f64(est.worst_pair.1.x),
            fmt_f64(est.worst_pair.1.y),
            est.n_samples.to_string(),
        ]),
    )?;
    Ok(())
}

fn cmd_avoidance(config: &RunConfig, header: &str, out_dir: &Path) -> Result<()> {
    let shape = config.shape()?;
    let settings = config.solver_settings()?;
    let est = estimate_lambda(&shape, LAMBDA_CLI_SAMPLES)?;
    if config.metric.beta <= est.lambda_hat {
        eprintln!(
            "note: beta = {} does not exceed lambda_hat = {:.6}; avoidance is not guaranteed",
            config.metric.beta, est.lambda_hat
        );
    }
    let report = verify_avoidance(
        &shape,
        config.metric.beta,
        config.experiment.n_pairs,
        &settings,
        config.seed,
    )?;
    write_csv(
        &out_dir.join("avoidance.csv"),
        header,
        &["trial", "ax", "ay", "bx", "by", "distance", "incursion_depth", "violation"],
        report.trials.iter().enumerate().map(|(i, t)| {
            vec![
                i.to_string(),
                fmt_f64(t.a.x),
                fmt_f64(t.a.y),
                fmt_f64(t.b.x),
                fmt_f64(t.b.y),
                fmt_f64(t.distance),
                fmt_f64(t.incursion_depth),
                t.violation.to_string(),
            ]
        }),
    )?;
    println!(
        "avoidance: {} trials, {} violations (grid spacing {:.5})",
        report.trials.len(),
        report.violations(),
        report.grid_spacing
    );
    Ok(())
}

fn cmd_critical(config: &RunConfig, header: &str, out_dir: &Path) -> Result<()> {
    let shape = config.shape()?;
    let settings = config.solver_settings()?;
    let [k_min, k_max] = config.experiment.k_range;
    let run = CriticalRunConfig {
        p_list: config.p_list()?,
        k_min,
        k_max,
        settings,
        r_list: config.experiment.r_list.clone(),
        ..CriticalRunConfig::new(shape, config.metric.beta)
    };
    let report = run_critical(&run)?;
    write_csv(
        &out_dir.join("critical.csv"),
        header,
        &["p", "parity", "k", "epsilon", "distance", "psi_ref", "gap", "envelope", "within_envelope"],
        critical_csv_rows(&report),
    )?;
    println!(
        "psi_ref = {:.6}, lambda_hat = {:.6}, rho = {:.4}",
        report.psi_ref, report.lambda_hat, report.rho
    );
    for (p, verdict) in &report.verdicts {
        println!("p = {p}: {}", verdict.summary());
    }
    let total_ms: f64 = report.rows.iter().map(|r| r.runtime_ms).sum();
    println!("solver time: {:.1} ms across {} rows", total_ms, report.rows.len());
    if config.output.emit_svg {
        for (p, _) in &report.verdicts {
            let series: Vec<(String, Vec<(f64, f64)>)> = [Parity::Even, Parity::Odd]
                .iter()
                .map(|&parity| {
                    let data: Vec<(f64, f64)> = report
                        .rows
                        .iter()
                        .filter(|r| r.p == *p && r.parity == parity)
                        .filter_map(|r| r.distance.map(|d| (r.k as f64, d)))
                        .collect();
                    (parity.label().to_string(), data)
                })
                .collect();
            line_chart(
                &out_dir.join(format!("critical_p{p}.svg")),
                &format!("boundary distances, p = {p}"),
                "k",
                "distance",
                &series,
            )?;
        }
    }
    Ok(())
}

fn critical_csv_rows(report: &CriticalReport) -> Vec<Vec<String>> {
    report
        .rows
        .iter()
        .map(|r| {
            let counterpart = report.rows.iter().find(|c| {
                c.p == r.p
                    && c.k == r.k
                    && c.parity != r.parity
            });
            let gap = match (&r.status, counterpart) {
                (RowStatus::Ok, Some(c)) => match (&c.status, r.distance, c.distance) {
                    (RowStatus::Ok, Some(a), Some(b)) => (a - b).abs(),
                    (RowStatus::Disconnected, _, _) => f64::INFINITY,
                    _ => f64::NAN,
                },
                (RowStatus::Disconnected, _) => f64::INFINITY,
                _ => f64::NAN,
            };
            let envelope = match r.p {
                PExponent::Finite(pv) => {
                    gap_envelope(report.beta, pv, Parity::Odd.epsilon(r.k), report.psi_ref)
                }
                PExponent::Infinite => f64::INFINITY,
            };
            let within = match &r.status {
                RowStatus::Ok | RowStatus::Disconnected => {
                    if gap.is_nan() {
                        "unpaired".to_string()
                    } else {
                        (gap <= envelope).to_string()
                    }
                }
                RowStatus::Inadmissible => "inadmissible".to_string(),
                RowStatus::Failed(_) => "failed".to_string(),
            };
            let distance = match &r.status {
                RowStatus::Ok => fmt_f64(r.distance.unwrap_or(f64::NAN)),
                RowStatus::Disconnected => "inf".to_string(),
                _ => "nan".to_string(),
            };
            vec![
                r.p.to_string(),
                r.parity.label().to_string(),
                r.k.to_string(),
                fmt_f64(r.epsilon),
                distance,
                fmt_f64(report.psi_ref),
                fmt_f64(gap),
                fmt_f64(envelope),
                within,
            ]
        })
        .collect()
}

fn cmd_rate(config: &RunConfig, header: &str, out_dir: &Path) -> Result<()> {
    let shape = config.shape()?;
    let settings = config.solver_settings()?;
    let p = match config.p_exponent()? {
        PExponent::Finite(p) => p,
        PExponent::Infinite => {
            return Err(Error::Config("rate fit needs a finite p below 1".into()))
        }
    };
    let report = run_rate(
        &shape,
        config.metric.beta,
        p,
        Point2::new(0.0, 0.0),
        Point2::new(0.5, 0.5),
        &config.epsilon_list(),
        &config.experiment.r_list,
        &settings,
    )?;
    write_csv(
        &out_dir.join("rate.csv"),
        header,
        &["epsilon", "distance", "psi_ref", "gap", "lower", "upper", "within_envelope"],
        report.samples.iter().map(|s| {
            vec![
                fmt_f64(s.epsilon),
                s.distance.map(fmt_f64).unwrap_or_else(|| "nan".into()),
                fmt_f64(report.psi_ref),
                s.gap.map(fmt_f64).unwrap_or_else(|| "nan".into()),
                fmt_f64(s.lower),
                fmt_f64(s.upper),
                if s.admissible {
                    s.within_envelope.to_string()
                } else {
                    "inadmissible".to_string()
                },
            ]
        }),
    )?;
    println!(
        "empirical exponent = {:.4} (envelope exponent {:.4})",
        report.exponent, report.envelope_exponent
    );
    let inside = report
        .samples
        .iter()
        .filter(|s| s.admissible && s.within_envelope)
        .count();
    let admissible = report.samples.iter().filter(|s| s.admissible).count();
    println!("samples within envelope: {inside}/{admissible}");
    Ok(())
}

fn cmd_bounds(config: &RunConfig, header: &str, out_dir: &Path) -> Result<()> {
    let shape = config.shape()?;
    let settings = config.solver_settings()?;
    let p = match config.p_exponent()? {
        PExponent::Finite(p) => p,
        PExponent::Infinite => {
            return Err(Error::Config("bounds suite needs a finite p".into()))
        }
    };
    let report = run_bounds_suite(
        &shape,
        config.metric.beta,
        p,
        config.metric.epsilon,
        config.experiment.n_pairs,
        &settings,
        config.seed,
    )?;
    write_csv(
        &out_dir.join("bounds.csv"),
        header,
        &[
            "pair", "x1", "y1", "x2", "y2", "distance", "lower", "upper", "growth_ok",
            "snap_gap", "snap_envelope", "snap_ok",
        ],
        report.rows.iter().enumerate().map(|(i, r)| {
            vec![
                i.to_string(),
                fmt_f64(r.xi1.x),
                fmt_f64(r.xi1.y),
                fmt_f64(r.xi2.x),
                fmt_f64(r.xi2.y),
                fmt_f64(r.distance),
                fmt_f64(r.lower),
                fmt_f64(r.upper),
                r.growth_ok.to_string(),
                fmt_f64(r.snap_gap),
                fmt_f64(r.snap_envelope),
                r.snap_ok.to_string(),
            ]
        }),
    )?;
    if !report.admissible {
        println!("parameters inadmissible at this period; all pairs skipped");
    } else {
        println!(
            "bounds: {} pairs, {} violations",
            report.rows.len(),
            report.violations()
        );
    }
    Ok(())
}
