//! Command implementations behind the CLI: each subcommand is an ordinary
//! function over paths and parsed flags, so the whole surface is testable
//! without spawning a process.

use std::path::{Path, PathBuf};

use crate::calibration::CalibrationDoc;
use crate::config::{RunConfig, Scenario};
use crate::error::{Error, Result};
use crate::explore::{
    calibrate_r, select_best, sweep, CalibrationOptions, CalibrationResult, OptimizeOutcome,
    SweepGrid, SweepStatus,
};
use crate::hamiltonian::TwoSpinState;
use crate::observables::{concurrence_series, gate_time, phase_series, GateOutcome};
use crate::output::{
    figure_csv, gate_report_csv, gate_report_json, sweep_csv, sweep_json, trajectory_csv,
    trajectory_json, GateTimeReport, OutputFormat,
};
use crate::propagate::{propagate_rk4, Trajectory};
use crate::quantities::PhysicalParams;

/// Parse a target-phase choice: one of pi, -pi, pi/2, -pi/2, pi/4, -pi/4.
pub fn parse_target_phase(s: &str) -> Result<f64> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
    match s.trim() {
        "pi" => Ok(PI),
        "-pi" => Ok(-PI),
        "pi/2" => Ok(FRAC_PI_2),
        "-pi/2" => Ok(-FRAC_PI_2),
        "pi/4" => Ok(FRAC_PI_4),
        "-pi/4" => Ok(-FRAC_PI_4),
        other => Err(Error::Config(format!(
            "target-phase: expected one of pi, -pi, pi/2, -pi/2, pi/4, -pi/4; got {other:?}"
        ))),
    }
}

fn parse_grid_number(axis: &str, text: &str) -> Result<f64> {
    text.trim().parse::<f64>().map_err(|_| {
        Error::Config(format!("--grid {axis}: cannot parse {:?} as a number", text.trim()))
    })
}

fn parse_grid_axis(axis: &str, rest: &str) -> Result<Vec<f64>> {
    if rest.contains('|') {
        return rest.split('|').map(|v| parse_grid_number(axis, v)).collect();
    }
    if rest.contains(':') {
        let parts: Vec<&str> = rest.split(':').collect();
        if parts.len() != 3 {
            return Err(Error::Config(format!(
                "--grid {axis}: range syntax is START:STOP:COUNT, got {rest:?}"
            )));
        }
        let start = parse_grid_number(axis, parts[0])?;
        let stop = parse_grid_number(axis, parts[1])?;
        let count: usize = parts[2].trim().parse().map_err(|_| {
            Error::Config(format!(
                "--grid {axis}: COUNT must be a positive integer, got {:?}",
                parts[2].trim()
            ))
        })?;
        if count == 0 {
            return Err(Error::Config(format!(
                "--grid {axis}: COUNT must be at least 1"
            )));
        }
        if count == 1 {
            return Ok(vec![start]);
        }
        return Ok((0..count)
            .map(|i| start + (stop - start) * i as f64 / (count - 1) as f64)
            .collect());
    }
    Ok(vec![parse_grid_number(axis, rest)?])
}

/// Parse a grid specification like
/// `Bt_T=0.1:0.3:5,omega_GHz=14|15.5|17,r_nm=1.0856`.
///
/// Axes use the configuration key names; each axis takes a single value, a
/// `|`-separated list, or an inclusive `START:STOP:COUNT` range. Axes left
/// out collapse to the configured base value, so a degenerate grid is the
/// single configured point. Frequency values are interpreted with the
/// configured convention; distances are in nm.
pub fn parse_grid(spec: &str, base: &PhysicalParams) -> Result<SweepGrid> {
    if spec.trim().is_empty() {
        return Err(Error::Config(
            "--grid: empty specification; expected AXIS=VALUES[,AXIS=VALUES...]".into(),
        ));
    }
    let mut bt: Option<Vec<f64>> = None;
    let mut omega_ghz: Option<Vec<f64>> = None;
    let mut r_nm: Option<Vec<f64>> = None;
    for part in spec.split(',') {
        let (name, rest) = part.split_once('=').ok_or_else(|| {
            Error::Config(format!(
                "--grid: expected AXIS=VALUES, got {:?}",
                part.trim()
            ))
        })?;
        let name = name.trim();
        let slot = match name {
            "Bt_T" => &mut bt,
            "omega_GHz" => &mut omega_ghz,
            "r_nm" => &mut r_nm,
            other => {
                return Err(Error::Config(format!(
                    "--grid: unknown axis {other:?}; expected Bt_T, omega_GHz or r_nm"
                )))
            }
        };
        if slot.replace(parse_grid_axis(name, rest)?).is_some() {
            return Err(Error::Config(format!(
                "--grid: axis {name} specified more than once"
            )));
        }
    }
    Ok(SweepGrid {
        b_t_t: bt.unwrap_or_else(|| vec![base.b_t_t]),
        omega_rad_s: omega_ghz
            .map(|axis| {
                axis.into_iter()
                    .map(|g| base.omega_input_convention.ghz_to_rad_s(g))
                    .collect()
            })
            .unwrap_or_else(|| vec![base.omega_rad_s]),
        r_m: r_nm
            .map(|axis| axis.into_iter().map(|x| x * 1e-9).collect())
            .unwrap_or_else(|| vec![base.r_m]),
    })
}

fn load_config(path: Option<&Path>) -> Result<RunConfig> {
    match path {
        Some(p) => RunConfig::from_toml(&std::fs::read_to_string(p)?),
        None => Ok(RunConfig::default()),
    }
}

fn default_out(out: Option<&Path>, stem: &str, format: OutputFormat) -> PathBuf {
    match out {
        Some(p) => p.to_path_buf(),
        None => PathBuf::from(format!("{stem}.{}", format.extension())),
    }
}

fn integrate(params: &PhysicalParams, stride_s: f64) -> Result<Trajectory> {
    let initial = TwoSpinState::from_initial(&params.initial_state);
    propagate_rk4(&initial, params, params.t_end_s, params.dt_s, stride_s)
}

/// Integrate the configured trajectory and write it out.
pub fn cmd_simulate(
    config: Option<&Path>,
    out: Option<&Path>,
    format: OutputFormat,
) -> Result<PathBuf> {
    let rc = load_config(config)?.resolve()?;
    let traj = integrate(&rc.params, rc.stride_s)?;
    let text = match format {
        OutputFormat::Csv => trajectory_csv(&traj)?,
        OutputFormat::Json => trajectory_json(&traj)?,
    };
    let path = default_out(out, "trajectory", format);
    std::fs::write(&path, text)?;
    println!(
        "{} scenario: {} samples over {} ns -> {} (max norm drift {:.3e})",
        rc.scenario.label(),
        traj.samples.len(),
        traj.t_end_s() * 1e9,
        path.display(),
        traj.max_norm_drift,
    );
    Ok(path)
}

/// Find the first time the conditional phase crosses the target and report
/// the state there. Not reaching the target is a distinct, documented exit.
pub fn cmd_gate_time(
    config: Option<&Path>,
    out: Option<&Path>,
    format: OutputFormat,
    target_rad: f64,
) -> Result<(PathBuf, GateTimeReport)> {
    let rc = load_config(config)?.resolve()?;
    let traj = integrate(&rc.params, rc.stride_s)?;
    match gate_time(&traj, target_rad)? {
        GateOutcome::NotReached {
            theta_min_rad,
            theta_max_rad,
        } => Err(Error::NotReached {
            target_rad,
            horizon_ns: rc.params.t_end_s * 1e9,
            theta_min_rad,
            theta_max_rad,
        }),
        GateOutcome::Reached(gt) => {
            let report = GateTimeReport {
                target_rad,
                tau_ns: gt.tau_s * 1e9,
                theta_at_tau_rad: gt.theta_at_tau_rad,
                concurrence_at_tau: gt.concurrence_at_tau,
                max_norm_drift: traj.max_norm_drift,
                params: rc.params,
            };
            let text = match format {
                OutputFormat::Csv => gate_report_csv(&report),
                OutputFormat::Json => gate_report_json(&report),
            };
            let path = default_out(out, "gate_time", format);
            std::fs::write(&path, text)?;
            println!(
                "theta = {:.6} rad at tau = {:.6} ns, C(tau) = {:.4} -> {}",
                gt.theta_at_tau_rad,
                gt.tau_s * 1e9,
                gt.concurrence_at_tau,
                path.display(),
            );
            Ok((path, report))
        }
    }
}

/// Sweep a (B_t, ω, r) grid; optionally pick the fastest gate meeting a
/// concurrence floor. Every grid point yields a row, failures included.
#[allow(clippy::too_many_arguments)]
pub fn cmd_sweep(
    config: Option<&Path>,
    grid_spec: Option<&str>,
    out: Option<&Path>,
    format: OutputFormat,
    target_rad: f64,
    jobs: usize,
    c_min: Option<f64>,
) -> Result<PathBuf> {
    let rc = load_config(config)?.resolve()?;
    let grid = match grid_spec {
        Some(spec) => parse_grid(spec, &rc.params)?,
        // No grid: the degenerate 1×1×1 grid at the configured point.
        None => SweepGrid {
            b_t_t: vec![rc.params.b_t_t],
            omega_rad_s: vec![rc.params.omega_rad_s],
            r_m: vec![rc.params.r_m],
        },
    };
    let records = sweep(
        &rc.params,
        &grid,
        target_rad,
        rc.params.t_end_s,
        rc.stride_s,
        jobs,
    )?;
    let text = match format {
        OutputFormat::Csv => sweep_csv(&records),
        OutputFormat::Json => sweep_json(&records),
    };
    let path = default_out(out, "sweep", format);
    std::fs::write(&path, text)?;

    let reached = records
        .iter()
        .filter(|r| r.status == SweepStatus::Reached)
        .count();
    let failed = records
        .iter()
        .filter(|r| r.status == SweepStatus::Failed)
        .count();
    println!(
        "{} grid points ({} reached, {} failed) -> {}",
        records.len(),
        reached,
        failed,
        path.display(),
    );

    if let Some(floor) = c_min {
        if !(0.0..1.0).contains(&floor) {
            return Err(Error::Config(format!(
                "c-min: concurrence floor must lie in [0, 1), got {floor}"
            )));
        }
        match select_best(&records, floor) {
            OptimizeOutcome::Feasible { best } => println!(
                "fastest gate with C >= {}: Bt_T = {}, omega = {} rad/s, tau = {:.6} ns, C = {:.4}",
                floor,
                best.b_t_t,
                best.omega_rad_s,
                best.gate_time_s.unwrap_or(f64::NAN) * 1e9,
                best.concurrence_at_gate.unwrap_or(f64::NAN),
            ),
            OptimizeOutcome::Infeasible { best_concurrence } => match best_concurrence {
                Some(best) => println!(
                    "no swept point reaches C >= {}; best concurrence {:.4} at Bt_T = {}, \
                     omega = {} rad/s",
                    floor,
                    best.concurrence_at_gate.unwrap_or(f64::NAN),
                    best.b_t_t,
                    best.omega_rad_s,
                ),
                None => println!("no swept point reached the target phase at all"),
            },
        }
    }
    Ok(path)
}

/// Calibrate the inter-spin distance and frequency convention against a
/// target gate time, and freeze the winner into a calibration document.
pub fn cmd_calibrate(
    config: Option<&Path>,
    out: Option<&Path>,
    target_tau_ns: f64,
) -> Result<(PathBuf, CalibrationResult)> {
    let mut cfg = load_config(config)?;
    if cfg.scenario.is_none() {
        cfg.scenario = Some(Scenario::PiGate);
    }
    let rc = cfg.resolve()?;
    let opts = CalibrationOptions {
        horizon_s: rc.params.t_end_s,
        stride_s: rc.stride_s,
        ..CalibrationOptions::default()
    };
    let result = calibrate_r(&rc.params, target_tau_ns * 1e-9, &opts)?;

    for cand in result.candidates.iter() {
        println!(
            "candidate [{}]: r = {:.6} nm, tau = {:.6} ns, C(tau) = {:.4}, |dtau| = {:.4} ns",
            cand.convention.label(),
            cand.r_m * 1e9,
            cand.achieved_tau_s * 1e9,
            cand.concurrence_at_tau,
            cand.tau_error_s * 1e9,
        );
    }
    println!(
        "gate time monotone in r over the scan: {}",
        result.monotonic_in_r
    );

    let best = result.best;
    let achieved_ns = best.achieved_tau_s * 1e9;
    let within_band = (achieved_ns - target_tau_ns).abs() <= 0.25 * target_tau_ns
        && (0.80..=1.0).contains(&best.concurrence_at_tau);
    if !within_band {
        return Err(Error::CalibrationFailed(format!(
            "best candidate ({}, r = {:.6} nm) achieves tau = {:.6} ns with C = {:.4}, \
             outside the reproduction band (target {target_tau_ns} ns +/- 25%, C in [0.80, 1.0])",
            best.convention.label(),
            best.r_m * 1e9,
            achieved_ns,
            best.concurrence_at_tau,
        )));
    }

    let doc = CalibrationDoc {
        r_nm: best.r_m * 1e9,
        omega_convention: best.convention,
        achieved_tau_ns: achieved_ns,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
    };
    let path = out
        .map(Path::to_path_buf)
        .unwrap_or_else(|| PathBuf::from("calibration.toml"));
    doc.store(&path)?;
    println!(
        "calibrated: r = {:.6} nm, {} convention, tau = {:.6} ns -> {}",
        doc.r_nm,
        doc.omega_convention.label(),
        doc.achieved_tau_ns,
        path.display(),
    );
    Ok((path, result))
}

/// File names of the four reference figures.
pub const FIGURE_FILES: [&str; 4] = [
    "fig1_theta_static.csv",
    "fig2_conc_static.csv",
    "fig3_theta_gate.csv",
    "fig4_conc_gate.csv",
];

/// Emit the four reference-figure data files (θ and C for the static and
/// driven scenarios) into a directory. The configured scenario key is
/// ignored: figures always cover both scenarios.
pub fn cmd_figures(config: Option<&Path>, out_dir: Option<&Path>) -> Result<Vec<PathBuf>> {
    let base_cfg = load_config(config)?;
    let dir = out_dir.unwrap_or_else(|| Path::new("."));
    std::fs::create_dir_all(dir)?;

    let mut written = Vec::new();
    for (scenario, theta_file, conc_file) in [
        (Scenario::Static, FIGURE_FILES[0], FIGURE_FILES[1]),
        (Scenario::PiGate, FIGURE_FILES[2], FIGURE_FILES[3]),
    ] {
        let mut cfg = base_cfg.clone();
        cfg.scenario = Some(scenario);
        let rc = cfg.resolve()?;
        let traj = integrate(&rc.params, rc.stride_s)?;
        let ps = phase_series(&traj)?;
        let theta: Vec<(f64, f64)> = ps
            .t_s
            .iter()
            .copied()
            .zip(ps.theta_rad.iter().copied())
            .collect();
        let conc = concurrence_series(&traj)?;

        let theta_path = dir.join(theta_file);
        std::fs::write(&theta_path, figure_csv(&theta, "theta_rad"))?;
        written.push(theta_path);
        let conc_path = dir.join(conc_file);
        std::fs::write(&conc_path, figure_csv(&conc, "concurrence"))?;
        written.push(conc_path);
    }
    println!(
        "wrote {} figure files to {}",
        written.len(),
        dir.display()
    );
    Ok(written)
}
