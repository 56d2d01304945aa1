use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::json;
use tvrelax::apps::{self, OuterOptions};
use tvrelax::energy::primal_energy;
use tvrelax::noise::add_gaussian_noise;
use tvrelax::recovery::{recover_u, threshold};
use tvrelax::volume::{solve_with_volume, volume_of};
use tvrelax::{solve as solve_field, ScalarField, SolverParams};

use crate::error::{CliError, CliResult};
use crate::io::{self, Raster};
use crate::report::{write_residuals, InputInfo, Report};
use crate::{DenoiseArgs, LabelArgs, NoiseArgs, Outputs, SegmentArgs, SolveArgs};

pub enum Status {
    Done,
    NotConverged,
}

const THREADS_VAR: &str = "TVRELAX_THREADS";

/// The solver runs on one thread; the variable is only checked so that a
/// bad value is reported rather than ignored.
fn threads() -> CliResult<Option<usize>> {
    match std::env::var(THREADS_VAR) {
        Err(std::env::VarError::NotPresent) => Ok(None),
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(Some(n)),
            _ => Err(CliError::Validation(format!("{THREADS_VAR} must be a positive integer, got {s:?}"))),
        },
        Err(e) => Err(CliError::Validation(format!("{THREADS_VAR}: {e}"))),
    }
}

/// Overlays the keys of a TOML file on `base`; unknown keys are rejected.
pub fn load_config(path: &Path, base: SolverParams) -> CliResult<SolverParams> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let bad = |e: &dyn std::fmt::Display| CliError::Validation(format!("{}: {e}", path.display()));
    let overlay: toml::Table = text.parse().map_err(|e| bad(&e))?;
    let mut merged = toml::Table::try_from(base).map_err(|e| bad(&e))?;
    merged.extend(overlay);
    merged.try_into().map_err(|e| bad(&e))
}

fn input_info(path: &Path, raster: &Raster, f: &ScalarField) -> InputInfo {
    InputInfo {
        path: path.to_path_buf(),
        sha256: raster.sha256.clone(),
        dims: f.grid().dims().to_vec(),
        spacing: f.grid().spacing().to_vec(),
    }
}

fn same_shape(a: &Raster, b: &Raster, what: &str) -> CliResult<()> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(CliError::Validation(format!(
            "{what} is {}x{}, input is {}x{}",
            b.rows, b.cols, a.rows, a.cols
        )));
    }
    Ok(())
}

/// Share of pixels where `u` equals the truth image read as `> 1/2`.
fn agreement(input: &Raster, u: &ScalarField, truth: &Path) -> CliResult<f64> {
    let t = io::read(truth)?;
    same_shape(input, &t, "truth image")?;
    let hits = u
        .values()
        .iter()
        .zip(&t.values)
        .filter(|(&a, &b)| a == if b > 0.5 { 1.0 } else { 0.0 })
        .count();
    Ok(hits as f64 / u.len() as f64)
}

fn finish(mut report: Report, outputs: &Outputs, start: Instant) -> CliResult<Status> {
    report.timing.wall_time_s = start.elapsed().as_secs_f64();
    if let Some(path) = &outputs.report {
        report.write(path)?;
    }
    Ok(if report.status == "ok" {
        Status::Done
    } else {
        Status::NotConverged
    })
}

/// `<dir>/<stem><suffix>.<ext>` next to `path`.
fn sibling(path: &Path, suffix: &str) -> PathBuf {
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("out");
    let ext = path.extension().and_then(|s| s.to_str()).unwrap_or("pgm");
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

pub fn denoise(args: DenoiseArgs) -> CliResult<Status> {
    let start = Instant::now();
    let threads = threads()?;
    let p = args.solver.resolve(1e-3)?;
    let raster = io::read(&args.input)?;
    let f = raster.field(args.solver.spacing)?;
    let d = apps::denoise(&f, &p)?;
    io::write(&args.out, &d.u)?;
    if let Some(path) = &args.outputs.residuals {
        write_residuals(path, std::slice::from_ref(&d.report))?;
    }
    let g = f.map(|v| 0.5 - v);
    let mut result = json!({
        "energy": primal_energy(&d.u, &g, p.beta)?,
        "foreground_fraction": volume_of(&d.u) / f.grid().domain_volume(),
    });
    if let Some(truth) = &args.truth {
        result["agreement"] = json!(agreement(&raster, &d.u, truth)?);
    }
    let mut report = Report::new("denoise");
    report.input = Some(input_info(&args.input, &raster, &f));
    report.params = Some(p);
    report.threads = threads;
    report.add_solves(std::slice::from_ref(&d.report));
    report.result = result;
    finish(report, &args.outputs, start)
}

pub fn segment(args: SegmentArgs) -> CliResult<Status> {
    let start = Instant::now();
    let threads = threads()?;
    let p = args.solver.resolve(8e-3)?;
    let raster = io::read(&args.input)?;
    let f = raster.field(args.solver.spacing)?;
    let u0 = match &args.u0 {
        Some(path) => {
            let r = io::read(path)?;
            same_shape(&raster, &r, "initial indicator")?;
            let u = ScalarField::new(*f.grid(), r.values.iter().map(|&v| if v > 0.5 { 1.0 } else { 0.0 }).collect())?;
            Some((u, r.sha256))
        }
        None => None,
    };
    let opts = OuterOptions {
        max_iters: args.max_outer,
        ..OuterOptions::CHAN_VESE
    };
    let s = apps::chan_vese_with(&f, &p, u0.as_ref().map(|(u, _)| u), &opts)?;
    io::write(&args.out, &s.u)?;
    if let Some(path) = &args.outputs.residuals {
        write_residuals(path, &s.solves)?;
    }
    let mut result = json!({
        "c1": s.c1,
        "c2": s.c2,
        "outer_iters": s.outer_iters,
        "outer_converged": s.converged,
        "objective": s.objective,
        "objective_monotone": s.monotone,
        "empty_phase": s.empty_phase,
        "u0_sha256": u0.as_ref().map(|(_, h)| h),
    });
    if let Some(truth) = &args.truth {
        result["agreement"] = json!(agreement(&raster, &s.u, truth)?);
    }
    let mut report = Report::new("segment");
    report.input = Some(input_info(&args.input, &raster, &f));
    report.params = Some(p);
    report.threads = threads;
    report.add_solves(&s.solves);
    report.result = result;
    finish(report, &args.outputs, start)
}

pub fn label(args: LabelArgs) -> CliResult<Status> {
    let start = Instant::now();
    let threads = threads()?;
    let p = args.solver.resolve(8e-3)?;
    let raster = io::read(&args.input)?;
    let f = raster.field(args.solver.spacing)?;
    let opts = OuterOptions {
        max_iters: args.max_sweeps,
        ..OuterOptions::MULTILABEL
    };
    let s = apps::multilabel_with(&f, &p, args.m, None, &opts)?;
    io::write(&args.out, &s.piecewise_image)?;
    let mut phase_files = Vec::new();
    for b in 0..s.constants.len() {
        let z = ScalarField::from_fn(*f.grid(), |x| {
            let hit = s.indicators.iter().enumerate().all(|(j, u)| (u.values()[x] == 1.0) == ((b >> j) & 1 == 1));
            if hit { 1.0 } else { 0.0 }
        });
        let path = sibling(&args.out, &format!("_phase{b}"));
        io::write(&path, &z)?;
        phase_files.push(path.file_name().map(|n| n.to_string_lossy().into_owned()));
    }
    if let Some(path) = &args.outputs.residuals {
        write_residuals(path, &s.solves)?;
    }
    let mut report = Report::new("label");
    report.input = Some(input_info(&args.input, &raster, &f));
    report.params = Some(p);
    report.threads = threads;
    report.add_solves(&s.solves);
    report.result = json!({
        "m": s.m,
        "constants": s.constants,
        "sweeps": s.sweeps,
        "outer_converged": s.converged,
        "objective": s.objective,
        "objective_monotone": s.monotone,
        "empty_phases": s.empty_phases,
        "phase_files": phase_files,
    });
    finish(report, &args.outputs, start)
}

pub fn solve(args: SolveArgs) -> CliResult<Status> {
    let start = Instant::now();
    let threads = threads()?;
    let p = args.solver.resolve(1e-3)?;
    let raster = io::read(&args.g)?;
    let mut g = raster.field(args.solver.spacing)?;
    if io::Format::of(&args.g)? != io::Format::Csv {
        g = g.map(|v| 2.0 * v - 1.0);
    }
    let mut report = Report::new("solve");
    report.input = Some(input_info(&args.g, &raster, &g));
    report.params = Some(p);
    report.threads = threads;

    let u = match args.volume {
        Some(volume) => {
            if args.outputs.residuals.is_some() {
                return Err(CliError::Validation("--residuals is not available with --volume".into()));
            }
            let tol = args.vol_tol.unwrap_or(0.5 * g.grid().cell_volume());
            let r = solve_with_volume(&g, &p, volume, tol)?;
            report.result = json!({
                "energy": primal_energy(&r.u, &g, p.beta)?,
                "volume": r.achieved_volume,
                "target_volume": volume,
                "vol_tol": tol,
                "multiplier": r.multiplier,
                "bracket": [r.bracket.0, r.bracket.1],
                "plateau": r.plateau,
                "evaluations": r.evaluations,
            });
            r.u
        }
        None => {
            let (q, r) = solve_field(&g, &p, None)?;
            let u = threshold(&recover_u(&q, &g, &p)?, p.threshold_t);
            if let Some(path) = &args.outputs.residuals {
                write_residuals(path, std::slice::from_ref(&r))?;
            }
            report.add_solves(std::slice::from_ref(&r));
            report.result = json!({
                "energy": primal_energy(&u, &g, p.beta)?,
                "volume": volume_of(&u),
            });
            u
        }
    };
    io::write(&args.out, &u)?;
    finish(report, &args.outputs, start)
}

pub fn add_noise(args: NoiseArgs) -> CliResult<Status> {
    let start = Instant::now();
    let raster = io::read(&args.input)?;
    let f = raster.field(None)?;
    let (noisy, stats) = add_gaussian_noise(&f, args.level, args.seed)?;
    io::write(&args.out, &noisy)?;
    let mut report = Report::new("add-noise");
    report.input = Some(input_info(&args.input, &raster, &f));
    report.result = json!({
        "level": args.level,
        "seed": args.seed,
        "sigma": stats.sigma,
        "empirical_sigma": stats.empirical_sigma,
        "clamped_fraction": stats.clamped_fraction,
    });
    let outputs = Outputs {
        report: args.report,
        residuals: None,
    };
    finish(report, &outputs, start)
}
