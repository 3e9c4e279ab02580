use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use moran_core::experiments::{self, ExperimentKind, ExperimentSpec};
use moran_core::io::{self as mio, PlotSpec, Series, SeriesStyle, StepLogWriter, StepRecord, Table};
use moran_core::model::Horizon;
use moran_core::{chains, rng, selftest, theory, RunConfig, Simulation, TheoryParams, TrajectoryPoint};

use crate::args::{Command, ExperimentArgs, Format, Output, SelftestArgs, SimulateArgs, Stop, TheoryArgs};
use crate::config::Parsed;
use crate::CliError;

/// Environment variable that relative output paths are resolved against.
pub const OUT_DIR_VAR: &str = "MORAN_OUT_DIR";

pub fn run(parsed: Parsed) -> Result<(), CliError> {
    let meta = parsed.effective;
    match parsed.cli.command {
        Command::Theory(a) => theory_cmd(&a, &meta),
        Command::Simulate(a) => simulate_cmd(&a, &meta),
        Command::Trajectories(a) => experiment_cmd(ExperimentKind::Trajectories, &a, &meta),
        Command::Sweep(a) => experiment_cmd(ExperimentKind::Sweep, &a, &meta),
        Command::Convergence(a) => experiment_cmd(ExperimentKind::Convergence, &a, &meta),
        Command::Hitting(a) => experiment_cmd(ExperimentKind::Hitting, &a, &meta),
        Command::Selftest(a) => selftest_cmd(&a),
    }
}

fn resolve(path: &Path) -> PathBuf {
    match std::env::var_os(OUT_DIR_VAR) {
        Some(dir) if path.is_relative() => Path::new(&dir).join(path),
        _ => path.to_path_buf(),
    }
}

fn invalid(msg: String) -> CliError {
    CliError::Validation(msg)
}

fn io_err(path: &Path, e: std::io::Error) -> CliError {
    CliError::Runtime(format!("{}: {e}", path.display()))
}

fn check_level(a: f64, b: f64) -> Result<(), CliError> {
    if !(b > a && b <= 1.0) {
        return Err(invalid(format!("invalid parameter b = {b}: must lie in (a, 1] with a = {a}")));
    }
    Ok(())
}

fn warn_empty_start(n: usize, a: f64) {
    if moran_core::model::initial_count(a, n) == 0 {
        eprintln!("warning: floor(a N) = 0 for N = {n}, a = {a}; no advantaged individuals at start");
    }
}

fn write_csv(path: Option<&Path>, table: &Table, meta: &[(String, String)]) -> Result<(), CliError> {
    match path {
        Some(p) => {
            let p = resolve(p);
            mio::emit_csv(&p, table, meta)?;
            eprintln!("wrote {} rows to {}", table.len(), p.display());
        }
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            mio::write_csv(&mut lock, table, meta).map_err(|e| CliError::Runtime(e.to_string()))?;
            lock.flush().map_err(|e| CliError::Runtime(e.to_string()))?;
        }
    }
    Ok(())
}

/// Writes the table, or its plot when SVG is requested. A plot that cannot
/// be drawn falls back to CSV with a warning.
fn emit(out: &Output, table: &Table, plot: &PlotSpec, meta: &[(String, String)]) -> Result<(), CliError> {
    if out.format == Format::Csv {
        return write_csv(out.out.as_deref(), table, meta);
    }
    match mio::render_svg(plot) {
        Ok(svg) => match &out.out {
            Some(p) => {
                let p = resolve(p);
                std::fs::write(&p, svg).map_err(|e| io_err(&p, e))?;
                eprintln!("wrote plot to {}", p.display());
                Ok(())
            }
            None => {
                print!("{svg}");
                Ok(())
            }
        },
        Err(e) => {
            eprintln!("warning: {e}; writing CSV instead");
            let csv_path = out.out.as_ref().map(|p| p.with_extension("csv"));
            write_csv(csv_path.as_deref(), table, meta)
        }
    }
}

fn theory_cmd(args: &TheoryArgs, meta: &[(String, String)]) -> Result<(), CliError> {
    let p = TheoryParams::new(args.a, args.s)?;
    let (table, plot) = if args.b_grid.is_empty() {
        if !(args.t_max >= 0.0 && args.t_max.is_finite()) {
            return Err(invalid(format!("invalid parameter t-max = {}: must be finite and >= 0", args.t_max)));
        }
        if !(args.dt > 0.0 && args.dt.is_finite()) {
            return Err(invalid(format!("invalid parameter dt = {}: must be finite and > 0", args.dt)));
        }
        let count = (args.t_max / args.dt + 1e-9).floor() as u64;
        let times: Vec<f64> = (0..=count).map(|k| k as f64 * args.dt).collect();
        let table = theory::trajectory_table(&p, &times)?;
        let plot = columns_plot(
            &table,
            "t",
            &["y", "u", "v"],
            format!("Limit trajectory, a={} s={}", args.a, args.s),
        );
        (table, plot)
    } else {
        for &b in &args.b_grid {
            check_level(args.a, b)?;
        }
        let table = theory::level_table(&p, &args.b_grid)?;
        let plot = columns_plot(
            &table,
            "b",
            &["u_level", "v_level"],
            format!("Weights at level b, a={} s={}", args.a, args.s),
        );
        (table, plot)
    };
    emit(&args.output, &table, &plot, meta)
}

fn columns_plot(table: &Table, x: &str, ys: &[&str], title: String) -> PlotSpec {
    const COLORS: [&str; 4] = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd"];
    let xs = table.column(x).unwrap_or_default();
    PlotSpec {
        title,
        x_label: x.to_string(),
        y_label: String::new(),
        series: ys
            .iter()
            .enumerate()
            .map(|(i, y)| Series {
                name: y.to_string(),
                color: COLORS[i % COLORS.len()].to_string(),
                style: SeriesStyle::Line,
                points: xs
                    .iter()
                    .copied()
                    .zip(table.column(y).unwrap_or_default())
                    .collect(),
            })
            .collect(),
    }
}

fn simulate_cmd(args: &SimulateArgs, meta: &[(String, String)]) -> Result<(), CliError> {
    let n = args.n;
    let max_steps = args.max_steps.unwrap_or_else(|| chains::default_horizon(n));
    let horizon = match args.stop {
        Stop::Steps => Horizon::Steps(args.steps.unwrap_or(10 * n as u64)),
        Stop::Level => {
            let b = args
                .b
                .ok_or_else(|| invalid("--stop level needs --b".to_string()))?;
            check_level(args.a, b)?;
            Horizon::HitLevel {
                level: moran_core::model::initial_count(b, n),
                max_steps,
            }
        }
        Stop::Fixation => Horizon::Fixation { max_steps },
    };
    let cfg = RunConfig {
        n_individuals: n,
        initial_fraction: args.a,
        selection: args.s,
        seed: args.seed,
        horizon,
    };
    cfg.validate()?;
    warn_empty_start(n, args.a);
    if let Some(b) = args.b {
        check_level(args.a, b)?;
    }
    let stride = args.stride.unwrap_or(experiments::recording_stride(n));
    if stride == 0 {
        return Err(invalid("invalid parameter stride = 0: must be >= 1".to_string()));
    }
    let mut sim = Simulation::from_config(&cfg)?;
    let mut points = vec![sim.point()];

    if let Some(log_path) = &args.replay {
        let log_path = resolve(log_path);
        let file = File::open(&log_path).map_err(|e| io_err(&log_path, e))?;
        let records = mio::read_step_log(BufReader::new(file))?;
        let replayed = mio::replay(&mut sim, &records)?;
        points.extend(replayed.iter().filter(|z| z.step % stride == 0));
        eprintln!("replayed {} steps", replayed.len());
    } else {
        let mut log = match &args.step_log {
            Some(p) => {
                let p = resolve(p);
                let f = File::create(&p).map_err(|e| io_err(&p, e))?;
                Some((StepLogWriter::new(BufWriter::new(f)), p))
            }
            None => None,
        };
        let mut log_error: Option<CliError> = None;
        let mut g = rng::from_seed(args.seed);
        let outcome = sim.run(horizon, &mut g, |ev, z| {
            if z.step % stride == 0 {
                points.push(*z);
            }
            if let Some((w, p)) = log.as_mut() {
                if log_error.is_none() {
                    if let Err(e) = w.write(&StepRecord::new(*ev, z)) {
                        log_error = Some(io_err(p, e));
                    }
                }
            }
        });
        if let Some(e) = log_error {
            return Err(e);
        }
        if let Some((w, p)) = log {
            w.into_inner().flush().map_err(|e| io_err(&p, e))?;
        }
        eprintln!(
            "stopped after {} steps with Y = {}{}",
            outcome.steps,
            outcome.final_count,
            if outcome.censored() { " (censored)" } else { "" }
        );
    }
    let last = sim.point();
    if points.last().map(|z| z.step) != Some(last.step) {
        points.push(last);
    }
    let table = trajectory_table(&points, n);
    let plot = columns_plot(
        &table,
        "t",
        &["y", "w"],
        format!("Single run, N={} a={} s={}", n, args.a, args.s),
    );
    emit(&args.output, &table, &plot, meta)
}

fn trajectory_table(points: &[TrajectoryPoint], n: usize) -> Table {
    let mut table = Table::new(&["step", "t", "y", "u", "v", "w"]);
    for z in points {
        table.push(vec![
            z.step.into(),
            z.time(n).into(),
            z.y.into(),
            z.u.into(),
            z.v.into(),
            z.total_weight().into(),
        ]);
    }
    table
}

fn experiment_cmd(kind: ExperimentKind, args: &ExperimentArgs, meta: &[(String, String)]) -> Result<(), CliError> {
    let spec = ExperimentSpec {
        kind,
        n_grid: args.n.clone(),
        a_grid: args.a_grid.clone(),
        s_grid: args.s.clone(),
        b_grid: args.b_grid.clone(),
        horizon: args.horizon,
        steps: args.steps,
        replicates: args.reps,
        seed: args.seed,
    };
    spec.validate()?;
    if kind == ExperimentKind::Hitting {
        for &a in &spec.a_grid {
            for &b in &spec.b_grid {
                check_level(a, b)?;
            }
        }
    }
    for &n in &spec.n_grid {
        for &a in &spec.a_grid {
            warn_empty_start(n, a);
        }
    }
    let out = experiments::run(&spec)?;
    if out.censored > 0 {
        eprintln!("{} replicates censored", out.censored);
    }
    if let Some(p) = &args.summary {
        write_csv(Some(p), &out.summary, meta)?;
    }
    emit(&args.output, &out.table, &out.plot, meta)
}

fn flipped_drift(z: [f64; 3], s: f64) -> [f64; 3] {
    theory::g_increment(z, s).map(|x| -x)
}

fn selftest_cmd(args: &SelftestArgs) -> Result<(), CliError> {
    let report = if args.inject_sign_flip {
        selftest::run_with(flipped_drift)
    } else {
        selftest::run()
    };
    print!("{report}");
    if report.passed() {
        println!("all checks passed");
        Ok(())
    } else {
        Err(CliError::Selftest)
    }
}
