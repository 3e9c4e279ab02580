//! Monte Carlo studies comparing the simulated `Z_n` with the limit.
//!
//! Every study iterates over a grid of parameter cells in a fixed order
//! (`N`, then `a`, then `s`, then `b`). Replicate `r` of cell `c` draws from
//! [`rng::replicate_rng`]`(seed, c, r)`, replicates run in parallel and their
//! results are gathered in replicate order, so tables are bit-identical
//! across reruns and thread counts.

use rayon::prelude::*;

use crate::chains::{self, ruin_probability, YChain};
use crate::error::{Error, Result};
use crate::io::{PlotSpec, Series, SeriesStyle, Table};
use crate::model::{initial_count, Horizon, PopulationState};
use crate::rng;
use crate::sim::Simulation;
use crate::theory::{self, TheoryParams};
use crate::weights::TrajectoryPoint;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExperimentKind {
    Trajectories,
    Sweep,
    Convergence,
    Hitting,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::Trajectories => "trajectories",
            ExperimentKind::Sweep => "sweep",
            ExperimentKind::Convergence => "convergence",
            ExperimentKind::Hitting => "hitting",
        }
    }
}

/// Default rescaled horizon `c` for trajectories and convergence.
pub const DEFAULT_HORIZON: f64 = 10.0;
/// Default step count `n` of the sweep.
pub const DEFAULT_SWEEP_STEPS: u64 = 40_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: ExperimentKind,
    pub n_grid: Vec<usize>,
    pub a_grid: Vec<f64>,
    pub s_grid: Vec<f64>,
    /// Target levels; used by the hitting study only.
    pub b_grid: Vec<f64>,
    /// Rescaled time horizon `c` (trajectories, convergence).
    pub horizon: f64,
    /// Fixed step count `n` (sweep).
    pub steps: u64,
    pub replicates: u32,
    pub seed: u64,
}

impl ExperimentSpec {
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentSpec {
            kind,
            n_grid: vec![1000],
            a_grid: vec![0.01],
            s_grid: vec![1.0],
            b_grid: vec![0.5],
            horizon: DEFAULT_HORIZON,
            steps: DEFAULT_SWEEP_STEPS,
            replicates: 10,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::invalid("reps", 0, "must be >= 1"));
        }
        for (name, empty) in [
            ("N", self.n_grid.is_empty()),
            ("a", self.a_grid.is_empty()),
            ("s", self.s_grid.is_empty()),
            ("b", self.kind == ExperimentKind::Hitting && self.b_grid.is_empty()),
        ] {
            if empty {
                return Err(Error::invalid(name, "[]", "grid must not be empty"));
            }
        }
        for &n in &self.n_grid {
            if n < 2 {
                return Err(Error::invalid("N", n, "must be >= 2"));
            }
            if n > u32::MAX as usize {
                return Err(Error::invalid("N", n, "must fit in 32 bits"));
            }
        }
        for &a in &self.a_grid {
            if !(a > 0.0 && a < 1.0) {
                return Err(Error::invalid("a", a, "must lie in (0, 1)"));
            }
        }
        for &s in &self.s_grid {
            if !(s > 0.0 && s.is_finite()) {
                return Err(Error::invalid("s", s, "must be finite and > 0"));
            }
        }
        if self.kind == ExperimentKind::Hitting {
            for &b in &self.b_grid {
                for &a in &self.a_grid {
                    if !(b >= a && b <= 1.0) {
                        return Err(Error::invalid("b", b, "must lie in [a, 1]"));
                    }
                }
            }
        }
        if matches!(
            self.kind,
            ExperimentKind::Trajectories | ExperimentKind::Convergence
        ) && !(self.horizon > 0.0 && self.horizon.is_finite())
        {
            return Err(Error::invalid("horizon", self.horizon, "must be finite and > 0"));
        }
        if self.kind == ExperimentKind::Sweep && self.steps == 0 {
            return Err(Error::invalid("steps", 0, "must be >= 1"));
        }
        if self.cells().len() > u32::MAX as usize {
            return Err(Error::invalid("grid", self.cells().len(), "too many cells"));
        }
        Ok(())
    }

    /// Parameter cells in grid order.
    pub fn cells(&self) -> Vec<GridCell> {
        let b_grid: &[f64] = if self.kind == ExperimentKind::Hitting {
            &self.b_grid
        } else {
            &[f64::NAN]
        };
        let mut out = Vec::new();
        for &n in &self.n_grid {
            for &a in &self.a_grid {
                for &s in &self.s_grid {
                    for &b in b_grid {
                        out.push(GridCell {
                            index: out.len() as u32,
                            n,
                            a,
                            s,
                            b,
                        });
                    }
                }
            }
        }
        out
    }

    pub fn metadata(&self) -> Vec<(String, String)> {
        let list = |v: &[f64]| v.iter().map(f64::to_string).collect::<Vec<_>>().join(",");
        let mut m = vec![
            ("kind".to_string(), self.kind.name().to_string()),
            (
                "N".to_string(),
                self.n_grid.iter().map(usize::to_string).collect::<Vec<_>>().join(","),
            ),
            ("a".to_string(), list(&self.a_grid)),
            ("s".to_string(), list(&self.s_grid)),
        ];
        match self.kind {
            ExperimentKind::Hitting => m.push(("b".to_string(), list(&self.b_grid))),
            ExperimentKind::Sweep => m.push(("steps".to_string(), self.steps.to_string())),
            _ => m.push(("horizon".to_string(), self.horizon.to_string())),
        }
        m.push(("reps".to_string(), self.replicates.to_string()));
        m.push(("seed".to_string(), self.seed.to_string()));
        m
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridCell {
    pub index: u32,
    pub n: usize,
    pub a: f64,
    pub s: f64,
    /// NaN unless the study has a level grid.
    pub b: f64,
}

impl GridCell {
    fn label(&self) -> String {
        format!("N={} a={} s={}", self.n, self.a, self.s)
    }

    fn theory(&self) -> Result<TheoryParams> {
        TheoryParams::new(self.a, self.s)
    }
}

/// Mean, spread and range of one quantity across replicates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReplicateSummary {
    pub count: usize,
    pub mean: f64,
    pub sd: f64,
    pub se: f64,
    pub min: f64,
    pub max: f64,
    /// Replicates left out of the statistics.
    pub censored: usize,
}

impl ReplicateSummary {
    pub fn from_values(values: &[f64], censored: usize) -> Self {
        let count = values.len();
        if count == 0 {
            return ReplicateSummary {
                count,
                mean: f64::NAN,
                sd: f64::NAN,
                se: f64::NAN,
                min: f64::NAN,
                max: f64::NAN,
                censored,
            };
        }
        let mean = values.iter().sum::<f64>() / count as f64;
        let sd = if count > 1 {
            let ss: f64 = values.iter().map(|x| (x - mean) * (x - mean)).sum();
            (ss / (count - 1) as f64).sqrt()
        } else {
            0.0
        };
        ReplicateSummary {
            count,
            mean,
            sd,
            se: sd / (count as f64).sqrt(),
            min: values.iter().copied().fold(f64::INFINITY, f64::min),
            max: values.iter().copied().fold(f64::NEG_INFINITY, f64::max),
            censored,
        }
    }
}

/// Sample quantile with linear interpolation between order statistics.
pub fn quantile(values: &[f64], q: f64) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let h = q.clamp(0.0, 1.0) * (v.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    v[lo] + (h - lo as f64) * (v[hi] - v[lo])
}

/// Result of a study: per-replicate rows, per-cell summary and a plot.
#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub table: Table,
    pub summary: Table,
    pub plot: PlotSpec,
    /// Replicates that hit a step budget or an absorbing boundary first.
    pub censored: usize,
}

pub fn run(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    match spec.kind {
        ExperimentKind::Trajectories => run_trajectories(spec),
        ExperimentKind::Sweep => run_sweep(spec),
        ExperimentKind::Convergence => run_convergence(spec),
        ExperimentKind::Hitting => run_hitting(spec),
    }
}

fn check_kind(spec: &ExperimentSpec, kind: ExperimentKind) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::invalid("kind", spec.kind.name(), "wrong study for this runner"));
    }
    spec.validate()
}

fn start_state(cell: &GridCell) -> Result<PopulationState> {
    PopulationState::new(cell.n, cell.s, initial_count(cell.a, cell.n))
}

fn replicates<T, F>(spec: &ExperimentSpec, cell: &GridCell, job: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(u32, &mut rng::SimRng) -> Result<T> + Sync,
{
    (0..spec.replicates)
        .into_par_iter()
        .map(|r| job(r, &mut rng::replicate_rng(spec.seed, cell.index, r)))
        .collect()
}

/// Recording stride of trajectory tables, `ceil(N / 100)`.
pub fn recording_stride(n: usize) -> u64 {
    n.div_ceil(100) as u64
}

fn horizon_steps(n: usize, c: f64) -> u64 {
    (c * n as f64).floor() as u64
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn color(i: usize) -> String {
    PALETTE[i % PALETTE.len()].to_string()
}

/// Plotted simulated curves per cell.
const PLOTTED_REPLICATES: u32 = 10;

/// Simulated `y` and total weight `w = u + v` against the limit on a grid
/// of every [`recording_stride`] steps up to `t = horizon`.
///
/// Columns: `t,rep,y_sim,w_sim,y_theory,w_theory,N,a,s,seed`.
pub fn run_trajectories(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    check_kind(spec, ExperimentKind::Trajectories)?;
    let mut table = Table::new(&[
        "t", "rep", "y_sim", "w_sim", "y_theory", "w_theory", "N", "a", "s", "seed",
    ]);
    let mut summary = Table::new(&[
        "N", "a", "s", "t", "reps", "w_mean", "w_sd", "w_min", "w_max", "w_theory",
    ]);
    let mut plot = PlotSpec {
        title: "Genetic weight of initially advantaged individuals".into(),
        x_label: "t".into(),
        y_label: "(U+V)/N".into(),
        series: Vec::new(),
    };
    for (ci, cell) in spec.cells().iter().enumerate() {
        let p = cell.theory()?;
        let stride = recording_stride(cell.n);
        let total = horizon_steps(cell.n, spec.horizon);
        let grid: Vec<u64> = (0..=total).step_by(stride as usize).collect();
        let times: Vec<f64> = grid.iter().map(|&k| k as f64 / cell.n as f64).collect();
        let theory_pts = times
            .par_iter()
            .map(|&t| theory::z_of_t(&p, t))
            .collect::<Result<Vec<_>>>()?;
        let runs = replicates(spec, cell, |_, r| {
            let mut sim = Simulation::new(start_state(cell)?);
            let mut pts = vec![sim.point()];
            sim.run(Horizon::Steps(total), r, |_, z| {
                if z.step % stride == 0 {
                    pts.push(*z);
                }
            });
            Ok(pts)
        })?;
        for (rep, pts) in runs.iter().enumerate() {
            for (z, th) in pts.iter().zip(&theory_pts) {
                table.push(vec![
                    z.time(cell.n).into(),
                    rep.into(),
                    z.y.into(),
                    z.total_weight().into(),
                    th.y.into(),
                    th.total_weight().into(),
                    cell.n.into(),
                    cell.a.into(),
                    cell.s.into(),
                    spec.seed.into(),
                ]);
            }
        }
        for (k, th) in theory_pts.iter().enumerate() {
            let w: Vec<f64> = runs.iter().map(|pts| pts[k].total_weight()).collect();
            let st = ReplicateSummary::from_values(&w, 0);
            summary.push(vec![
                cell.n.into(),
                cell.a.into(),
                cell.s.into(),
                times[k].into(),
                st.count.into(),
                st.mean.into(),
                st.sd.into(),
                st.min.into(),
                st.max.into(),
                th.total_weight().into(),
            ]);
        }
        let col = color(ci);
        for pts in runs.iter().take(PLOTTED_REPLICATES as usize) {
            plot.series.push(Series {
                name: format!("simulated, {}", cell.label()),
                color: col.clone(),
                style: SeriesStyle::Line,
                points: pts.iter().map(|z| (z.time(cell.n), z.total_weight())).collect(),
            });
        }
        plot.series.push(Series {
            name: format!("theory, {}", cell.label()),
            color: "black".into(),
            style: SeriesStyle::Dashed,
            points: theory_pts.iter().map(|z| (z.t, z.total_weight())).collect(),
        });
    }
    Ok(ExperimentOutput {
        table,
        summary,
        plot,
        censored: 0,
    })
}

struct SweepRun {
    at_n: TrajectoryPoint,
    fixed_at_n: bool,
    at_fixation: TrajectoryPoint,
    fixation_censored: bool,
}

/// Total weight `(U_n + V_n)/N` after a fixed number of steps, and the same
/// replicate continued until `Y` is absorbed.
///
/// Columns: `N,a,s,seed,rep,steps,y_n,u_n,v_n,w_n,fixed_at_n,fixation_step,y_fix,w_fix`.
pub fn run_sweep(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    check_kind(spec, ExperimentKind::Sweep)?;
    let mut table = Table::new(&[
        "N", "a", "s", "seed", "rep", "steps", "y_n", "u_n", "v_n", "w_n", "fixed_at_n",
        "fixation_step", "y_fix", "w_fix",
    ]);
    let mut summary = Table::new(&[
        "N", "a", "s", "reps", "unfixed_at_n", "w_mean", "w_sd", "w_se", "w_min", "w_max",
        "w_fix_mean", "w_fix_se", "fixation_censored", "theory_u_inf", "neutral",
        "infinite_selection",
    ]);
    let mut censored = 0;
    let mut means: Vec<(f64, f64, f64)> = Vec::new();
    for cell in spec.cells() {
        let runs = replicates(spec, &cell, |_, r| {
            let mut sim = Simulation::new(start_state(&cell)?);
            sim.run(Horizon::Steps(spec.steps), r, |_, _| {});
            let at_n = sim.point();
            let fixed_at_n = sim.state().is_absorbed();
            let out = sim.run(
                Horizon::Fixation {
                    max_steps: chains::default_horizon(cell.n),
                },
                r,
                |_, _| {},
            );
            Ok(SweepRun {
                at_n,
                fixed_at_n,
                at_fixation: sim.point(),
                fixation_censored: out.censored(),
            })
        })?;
        for (rep, run) in runs.iter().enumerate() {
            table.push(vec![
                cell.n.into(),
                cell.a.into(),
                cell.s.into(),
                spec.seed.into(),
                rep.into(),
                spec.steps.into(),
                run.at_n.y.into(),
                run.at_n.u.into(),
                run.at_n.v.into(),
                run.at_n.total_weight().into(),
                run.fixed_at_n.into(),
                run.at_fixation.step.into(),
                run.at_fixation.y.into(),
                run.at_fixation.total_weight().into(),
            ]);
        }
        let w: Vec<f64> = runs.iter().map(|r| r.at_n.total_weight()).collect();
        let unfixed = runs.iter().filter(|r| !r.fixed_at_n).count();
        let st = ReplicateSummary::from_values(&w, 0);
        let fix: Vec<f64> = runs
            .iter()
            .filter(|r| !r.fixation_censored)
            .map(|r| r.at_fixation.total_weight())
            .collect();
        let fix_censored = runs.len() - fix.len();
        censored += fix_censored;
        let fst = ReplicateSummary::from_values(&fix, fix_censored);
        let u_inf = theory::z_infinity(&cell.theory()?)?.u;
        summary.push(vec![
            cell.n.into(),
            cell.a.into(),
            cell.s.into(),
            st.count.into(),
            unfixed.into(),
            st.mean.into(),
            st.sd.into(),
            st.se.into(),
            st.min.into(),
            st.max.into(),
            fst.mean.into(),
            fst.se.into(),
            fix_censored.into(),
            u_inf.into(),
            cell.a.into(),
            theory::infinite_selection_weight(cell.a).into(),
        ]);
        means.push((cell.s, cell.a, st.mean));
    }
    let plot = sweep_plot(spec, &means)?;
    Ok(ExperimentOutput {
        table,
        summary,
        plot,
        censored,
    })
}

/// Simulated means as points, plus limit curves for `s = 0`, `s = 1`,
/// `s = 10`, every simulated `s`, and `s = ∞`.
fn sweep_plot(spec: &ExperimentSpec, means: &[(f64, f64, f64)]) -> Result<PlotSpec> {
    let lo = spec.a_grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = spec.a_grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let a_curve: Vec<f64> = if hi > lo {
        (0..=60).map(|i| lo + (hi - lo) * i as f64 / 60.0).collect()
    } else {
        vec![lo]
    };
    let mut s_curves = vec![1.0, 10.0];
    for &s in &spec.s_grid {
        if !s_curves.contains(&s) {
            s_curves.push(s);
        }
    }
    let mut plot = PlotSpec {
        title: "Asymptotic weight of initially advantaged individuals".into(),
        x_label: "a".into(),
        y_label: "(U+V)/N".into(),
        series: Vec::new(),
    };
    for (i, &s) in spec.s_grid.iter().enumerate() {
        plot.series.push(Series {
            name: format!("simulated mean, s={s}"),
            color: color(i),
            style: SeriesStyle::Points,
            points: means
                .iter()
                .filter(|m| m.0 == s)
                .map(|m| (m.1, m.2))
                .collect(),
        });
    }
    plot.series.push(Series {
        name: "theory, s=0".into(),
        color: "gray".into(),
        style: SeriesStyle::Dashed,
        points: a_curve.iter().map(|&a| (a, a)).collect(),
    });
    for &s in &s_curves {
        let pts = a_curve
            .iter()
            .map(|&a| Ok((a, theory::z_infinity(&TheoryParams::new(a, s)?)?.u)))
            .collect::<Result<Vec<_>>>()?;
        let i = spec.s_grid.iter().position(|&x| x == s).unwrap_or(spec.s_grid.len() + 1);
        plot.series.push(Series {
            name: format!("theory, s={s}"),
            color: color(i),
            style: SeriesStyle::Line,
            points: pts,
        });
    }
    plot.series.push(Series {
        name: "theory, s=inf".into(),
        color: "black".into(),
        style: SeriesStyle::Line,
        points: a_curve
            .iter()
            .map(|&a| (a, theory::infinite_selection_weight(a)))
            .collect(),
    });
    Ok(plot)
}

/// `E_N = sup_{t <= c} |Z_{floor(Nt)} - z_t|` per replicate. On each step
/// interval `[n/N, (n+1)/N)` the distance is checked at both ends.
///
/// Columns: `N,a,s,c,seed,rep,sup_error`.
pub fn run_convergence(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    check_kind(spec, ExperimentKind::Convergence)?;
    let c = spec.horizon;
    let mut table = Table::new(&["N", "a", "s", "c", "seed", "rep", "sup_error"]);
    let mut summary = Table::new(&[
        "N", "a", "s", "c", "reps", "median", "q1", "q3", "mean", "max",
    ]);
    let mut medians: Vec<(String, usize, f64)> = Vec::new();
    for cell in spec.cells() {
        let p = cell.theory()?;
        let total = horizon_steps(cell.n, c);
        let nf = cell.n as f64;
        let theory_pts = (0..=total + 1)
            .into_par_iter()
            .map(|k| theory::z_of_t(&p, (k as f64 / nf).min(c)).map(|z| z.as_array()))
            .collect::<Result<Vec<_>>>()?;
        let errors = replicates(spec, &cell, |_, r| {
            let mut sim = Simulation::new(start_state(&cell)?);
            let first = sim.point();
            let mut sup = first
                .distance(&theory_pts[0])
                .max(first.distance(&theory_pts[1]));
            sim.run(Horizon::Steps(total), r, |_, z| {
                let k = z.step as usize;
                sup = sup
                    .max(z.distance(&theory_pts[k]))
                    .max(z.distance(&theory_pts[k + 1]));
            });
            Ok(sup)
        })?;
        for (rep, e) in errors.iter().enumerate() {
            table.push(vec![
                cell.n.into(),
                cell.a.into(),
                cell.s.into(),
                c.into(),
                spec.seed.into(),
                rep.into(),
                (*e).into(),
            ]);
        }
        let st = ReplicateSummary::from_values(&errors, 0);
        let median = quantile(&errors, 0.5);
        summary.push(vec![
            cell.n.into(),
            cell.a.into(),
            cell.s.into(),
            c.into(),
            st.count.into(),
            median.into(),
            quantile(&errors, 0.25).into(),
            quantile(&errors, 0.75).into(),
            st.mean.into(),
            st.max.into(),
        ]);
        medians.push((format!("a={} s={}", cell.a, cell.s), cell.n, median));
    }
    let mut plot = PlotSpec {
        title: "Sup-norm distance to the limit".into(),
        x_label: "N".into(),
        y_label: "median E_N".into(),
        series: Vec::new(),
    };
    let mut labels: Vec<&String> = Vec::new();
    for m in &medians {
        if !labels.contains(&&m.0) {
            labels.push(&m.0);
        }
    }
    for (i, label) in labels.iter().enumerate() {
        let pts: Vec<(f64, f64)> = medians
            .iter()
            .filter(|m| &m.0 == *label)
            .map(|m| (m.1 as f64, m.2))
            .collect();
        plot.series.push(Series {
            name: label.to_string(),
            color: color(i),
            style: SeriesStyle::Points,
            points: pts,
        });
    }
    Ok(ExperimentOutput {
        table,
        summary,
        plot,
        censored: 0,
    })
}

/// Full model until `Y` first equals `floor(bN)`, recording `U_T/N`.
/// Replicates absorbed at 0 first, or out of step budget, are censored.
///
/// Columns: `N,a,s,b,seed,rep,level,steps,hit,y,u,v`.
pub fn run_hitting(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    check_kind(spec, ExperimentKind::Hitting)?;
    let mut table = Table::new(&[
        "N", "a", "s", "b", "seed", "rep", "level", "steps", "hit", "y", "u", "v",
    ]);
    let mut summary = Table::new(&[
        "N", "a", "s", "b", "hits", "censored", "u_mean", "u_sd", "u_se", "u_min", "u_max",
        "u_theory", "v_theory",
    ]);
    let mut censored = 0;
    let mut points: Vec<(String, f64, f64, f64)> = Vec::new();
    for cell in spec.cells() {
        let level = initial_count(cell.b, cell.n);
        let runs = replicates(spec, &cell, |_, r| {
            let mut sim = Simulation::new(start_state(&cell)?);
            let out = sim.run(
                Horizon::HitLevel {
                    level,
                    max_steps: chains::default_horizon(cell.n),
                },
                r,
                |_, _| {},
            );
            Ok((out, sim.point()))
        })?;
        for (rep, (out, z)) in runs.iter().enumerate() {
            table.push(vec![
                cell.n.into(),
                cell.a.into(),
                cell.s.into(),
                cell.b.into(),
                spec.seed.into(),
                rep.into(),
                level.into(),
                out.steps.into(),
                out.reached.into(),
                z.y.into(),
                z.u.into(),
                z.v.into(),
            ]);
        }
        let hits: Vec<f64> = runs.iter().filter(|r| r.0.reached).map(|r| r.1.u).collect();
        let cell_censored = runs.len() - hits.len();
        censored += cell_censored;
        let st = ReplicateSummary::from_values(&hits, cell_censored);
        let th = theory::z_at_level(&cell.theory()?, cell.b)?;
        summary.push(vec![
            cell.n.into(),
            cell.a.into(),
            cell.s.into(),
            cell.b.into(),
            st.count.into(),
            st.censored.into(),
            st.mean.into(),
            st.sd.into(),
            st.se.into(),
            st.min.into(),
            st.max.into(),
            th.u.into(),
            th.v.into(),
        ]);
        points.push((cell.label(), cell.b, st.mean, th.u));
    }
    let mut plot = PlotSpec {
        title: "Weight at the hitting time of level b".into(),
        x_label: "b".into(),
        y_label: "U_T/N".into(),
        series: Vec::new(),
    };
    let mut labels: Vec<&String> = Vec::new();
    for p in &points {
        if !labels.contains(&&p.0) {
            labels.push(&p.0);
        }
    }
    for (i, label) in labels.iter().enumerate() {
        let mine: Vec<_> = points.iter().filter(|p| &p.0 == *label).collect();
        plot.series.push(Series {
            name: format!("simulated, {label}"),
            color: color(i),
            style: SeriesStyle::Points,
            points: mine.iter().filter(|p| p.2.is_finite()).map(|p| (p.1, p.2)).collect(),
        });
        plot.series.push(Series {
            name: format!("theory, {label}"),
            color: color(i),
            style: SeriesStyle::Line,
            points: mine.iter().map(|p| (p.1, p.3)).collect(),
        });
    }
    Ok(ExperimentOutput {
        table,
        summary,
        plot,
        censored,
    })
}

/// Fixation frequency of the marginal chain against the gambler's-ruin value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixationEstimate {
    pub replicates: u32,
    pub fixed: u32,
    /// Runs stopped by the step budget before absorption.
    pub censored: u32,
    pub ruin_probability: f64,
}

impl FixationEstimate {
    pub fn fraction(&self) -> f64 {
        f64::from(self.fixed) / f64::from(self.replicates)
    }

    /// Binomial standard error at the ruin probability.
    pub fn binomial_se(&self) -> f64 {
        let p = self.ruin_probability;
        (p * (1.0 - p) / f64::from(self.replicates)).sqrt()
    }
}

/// Runs `replicates` copies of `Y` from `floor(aN)` until absorption.
pub fn fixation_study(n: usize, a: f64, s: f64, replicates: u32, seed: u64) -> Result<FixationEstimate> {
    let start = initial_count(a, n);
    if start == 0 || start == n {
        return Err(Error::invalid("a", a, "floor(aN) must lie strictly between 0 and N"));
    }
    let ruin = ruin_probability(s, start as i64, 0, n as i64)?;
    let horizon = chains::default_horizon(n);
    let outcomes = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut chain = YChain::new(n, s, start)?;
            let mut g = rng::replicate_rng(seed, 0, r);
            Ok(chains::hitting_time(&mut chain, n, horizon, &mut g))
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FixationEstimate {
        replicates,
        fixed: outcomes.iter().filter(|o| o.hit).count() as u32,
        censored: outcomes.iter().filter(|o| o.horizon_exceeded()).count() as u32,
        ruin_probability: ruin,
    })
}
