//! Small exhaustive oracles run by `moran selftest`.

use std::fmt;

use crate::chains::y_transition;
use crate::dyadic::Dyadic;
use crate::error::Result;
use crate::model::PopulationState;
use crate::quadrature::{integrate, QuadratureOptions};
use crate::rng;
use crate::theory::{self, TheoryParams};
use crate::weights::{observe, WeightMatrix, WeightVector};

/// Signature of the limiting drift `g(z, s)`.
pub type Drift = fn([f64; 3], f64) -> [f64; 3];

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub max_deviation: f64,
    pub tolerance: f64,
    pub passed: bool,
}

impl Check {
    fn new(name: &'static str, max_deviation: f64, tolerance: f64) -> Self {
        Check {
            name,
            max_deviation,
            tolerance,
            passed: max_deviation <= tolerance,
        }
    }

    fn from_result(name: &'static str, tolerance: f64, r: Result<f64>) -> Self {
        match r {
            Ok(dev) => Check::new(name, dev, tolerance),
            Err(_) => Check {
                name,
                max_deviation: f64::INFINITY,
                tolerance,
                passed: false,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }
}

impl fmt::Display for SelftestReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.checks {
            writeln!(
                f,
                "{} {:<28} max deviation {:.3e} (tolerance {:.0e})",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.max_deviation,
                c.tolerance
            )?;
        }
        Ok(())
    }
}

pub const EXPECTATION: &str = "one-step expectation";
pub const MATRIX_VECTOR: &str = "matrix/vector equivalence";
pub const ROW_SUMS: &str = "exact row sums";
pub const JUMP_LAW: &str = "jump law p_k";
pub const CONSERVED: &str = "conserved quantity";
pub const ANTIDERIVATIVE: &str = "quadrature vs antiderivative";
pub const RK4: &str = "closed form vs RK4";

pub fn run() -> SelftestReport {
    run_with(theory::g_increment)
}

/// Runs every check, using `drift` wherever the limiting system enters.
pub fn run_with(drift: Drift) -> SelftestReport {
    let (vec_dev, row_dev) = matrix_vector_deviation(6, 2000, 11);
    SelftestReport {
        checks: vec![
            Check::new(EXPECTATION, expectation_check(drift), 1e-12),
            Check::new(MATRIX_VECTOR, vec_dev, 0.0),
            Check::new(ROW_SUMS, row_dev, 0.0),
            Check::new(JUMP_LAW, jump_law_deviation(), 1e-12),
            Check::from_result(CONSERVED, 1e-9, conserved_deviation()),
            Check::from_result(ANTIDERIVATIVE, 1e-9, antiderivative_deviation()),
            Check::from_result(RK4, 1e-6, rk4_deviation(drift)),
        ],
    }
}

/// `E[Z_{n+1} - Z_n]` by summing over every `(mother, father, killed)`.
pub fn expected_increment(state: &PopulationState, w: &WeightVector<f64>) -> [f64; 3] {
    let before = observe(state, w).as_array();
    let mut mean = [0.0; 3];
    for (ev, p) in state.enumerate_events() {
        let mut st = state.clone();
        let mut wt = w.clone();
        st.apply_advantage_update(&ev);
        wt.update(&ev);
        let after = observe(&st, &wt).as_array();
        for j in 0..3 {
            mean[j] += p * (after[j] - before[j]);
        }
    }
    mean
}

/// Largest gap between the exact expected increment and `drift(Z)/N` over
/// states visited by short random histories, `N` in 3..=6.
pub fn expectation_check(drift: Drift) -> f64 {
    let mut worst = 0.0f64;
    for n in 3..=6usize {
        for (h, &s) in [0.5, 1.0, 4.0].iter().cycle().take(10).enumerate() {
            let start = 1 + h % (n - 1);
            let mut state = PopulationState::new(n, s, start).expect("valid state");
            let mut w = WeightVector::from_flags(state.advantage_flags());
            let mut g = rng::replicate_rng(0x5e1f, n as u32, h as u32);
            for _ in 0..8 {
                worst = worst.max(expectation_gap(&state, &w, drift));
                let ev = state.sample_event(&mut g);
                state.apply_advantage_update(&ev);
                w.update(&ev);
            }
        }
    }
    worst
}

pub fn expectation_gap(state: &PopulationState, w: &WeightVector<f64>, drift: Drift) -> f64 {
    let n = state.n() as f64;
    let exact = expected_increment(state, w);
    let g = drift(observe(state, w).as_array(), state.selection());
    (0..3)
        .map(|j| (exact[j] - g[j] / n).abs())
        .fold(0.0, f64::max)
}

/// Runs `steps` random events on an `N`-site population with the exact
/// matrix and the exact vector side by side. Returns the largest
/// vector/column-sum gap and the largest row-sum deviation from 1 (both 0
/// when every comparison is exact).
pub fn matrix_vector_deviation(n: usize, steps: usize, seed: u64) -> (f64, f64) {
    let mut state = PopulationState::new(n, 1.0, n / 2).expect("valid state");
    let initial = state.advantage_flags().to_vec();
    let mut m = WeightMatrix::identity(n);
    let mut w: WeightVector<Dyadic> = WeightVector::from_flags(&initial);
    let mut g = rng::from_seed(seed);
    let gap = |x: &Dyadic, y: &Dyadic| {
        if x == y {
            0.0
        } else {
            (x.to_f64() - y.to_f64()).abs().max(f64::MIN_POSITIVE)
        }
    };
    let (mut vec_dev, mut row_dev) = (0.0f64, 0.0f64);
    for _ in 0..steps {
        let ev = state.sample_event(&mut g);
        state.apply_advantage_update(&ev);
        m.update(&ev);
        w.update(&ev);
        let sums = m.ancestor_column_sums(&initial);
        for (i, col) in sums.iter().enumerate() {
            vec_dev = vec_dev.max(gap(col, w.get(i)));
            row_dev = row_dev.max(gap(&m.row_sum(i), &Dyadic::one()));
        }
    }
    (vec_dev, row_dev)
}

/// Enumerated one-step law of `Y` against the closed form, `N` in 2..=6.
pub fn jump_law_deviation() -> f64 {
    let mut worst = 0.0f64;
    for n in 2..=6usize {
        for s in [0.0, 0.5, 1.0, 3.0] {
            for k in 0..=n {
                let state = PopulationState::new(n, s, k).expect("valid state");
                let (mut up, mut down) = (0.0, 0.0);
                for (ev, p) in state.enumerate_events() {
                    let mut st = state.clone();
                    st.apply_advantage_update(&ev);
                    match st.advantaged_count() as i64 - k as i64 {
                        1 => up += p,
                        -1 => down += p,
                        _ => {}
                    }
                }
                let t = y_transition(n, s, k);
                worst = worst.max((up - t.up).abs()).max((down - t.down).abs());
            }
        }
    }
    worst
}

const GRID_A: [f64; 3] = [0.01, 0.1, 0.5];
const GRID_S: [f64; 3] = [0.2, 1.0, 10.0];

/// `|u/y - v/(1-y) - e^{-t/2}|` over a grid of `(a, s, t)`.
pub fn conserved_deviation() -> Result<f64> {
    let mut worst = 0.0f64;
    for a in GRID_A {
        for s in GRID_S {
            let p = TheoryParams::new(a, s)?;
            for t in [0.0, 0.25, 1.0, 2.5, 5.0, 10.0, 20.0] {
                let z = theory::z_of_t(&p, t)?;
                worst = worst.max((z.conserved_ratio() - (-t / 2.0).exp()).abs());
            }
        }
    }
    Ok(worst)
}

/// At `s = 1/2` the integrand of `C` is `(3/2) x^{-3/2} - (1/2) x^{-1/2}`
/// with antiderivative `-3 x^{-1/2} - x^{1/2}`.
pub fn antiderivative_deviation() -> Result<f64> {
    let anti = |x: f64| -3.0 / x.sqrt() - x.sqrt();
    let a = 0.25;
    let p = TheoryParams::new(a, 0.5)?;
    let mut worst = 0.0f64;
    for y in [0.5, 0.75, 0.9, 1.0] {
        let exact = anti(y) - anti(a);
        worst = worst.max((theory::c_integral(&p, y)? - exact).abs());
    }
    // the plain integrand, integrated directly, agrees as well
    let direct = integrate(|x| theory::c_integrand(x, 0.5), a, 0.75, QuadratureOptions::default())?;
    worst = worst.max((direct.value - (anti(0.75) - anti(a))).abs());
    Ok(worst)
}

/// Sup distance on `[0, 20]` between the closed form and RK4 (step `1e-4`)
/// applied to `drift`, sampled every `0.05`.
pub fn rk4_deviation(drift: Drift) -> Result<f64> {
    let mut worst = 0.0f64;
    for a in GRID_A {
        for s in GRID_S {
            let p = TheoryParams::new(a, s)?;
            let mut samples = Vec::new();
            let mut i = 0u64;
            theory::rk4(|z| drift(z, s), [a, a, 0.0], 20.0, 1e-4, |t, z| {
                if i.is_multiple_of(500) {
                    samples.push((t, z));
                }
                i += 1;
            });
            for (t, z) in samples {
                let exact = theory::z_of_t(&p, t)?.as_array();
                for j in 0..3 {
                    worst = worst.max((exact[j] - z[j]).abs());
                }
            }
        }
    }
    Ok(worst)
}
