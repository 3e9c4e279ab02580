//! Ancestral genetic weights.
//!
//! `W_n(i, j)` is the probability, given the pedigree, that a gene of the
//! individual living on site `i` at step `n` descends from the ancestor on
//! site `j` at step 0. When site `k` is replaced by the offspring of `m` and
//! `f`, row `k` becomes the average of the old rows `m` and `f`.
//!
//! Only the column sums over the initially advantaged ancestors matter for
//! `U_n` and `V_n`, so simulations carry a [`WeightVector`]. The full
//! [`WeightMatrix`] is kept in exact arithmetic and serves as an oracle.

use crate::dyadic::{Dyadic, DyadicRow};
use crate::model::{PopulationState, StepEvent};

/// A scalar that weight vectors can be built from.
pub trait Weight: Clone + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    /// `(self + other) / 2`
    fn midpoint(&self, other: &Self) -> Self;
    fn add(&self, other: &Self) -> Self;
}

impl Weight for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn midpoint(&self, other: &Self) -> Self {
        (self + other) / 2.0
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
}

impl Weight for Dyadic {
    fn zero() -> Self {
        Dyadic::zero()
    }
    fn one() -> Self {
        Dyadic::one()
    }
    fn midpoint(&self, other: &Self) -> Self {
        Dyadic::midpoint(self, other)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
}

/// Exact `N x N` pedigree weight matrix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightMatrix {
    rows: Vec<DyadicRow>,
}

impl WeightMatrix {
    pub fn identity(n: usize) -> Self {
        WeightMatrix {
            rows: (0..n).map(|i| DyadicRow::unit(n, i)).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.rows.len()
    }

    pub fn entry(&self, i: usize, j: usize) -> Dyadic {
        self.rows[i].entry(j)
    }

    pub fn row(&self, i: usize) -> &DyadicRow {
        &self.rows[i]
    }

    /// Row `killed` becomes the average of the pre-update rows of the two
    /// parents, also when the killed individual is itself a parent.
    pub fn update(&mut self, ev: &StepEvent) {
        let row = DyadicRow::average(&self.rows[ev.mother], &self.rows[ev.father]);
        self.rows[ev.killed] = row;
    }

    pub fn row_sum(&self, i: usize) -> Dyadic {
        self.rows[i].sum()
    }

    /// `sum_{j in ancestors} W(i, j)` for every `i`.
    pub fn ancestor_column_sums(&self, ancestors: &[bool]) -> Vec<Dyadic> {
        self.rows.iter().map(|r| r.masked_sum(ancestors)).collect()
    }

    /// Total weight of ancestor `j` over the whole population.
    pub fn ancestor_weight(&self, j: usize) -> Dyadic {
        self.rows.iter().map(|r| r.entry(j)).sum()
    }
}

/// Per-individual probability of descending from the initially advantaged
/// set.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightVector<T = f64> {
    w: Vec<T>,
}

impl<T: Weight> WeightVector<T> {
    /// One for the initially advantaged sites, zero elsewhere.
    pub fn from_flags(initial: &[bool]) -> Self {
        WeightVector {
            w: initial
                .iter()
                .map(|&a| if a { T::one() } else { T::zero() })
                .collect(),
        }
    }

    pub fn from_values(w: Vec<T>) -> Self {
        WeightVector { w }
    }

    pub fn len(&self) -> usize {
        self.w.len()
    }

    pub fn is_empty(&self) -> bool {
        self.w.is_empty()
    }

    pub fn get(&self, i: usize) -> &T {
        &self.w[i]
    }

    pub fn as_slice(&self) -> &[T] {
        &self.w
    }

    /// Value the killed site receives under `ev`.
    pub fn offspring_weight(&self, ev: &StepEvent) -> T {
        self.w[ev.mother].midpoint(&self.w[ev.father])
    }

    pub fn update(&mut self, ev: &StepEvent) {
        self.w[ev.killed] = self.offspring_weight(ev);
    }

    /// `(U, V)`: sums over advantaged and disadvantaged sites, accumulated in
    /// ascending site order.
    pub fn stratum_sums(&self, advantaged: &[bool]) -> (T, T) {
        let mut u = T::zero();
        let mut v = T::zero();
        for (x, &adv) in self.w.iter().zip(advantaged) {
            if adv {
                u = u.add(x);
            } else {
                v = v.add(x);
            }
        }
        (u, v)
    }
}

/// Rescaled observable `Z_n = (Y_n, U_n, V_n) / N`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrajectoryPoint {
    pub step: u64,
    pub y: f64,
    pub u: f64,
    pub v: f64,
}

impl TrajectoryPoint {
    /// Rescaled time `n / N`.
    pub fn time(&self, n: usize) -> f64 {
        self.step as f64 / n as f64
    }

    /// Genetic weight of the initially advantaged ancestors, `u + v`.
    pub fn total_weight(&self) -> f64 {
        self.u + self.v
    }

    pub fn as_array(&self) -> [f64; 3] {
        [self.y, self.u, self.v]
    }

    /// Euclidean distance between the `(y, u, v)` triples.
    pub fn distance(&self, other: &[f64; 3]) -> f64 {
        euclid(&self.as_array(), other)
    }
}

pub(crate) fn euclid(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

/// Computes `Z_n` from scratch.
pub fn observe(state: &PopulationState, w: &WeightVector<f64>) -> TrajectoryPoint {
    let n = state.n() as f64;
    let (u, v) = w.stratum_sums(state.advantage_flags());
    TrajectoryPoint {
        step: state.step_index(),
        y: state.advantaged_count() as f64 / n,
        u: u / n,
        v: v / n,
    }
}
