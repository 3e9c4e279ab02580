//! Population state and the one-step Moran dynamics.

use rand::Rng;

use crate::error::{Error, Result};

/// One birth-death event: the parents' sites and the site of the individual
/// that is replaced. Parents may coincide, and the killed individual may be
/// one of the parents.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct StepEvent {
    /// Parent transmitting the selected locus.
    pub mother: usize,
    pub father: usize,
    pub killed: usize,
}

impl StepEvent {
    pub fn new(mother: usize, father: usize, killed: usize) -> Self {
        StepEvent {
            mother,
            father,
            killed,
        }
    }
}

/// Advantage membership of every site plus the selection strength.
///
/// Membership is kept twice: a dense flag per site, and one member list per
/// stratum with a back-index so that a site can move between strata with a
/// swap-remove. Drawing a uniform member of either stratum is O(1).
#[derive(Debug, Clone)]
pub struct PopulationState {
    selection: f64,
    step: u64,
    advantaged: Vec<bool>,
    adv_sites: Vec<usize>,
    dis_sites: Vec<usize>,
    // index of each site inside its stratum list
    slot: Vec<usize>,
}

impl PopulationState {
    /// `initial_advantaged` individuals on sites `0..initial_advantaged`.
    pub fn new(n: usize, selection: f64, initial_advantaged: usize) -> Result<Self> {
        if initial_advantaged > n {
            return Err(Error::invalid(
                "initial_advantaged",
                initial_advantaged,
                "must not exceed the population size",
            ));
        }
        let sites: Vec<usize> = (0..initial_advantaged).collect();
        Self::with_advantaged_sites(n, selection, &sites)
    }

    pub fn with_advantaged_sites(n: usize, selection: f64, sites: &[usize]) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid("N", n, "population needs at least 2 individuals"));
        }
        if !(selection >= 0.0 && selection.is_finite()) {
            return Err(Error::invalid("s", selection, "selection must be finite and >= 0"));
        }
        let mut advantaged = vec![false; n];
        for &site in sites {
            if site >= n {
                return Err(Error::invalid("site", site, "site index out of range"));
            }
            advantaged[site] = true;
        }
        let mut adv_sites = Vec::with_capacity(n);
        let mut dis_sites = Vec::with_capacity(n);
        let mut slot = vec![0; n];
        for (site, &adv) in advantaged.iter().enumerate() {
            let list = if adv { &mut adv_sites } else { &mut dis_sites };
            slot[site] = list.len();
            list.push(site);
        }
        Ok(PopulationState {
            selection,
            step: 0,
            advantaged,
            adv_sites,
            dis_sites,
            slot,
        })
    }

    pub fn n(&self) -> usize {
        self.advantaged.len()
    }

    pub fn selection(&self) -> f64 {
        self.selection
    }

    pub fn step_index(&self) -> u64 {
        self.step
    }

    /// `Y_n`, the number of advantaged individuals.
    pub fn advantaged_count(&self) -> usize {
        self.adv_sites.len()
    }

    pub fn is_advantaged(&self, site: usize) -> bool {
        self.advantaged[site]
    }

    /// Advantaged sites, in no particular order.
    pub fn advantaged_sites(&self) -> &[usize] {
        &self.adv_sites
    }

    pub fn advantage_flags(&self) -> &[bool] {
        &self.advantaged
    }

    /// True once the advantage is fixed or lost.
    pub fn is_absorbed(&self) -> bool {
        self.adv_sites.is_empty() || self.dis_sites.is_empty()
    }

    pub fn death_weight(&self, site: usize) -> f64 {
        if self.advantaged[site] {
            1.0
        } else {
            1.0 + self.selection
        }
    }

    /// `Y + (1+s)(N-Y)`.
    pub fn total_death_weight(&self) -> f64 {
        let y = self.adv_sites.len() as f64;
        let rest = self.dis_sites.len() as f64;
        y + (1.0 + self.selection) * rest
    }

    /// Probability that `site` is the one replaced at the next step.
    pub fn kill_probability(&self, site: usize) -> f64 {
        self.death_weight(site) / self.total_death_weight()
    }

    /// Draws the next event against the current state.
    ///
    /// The killed site is drawn by first picking a stratum with probability
    /// proportional to its total death weight, then a uniform member of it.
    pub fn sample_event<R: Rng + ?Sized>(&self, rng: &mut R) -> StepEvent {
        let n = self.n();
        let mother = rng.random_range(0..n);
        let father = rng.random_range(0..n);
        let adv_weight = self.adv_sites.len() as f64;
        let x = rng.random::<f64>() * self.total_death_weight();
        let killed = if x < adv_weight {
            self.adv_sites[rng.random_range(0..self.adv_sites.len())]
        } else {
            self.dis_sites[rng.random_range(0..self.dis_sites.len())]
        };
        StepEvent {
            mother,
            father,
            killed,
        }
    }

    /// The offspring at `ev.killed` is advantaged iff the mother was.
    pub fn apply_advantage_update(&mut self, ev: &StepEvent) {
        let offspring_advantaged = self.advantaged[ev.mother];
        self.set_advantaged(ev.killed, offspring_advantaged);
        self.step += 1;
    }

    fn set_advantaged(&mut self, site: usize, value: bool) {
        if self.advantaged[site] == value {
            return;
        }
        let (from, to) = if value {
            (&mut self.dis_sites, &mut self.adv_sites)
        } else {
            (&mut self.adv_sites, &mut self.dis_sites)
        };
        let idx = self.slot[site];
        from.swap_remove(idx);
        if let Some(&moved) = from.get(idx) {
            self.slot[moved] = idx;
        }
        self.slot[site] = to.len();
        to.push(site);
        self.advantaged[site] = value;
    }

    /// Every `(mother, father, killed)` triple with its exact probability
    /// under the current state. `N^3` entries; meant for small-`N` oracles.
    pub fn enumerate_events(&self) -> Vec<(StepEvent, f64)> {
        let n = self.n();
        let parent_prob = 1.0 / (n * n) as f64;
        let mut out = Vec::with_capacity(n * n * n);
        for mother in 0..n {
            for father in 0..n {
                for killed in 0..n {
                    let p = parent_prob * self.kill_probability(killed);
                    out.push((StepEvent::new(mother, father, killed), p));
                }
            }
        }
        out
    }
}

/// When a run stops.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Horizon {
    /// Exactly this many steps.
    Steps(u64),
    /// Until `Y` first equals `level`, giving up after `max_steps`.
    HitLevel { level: usize, max_steps: u64 },
    /// Until `Y` is absorbed at 0 or `N`, giving up after `max_steps`.
    Fixation { max_steps: u64 },
}

/// Parameters of a single simulated run.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub n_individuals: usize,
    pub initial_fraction: f64,
    pub selection: f64,
    pub seed: u64,
    pub horizon: Horizon,
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_individuals < 2 {
            return Err(Error::invalid("N", self.n_individuals, "must be >= 2"));
        }
        if !(self.initial_fraction > 0.0 && self.initial_fraction < 1.0) {
            return Err(Error::invalid("a", self.initial_fraction, "must lie in (0, 1)"));
        }
        if !(self.selection > 0.0 && self.selection.is_finite()) {
            return Err(Error::invalid("s", self.selection, "must be finite and > 0"));
        }
        Ok(())
    }

    /// `floor(a N)`.
    pub fn initial_count(&self) -> usize {
        initial_count(self.initial_fraction, self.n_individuals)
    }

    pub fn initial_state(&self) -> Result<PopulationState> {
        self.validate()?;
        PopulationState::new(self.n_individuals, self.selection, self.initial_count())
    }
}

/// `floor(a N)`, robust to `a N` landing a few ulps below an integer
/// (e.g. `a = 1 - 1/N`).
pub fn initial_count(a: f64, n: usize) -> usize {
    let x = a * n as f64;
    let r = x.round();
    let k = if (x - r).abs() <= 1e-9 * x.abs().max(1.0) {
        r
    } else {
        x.floor()
    };
    (k.max(0.0) as usize).min(n)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn rejects_tiny_population() {
        assert!(PopulationState::new(1, 1.0, 0).is_err());
        assert!(PopulationState::new(3, 1.0, 4).is_err());
        assert!(PopulationState::new(3, -0.5, 1).is_err());
    }

    #[test]
    fn advantage_gain_and_loss() {
        let mut st = PopulationState::new(4, 1.0, 2).unwrap();
        // advantaged mother replaces a disadvantaged individual
        st.apply_advantage_update(&StepEvent::new(0, 3, 2));
        assert_eq!(st.advantaged_count(), 3);
        assert!(st.is_advantaged(2));
        // disadvantaged mother replaces an advantaged individual
        st.apply_advantage_update(&StepEvent::new(3, 0, 1));
        assert_eq!(st.advantaged_count(), 2);
        assert!(!st.is_advantaged(1));
        // same type replacement
        let before = st.advantage_flags().to_vec();
        st.apply_advantage_update(&StepEvent::new(0, 1, 2));
        assert_eq!(st.advantage_flags(), &before[..]);
        assert_eq!(st.step_index(), 3);
    }

    #[test]
    fn kill_probabilities_two_sites() {
        let st = PopulationState::with_advantaged_sites(2, 1.0, &[0]).unwrap();
        assert!((st.kill_probability(0) - 1.0 / 3.0).abs() < 1e-15);
        assert!((st.kill_probability(1) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn kill_is_uniform_when_neutral_or_monomorphic() {
        let neutral = PopulationState::new(5, 0.0, 2).unwrap();
        let full = PopulationState::new(5, 3.0, 5).unwrap();
        for i in 0..5 {
            assert!((neutral.kill_probability(i) - 0.2).abs() < 1e-15);
            assert!((full.kill_probability(i) - 0.2).abs() < 1e-15);
        }
    }

    #[test]
    fn kill_frequency_two_sites() {
        let st = PopulationState::with_advantaged_sites(2, 1.0, &[0]).unwrap();
        let mut r = rng::from_seed(11);
        let draws = 200_000;
        let hits = (0..draws)
            .filter(|_| st.sample_event(&mut r).killed == 0)
            .count();
        let freq = hits as f64 / draws as f64;
        let se = (1.0 / 3.0 * 2.0 / 3.0 / draws as f64).sqrt();
        assert!((freq - 1.0 / 3.0).abs() < 4.0 * se, "freq {freq}");
    }

    #[test]
    fn absorbing_states_stay_put() {
        let mut r = rng::from_seed(3);
        for init in [0, 6] {
            let mut st = PopulationState::new(6, 2.0, init).unwrap();
            for _ in 0..500 {
                let ev = st.sample_event(&mut r);
                st.apply_advantage_update(&ev);
                assert_eq!(st.advantaged_count(), init);
            }
        }
    }

    #[test]
    fn strata_lists_stay_consistent() {
        let mut r = rng::from_seed(5);
        let mut st = PopulationState::new(9, 0.7, 4).unwrap();
        for _ in 0..2000 {
            let ev = st.sample_event(&mut r);
            st.apply_advantage_update(&ev);
            let mut adv: Vec<usize> = st.advantaged_sites().to_vec();
            adv.sort_unstable();
            let flagged: Vec<usize> = (0..9).filter(|&i| st.is_advantaged(i)).collect();
            assert_eq!(adv, flagged);
            for (i, &site) in st.adv_sites.iter().enumerate() {
                assert_eq!(st.slot[site], i);
            }
            for (i, &site) in st.dis_sites.iter().enumerate() {
                assert_eq!(st.slot[site], i);
            }
        }
    }

    #[test]
    fn initial_count_floors() {
        assert_eq!(initial_count(0.01, 1000), 10);
        assert_eq!(initial_count(1.0 - 1.0 / 1000.0, 1000), 999);
        assert_eq!(initial_count(0.25, 10), 2);
        assert_eq!(initial_count(0.1, 100), 10);
    }

    #[test]
    fn enumeration_is_a_distribution() {
        let st = PopulationState::new(4, 1.5, 1).unwrap();
        let total: f64 = st.enumerate_events().iter().map(|(_, p)| p).sum();
        assert!((total - 1.0).abs() < 1e-12);
    }
}
