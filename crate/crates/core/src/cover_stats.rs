//! Observer-side bookkeeping of when and by whom elements get covered.
//!
//! For every covered element `u` we record
//! * `mu`: how many neighbouring sets joined in the step that first covered `u`;
//! * `eta`: the largest span among all of `u`'s sets divided by the smallest
//!   span among the sets that covered it, spans taken just before the step.
//!
//! The span of a set is its number of uncovered elements. All of this is
//! computed omnisciently and never influences the simulated nodes.

use crate::instance::{Instance, Solution};

#[derive(Debug, Clone, PartialEq)]
pub struct CoverSample {
    pub element: usize,
    pub time: u64,
    /// Phase in which the element was covered; `None` for the cleanup step.
    pub phase: Option<usize>,
    pub mu: usize,
    pub eta: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct CoverStats {
    pub samples: Vec<CoverSample>,
}

impl CoverStats {
    /// Samples from the regular phases, excluding the cleanup step.
    pub fn phase_samples(&self) -> impl Iterator<Item = &CoverSample> {
        self.samples.iter().filter(|s| s.phase.is_some())
    }

    pub fn max_mu(&self) -> usize {
        self.samples.iter().map(|s| s.mu).max().unwrap_or(0)
    }

    pub fn mean_mu(&self) -> f64 {
        mean(self.samples.iter().map(|s| s.mu as f64))
    }

    pub fn mean_eta(&self) -> f64 {
        mean(self.samples.iter().map(|s| s.eta))
    }
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (sum, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    if n == 0 {
        0.0
    } else {
        sum / n as f64
    }
}

/// Tracks coverage and spans as cover events are fed in step by step.
#[derive(Debug, Clone)]
pub struct CoverTracker<'a> {
    inst: &'a Instance,
    uncovered: Vec<bool>,
    span: Vec<usize>,
    coverer: Vec<Option<(usize, u64)>>,
    stats: CoverStats,
}

impl<'a> CoverTracker<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        CoverTracker {
            inst,
            uncovered: vec![true; inst.n_elements()],
            span: inst.sets().iter().map(Vec::len).collect(),
            coverer: vec![None; inst.n_elements()],
            stats: CoverStats::default(),
        }
    }

    pub fn instance(&self) -> &'a Instance {
        self.inst
    }

    pub fn is_uncovered(&self, e: usize) -> bool {
        self.uncovered[e]
    }

    pub fn uncovered(&self) -> &[bool] {
        &self.uncovered
    }

    pub fn span(&self, s: usize) -> usize {
        self.span[s]
    }

    /// Records every element first covered at `time`, together with the sets
    /// that covered it in that same step. Already covered elements are
    /// ignored. Spans are read before any of this step's updates.
    pub fn record_step(&mut self, time: u64, phase: Option<usize>, events: &[(usize, Vec<usize>)]) {
        let fresh: Vec<&(usize, Vec<usize>)> = events
            .iter()
            .filter(|(e, coverers)| self.uncovered[*e] && !coverers.is_empty())
            .collect();
        for (e, coverers) in &fresh {
            let best = self
                .inst
                .element_ports(*e)
                .iter()
                .map(|&s| self.span[s])
                .max()
                .unwrap_or(1);
            let worst = coverers.iter().map(|&s| self.span[s]).min().unwrap_or(1);
            self.stats.samples.push(CoverSample {
                element: *e,
                time,
                phase,
                mu: coverers.len(),
                eta: best as f64 / worst.max(1) as f64,
            });
            let first = *coverers.iter().min().expect("non-empty");
            self.coverer[*e] = Some((first, time));
        }
        for (e, _) in fresh {
            self.uncovered[*e] = false;
            for &s in self.inst.element_ports(*e) {
                self.span[s] -= 1;
            }
        }
    }

    pub fn finish(self, chosen: impl IntoIterator<Item = usize>) -> (Solution, CoverStats) {
        let solution = Solution {
            chosen: chosen.into_iter().collect(),
            per_element_coverer: self.coverer,
        };
        (solution, self.stats)
    }
}
