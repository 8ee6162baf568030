//! Sequential reference algorithms: greedy and exhaustive optimum.

use thiserror::Error;

use crate::instance::{Instance, Solution};
use crate::scalar::{from_count, quotient, Scalar};

/// Largest number of sets [`exact`] accepts.
pub const EXACT_MAX_SETS: usize = 25;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum BaselineError {
    #[error("exact solver supports at most {EXACT_MAX_SETS} sets, instance has {0}")]
    TooLarge(usize),
}

fn record_picks(inst: &Instance, picks: &[usize]) -> Solution {
    let mut sol = Solution::new(inst.n_elements());
    for (t, &s) in picks.iter().enumerate() {
        sol.chosen.insert(s);
        for &e in inst.set(s) {
            sol.per_element_coverer[e].get_or_insert((s, t as u64));
        }
    }
    sol
}

/// Repeatedly picks the set covering the most uncovered elements, lowest id
/// on ties.
pub fn greedy(inst: &Instance) -> Solution {
    let mut uncovered = vec![true; inst.n_elements()];
    let mut remaining = inst.n_elements();
    let mut span: Vec<usize> = inst.sets().iter().map(Vec::len).collect();
    let mut picks = Vec::new();
    while remaining > 0 {
        let (best, _) = span
            .iter()
            .enumerate()
            .fold((0, 0), |acc, (s, &d)| if d > acc.1 { (s, d) } else { acc });
        picks.push(best);
        for &e in inst.set(best) {
            if uncovered[e] {
                uncovered[e] = false;
                remaining -= 1;
                for &t in inst.element_ports(e) {
                    span[t] -= 1;
                }
            }
        }
    }
    record_picks(inst, &picks)
}

struct CoverSearch<'a> {
    masks: &'a [Vec<u64>],
    full: &'a [u64],
    max_card: usize,
    picks: Vec<usize>,
}

impl CoverSearch<'_> {
    fn search(&mut self, start: usize, left: usize, covered: &[u64]) -> bool {
        let missing: usize = self
            .full
            .iter()
            .zip(covered)
            .map(|(f, c)| (f & !c).count_ones() as usize)
            .sum();
        if missing == 0 {
            return true;
        }
        if left == 0 || missing > left * self.max_card {
            return false;
        }
        let m = self.masks.len();
        for s in start..=(m - left) {
            let mask = &self.masks[s];
            // At minimum cardinality every chosen set contributes something new.
            if mask.iter().zip(covered).all(|(a, c)| a & !c == 0) {
                continue;
            }
            let next: Vec<u64> = covered.iter().zip(mask).map(|(c, a)| c | a).collect();
            self.picks.push(s);
            if self.search(s + 1, left - 1, &next) {
                return true;
            }
            self.picks.pop();
        }
        false
    }
}

/// Minimum-cardinality cover by exhaustive search over growing sizes.
///
/// Combinations of each size are visited in lexicographic order, so the
/// returned cover is the lexicographically smallest among all optima.
pub fn exact(inst: &Instance) -> Result<Solution, BaselineError> {
    let m = inst.n_sets();
    if m > EXACT_MAX_SETS {
        return Err(BaselineError::TooLarge(m));
    }
    let n = inst.n_elements();
    let words = n.div_ceil(64).max(1);
    let to_mask = |members: &[usize]| {
        let mut mask = vec![0u64; words];
        for &e in members {
            mask[e / 64] |= 1 << (e % 64);
        }
        mask
    };
    let masks: Vec<Vec<u64>> = inst.sets().iter().map(|s| to_mask(s)).collect();
    let full = to_mask(&(0..n).collect::<Vec<_>>());
    let mut search = CoverSearch {
        masks: &masks,
        full: &full,
        max_card: inst.sets().iter().map(Vec::len).max().unwrap_or(0),
        picks: Vec::new(),
    };
    let empty = vec![0u64; words];
    for size in 0..=m {
        if search.search(0, size, &empty) {
            return Ok(record_picks(inst, &search.picks));
        }
    }
    unreachable!("validated instances are always coverable")
}

/// Harmonic number `H_Δ = Σ_{i=1..Δ} 1/i`.
pub fn h_delta<T: Scalar>(delta: usize) -> T {
    (1..=delta.max(1)).fold(T::zero(), |acc, i| acc + T::one() / from_count::<T>(i))
}

/// `|sol| / reference`.
pub fn approximation_ratio<T: Scalar>(sol: &Solution, reference: usize) -> T {
    assert!(reference >= 1, "reference size must be positive");
    quotient(sol.size(), reference)
}
