//! SetCover instances viewed as bipartite problem graphs.
//!
//! Sets and elements are dense integers. The position of a neighbour inside an
//! adjacency list is the port number under which that edge is seen locally;
//! simulated protocols only ever see ports.

mod generate;
mod io;

use std::collections::BTreeSet;

use thiserror::Error;

pub use generate::{generate_random, generate_scaling_family, Density};
pub use io::{parse_instance, read_instance, render_instance, write_instance};

#[derive(Debug, Error)]
pub enum InstanceError {
    #[error("set {set} references element {element}, but the universe has {n} elements")]
    OutOfRangeId {
        set: usize,
        element: usize,
        n: usize,
    },
    #[error("set {set} lists element {element} more than once")]
    DuplicateMembership { set: usize, element: usize },
    #[error("element {0} is not contained in any set")]
    UncoverableElement(usize),
    #[error("solution references set {set}, but the instance has {m} sets")]
    InvalidSetId { set: usize, m: usize },
    #[error("infeasible generator parameters: {0}")]
    InfeasibleParams(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Maximum degree over all nodes of the problem graph, sets and elements alike.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Delta(usize);

impl Delta {
    pub fn new(value: usize) -> Self {
        Delta(value.max(1))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// `ceil(log2 Δ)`, never below one.
    pub fn log2_ceil(self) -> usize {
        let v = self.0;
        let bits = usize::BITS - (v - 1).leading_zeros();
        (bits as usize).max(1)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Instance {
    n_elements: usize,
    sets: Vec<Vec<usize>>,
    element_ports: Vec<Vec<usize>>,
    delta: Delta,
}

impl Instance {
    /// Validates the membership lists and builds the reverse adjacency.
    ///
    /// Membership lists are sorted, so a set's ports enumerate its elements in
    /// ascending id order. Element ports enumerate sets in ascending id order.
    pub fn new(n_elements: usize, mut sets: Vec<Vec<usize>>) -> Result<Self, InstanceError> {
        let mut element_ports = vec![Vec::new(); n_elements];
        for (s, members) in sets.iter_mut().enumerate() {
            members.sort_unstable();
            for &e in members.iter() {
                if e >= n_elements {
                    return Err(InstanceError::OutOfRangeId {
                        set: s,
                        element: e,
                        n: n_elements,
                    });
                }
                let ports: &mut Vec<usize> = &mut element_ports[e];
                if ports.last() == Some(&s) {
                    return Err(InstanceError::DuplicateMembership { set: s, element: e });
                }
                ports.push(s);
            }
        }
        if let Some(e) = element_ports.iter().position(Vec::is_empty) {
            return Err(InstanceError::UncoverableElement(e));
        }
        let delta = sets
            .iter()
            .map(Vec::len)
            .chain(element_ports.iter().map(Vec::len))
            .max()
            .unwrap_or(1);
        Ok(Instance {
            n_elements,
            sets,
            element_ports,
            delta: Delta::new(delta),
        })
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn n_sets(&self) -> usize {
        self.sets.len()
    }

    /// Total number of nodes in the problem graph.
    pub fn n_nodes(&self) -> usize {
        self.n_elements + self.sets.len()
    }

    pub fn n_edges(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }

    pub fn delta(&self) -> Delta {
        self.delta
    }

    pub fn sets(&self) -> &[Vec<usize>] {
        &self.sets
    }

    /// Elements of set `s`, indexed by the set's ports.
    pub fn set(&self, s: usize) -> &[usize] {
        &self.sets[s]
    }

    /// Sets containing element `e`, indexed by the element's ports.
    pub fn element_ports(&self, e: usize) -> &[usize] {
        &self.element_ports[e]
    }

    /// Elements left uncovered by `chosen`, in increasing id order.
    pub fn verify_cover<'a, I>(&self, chosen: I) -> Result<Vec<usize>, InstanceError>
    where
        I: IntoIterator<Item = &'a usize>,
    {
        let mut covered = vec![false; self.n_elements];
        for &s in chosen {
            let members = self.sets.get(s).ok_or(InstanceError::InvalidSetId {
                set: s,
                m: self.sets.len(),
            })?;
            for &e in members {
                covered[e] = true;
            }
        }
        Ok(covered
            .iter()
            .enumerate()
            .filter(|(_, &c)| !c)
            .map(|(e, _)| e)
            .collect())
    }
}

/// Output of a SetCover algorithm.
///
/// `per_element_coverer[e]` holds the set that covered `e` together with the
/// time step (slot or round) at which it happened. Sequential oracles record
/// the pick index as time.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Solution {
    pub chosen: BTreeSet<usize>,
    pub per_element_coverer: Vec<Option<(usize, u64)>>,
}

impl Solution {
    pub fn new(n_elements: usize) -> Self {
        Solution {
            chosen: BTreeSet::new(),
            per_element_coverer: vec![None; n_elements],
        }
    }

    pub fn size(&self) -> usize {
        self.chosen.len()
    }

    pub fn verify(&self, inst: &Instance) -> Result<Vec<usize>, InstanceError> {
        inst.verify_cover(&self.chosen)
    }

    /// True when every element has a coverer and every coverer was chosen.
    pub fn provenance_consistent(&self) -> bool {
        self.per_element_coverer
            .iter()
            .all(|c| matches!(c, Some((s, _)) if self.chosen.contains(s)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_of_singletons() {
        let inst = Instance::new(2, vec![vec![0], vec![1]]).unwrap();
        assert_eq!(inst.delta().get(), 1);
    }

    #[test]
    fn delta_of_pair_set() {
        let inst = Instance::new(2, vec![vec![0, 1]]).unwrap();
        assert_eq!(inst.delta().get(), 2);
    }

    #[test]
    fn delta_counts_element_degree() {
        let inst = Instance::new(1, vec![vec![0], vec![0], vec![0]]).unwrap();
        assert_eq!(inst.delta().get(), 3);
        assert_eq!(inst.element_ports(0), &[0, 1, 2]);
    }

    #[test]
    fn rejects_bad_ids() {
        assert!(matches!(
            Instance::new(2, vec![vec![0, 2]]),
            Err(InstanceError::OutOfRangeId {
                set: 0,
                element: 2,
                ..
            })
        ));
        assert!(matches!(
            Instance::new(2, vec![vec![1, 0, 1]]),
            Err(InstanceError::DuplicateMembership { set: 0, element: 1 })
        ));
        assert!(matches!(
            Instance::new(3, vec![vec![0, 1]]),
            Err(InstanceError::UncoverableElement(2))
        ));
    }

    #[test]
    fn empty_sets_are_legal() {
        let inst = Instance::new(1, vec![vec![], vec![0]]).unwrap();
        assert_eq!(inst.n_sets(), 2);
        assert_eq!(inst.element_ports(0), &[1]);
    }

    #[test]
    fn verify_cover_examples() {
        let inst = Instance::new(2, vec![vec![0], vec![1]]).unwrap();
        assert_eq!(inst.verify_cover(&[0]).unwrap(), vec![1]);
        let inst = Instance::new(2, vec![vec![0, 1]]).unwrap();
        assert!(inst.verify_cover(&[0]).unwrap().is_empty());
        let inst = Instance::new(3, vec![vec![0, 1], vec![1, 2]]).unwrap();
        assert_eq!(inst.verify_cover(&[]).unwrap(), vec![0, 1, 2]);
        assert!(matches!(
            inst.verify_cover(&[5]),
            Err(InstanceError::InvalidSetId { set: 5, m: 2 })
        ));
    }

    #[test]
    fn log2_ceil() {
        let l = |v| Delta::new(v).log2_ceil();
        assert_eq!(l(1), 1);
        assert_eq!(l(2), 1);
        assert_eq!(l(3), 2);
        assert_eq!(l(16), 4);
        assert_eq!(l(17), 5);
        assert_eq!(l(256), 8);
    }
}
