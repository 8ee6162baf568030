//! Sequential query access to an instance.
//!
//! `EltOf(i, j)` returns the `j`-th element of set `i` and `SetOf(i, j)` the
//! `j`-th set containing element `i`. Routing a KT0 message costs exactly one
//! such query; storing node objects by index is free.

use super::engine::{mate_port, NodeRef, Port, Side};
use crate::instance::Instance;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct QueryCounter {
    pub elt_of: u64,
    pub set_of: u64,
}

impl QueryCounter {
    pub fn total(&self) -> u64 {
        self.elt_of + self.set_of
    }
}

#[derive(Debug, Clone)]
pub struct QueryOracle<'a> {
    inst: &'a Instance,
    counter: QueryCounter,
}

impl<'a> QueryOracle<'a> {
    pub fn new(inst: &'a Instance) -> Self {
        QueryOracle {
            inst,
            counter: QueryCounter::default(),
        }
    }

    pub fn counter(&self) -> QueryCounter {
        self.counter
    }

    /// `EltOf(set, j)`; `None` plays the role of ⊥.
    pub fn elt_of(&mut self, set: usize, j: usize) -> Option<usize> {
        self.counter.elt_of += 1;
        self.inst.sets().get(set)?.get(j).copied()
    }

    /// `SetOf(element, j)`; `None` plays the role of ⊥.
    pub fn set_of(&mut self, element: usize, j: usize) -> Option<usize> {
        self.counter.set_of += 1;
        if element >= self.inst.n_elements() {
            return None;
        }
        self.inst.element_ports(element).get(j).copied()
    }

    /// Port on which `to` sees the edge towards `from`. This is part of the
    /// per-node object bookkeeping and is not charged as a query.
    pub fn arrival_port(&self, to: NodeRef, from: NodeRef) -> Port {
        match to.side {
            Side::Set => mate_port(self.inst.set(to.index), from.index),
            Side::Element => mate_port(self.inst.element_ports(to.index), from.index),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn queries_count_and_return_bottom() {
        let inst = Instance::new(3, vec![vec![0, 2], vec![1, 2]]).unwrap();
        let mut q = QueryOracle::new(&inst);
        assert_eq!(q.elt_of(0, 1), Some(2));
        assert_eq!(q.elt_of(0, 2), None);
        assert_eq!(q.elt_of(5, 0), None);
        assert_eq!(q.set_of(2, 1), Some(1));
        assert_eq!(q.set_of(2, 2), None);
        assert_eq!(q.set_of(9, 0), None);
        assert_eq!(
            q.counter(),
            QueryCounter {
                elt_of: 3,
                set_of: 3
            }
        );
        assert_eq!(q.arrival_port(NodeRef::set(1), NodeRef::element(2)), 1);
        assert_eq!(q.counter().total(), 6);
    }
}
