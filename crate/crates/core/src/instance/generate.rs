use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Instance, InstanceError};

/// Edge density for [`generate_random`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    /// Each (element, set) edge is present independently with this probability.
    EdgeProb(f64),
    /// Expected set cardinality; converted to `target / n` per edge.
    TargetDegree(f64),
}

impl Density {
    fn edge_prob(self, n: usize) -> f64 {
        match self {
            Density::EdgeProb(p) => p,
            Density::TargetDegree(d) => (d / n as f64).min(1.0),
        }
    }
}

/// Erdős–Rényi style bipartite instance.
///
/// Every (element, set) edge is drawn independently. Elements that end up in
/// no set are attached to one set chosen uniformly at random, so the result is
/// always coverable when `m ≥ 1`.
pub fn generate_random(
    n: usize,
    m: usize,
    density: Density,
    seed: u64,
) -> Result<Instance, InstanceError> {
    let p = density.edge_prob(n.max(1));
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(InstanceError::InfeasibleParams(format!(
            "edge probability {p} outside [0, 1]"
        )));
    }
    if n > 0 && m == 0 {
        return Err(InstanceError::InfeasibleParams(
            "no sets to cover a non-empty universe".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sets = vec![Vec::new(); m];
    let mut degree = vec![0usize; n];
    for members in sets.iter_mut() {
        for (e, deg) in degree.iter_mut().enumerate() {
            if rng.gen_bool(p) {
                members.push(e);
                *deg += 1;
            }
        }
    }
    for (e, deg) in degree.iter().enumerate() {
        if *deg == 0 {
            let s = rng.gen_range(0..m);
            sets[s].push(e);
        }
    }
    Instance::new(n, sets)
}

/// Regular instance with `n` elements and `n` sets where every set has
/// exactly `delta` elements and every element lies in exactly `delta` sets.
///
/// Set `s` covers a window of `delta` consecutive positions of a random
/// element permutation (cyclically); set ids are shuffled afterwards. `n + m`
/// stays fixed while the edge count `n · delta` grows with `delta`.
pub fn generate_scaling_family(
    delta: usize,
    n: usize,
    seed: u64,
) -> Result<Instance, InstanceError> {
    if delta == 0 || delta > n {
        return Err(InstanceError::InfeasibleParams(format!(
            "scaling family needs 1 <= delta <= n, got delta={delta}, n={n}"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(&mut rng);
    let mut sets: Vec<Vec<usize>> = (0..n)
        .map(|start| (0..delta).map(|t| perm[(start + t) % n]).collect())
        .collect();
    sets.shuffle(&mut rng);
    Instance::new(n, sets)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_probability_is_complete_bipartite() {
        let inst = generate_random(4, 4, Density::EdgeProb(1.0), 7).unwrap();
        assert_eq!(inst.delta().get(), 4);
        assert_eq!(inst.n_edges(), 16);
    }

    #[test]
    fn equal_seeds_give_equal_instances() {
        let a = generate_random(100, 50, Density::EdgeProb(0.1), 1).unwrap();
        let b = generate_random(100, 50, Density::EdgeProb(0.1), 1).unwrap();
        assert_eq!(a, b);
        let c = generate_random(100, 50, Density::EdgeProb(0.1), 2).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn mean_cardinality_follows_binomial() {
        let inst = generate_random(100, 50, Density::EdgeProb(0.1), 1).unwrap();
        // Direct count; expectation n·p = 10, plus at most a handful of patches.
        let mean = inst.n_edges() as f64 / inst.n_sets() as f64;
        assert!((mean - 10.0).abs() <= 3.0, "mean cardinality {mean}");
    }

    #[test]
    fn zero_probability_is_patched() {
        let inst = generate_random(5, 3, Density::EdgeProb(0.0), 3).unwrap();
        assert_eq!(inst.n_edges(), 5);
        assert!(generate_random(5, 0, Density::EdgeProb(0.5), 3).is_err());
        assert!(generate_random(5, 2, Density::EdgeProb(1.5), 3).is_err());
    }

    #[test]
    fn target_degree_density() {
        let inst = generate_random(200, 40, Density::TargetDegree(20.0), 9).unwrap();
        let mean = inst.n_edges() as f64 / inst.n_sets() as f64;
        assert!((mean - 20.0).abs() < 4.0, "{mean}");
    }

    #[test]
    fn scaling_family_pins_delta() {
        let inst = generate_scaling_family(4, 16, 0).unwrap();
        assert_eq!(inst.delta().get(), 4);
        assert!(inst.sets().iter().all(|s| s.len() == 4));
        assert!((0..16).all(|e| inst.element_ports(e).len() == 4));

        let full = generate_scaling_family(16, 16, 0).unwrap();
        assert!(full.sets().iter().all(|s| s.len() == 16));
        assert!(full.verify_cover(&[0]).unwrap().is_empty());

        assert!(generate_scaling_family(17, 16, 0).is_err());
        assert!(generate_scaling_family(0, 16, 0).is_err());
    }

    #[test]
    fn scaling_family_edges_grow_with_delta() {
        let edges: Vec<usize> = [16, 64, 256]
            .iter()
            .map(|&d| generate_scaling_family(d, 512, 3).unwrap())
            .inspect(|inst| assert_eq!(inst.n_nodes(), 1024))
            .map(|inst| inst.n_edges())
            .collect();
        assert!(edges.windows(2).all(|w| w[0] < w[1]), "{edges:?}");
    }
}
