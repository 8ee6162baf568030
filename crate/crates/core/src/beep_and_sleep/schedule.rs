use rand::Rng;
use thiserror::Error;

use crate::instance::Delta;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScheduleError {
    #[error("geometric success probability must lie in (0, 1], got {0}")]
    DegenerateDistribution(String),
}

/// Draws `X ~ Geo(p)` counting failures before the first success, truncated
/// at `cap`: `Pr[X = x] = p(1-p)^x` for `x < cap` and `Pr[X = cap] = (1-p)^cap`.
pub fn sample_capped_geometric<R: Rng + ?Sized>(
    p: f64,
    cap: u32,
    rng: &mut R,
) -> Result<u32, ScheduleError> {
    if !(p > 0.0 && p <= 1.0) {
        return Err(ScheduleError::DegenerateDistribution(p.to_string()));
    }
    let mut x = 0;
    while x < cap && !rng.gen_bool(p) {
        x += 1;
    }
    Ok(x)
}

/// Position of a slot inside the Beep-and-Sleep time hierarchy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SlotPos {
    /// `slot` is in `0..=4k`; slot `4k` of a round is the announcement slot.
    Main {
        phase: usize,
        round: usize,
        slot: usize,
    },
    /// Cleanup slot A (uncovered elements beep, unjoined sets listen).
    CleanupProbe,
    /// Cleanup slot B (sets that heard join and beep, elements listen).
    CleanupJoin,
    Done,
}

pub const CLEANUP_SLOTS: u64 = 2;

/// Fixed time structure: `k` phases of `4k` rounds of `4k + 1` slots, then
/// two cleanup slots.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSchedule {
    k: usize,
    delta: Delta,
    deltas: Vec<usize>,
}

impl PhaseSchedule {
    pub fn new(delta: Delta, k: usize) -> Self {
        assert!(k >= 1, "phase count must be positive");
        let d = delta.get() as f64;
        let mut deltas: Vec<usize> = (0..=k)
            .map(|j| {
                let v = d / d.powf(j as f64 / k as f64);
                // Absorb powf rounding so exact powers stay exact.
                (v - 1e-9).ceil().max(1.0) as usize
            })
            .collect();
        deltas[0] = delta.get();
        deltas[k] = 1;
        PhaseSchedule { k, delta, deltas }
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn delta(&self) -> Delta {
        self.delta
    }

    /// `Δ_0 … Δ_k`.
    pub fn deltas(&self) -> &[usize] {
        &self.deltas
    }

    pub fn rounds_per_phase(&self) -> usize {
        4 * self.k
    }

    pub fn slots_per_round(&self) -> usize {
        4 * self.k + 1
    }

    /// Listening slots with a beep needed to join.
    pub fn join_threshold(&self) -> usize {
        3 * self.k
    }

    /// Probability that an uncovered element is active in `phase`.
    pub fn activation_prob(&self, phase: usize) -> f64 {
        (4.0 * self.k as f64 / self.deltas[phase] as f64).min(1.0)
    }

    /// Success probability `1 - Δ^{-1/k}` of the wake-up geometric.
    pub fn wake_success_prob(&self) -> f64 {
        1.0 - (self.delta.get() as f64).powf(-1.0 / self.k as f64)
    }

    /// Draws the capped geometric `X_s` for one phase. With `Δ = 1` the
    /// distribution degenerates and `X = 4k`.
    pub fn draw_wake_sample<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        let cap = self.rounds_per_phase() as u32;
        sample_capped_geometric(self.wake_success_prob(), cap, rng).unwrap_or(cap)
    }

    /// Zero-based round in which a set with sample `x` wakes: `4k - x` in
    /// one-based numbering, with `x = 4k` folded onto the first round.
    pub fn wake_round(&self, x: u32) -> usize {
        (self.rounds_per_phase() - 1).saturating_sub(x as usize)
    }

    /// The announcement slot index within a round.
    pub fn announce_slot(&self) -> usize {
        4 * self.k
    }

    pub fn main_slots(&self) -> u64 {
        (self.k * self.rounds_per_phase() * self.slots_per_round()) as u64
    }

    pub fn total_slots(&self) -> u64 {
        self.main_slots() + CLEANUP_SLOTS
    }

    pub fn locate(&self, slot: u64) -> SlotPos {
        let main = self.main_slots();
        if slot < main {
            let per_round = self.slots_per_round() as u64;
            let per_phase = per_round * self.rounds_per_phase() as u64;
            SlotPos::Main {
                phase: (slot / per_phase) as usize,
                round: ((slot % per_phase) / per_round) as usize,
                slot: (slot % per_round) as usize,
            }
        } else if slot == main {
            SlotPos::CleanupProbe
        } else if slot == main + 1 {
            SlotPos::CleanupJoin
        } else {
            SlotPos::Done
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn deltas_for_power_of_two() {
        let s = PhaseSchedule::new(Delta::new(16), 4);
        assert_eq!(s.deltas(), &[16, 8, 4, 2, 1]);
        assert_eq!(s.rounds_per_phase(), 16);
        assert_eq!(s.slots_per_round(), 17);
        assert_eq!(s.join_threshold(), 12);
        assert!((s.wake_success_prob() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn degenerate_delta() {
        for k in 1..6 {
            let s = PhaseSchedule::new(Delta::new(1), k);
            assert!(s.deltas().iter().all(|&d| d == 1));
            assert!((0..k).all(|j| s.activation_prob(j) == 1.0));
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            assert_eq!(s.draw_wake_sample(&mut rng), 4 * k as u32);
            assert_eq!(s.wake_round(4 * k as u32), 0);
        }
    }

    #[test]
    fn deltas_for_ten() {
        // 10^{1/3} ≈ 2.1544: 10 / 2.1544 ≈ 4.64 → 5, 10 / 4.6416 ≈ 2.15 → 3.
        let cube_root = 10f64.cbrt();
        assert!((cube_root - 2.154_434_69).abs() < 1e-8);
        assert_eq!((10.0 / cube_root).ceil(), 5.0);
        assert_eq!((10.0 / (cube_root * cube_root)).ceil(), 3.0);
        assert_eq!(
            PhaseSchedule::new(Delta::new(10), 3).deltas(),
            &[10, 5, 3, 1]
        );
    }

    #[test]
    fn deltas_monotone_and_probabilities_valid() {
        for d in 1..300 {
            for k in 1..10 {
                let s = PhaseSchedule::new(Delta::new(d), k);
                assert!(s.deltas().windows(2).all(|w| w[0] >= w[1]));
                assert_eq!(s.deltas()[k], 1);
                for j in 0..k {
                    let p = s.activation_prob(j);
                    assert!(p > 0.0 && p <= 1.0);
                }
            }
        }
    }

    #[test]
    fn geometric_edge_cases() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert!((0..100).all(|_| sample_capped_geometric(1.0, 16, &mut rng) == Ok(0)));
        assert!(sample_capped_geometric(0.0, 16, &mut rng).is_err());
        assert!(sample_capped_geometric(1.5, 16, &mut rng).is_err());
        assert!(sample_capped_geometric(f64::NAN, 16, &mut rng).is_err());
    }

    #[test]
    fn geometric_head_probabilities() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 200_000;
        let mut counts = [0usize; 17];
        for _ in 0..n {
            counts[sample_capped_geometric(0.5, 16, &mut rng).unwrap() as usize] += 1;
        }
        let f0 = counts[0] as f64 / n as f64;
        let f1 = counts[1] as f64 / n as f64;
        // σ ≈ sqrt(0.25 / 2e5) ≈ 0.0011.
        assert!((f0 - 0.5).abs() < 0.006, "{f0}");
        assert!((f1 - 0.25).abs() < 0.006, "{f1}");
    }

    #[test]
    fn geometric_capped_mean() {
        // Exact mean of the truncated law by direct summation.
        let (p, cap) = (0.5f64, 16u32);
        let exact: f64 = (0..cap)
            .map(|x| x as f64 * p * (1.0 - p).powi(x as i32))
            .sum::<f64>()
            + cap as f64 * (1.0 - p).powi(cap as i32);
        assert!((exact - 1.0).abs() < 1e-3, "{exact}");
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let n = 1_000_000;
        let sum: u64 = (0..n)
            .map(|_| sample_capped_geometric(p, cap, &mut rng).unwrap() as u64)
            .sum();
        let mean = sum as f64 / n as f64;
        assert!((mean - exact).abs() < 0.01, "{mean} vs {exact}");
    }

    #[test]
    fn locate_covers_every_slot_once() {
        let s = PhaseSchedule::new(Delta::new(9), 2);
        assert_eq!(s.main_slots(), 2 * 8 * 9);
        assert_eq!(
            s.locate(0),
            SlotPos::Main {
                phase: 0,
                round: 0,
                slot: 0
            }
        );
        assert_eq!(
            s.locate(8),
            SlotPos::Main {
                phase: 0,
                round: 0,
                slot: 8
            }
        );
        assert_eq!(
            s.locate(9),
            SlotPos::Main {
                phase: 0,
                round: 1,
                slot: 0
            }
        );
        assert_eq!(
            s.locate(72),
            SlotPos::Main {
                phase: 1,
                round: 0,
                slot: 0
            }
        );
        assert_eq!(
            s.locate(143),
            SlotPos::Main {
                phase: 1,
                round: 7,
                slot: 8
            }
        );
        assert_eq!(s.locate(144), SlotPos::CleanupProbe);
        assert_eq!(s.locate(145), SlotPos::CleanupJoin);
        assert_eq!(s.locate(146), SlotPos::Done);
        assert_eq!(s.total_slots(), 146);
    }

    #[test]
    fn wake_rounds() {
        let s = PhaseSchedule::new(Delta::new(16), 4);
        assert_eq!(s.wake_round(0), 15);
        assert_eq!(s.wake_round(15), 0);
        assert_eq!(s.wake_round(16), 0);
    }
}
