//! Live state of the particle system and the per-arrival transition.

use std::collections::BTreeMap;
use std::ops::Bound;

use ordered_float::NotNan;
use rand::Rng;

use crate::model::{AttributeDistribution, DeletionKernel, ModelError};

use super::record::DepartureBatch;
use super::SimError;

/// How deletion randomness is realized.
///
/// Per-arrival Bernoulli trials work for every kernel. Pre-drawn geometric
/// lifetimes are distributionally identical for ranked kernels (each trial
/// succeeds with the same probability `a(x)` regardless of the deleter)
/// and are kept as a cross-check mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DeletionMode {
    BernoulliPerArrival,
    GeometricLifetime,
}

/// Storage key: attribute first, then an insertion sequence number so that
/// floating-point collisions remain distinct particles. Rank comparisons
/// use the attribute component only.
type Key = (NotNan<f64>, u64);

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct LiveParticle {
    pub arrival_epoch: f64,
    pub arrival_index: u64,
    pub attempts: u64,
    /// Geometric mode: number of the attempt at which the particle dies.
    /// Drawn lazily at the first attempt so that seeding needs no stream.
    pub lifetime: Option<u64>,
}

/// The live point pattern, ordered by attribute.
#[derive(Debug, Clone, Default)]
pub struct SystemState {
    live: BTreeMap<Key, LiveParticle>,
    clock: f64,
    arrivals_seen: u64,
    initial_count: u64,
    next_seq: u64,
}

impl SystemState {
    pub fn empty() -> Self {
        SystemState::default()
    }

    /// Seeds an initial population at time 0 (arrival index 0, no deletion
    /// attempts faced yet). Attributes must lie in the attribute space.
    pub fn seed_initial_population(
        pattern: &[f64],
        dist: &AttributeDistribution,
    ) -> Result<Self, SimError> {
        let mut state = SystemState::empty();
        for &x in pattern {
            if !dist.contains(x) {
                return Err(SimError::Model(ModelError::AttributeOutsideSpace(x)));
            }
            state.insert(x, 0.0, 0);
        }
        state.initial_count = pattern.len() as u64;
        Ok(state)
    }

    fn insert(&mut self, attribute: f64, epoch: f64, arrival_index: u64) {
        let key = (
            NotNan::new(attribute).expect("attributes are finite"),
            self.next_seq,
        );
        self.next_seq += 1;
        self.live.insert(
            key,
            LiveParticle {
                arrival_epoch: epoch,
                arrival_index,
                attempts: 0,
                lifetime: None,
            },
        );
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn arrivals_seen(&self) -> u64 {
        self.arrivals_seen
    }

    pub fn initial_count(&self) -> u64 {
        self.initial_count
    }

    pub fn live_count(&self) -> usize {
        self.live.len()
    }

    /// Number of live particles with attribute in `[lo, hi)`.
    pub fn count_in(&self, lo: f64, hi: f64) -> u64 {
        let lo_key = (NotNan::new(lo).expect("finite"), 0u64);
        let hi_key = (NotNan::new(hi).expect("finite"), 0u64);
        self.live
            .range((Bound::Included(lo_key), Bound::Excluded(hi_key)))
            .count() as u64
    }

    /// Iterates over live particles as (attribute, arrival_epoch,
    /// arrival_index, attempts).
    pub fn live_particles(&self) -> impl Iterator<Item = (f64, f64, u64, u64)> + '_ {
        self.live
            .iter()
            .map(|(k, p)| (k.0.into_inner(), p.arrival_epoch, p.arrival_index, p.attempts))
    }

    /// Largest live attribute, if any.
    pub fn max_attribute(&self) -> Option<f64> {
        self.live.keys().next_back().map(|k| k.0.into_inner())
    }

    /// Processes one arrival with attribute `y` at `epoch`: every live
    /// particle eligible under the kernel (strictly lower attribute for the
    /// ranked kernel, everyone for the rank-free kernel) faces one deletion
    /// attempt, then the arriving particle is inserted. The arrival itself
    /// is never at risk at its own arrival epoch.
    ///
    /// Returns the departure batch together with the records of the
    /// departed particles `(attribute, arrival_epoch, arrival_index,
    /// attempts)`.
    #[allow(clippy::type_complexity)]
    pub fn step_arrival<R: Rng + ?Sized>(
        &mut self,
        y: f64,
        epoch: f64,
        dist: &AttributeDistribution,
        kernel: &DeletionKernel,
        mode: DeletionMode,
        rng: &mut R,
    ) -> Result<(DepartureBatch, Vec<(f64, f64, u64, u64)>), SimError> {
        if !dist.contains(y) {
            return Err(SimError::Model(ModelError::AttributeOutsideSpace(y)));
        }
        if mode == DeletionMode::GeometricLifetime && !kernel.is_ranked() {
            return Err(SimError::GeometricModeNeedsRankedKernel);
        }
        self.clock = epoch;
        self.arrivals_seen += 1;
        let arrival_index = self.arrivals_seen;

        let upper = match kernel {
            DeletionKernel::Ranked { .. } => {
                Bound::Excluded((NotNan::new(y).expect("finite"), 0u64))
            }
            DeletionKernel::RankFree { .. } => Bound::Unbounded,
        };

        let mut deleted_keys: Vec<Key> = Vec::new();
        for (key, particle) in self.live.range_mut((Bound::Unbounded, upper)) {
            particle.attempts += 1;
            let x = key.0.into_inner();
            let dies = match mode {
                DeletionMode::BernoulliPerArrival => {
                    let p = kernel.deletion_prob(dist, x, y);
                    p > 0.0 && rng.random::<f64>() < p
                }
                DeletionMode::GeometricLifetime => {
                    let a = kernel.deletion_prob_fn().eval(dist, x);
                    let lifetime = *particle
                        .lifetime
                        .get_or_insert_with(|| sample_geometric_lifetime(a, rng));
                    particle.attempts >= lifetime
                }
            };
            if dies {
                deleted_keys.push(*key);
            }
        }

        let mut departed = Vec::with_capacity(deleted_keys.len());
        let mut departed_records = Vec::with_capacity(deleted_keys.len());
        for key in deleted_keys {
            let particle = self.live.remove(&key).expect("key collected from the map");
            departed.push(key.0.into_inner());
            departed_records.push((
                key.0.into_inner(),
                particle.arrival_epoch,
                particle.arrival_index,
                particle.attempts,
            ));
        }

        self.insert(y, epoch, arrival_index);

        Ok((
            DepartureBatch {
                trigger_index: arrival_index,
                epoch,
                departed,
            },
            departed_records,
        ))
    }
}

/// Number of the deletion attempt at which a particle with per-attempt
/// deletion probability `a` dies: `P{L > ℓ} = (1-a)^ℓ`.
pub(crate) fn sample_geometric_lifetime<R: Rng + ?Sized>(a: f64, rng: &mut R) -> u64 {
    debug_assert!(a > 0.0 && a <= 1.0);
    if a >= 1.0 {
        return 1;
    }
    let u: f64 = rng.sample(rand::distr::Open01);
    let l = (u.ln() / (-a).ln_1p()).ceil();
    if l < 1.0 {
        1
    } else {
        l as u64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::DeletionProb;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn uniform() -> AttributeDistribution {
        AttributeDistribution::standard_uniform()
    }

    fn ranked(a: f64) -> DeletionKernel {
        DeletionKernel::ranked(DeletionProb::constant(a).unwrap())
    }

    #[test]
    fn arrival_into_empty_state_deletes_nothing() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let mut state = SystemState::empty();
        let (batch, _) = state
            .step_arrival(0.5, 1.0, &uniform(), &ranked(1.0), DeletionMode::BernoulliPerArrival, &mut rng)
            .unwrap();
        assert!(batch.departed.is_empty());
        assert_eq!(state.live_count(), 1);
    }

    #[test]
    fn certain_deletion_spares_higher_attributes() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let mut state = SystemState::seed_initial_population(&[0.3, 0.7], &uniform()).unwrap();
        let (batch, _) = state
            .step_arrival(0.5, 1.0, &uniform(), &ranked(1.0), DeletionMode::BernoulliPerArrival, &mut rng)
            .unwrap();
        assert_eq!(batch.departed, vec![0.3]);
        assert_eq!(state.live_count(), 2);
        assert_eq!(state.max_attribute(), Some(0.7));
    }

    #[test]
    fn batch_size_is_binomial_over_eligible_particles() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let k = 6;
        let mut total = 0u64;
        let reps = 100_000;
        for _ in 0..reps {
            let pattern: Vec<f64> = (1..=k).map(|i| i as f64 / 20.0).collect();
            let mut state = SystemState::seed_initial_population(&pattern, &uniform()).unwrap();
            let (batch, _) = state
                .step_arrival(0.9, 1.0, &uniform(), &ranked(0.5), DeletionMode::BernoulliPerArrival, &mut rng)
                .unwrap();
            total += batch.departed.len() as u64;
        }
        // Binomial(6, 0.5): mean 3, sd of the averaged mean = sqrt(1.5/reps)
        let mean = total as f64 / reps as f64;
        let se = (1.5_f64 / reps as f64).sqrt();
        assert!((mean - 3.0).abs() < 3.0 * se, "mean {mean}");
    }

    #[test]
    fn rank_free_kernel_puts_everyone_at_risk() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let kernel = DeletionKernel::rank_free(DeletionProb::constant(1.0).unwrap());
        let mut state = SystemState::seed_initial_population(&[0.2, 0.9], &uniform()).unwrap();
        let (batch, _) = state
            .step_arrival(0.5, 1.0, &uniform(), &kernel, DeletionMode::BernoulliPerArrival, &mut rng)
            .unwrap();
        assert_eq!(batch.departed.len(), 2);
        assert_eq!(state.live_count(), 1);
    }

    #[test]
    fn seeding_rejects_attributes_outside_the_space() {
        assert!(SystemState::seed_initial_population(&[0.5, 1.5], &uniform()).is_err());
        let state = SystemState::seed_initial_population(&[], &uniform()).unwrap();
        assert_eq!(state.live_count(), 0);
    }

    #[test]
    fn duplicate_attributes_are_distinct_particles() {
        let mut state = SystemState::seed_initial_population(&[0.4, 0.4, 0.4], &uniform()).unwrap();
        assert_eq!(state.live_count(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        // Strict rank: an arrival exactly at 0.4 does not threaten them.
        let (batch, _) = state
            .step_arrival(0.4, 1.0, &uniform(), &ranked(1.0), DeletionMode::BernoulliPerArrival, &mut rng)
            .unwrap();
        assert!(batch.departed.is_empty());
        assert_eq!(state.live_count(), 4);
    }

    #[test]
    fn geometric_lifetimes_have_the_right_tail() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let a = 0.3;
        let n = 200_000;
        let survived_two = (0..n)
            .filter(|_| sample_geometric_lifetime(a, &mut rng) > 2)
            .count() as f64;
        let p = survived_two / n as f64;
        // P{L > 2} = 0.49
        assert!((p - 0.49).abs() < 0.005, "p {p}");
        assert_eq!(sample_geometric_lifetime(1.0, &mut rng), 1);
    }
}
