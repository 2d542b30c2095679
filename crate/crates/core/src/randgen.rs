//! Seeded random instance generation for the oracle batches and the
//! property suites. ChaCha-based so a seed printed in a report reproduces
//! the run exactly.

use std::collections::{BTreeMap, BTreeSet};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::convex::ConvexSet;
use crate::model::{Label, Nplts};
use crate::rational::{ratio, Rational};
use crate::subdist::{StateId, SubDist};

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[derive(Clone, Copy, Debug)]
pub struct ModelParams {
    pub max_states: usize,
    pub max_labels: usize,
    pub max_dists_per_edge: usize,
    pub max_support: usize,
    pub max_denominator: u64,
    /// Chance (out of 100) that a (state, label) pair is blocked.
    pub block_percent: u32,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            max_states: 6,
            max_labels: 3,
            max_dists_per_edge: 3,
            max_support: 3,
            max_denominator: 8,
            block_percent: 35,
        }
    }
}

/// A random full distribution over up to `max_support` of the given states,
/// with one common denominator bounded by `max_denominator`.
pub fn random_distribution(
    rng: &mut impl Rng,
    states: &[StateId],
    max_support: usize,
    max_denominator: u64,
) -> SubDist {
    let support_size = rng.gen_range(1..=max_support.min(states.len()));
    let mut chosen: BTreeSet<&StateId> = BTreeSet::new();
    while chosen.len() < support_size {
        chosen.insert(&states[rng.gen_range(0..states.len())]);
    }
    let chosen: Vec<&StateId> = chosen.into_iter().collect();
    let denom = rng.gen_range(chosen.len() as u64..=max_denominator.max(chosen.len() as u64));
    // A random composition of `denom` into positive parts.
    let mut parts = vec![1u64; chosen.len()];
    for _ in 0..denom - chosen.len() as u64 {
        let i = rng.gen_range(0..parts.len());
        parts[i] += 1;
    }
    let weights = chosen
        .into_iter()
        .zip(parts)
        .map(|(s, p)| (s.clone(), ratio(p as i64, denom as i64)));
    SubDist::distribution(weights).expect("composition sums to 1")
}

pub fn random_model(rng: &mut impl Rng, params: &ModelParams) -> Nplts {
    let n_states = rng.gen_range(1..=params.max_states);
    let n_labels = rng.gen_range(1..=params.max_labels);
    let states: Vec<StateId> = (0..n_states).map(|i| format!("s{i}")).collect();
    let labels: Vec<Label> =
        ["a", "b", "c", "d"][..n_labels].iter().map(|s| s.to_string()).collect();
    let mut trans: BTreeMap<StateId, BTreeMap<Label, Vec<SubDist>>> = BTreeMap::new();
    for x in &states {
        let mut by_label = BTreeMap::new();
        for a in &labels {
            if rng.gen_range(0..100) < params.block_percent {
                continue;
            }
            let k = rng.gen_range(1..=params.max_dists_per_edge);
            let dists: Vec<SubDist> = (0..k)
                .map(|_| {
                    random_distribution(rng, &states, params.max_support, params.max_denominator)
                })
                .collect();
            by_label.insert(a.clone(), dists);
        }
        trans.insert(x.clone(), by_label);
    }
    Nplts::new(states.into_iter().collect(), labels.into_iter().collect(), trans)
        .expect("generated models are well-formed")
}

/// A random LTS-shaped model (all Dirac distributions), for the
/// backward-compatibility checks.
pub fn random_lts(rng: &mut impl Rng, params: &ModelParams) -> crate::model::Lts {
    let n_states = rng.gen_range(1..=params.max_states);
    let n_labels = rng.gen_range(1..=params.max_labels);
    let states: Vec<StateId> = (0..n_states).map(|i| format!("s{i}")).collect();
    let labels: Vec<Label> =
        ["a", "b", "c", "d"][..n_labels].iter().map(|s| s.to_string()).collect();
    let mut trans: BTreeMap<StateId, BTreeMap<Label, BTreeSet<StateId>>> = BTreeMap::new();
    for x in &states {
        let mut by_label = BTreeMap::new();
        for a in &labels {
            if rng.gen_range(0..100) < params.block_percent {
                continue;
            }
            let k = rng.gen_range(1..=3usize.min(n_states));
            let mut succ = BTreeSet::new();
            for _ in 0..k {
                succ.insert(states[rng.gen_range(0..n_states)].clone());
            }
            by_label.insert(a.clone(), succ);
        }
        trans.insert(x.clone(), by_label);
    }
    crate::model::Lts {
        states: states.into_iter().collect(),
        labels: labels.into_iter().collect(),
        trans,
    }
}

/// A random RPLTS-shaped model (singleton transition sets).
pub fn random_rplts(rng: &mut impl Rng, params: &ModelParams) -> crate::model::Rplts {
    let n_states = rng.gen_range(1..=params.max_states);
    let n_labels = rng.gen_range(1..=params.max_labels);
    let states: Vec<StateId> = (0..n_states).map(|i| format!("s{i}")).collect();
    let labels: Vec<Label> =
        ["a", "b", "c", "d"][..n_labels].iter().map(|s| s.to_string()).collect();
    let mut trans: BTreeMap<StateId, BTreeMap<Label, SubDist>> = BTreeMap::new();
    for x in &states {
        let mut by_label = BTreeMap::new();
        for a in &labels {
            if rng.gen_range(0..100) < params.block_percent {
                continue;
            }
            by_label.insert(
                a.clone(),
                random_distribution(rng, &states, params.max_support, params.max_denominator),
            );
        }
        trans.insert(x.clone(), by_label);
    }
    crate::model::Rplts {
        states: states.into_iter().collect(),
        labels: labels.into_iter().collect(),
        trans,
    }
}

/// A random canonical convex set over the given states, for the algebra
/// property suites.
pub fn random_convex_set(
    rng: &mut impl Rng,
    states: &[StateId],
    max_generators: usize,
    max_denominator: u64,
) -> ConvexSet {
    let k = rng.gen_range(1..=max_generators);
    let gens: Vec<SubDist> = (0..k)
        .map(|_| {
            // Subdistributions: route part of the mass to ⋆ by extending the
            // state list with a virtual dead coordinate.
            let d = random_distribution(rng, states, states.len(), max_denominator);
            if rng.gen_bool(0.4) {
                let q = ratio(rng.gen_range(1..=7), 8);
                SubDist::convex_comb(&q, &d, &SubDist::dirac_star())
            } else {
                d
            }
        })
        .collect();
    ConvexSet::canonicalize(gens).expect("nonempty")
}

/// A random probability strictly between 0 and 1 with a small denominator.
pub fn random_strict_prob(rng: &mut impl Rng, max_denominator: u64) -> Rational {
    let d = rng.gen_range(2..=max_denominator);
    ratio(rng.gen_range(1..d) as i64, d as i64)
}

pub use crate::model::all_words;
