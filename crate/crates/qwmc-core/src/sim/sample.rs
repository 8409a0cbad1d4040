//! Measurement sampling in the computational basis.

use std::collections::BTreeMap;

use rand::Rng;

use crate::error::{Error, Result};
use crate::exec;
use crate::rng::{child_seed, rng_from_seed};
use crate::sim::state::QuantumState;

/// Counts from repeated full-register measurement of one state.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ShotRecord {
    /// Basis index -> number of times observed.  Ordered for stable output.
    pub counts: BTreeMap<u64, u64>,
    /// Total shots drawn.
    pub shots: u64,
    /// Seed the shots were drawn from.
    pub seed: u64,
}

impl ShotRecord {
    /// Observed frequency of one basis index.
    pub fn frequency(&self, index: u64) -> f64 {
        self.counts.get(&index).copied().unwrap_or(0) as f64 / self.shots as f64
    }
}

/// Draws `shots` independent measurements via inverse-CDF lookup.
///
/// Shots are batched in fixed-size chunks, each with its own child seed,
/// so the counts do not depend on thread count.
pub fn sample(state: &QuantumState, shots: u64, seed: u64) -> Result<ShotRecord> {
    if shots == 0 {
        return Err(Error::InvalidParameter {
            name: "shots",
            reason: "shot count must be at least 1".into(),
        });
    }
    let mut cdf = Vec::with_capacity(state.amplitudes().len());
    let mut acc = 0.0;
    for a in state.amplitudes() {
        acc += a.norm_sqr();
        cdf.push(acc);
    }
    let last = cdf.len() - 1;
    let batches = exec::map_ranges(shots, exec::CHUNK as u64, |chunk_idx, range| {
        let mut rng = rng_from_seed(child_seed(seed, chunk_idx));
        let mut counts: BTreeMap<u64, u64> = BTreeMap::new();
        for _ in range {
            let u: f64 = rng.random();
            let idx = cdf.partition_point(|&c| c <= u).min(last);
            *counts.entry(idx as u64).or_insert(0) += 1;
        }
        counts
    });
    let mut counts = BTreeMap::new();
    for batch in batches {
        for (idx, n) in batch {
            *counts.entry(idx).or_insert(0) += n;
        }
    }
    Ok(ShotRecord { counts, shots, seed })
}
