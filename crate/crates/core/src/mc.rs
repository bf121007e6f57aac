//! Seeded parallel Monte Carlo over flag trajectories.
//!
//! Sample `i` always uses stream `(seed, i)`, and observables are reduced as
//! integer sums, so results do not depend on thread count or scheduling.

use rayon::prelude::*;

use crate::analysis::Estimate;
use crate::lattice::LatticeSpec;
use crate::sampler::{sample_flags, FlagConfig, NoiseParams, StreamSeed};

const BLOCK: u64 = 64;

#[derive(Debug, Clone, Default)]
struct Sums {
    sum: Vec<i128>,
    sum_sq: Vec<i128>,
}

impl Sums {
    fn new(k: usize) -> Self {
        Sums { sum: vec![0; k], sum_sq: vec![0; k] }
    }

    fn merge(mut self, other: Sums) -> Sums {
        for i in 0..self.sum.len() {
            self.sum[i] += other.sum[i];
            self.sum_sq[i] += other.sum_sq[i];
        }
        self
    }
}

/// Runs `n_samples` trajectories and estimates `k` integer observables.
/// `observe` writes the observables of one trajectory into its output slice.
pub fn run_observables<F>(
    spec: &LatticeSpec,
    params: &NoiseParams,
    n_samples: u64,
    seed: u64,
    k: usize,
    observe: F,
) -> Vec<Estimate>
where
    F: Fn(&FlagConfig, &mut [i64]) + Sync,
{
    assert!(n_samples >= 1, "need at least one sample");
    let n_blocks = n_samples.div_ceil(BLOCK);
    let sums = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = Sums::new(k);
            let mut out = vec![0i64; k];
            for i in b * BLOCK..((b + 1) * BLOCK).min(n_samples) {
                let flags = sample_flags(spec, params, StreamSeed::new(seed, i));
                out.iter_mut().for_each(|v| *v = 0);
                observe(&flags, &mut out);
                for (j, &v) in out.iter().enumerate() {
                    acc.sum[j] += v as i128;
                    acc.sum_sq[j] += (v as i128) * (v as i128);
                }
            }
            acc
        })
        .reduce(|| Sums::new(k), Sums::merge);
    (0..k).map(|j| Estimate::from_sums(n_samples, sums.sum[j], sums.sum_sq[j])).collect()
}

/// Single-observable convenience wrapper.
pub fn run_scalar<F>(spec: &LatticeSpec, params: &NoiseParams, n_samples: u64, seed: u64, observe: F) -> Estimate
where
    F: Fn(&FlagConfig) -> i64 + Sync,
{
    run_observables(spec, params, n_samples, seed, 1, |f, out| out[0] = observe(f))[0]
}
