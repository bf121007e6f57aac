//! Exhaustive Shannon-entropy oracle for small instances.
//!
//! Enumerates every outcome string satisfying a set of parity constraints,
//! treats the solutions as uniformly distributed and computes
//! `I(A:C|B) = H(AB) + H(BC) - H(B) - H(ABC)` from explicit marginal counts.
//! Shares no code with the rank computation.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::lattice::Region;

/// Largest number of variables the oracle enumerates.
pub const MAX_ORACLE_BITS: usize = 20;

/// A parity constraint: the XOR of the outcomes on `support` equals `value`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Parity {
    pub support: Vec<usize>,
    pub value: bool,
}

fn entropy_bits(counts: &HashMap<u64, u64>, total: u64) -> f64 {
    let t = total as f64;
    counts
        .values()
        .map(|&c| {
            let p = c as f64 / t;
            -p * p.log2()
        })
        .sum()
}

/// Shannon CMI in bits of the uniform distribution on the solutions of
/// `constraints` over `labels.len()` binary variables.
pub fn shannon_cmi(labels: &[Region], constraints: &[Parity]) -> Result<f64> {
    let n = labels.len();
    if n > MAX_ORACLE_BITS {
        return Err(Error::EnumerationTooLarge { count: 1u128 << n, cap: 1u128 << MAX_ORACLE_BITS });
    }
    let masks: Vec<(u64, bool)> =
        constraints.iter().map(|c| (c.support.iter().fold(0u64, |m, &i| m ^ (1 << i)), c.value)).collect();
    let region_mask = |want: &[Region]| -> u64 {
        labels.iter().enumerate().filter(|(_, l)| want.contains(l)).fold(0u64, |m, (i, _)| m | (1 << i))
    };
    let m_ab = region_mask(&[Region::A, Region::B]);
    let m_bc = region_mask(&[Region::B, Region::C]);
    let m_b = region_mask(&[Region::B]);
    let m_abc = region_mask(&[Region::A, Region::B, Region::C]);
    let mut counts: [HashMap<u64, u64>; 4] = Default::default();
    let mut total = 0u64;
    for x in 0u64..(1 << n) {
        if masks.iter().all(|&(m, v)| ((x & m).count_ones() % 2 == 1) == v) {
            total += 1;
            for (k, m) in [m_ab, m_bc, m_b, m_abc].iter().enumerate() {
                *counts[k].entry(x & m).or_insert(0) += 1;
            }
        }
    }
    if total == 0 {
        return Err(Error::Domain("constraints are inconsistent".into()));
    }
    let h: Vec<f64> = counts.iter().map(|c| entropy_bits(c, total)).collect();
    Ok(h[0] + h[1] - h[2] - h[3])
}
