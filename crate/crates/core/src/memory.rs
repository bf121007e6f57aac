//! Reference-code mutual information, with and without a bulk puncture.

use serde::{Deserialize, Serialize};

use crate::analysis::Estimate;
use crate::cmi::build_constraints;
use crate::error::Result;
use crate::f2;
use crate::lattice::{build_lattice, puncture_central, LatticeSpec, PunctureMask};
use crate::loops::{trace_loops, LoopConfig, Sector};
use crate::mc;
use crate::sampler::{FlagConfig, NoiseParams};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MemoryResult {
    /// I(R:Q) in bits.
    pub i_rq: Estimate,
    /// Frequencies of sectors X, Y, Z.
    pub sector_freqs: [Estimate; 3],
    /// Optimal recovery probability `(1 + I) / 2`.
    pub p_succ: f64,
}

pub fn sector_index(s: Sector) -> usize {
    match s {
        Sector::X => 0,
        Sector::Y => 1,
        Sector::Z => 2,
    }
}

/// I(R:Q) is the frequency of sector X: the logical bit survives exactly in
/// that sector and is fully lost otherwise.
pub fn mutual_info_mc(params: &NoiseParams, size: usize, n_samples: u64, seed: u64) -> Result<MemoryResult> {
    let spec = build_lattice(size)?;
    let est = mc::run_observables(&spec, params, n_samples, seed, 3, |f, out| {
        out[sector_index(trace_loops(&spec, f).sector())] = 1;
    });
    let sector_freqs = [est[0], est[1], est[2]];
    Ok(MemoryResult { i_rq: est[0], sector_freqs, p_succ: (1.0 + est[0].mean) / 2.0 })
}

/// Column mask of the punctured qubits over `n_data + 1` columns.
pub fn hole_mask(mask: &PunctureMask, n_data: usize) -> Vec<u64> {
    let cols: Vec<usize> = mask.punctured_sites().collect();
    f2::column_mask(n_data + 1, &cols)
}

pub fn punctured_mi_of_loops(lc: &LoopConfig, n_data: usize, hole: &[u64]) -> u8 {
    if lc.sector() != Sector::X {
        return 0;
    }
    let cm = build_constraints(lc, n_data, true);
    f2::eliminate_avoiding_masked(cm.matrix(), hole, cm.reference_col())
}

/// 1 iff an X-logical representative avoiding the hole exists in this
/// trajectory's constraint space. Flags inside the hole are treated as known,
/// so the flag average upper-bounds the fully traced quantity.
pub fn punctured_mi_trajectory(spec: &LatticeSpec, flags: &FlagConfig, puncture: &PunctureMask) -> u8 {
    let lc = trace_loops(spec, flags);
    punctured_mi_of_loops(&lc, spec.n_sites(), &hole_mask(puncture, spec.n_sites()))
}

pub fn punctured_mi_mc(params: &NoiseParams, size: usize, gamma: f64, n_samples: u64, seed: u64) -> Result<Estimate> {
    let spec = build_lattice(size)?;
    let mask = puncture_central(&spec, gamma)?;
    let hole = hole_mask(&mask, spec.n_sites());
    let n = spec.n_sites();
    Ok(mc::run_scalar(&spec, params, n_samples, seed, |f| {
        punctured_mi_of_loops(&trace_loops(&spec, f), n, &hole) as i64
    }))
}
