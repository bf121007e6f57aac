//! Loop-constraint matrices and conditional mutual information.

use crate::analysis::Estimate;
use crate::error::Result;
use crate::f2::{self, BitMatrix};
use crate::lattice::{build_lattice, geometry, GeometryKind, LatticeSpec, Region, Tripartition};
use crate::loops::{trace_loops, LoopConfig, Sector};
use crate::mc;
use crate::sampler::{FlagConfig, NoiseParams};

/// Parity constraints of one trajectory. Columns `0..n_data` are qubits;
/// column `n_data` is the reference bit R.
#[derive(Debug, Clone)]
pub struct ConstraintMatrix {
    matrix: BitMatrix,
    n_data: usize,
    reference_rows: usize,
}

impl ConstraintMatrix {
    pub fn matrix(&self) -> &BitMatrix {
        &self.matrix
    }

    pub fn n_data(&self) -> usize {
        self.n_data
    }

    pub fn reference_col(&self) -> usize {
        self.n_data
    }

    /// Number of strand rows carrying the reference bit.
    pub fn reference_rows(&self) -> usize {
        self.reference_rows
    }

    pub fn rank(&self) -> usize {
        f2::rank(&self.matrix)
    }
}

/// One row per closed loop with nonempty odd support; with
/// `include_reference` in sector X, also both strands with R set.
pub fn build_constraints(lc: &LoopConfig, n_data: usize, include_reference: bool) -> ConstraintMatrix {
    let mut matrix = BitMatrix::new(n_data + 1);
    for l in lc.closed_loops().filter(|l| !l.odd_support.is_empty()) {
        matrix.push_sparse(l.odd_support.iter().map(|&s| s as usize));
    }
    let mut reference_rows = 0;
    if include_reference && lc.sector() == Sector::X {
        for s in lc.strands() {
            matrix.push_sparse(s.odd_support.iter().map(|&s| s as usize).chain([n_data]));
            reference_rows += 1;
        }
    }
    ConstraintMatrix { matrix, n_data, reference_rows }
}

/// Column masks of A and C for a constraint matrix over `n_data` qubits.
#[derive(Debug, Clone)]
pub struct RegionMasks {
    pub a: Vec<u64>,
    pub c: Vec<u64>,
}

impl RegionMasks {
    pub fn new(tri: &Tripartition) -> Self {
        let n = tri.labels().len() + 1;
        let a: Vec<usize> = tri.sites(Region::A).collect();
        let c: Vec<usize> = tri.sites(Region::C).collect();
        RegionMasks { a: f2::column_mask(n, &a), c: f2::column_mask(n, &c) }
    }
}

pub fn cmi_of_constraints(cm: &ConstraintMatrix, masks: &RegionMasks) -> usize {
    f2::cmi_rank_masked(cm.matrix(), &masks.a, &masks.c)
}

pub fn cmi_of_loops(lc: &LoopConfig, n_data: usize, masks: &RegionMasks) -> usize {
    cmi_of_constraints(&build_constraints(lc, n_data, false), masks)
}

/// CMI in bits of one trajectory under a tripartition (closed-loop rows only).
pub fn cmi_trajectory(spec: &LatticeSpec, flags: &FlagConfig, tri: &Tripartition) -> usize {
    let lc = trace_loops(spec, flags);
    cmi_of_loops(&lc, spec.n_sites(), &RegionMasks::new(tri))
}

/// Flag-averaged CMI.
pub fn cmi_mc(params: &NoiseParams, kind: GeometryKind, size: usize, n_samples: u64, seed: u64) -> Result<Estimate> {
    let spec = build_lattice(size)?;
    let tri = geometry(&spec, kind)?;
    let masks = RegionMasks::new(&tri);
    let n = spec.n_sites();
    Ok(mc::run_scalar(&spec, params, n_samples, seed, |f| cmi_of_loops(&trace_loops(&spec, f), n, &masks) as i64))
}
