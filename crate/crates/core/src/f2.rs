//! Bit-packed linear algebra over GF(2).

use crate::error::{Error, Result};

const NONE: u32 = u32::MAX;

#[inline]
pub fn words_for(n_bits: usize) -> usize {
    n_bits.div_ceil(64)
}

#[inline]
pub fn get_bit(v: &[u64], i: usize) -> bool {
    (v[i >> 6] >> (i & 63)) & 1 == 1
}

#[inline]
pub fn set_bit(v: &mut [u64], i: usize) {
    v[i >> 6] |= 1 << (i & 63);
}

#[inline]
pub fn flip_bit(v: &mut [u64], i: usize) {
    v[i >> 6] ^= 1 << (i & 63);
}

/// Dense row-major bit matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    n_cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn new(n_cols: usize) -> Self {
        BitMatrix { n_cols, stride: words_for(n_cols), data: Vec::new() }
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        let stride = words_for(n_cols);
        BitMatrix { n_cols, stride, data: vec![0; n_rows * stride] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = BitMatrix::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn n_rows(&self) -> usize {
        self.data.len().checked_div(self.stride).unwrap_or(0)
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.stride..(i + 1) * self.stride]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[u64]> + '_ {
        self.data.chunks_exact(self.stride.max(1)).take(self.n_rows())
    }

    pub fn get(&self, r: usize, c: usize) -> bool {
        get_bit(self.row(r), c)
    }

    pub fn set(&mut self, r: usize, c: usize, value: bool) {
        let row = self.row_mut(r);
        if get_bit(row, c) != value {
            flip_bit(row, c);
        }
    }

    /// Appends a row with ones at the given columns (repeated columns cancel).
    pub fn push_sparse<I: IntoIterator<Item = usize>>(&mut self, cols: I) {
        let start = self.data.len();
        self.data.resize(start + self.stride, 0);
        let row = &mut self.data[start..];
        for c in cols {
            assert!(c < self.n_cols, "column {c} out of range");
            flip_bit(row, c);
        }
    }

    pub fn push_row(&mut self, row: &[u64]) {
        assert_eq!(row.len(), self.stride);
        self.data.extend_from_slice(row);
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    /// `row[dst] ^= row[src]`
    pub fn add_row(&mut self, dst: usize, src: usize) {
        for w in 0..self.stride {
            let v = self.data[src * self.stride + w];
            self.data[dst * self.stride + w] ^= v;
        }
    }

    pub fn row_ones(&self, i: usize) -> Vec<usize> {
        ones(self.row(i))
    }
}

pub fn ones(v: &[u64]) -> Vec<usize> {
    let mut out = Vec::new();
    for (w, &word) in v.iter().enumerate() {
        let mut x = word;
        while x != 0 {
            out.push(w * 64 + x.trailing_zeros() as usize);
            x &= x - 1;
        }
    }
    out
}

/// Incremental echelon basis; each stored vector has a distinct lowest set bit.
#[derive(Debug, Clone)]
pub struct XorBasis {
    stride: usize,
    pivot_of: Vec<u32>,
    vecs: Vec<u64>,
    // last nonzero word of each stored vector, bounds the XOR range
    hi: Vec<u32>,
}

impl XorBasis {
    pub fn new(n_cols: usize) -> Self {
        let stride = words_for(n_cols);
        XorBasis { stride, pivot_of: vec![NONE; stride * 64], vecs: Vec::new(), hi: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.hi.len()
    }

    pub fn clear(&mut self) {
        for i in 0..self.hi.len() {
            let v = &self.vecs[i * self.stride..(i + 1) * self.stride];
            let p = lowest_bit(v, 0).expect("stored vectors are nonzero");
            self.pivot_of[p] = NONE;
        }
        self.vecs.clear();
        self.hi.clear();
    }

    /// Fully reduces `v` so that no set bit is a pivot of the basis.
    pub fn reduce_full(&self, v: &mut [u64]) {
        for w in 0..self.stride {
            let mut x = v[w];
            while x != 0 {
                let bit = w * 64 + x.trailing_zeros() as usize;
                let idx = self.pivot_of[bit];
                if idx != NONE {
                    let idx = idx as usize;
                    let hi = self.hi[idx] as usize;
                    let b = &self.vecs[idx * self.stride..(idx + 1) * self.stride];
                    for k in w..=hi {
                        v[k] ^= b[k];
                    }
                }
                x = v[w] & !((2u64 << (bit & 63)).wrapping_sub(1));
            }
        }
    }

    /// Inserts `v` (destroyed) and returns true if it was independent.
    pub fn insert(&mut self, v: &mut [u64]) -> bool {
        self.reduce_full(v);
        let Some(p) = lowest_bit(v, 0) else {
            return false;
        };
        let hi = (0..self.stride).rev().find(|&w| v[w] != 0).expect("nonzero");
        self.pivot_of[p] = self.hi.len() as u32;
        self.vecs.extend_from_slice(v);
        self.hi.push(hi as u32);
        true
    }

    pub fn contains(&self, v: &[u64]) -> bool {
        let mut tmp = v.to_vec();
        self.reduce_full(&mut tmp);
        tmp.iter().all(|&w| w == 0)
    }
}

#[inline]
fn lowest_bit(v: &[u64], from_word: usize) -> Option<usize> {
    v[from_word..]
        .iter()
        .position(|&w| w != 0)
        .map(|i| (from_word + i) * 64 + v[from_word + i].trailing_zeros() as usize)
}

pub fn rank(m: &BitMatrix) -> usize {
    let mut basis = XorBasis::new(m.n_cols());
    let mut tmp = vec![0u64; m.stride()];
    for row in m.rows() {
        tmp.copy_from_slice(row);
        basis.insert(&mut tmp);
    }
    basis.rank()
}

/// Rank of the rows restricted (masked) to `mask`.
pub fn masked_rank(m: &BitMatrix, mask: &[u64]) -> usize {
    let mut basis = XorBasis::new(m.n_cols());
    let mut tmp = vec![0u64; m.stride()];
    for row in m.rows() {
        let mut any = 0;
        for ((t, &r), &k) in tmp.iter_mut().zip(row).zip(mask) {
            *t = r & k;
            any |= *t;
        }
        if any != 0 {
            basis.insert(&mut tmp);
        }
    }
    basis.rank()
}

pub fn column_mask(n_cols: usize, cols: &[usize]) -> Vec<u64> {
    let mut m = vec![0u64; words_for(n_cols)];
    for &c in cols {
        set_bit(&mut m, c);
    }
    m
}

/// `rank(C_A) + rank(C_C) - rank(C_AC)` after deleting the B columns.
///
/// The three column sets must be disjoint and cover every column.
pub fn cmi_rank(m: &BitMatrix, cols_a: &[usize], cols_b: &[usize], cols_c: &[usize]) -> Result<usize> {
    let n = m.n_cols();
    let mut seen = vec![false; n];
    for &c in cols_a.iter().chain(cols_b).chain(cols_c) {
        if c >= n || seen[c] {
            return Err(Error::BadColumnPartition);
        }
        seen[c] = true;
    }
    if seen.iter().any(|&s| !s) {
        return Err(Error::BadColumnPartition);
    }
    let ma = column_mask(n, cols_a);
    let mc = column_mask(n, cols_c);
    Ok(cmi_rank_masked(m, &ma, &mc))
}

/// Mask form of [`cmi_rank`]; the masks must be disjoint.
pub fn cmi_rank_masked(m: &BitMatrix, mask_a: &[u64], mask_c: &[u64]) -> usize {
    let stride = m.stride();
    let mut ba = XorBasis::new(m.n_cols());
    let mut bc = XorBasis::new(m.n_cols());
    let mut bac = XorBasis::new(m.n_cols());
    let mut ta = vec![0u64; stride];
    let mut tc = vec![0u64; stride];
    let mut tac = vec![0u64; stride];
    for row in m.rows() {
        let (mut any_a, mut any_c) = (0, 0);
        for w in 0..stride {
            ta[w] = row[w] & mask_a[w];
            tc[w] = row[w] & mask_c[w];
            tac[w] = ta[w] | tc[w];
            any_a |= ta[w];
            any_c |= tc[w];
        }
        if any_a != 0 {
            ba.insert(&mut ta);
        }
        if any_c != 0 {
            bc.insert(&mut tc);
        }
        if any_a | any_c != 0 {
            bac.insert(&mut tac);
        }
    }
    let r = ba.rank() + bc.rank();
    debug_assert!(r >= bac.rank());
    r - bac.rank()
}

/// 1 iff the row space contains a vector with a one at `target` and zeros on
/// every `forbidden` column.
pub fn eliminate_avoiding(m: &BitMatrix, forbidden: &[usize], target: usize) -> Result<u8> {
    if forbidden.contains(&target) {
        return Err(Error::Domain("target column is forbidden".into()));
    }
    let fmask = column_mask(m.n_cols(), forbidden);
    Ok(eliminate_avoiding_masked(m, &fmask, target))
}

pub fn eliminate_avoiding_masked(m: &BitMatrix, forbidden_mask: &[u64], target: usize) -> u8 {
    let stride = m.stride();
    // basis of the row space projected onto the forbidden columns, with the
    // full rows carried alongside so the same combination can be applied
    let mut basis = XorBasis::new(m.n_cols());
    let mut full: Vec<u64> = Vec::new();
    let mut proj = vec![0u64; stride];
    let mut row_buf = vec![0u64; stride];
    let mut survivors = false;
    for row in m.rows() {
        row_buf.copy_from_slice(row);
        for w in 0..stride {
            proj[w] = row_buf[w] & forbidden_mask[w];
        }
        // reduce the projection, mirroring each step on the full row
        loop {
            let Some(bit) = lowest_bit(&proj, 0) else { break };
            let idx = basis.pivot_of[bit];
            if idx == NONE {
                break;
            }
            let idx = idx as usize;
            let b = &basis.vecs[idx * stride..(idx + 1) * stride];
            let f = &full[idx * stride..(idx + 1) * stride];
            for w in 0..stride {
                proj[w] ^= b[w];
                row_buf[w] ^= f[w];
            }
        }
        match lowest_bit(&proj, 0) {
            None => {
                if get_bit(&row_buf, target) {
                    survivors = true;
                    break;
                }
            }
            Some(p) => {
                // keep the projection fully reduced below pivot p by construction
                let hi = (0..stride).rev().find(|&w| proj[w] != 0).expect("nonzero");
                basis.pivot_of[p] = basis.hi.len() as u32;
                basis.vecs.extend_from_slice(&proj);
                basis.hi.push(hi as u32);
                full.extend_from_slice(&row_buf);
            }
        }
    }
    survivors as u8
}

#[cfg(test)]
mod tests {
    use super::*;

    fn span_size_log2(rows: &[Vec<usize>], n: usize) -> usize {
        // brute-force enumeration of the row span
        use std::collections::HashSet;
        let vecs: Vec<u64> = rows.iter().map(|r| r.iter().fold(0u64, |a, &c| a ^ (1 << c))).collect();
        assert!(n <= 64);
        let mut span: HashSet<u64> = HashSet::new();
        span.insert(0);
        for v in vecs {
            let new: Vec<u64> = span.iter().map(|&s| s ^ v).collect();
            span.extend(new);
        }
        span.len().trailing_zeros() as usize
    }

    #[test]
    fn identity_and_zero() {
        assert_eq!(rank(&BitMatrix::identity(3)), 3);
        assert_eq!(rank(&BitMatrix::zeros(4, 5)), 0);
        assert_eq!(rank(&BitMatrix::identity(130)), 130);
    }

    #[test]
    fn random_rank_matches_span() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let rows: Vec<Vec<usize>> = (0..30).map(|_| (0..40).filter(|_| rng.random_bool(0.08)).collect()).collect();
            let mut m = BitMatrix::new(40);
            for r in &rows {
                m.push_sparse(r.iter().copied());
            }
            // the span can have up to 2^30 elements; only check when small
            let r = rank(&m);
            if r <= 20 {
                assert_eq!(r, span_size_log2(&rows, 40));
            }
            assert!(r <= 30);
        }
    }

    #[test]
    fn cmi_rank_small_cases() {
        let mut m = BitMatrix::new(3);
        m.push_sparse([0, 2]);
        assert_eq!(cmi_rank(&m, &[0], &[1], &[2]).unwrap(), 1);
        let mut m = BitMatrix::new(3);
        m.push_sparse([0]);
        assert_eq!(cmi_rank(&m, &[0], &[1], &[2]).unwrap(), 0);
        assert!(cmi_rank(&m, &[0, 1], &[1], &[2]).is_err());
        assert!(cmi_rank(&m, &[0], &[], &[2]).is_err());
    }

    #[test]
    fn eliminate_avoiding_small_cases() {
        // column 0 plays R
        let mut m = BitMatrix::new(2);
        m.push_sparse([0, 1]);
        assert_eq!(eliminate_avoiding(&m, &[1], 0).unwrap(), 0);
        m.push_sparse([1]);
        assert_eq!(eliminate_avoiding(&m, &[1], 0).unwrap(), 1);
        assert!(eliminate_avoiding(&m, &[0], 0).is_err());
    }

    #[test]
    fn reduce_leaves_no_pivots() {
        let mut b = XorBasis::new(200);
        let mut v = vec![0u64; 4];
        set_bit(&mut v, 3);
        set_bit(&mut v, 150);
        assert!(b.insert(&mut v.clone()));
        let mut w = vec![0u64; 4];
        set_bit(&mut w, 150);
        set_bit(&mut w, 3);
        assert!(!b.insert(&mut w));
        assert!(b.contains(&v));
        b.clear();
        assert_eq!(b.rank(), 0);
        assert!(!b.contains(&v));
    }
}
