//! Site-by-site canonicalization decoder and its tiled quasi-local truncation.
//!
//! Every non-X site is rewired to the X pairing of its sublattice. The loops
//! through the site are updated by a split (one object becomes two), a merge
//! (two objects become one) or a reroute (one object stays one). Constraint
//! rows are tracked at the level of odd supports; measurement signs are not
//! simulated because every sign correction succeeds deterministically.

use serde::{Deserialize, Serialize};

use crate::analysis::Estimate;
use crate::error::{Error, Result};
use crate::f2::{self, flip_bit, get_bit, BitMatrix};
use crate::lattice::{build_lattice, make_tiling, LatticeSpec, TilingPlan};
use crate::loops::{inner_partner, pairings_of, rewire_rule, trace_pairings, Pairing, Sector};
use crate::mc;
use crate::sampler::{Flag, FlagConfig, NoiseParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Update {
    NoOp,
    Split,
    Reroute,
    Merge,
    /// Two strands that both carry the reference bit were merged; the logical
    /// bit was parked on the site first.
    SpecialMerge,
    /// Strand-strand merge outside sector X.
    StrandMerge,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeReport {
    pub success: bool,
    pub aborted: bool,
    pub aborted_tile: Option<usize>,
    pub updates_performed: usize,
    pub special_merges: usize,
    pub splits: usize,
    pub merges: usize,
    pub reroutes: usize,
}

impl DecodeReport {
    fn record(&mut self, u: Update) {
        match u {
            Update::NoOp => return,
            Update::Split => self.splits += 1,
            Update::Reroute => self.reroutes += 1,
            Update::Merge | Update::StrandMerge => self.merges += 1,
            Update::SpecialMerge => {
                self.merges += 1;
                self.special_merges += 1
            }
        }
        self.updates_performed += 1;
    }
}

#[derive(Debug, Clone, Copy)]
struct Object {
    closed: bool,
    alive: bool,
    size: u32,
    carries_ref: bool,
}

enum Walk {
    Closed,
    Corner,
    /// Re-entered the watched site through a half-edge other than the start.
    Met,
    Left,
}

/// Step-wise traversal along the current pairing.
struct Walker {
    start: usize,
    enter: usize,
    half_edges: Vec<u32>,
    end: Option<Walk>,
}

impl Walker {
    fn new(start: usize) -> Self {
        Walker { start, enter: start, half_edges: Vec::new(), end: None }
    }

    /// One site visit; `watch` is the site whose re-entry counts as `Met`.
    fn step(&mut self, spec: &LatticeSpec, pairings: &[Pairing], watch: Option<usize>) {
        let exit = inner_partner(pairings, self.enter);
        self.half_edges.push(self.enter as u32);
        self.half_edges.push(exit as u32);
        match spec.external(exit) {
            None => self.end = Some(Walk::Corner),
            Some(n) if n == self.start => self.end = Some(Walk::Closed),
            Some(n) if watch == Some(n >> 2) => self.end = Some(Walk::Met),
            Some(n) => self.enter = n,
        }
    }
}

/// Mutable loop configuration with per-object constraint rows.
pub struct DecoderState<'a> {
    spec: &'a LatticeSpec,
    pairings: Vec<Pairing>,
    target: Vec<Pairing>,
    object_of: Vec<u32>,
    objects: Vec<Object>,
    rows: Vec<Vec<u64>>,
    track_rows: bool,
    strands: [u32; 2],
    bookmark: Option<usize>,
    initial_sector: Sector,
    flags: FlagConfig,
}

impl<'a> DecoderState<'a> {
    pub fn new(spec: &'a LatticeSpec, flags: &FlagConfig, track_rows: bool) -> Self {
        let pairings = pairings_of(spec, flags);
        let lc = trace_pairings(spec, &pairings, flags).expect("flag pairings are valid");
        let sector = lc.sector();
        let mut object_of = vec![0u32; spec.n_half_edges()];
        for (h, o) in object_of.iter_mut().enumerate() {
            *o = lc.object_of(h) as u32;
        }
        let words = f2::words_for(spec.n_sites());
        let mut objects = Vec::with_capacity(lc.loops().len());
        let mut rows = Vec::new();
        for l in lc.loops() {
            objects.push(Object {
                closed: l.closed,
                alive: true,
                size: l.len() as u32,
                carries_ref: !l.closed && sector == Sector::X,
            });
            if track_rows {
                let mut r = vec![0u64; words];
                for &s in &l.odd_support {
                    flip_bit(&mut r, s as usize);
                }
                rows.push(r);
            }
        }
        let [s0, s1] = lc.strand_indices();
        let target = (0..spec.n_sites()).map(|s| rewire_rule(Flag::X, spec.sublattice(s))).collect();
        DecoderState {
            spec,
            pairings,
            target,
            object_of,
            objects,
            rows,
            track_rows,
            strands: [s0 as u32, s1 as u32],
            bookmark: None,
            initial_sector: sector,
            flags: flags.clone(),
        }
    }

    pub fn initial_sector(&self) -> Sector {
        self.initial_sector
    }

    pub fn pairings(&self) -> &[Pairing] {
        &self.pairings
    }

    pub fn bookmark(&self) -> Option<usize> {
        self.bookmark
    }

    pub fn is_canonical(&self) -> bool {
        self.pairings == self.target
    }

    pub fn needs_update(&self, site: usize) -> bool {
        self.pairings[site] != self.target[site]
    }

    /// Current flag configuration (converted sites read X).
    pub fn flags(&self) -> &FlagConfig {
        &self.flags
    }

    fn walk_full(&self, start: usize) -> (Vec<u32>, Walk) {
        let mut w = Walker::new(start);
        while w.end.is_none() {
            w.step(self.spec, &self.pairings, None);
        }
        (w.half_edges, w.end.expect("walk ended"))
    }

    /// All half-edges of the object through `h` (both directions for strands).
    fn object_half_edges(&self, h: usize) -> Vec<u32> {
        let (mut hes, end) = self.walk_full(h);
        if let Walk::Corner = end {
            // walking from the partner of h runs the other way
            let (back, _) = self.walk_full(inner_partner(&self.pairings, h));
            hes.extend(back.into_iter().skip(2));
        }
        hes
    }

    fn row_of(&self, half_edges: &[u32]) -> Vec<u64> {
        let mut r = vec![0u64; f2::words_for(self.spec.n_sites())];
        for &h in half_edges.iter().step_by(2) {
            flip_bit(&mut r, (h >> 2) as usize);
        }
        r
    }

    fn xor_rows(&mut self, dst: usize, src: usize) {
        if !self.track_rows {
            return;
        }
        let s = std::mem::take(&mut self.rows[src]);
        for (d, v) in self.rows[dst].iter_mut().zip(&s) {
            *d ^= v;
        }
        self.rows[src] = s;
    }

    fn new_object(&mut self, obj: Object, row: Option<Vec<u64>>) -> u32 {
        self.objects.push(obj);
        if self.track_rows {
            self.rows.push(row.expect("row supplied when tracking"));
        }
        (self.objects.len() - 1) as u32
    }

    /// Rewires `site` to its X pairing and updates objects and rows.
    pub fn convert_site(&mut self, site: usize) -> Update {
        if !self.needs_update(site) {
            log::warn!("site {site} already has the X pairing");
            return Update::NoOp;
        }
        let base = 4 * site;
        let old = self.pairings[site];
        let new = self.target[site];
        let a1 = base;
        let b1 = base + old.pairs()[1].0 as usize;
        let oa = self.object_of[a1] as usize;
        let ob = self.object_of[b1] as usize;
        self.flags.set(site, Flag::X);
        if oa != ob {
            return self.merge(site, new, (oa, a1), (ob, b1));
        }
        self.pairings[site] = new;
        let c1 = base;
        let e1 = base + new.pairs()[1].0 as usize;
        let mut w1 = Walker::new(c1);
        let mut w2 = Walker::new(e1);
        let split = loop {
            for w in [&mut w1, &mut w2] {
                if w.end.is_none() {
                    w.step(self.spec, &self.pairings, Some(site));
                }
            }
            match (&w1.end, &w2.end) {
                (Some(Walk::Closed), _) => break Some(w1),
                (_, Some(Walk::Closed)) => break Some(w2),
                (Some(Walk::Met), _) | (_, Some(Walk::Met)) => break None,
                (Some(Walk::Corner), Some(Walk::Corner)) => break None,
                _ => {}
            }
        };
        let Some(piece) = split else {
            return Update::Reroute;
        };
        let row = self.track_rows.then(|| self.row_of(&piece.half_edges));
        let size = piece.half_edges.len() as u32;
        let id = self.new_object(Object { closed: true, alive: true, size, carries_ref: false }, row);
        for &h in &piece.half_edges {
            self.object_of[h as usize] = id;
        }
        self.objects[oa].size -= size;
        self.xor_rows(oa, id as usize);
        Update::Split
    }

    fn merge(&mut self, site: usize, new: Pairing, (oa, ha): (usize, usize), (ob, hb): (usize, usize)) -> Update {
        let (a, b) = (self.objects[oa], self.objects[ob]);
        if !a.closed && !b.closed {
            return self.merge_strands(site, new, a.carries_ref && b.carries_ref);
        }
        let ((small, h_small), big) = if a.size <= b.size { ((oa, ha), ob) } else { ((ob, hb), oa) };
        for h in self.object_half_edges(h_small) {
            self.object_of[h as usize] = big as u32;
        }
        self.pairings[site] = new;
        self.xor_rows(big, small);
        let s = self.objects[small];
        let bg = &mut self.objects[big];
        bg.size += s.size;
        bg.carries_ref ^= s.carries_ref;
        if !s.closed {
            bg.closed = false;
            for st in self.strands.iter_mut() {
                if *st as usize == small {
                    *st = big as u32;
                }
            }
        }
        self.objects[small].alive = false;
        Update::Merge
    }

    fn merge_strands(&mut self, site: usize, new: Pairing, special: bool) -> Update {
        self.pairings[site] = new;
        if special {
            self.bookmark = Some(site);
        }
        let corners = self.spec.corners();
        let ids = self.strands;
        let (first, _) = self.walk_full(corners[0]);
        let end = *first.last().expect("nonempty") as usize;
        let other = corners[1..].iter().copied().find(|&c| c != end).expect("four corners");
        let (second, _) = self.walk_full(other);
        for (id, hes) in ids.iter().zip([&first, &second]) {
            for &h in hes.iter() {
                self.object_of[h as usize] = *id;
            }
            let o = &mut self.objects[*id as usize];
            o.size = hes.len() as u32;
            o.carries_ref = o.carries_ref && !special;
        }
        if self.track_rows {
            self.rows[ids[0] as usize] = self.row_of(&first);
            self.rows[ids[1] as usize] = self.row_of(&second);
        }
        if special {
            Update::SpecialMerge
        } else {
            Update::StrandMerge
        }
    }

    /// Odd supports of the live closed loops (requires row tracking).
    pub fn closed_rows(&self) -> Vec<Vec<u64>> {
        assert!(self.track_rows, "row tracking disabled");
        self.objects.iter().zip(&self.rows).filter(|(o, _)| o.alive && o.closed).map(|(_, r)| r.clone()).collect()
    }

    /// Rows carrying the reference bit. A parked logical is restored as the
    /// strand leaving the top-left corner.
    pub fn logical_rows(&self) -> Vec<Vec<u64>> {
        assert!(self.track_rows, "row tracking disabled");
        if self.bookmark.is_some() {
            let (hes, _) = self.walk_full(self.spec.corners()[0]);
            return vec![self.row_of(&hes)];
        }
        self.strands
            .iter()
            .filter(|&&s| self.objects[s as usize].carries_ref)
            .map(|&s| self.rows[s as usize].clone())
            .collect()
    }

    /// Compares objects and rows against an independent re-trace of the
    /// current pairing.
    pub fn check_invariants(&self) -> Result<()> {
        let lc = trace_pairings(self.spec, &self.pairings, &self.flags)?;
        for l in lc.loops() {
            let id = self.object_of[l.half_edges[0] as usize];
            if l.half_edges.iter().any(|&h| self.object_of[h as usize] != id) {
                return Err(Error::Fault("object labels split a loop".into()));
            }
            let o = self.objects[id as usize];
            if !o.alive || o.closed != l.closed || o.size as usize != l.len() {
                return Err(Error::Fault(format!("object {id} disagrees with the re-trace")));
            }
        }
        let live = self.objects.iter().filter(|o| o.alive).count();
        if live != lc.loops().len() {
            return Err(Error::Fault(format!("{live} live objects, {} loops", lc.loops().len())));
        }
        if !self.track_rows {
            return Ok(());
        }
        let n = self.spec.n_sites();
        let rebuilt: Vec<Vec<u64>> = lc.closed_loops().map(|l| self.row_of(&l.half_edges)).collect();
        if !same_span(&self.closed_rows(), &rebuilt, n) {
            return Err(Error::Fault("closed-loop row space changed".into()));
        }
        let carried = self.objects.iter().any(|o| o.alive && o.carries_ref);
        if carried {
            if lc.sector() != Sector::X {
                return Err(Error::Fault("reference rows outside sector X".into()));
            }
            let with_ref = |rows: &[Vec<u64>]| -> Vec<Vec<u64>> {
                rows.iter()
                    .map(|r| {
                        let mut v = vec![0u64; f2::words_for(n + 1)];
                        for s in f2::ones(r) {
                            flip_bit(&mut v, s);
                        }
                        flip_bit(&mut v, n);
                        v
                    })
                    .collect()
            };
            let mut mine = with_ref(&self.logical_rows());
            let strands: Vec<Vec<u64>> = lc.strands().iter().map(|l| self.row_of(&l.half_edges)).collect();
            let mut theirs = with_ref(&strands);
            let widen = |r: &Vec<u64>| {
                let mut v = vec![0u64; f2::words_for(n + 1)];
                v[..r.len()].copy_from_slice(r);
                v
            };
            mine.extend(rebuilt.iter().map(widen));
            theirs.extend(rebuilt.iter().map(widen));
            if !same_span(&mine, &theirs, n + 1) {
                return Err(Error::Fault("logical row space changed".into()));
            }
        }
        Ok(())
    }

    /// The final logical row must cross the left column an odd number of times
    /// and commute with every Z plaquette.
    pub fn check_final_logical(&self) -> Result<()> {
        let rows = self.logical_rows();
        let row = rows.first().ok_or_else(|| Error::Fault("no logical row".into()))?;
        let l = self.spec.size();
        let left = (0..l).filter(|&r| get_bit(row, self.spec.site(r, 0))).count();
        if left % 2 != 1 {
            return Err(Error::Fault("logical row misses the left cut".into()));
        }
        for plaq in self.spec.z_plaquettes() {
            if plaq.iter().filter(|&&s| get_bit(row, s)).count() % 2 != 0 {
                return Err(Error::Fault("logical row anticommutes with a Z plaquette".into()));
            }
        }
        Ok(())
    }

    /// Whether the object through `h` lies entirely inside `inside`: a closed
    /// loop, or a strand with both terminals inside.
    fn visible(&self, h: usize, inside: &dyn Fn(usize) -> bool) -> bool {
        let run = |start: usize| -> Option<Walk> {
            let mut enter = start;
            loop {
                if !inside(enter >> 2) {
                    return Some(Walk::Left);
                }
                let exit = inner_partner(&self.pairings, enter);
                match self.spec.external(exit) {
                    None => return Some(Walk::Corner),
                    Some(n) if n == start => return Some(Walk::Closed),
                    Some(n) => enter = n,
                }
            }
        };
        match run(h) {
            Some(Walk::Closed) => true,
            Some(Walk::Corner) => matches!(run(inner_partner(&self.pairings, h)), Some(Walk::Corner)),
            _ => false,
        }
    }

    /// Whether the path leaving `site` through its half-edge `h` comes back to
    /// `site` without leaving the region or reaching a corner.
    fn returns_within(&self, site: usize, h: usize, inside: &dyn Fn(usize) -> bool) -> bool {
        let Some(mut enter) = self.spec.external(h) else {
            return false;
        };
        loop {
            let s = enter >> 2;
            if s == site {
                return true;
            }
            if !inside(s) {
                return false;
            }
            match self.spec.external(inner_partner(&self.pairings, enter)) {
                None => return false,
                Some(n) => enter = n,
            }
        }
    }

    /// Whether the update at `site` can be decided from inside the region.
    ///
    /// One connected pair of half-edges at the site fixes the update: a closed
    /// segment from the site back to itself inside the region is the measured
    /// operand of a split or a merge, or shows that the move is a reroute. A
    /// strand with both terminals inside also suffices.
    pub fn decidable_within(&self, site: usize, inside: &dyn Fn(usize) -> bool) -> bool {
        let base = 4 * site;
        (base..base + 4).any(|h| self.returns_within(site, h, inside))
            || self.visible(base, inside)
            || self.visible(base + self.pairings[site].pairs()[1].0 as usize, inside)
    }
}

fn same_span(a: &[Vec<u64>], b: &[Vec<u64>], n_cols: usize) -> bool {
    let mut ma = BitMatrix::new(n_cols);
    let mut mb = BitMatrix::new(n_cols);
    let mut mab = BitMatrix::new(n_cols);
    for r in a {
        ma.push_row(r);
        mab.push_row(r);
    }
    for r in b {
        mb.push_row(r);
        mab.push_row(r);
    }
    let (ra, rb, rab) = (f2::rank(&ma), f2::rank(&mb), f2::rank(&mab));
    ra == rb && rb == rab
}

fn finish(state: &DecoderState, mut report: DecodeReport, check: bool) -> Result<DecodeReport> {
    if !state.is_canonical() {
        return Err(Error::Fault("sweep ended in a non-canonical pairing".into()));
    }
    report.success = state.initial_sector() == Sector::X;
    if check && report.success {
        state.check_final_logical()?;
    }
    Ok(report)
}

/// Converts every non-X site in row-major order.
pub fn decode_global(spec: &LatticeSpec, flags: &FlagConfig) -> Result<DecodeReport> {
    decode_global_with(spec, flags, false)
}

/// With `check`, tracks rows and verifies all invariants after every update.
pub fn decode_global_with(spec: &LatticeSpec, flags: &FlagConfig, check: bool) -> Result<DecodeReport> {
    let mut state = DecoderState::new(spec, flags, check);
    let mut report = DecodeReport::default();
    for site in 0..spec.n_sites() {
        if state.needs_update(site) {
            report.record(state.convert_site(site));
            if check {
                state.check_invariants()?;
            }
        }
    }
    finish(&state, report, check)
}

/// Processes tiles layer by layer and aborts at the first site whose update
/// cannot be decided inside its tile.
pub fn decode_quasilocal(spec: &LatticeSpec, flags: &FlagConfig, plan: &TilingPlan) -> Result<DecodeReport> {
    let mut state = DecoderState::new(spec, flags, false);
    let mut report = DecodeReport::default();
    let single = plan.is_single_tile(spec);
    let l = spec.size();
    for layer in plan.layers() {
        for &t in layer {
            let tile = plan.tiles()[t];
            for site in tile.core.sites(l) {
                if !state.needs_update(site) {
                    continue;
                }
                let region = tile.region;
                let inside = move |s: usize| region.contains(s / l, s % l);
                if !single && !state.decidable_within(site, &inside) {
                    report.aborted = true;
                    report.aborted_tile = Some(t);
                    return Ok(report);
                }
                let u = state.convert_site(site);
                if u == Update::SpecialMerge && !single {
                    report.aborted = true;
                    report.aborted_tile = Some(t);
                    return Ok(report);
                }
                report.record(u);
            }
        }
    }
    finish(&state, report, false)
}

/// Tile counts from a sweep that converts every site regardless of aborts.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TileTally {
    pub aborted: u32,
    pub visited: u32,
}

/// Runs the full tiled sweep and counts the tiles that would have aborted.
/// Estimates the per-tile abort probability rather than the first-abort event.
pub fn tally_tiles(spec: &LatticeSpec, flags: &FlagConfig, plan: &TilingPlan) -> TileTally {
    let mut state = DecoderState::new(spec, flags, false);
    let mut tally = TileTally::default();
    let single = plan.is_single_tile(spec);
    let l = spec.size();
    for layer in plan.layers() {
        for &t in layer {
            let tile = plan.tiles()[t];
            let region = tile.region;
            let inside = move |s: usize| region.contains(s / l, s % l);
            let mut bad = false;
            for site in tile.core.sites(l) {
                if state.needs_update(site) {
                    bad |= !single && !state.decidable_within(site, &inside);
                    bad |= state.convert_site(site) == Update::SpecialMerge && !single;
                }
            }
            tally.visited += 1;
            tally.aborted += bad as u32;
        }
    }
    tally
}

/// Fraction of tiles that abort, pooled over trajectories.
pub fn estimate_tile_abort(
    params: &NoiseParams,
    size: usize,
    tile: usize,
    a: f64,
    n_samples: u64,
    seed: u64,
) -> Result<f64> {
    let spec = build_lattice(size)?;
    let plan = make_tiling(&spec, tile, a)?;
    let est = mc::run_observables(&spec, params, n_samples, seed, 2, |f, out| {
        let t = tally_tiles(&spec, f, &plan);
        out[0] = t.aborted as i64;
        out[1] = t.visited as i64;
    });
    Ok(est[0].mean / est[1].mean)
}

/// Abort-rate estimate of the quasi-local decoder.
pub fn estimate_pfail(
    params: &NoiseParams,
    size: usize,
    tile: usize,
    a: f64,
    n_samples: u64,
    seed: u64,
) -> Result<Estimate> {
    let spec = build_lattice(size)?;
    let plan = make_tiling(&spec, tile, a)?;
    let fault = std::sync::Mutex::new(None);
    let est = mc::run_scalar(&spec, params, n_samples, seed, |f| match decode_quasilocal(&spec, f, &plan) {
        Ok(r) => r.aborted as i64,
        Err(e) => {
            *fault.lock().expect("fault lock") = Some(e);
            0
        }
    });
    match fault.into_inner().expect("fault lock") {
        Some(e) => Err(e),
        None => Ok(est),
    }
}

/// Global decoder success rate.
pub fn estimate_success(params: &NoiseParams, size: usize, n_samples: u64, seed: u64) -> Result<Estimate> {
    let spec = build_lattice(size)?;
    let fault = std::sync::Mutex::new(None);
    let est = mc::run_scalar(&spec, params, n_samples, seed, |f| match decode_global(&spec, f) {
        Ok(r) => r.success as i64,
        Err(e) => {
            *fault.lock().expect("fault lock") = Some(e);
            0
        }
    });
    match fault.into_inner().expect("fault lock") {
        Some(e) => Err(e),
        None => Ok(est),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::loops::trace_loops;
    use crate::sampler::{sample_flags, StreamSeed};

    #[test]
    fn clean_state_is_noop() {
        let spec = build_lattice(5).unwrap();
        let flags = FlagConfig::uniform(25, Flag::X);
        let r = decode_global_with(&spec, &flags, true).unwrap();
        assert!(r.success);
        assert_eq!(r.updates_performed, 0);
        let mut st = DecoderState::new(&spec, &flags, true);
        assert_eq!(st.convert_site(12), Update::NoOp);
    }

    #[test]
    fn single_y_restored() {
        let spec = build_lattice(7).unwrap();
        let mut flags = FlagConfig::uniform(49, Flag::X);
        flags.set(24, Flag::Y);
        let mut st = DecoderState::new(&spec, &flags, true);
        st.convert_site(24);
        assert!(st.is_canonical());
        st.check_invariants().unwrap();
        let clean = crate::cmi::build_constraints(&trace_loops(&spec, &FlagConfig::uniform(49, Flag::X)), 49, false);
        let clean_rows: Vec<Vec<u64>> = clean.matrix().rows().map(|r| r[..f2::words_for(49)].to_vec()).collect();
        assert!(same_span(&st.closed_rows(), &clean_rows, 49));
    }

    #[test]
    fn random_sweeps_keep_invariants() {
        for (l, p, q) in [(5, 0.3, 0.1), (7, 0.7, 0.1), (7, 0.5, 0.5), (9, 0.2, 0.8), (5, 1.0, 0.0)] {
            let spec = build_lattice(l).unwrap();
            let params = NoiseParams::new(p, q).unwrap();
            for i in 0..40 {
                let flags = sample_flags(&spec, &params, StreamSeed::new(21, i));
                let r = decode_global_with(&spec, &flags, true).unwrap();
                assert_eq!(r.success, trace_loops(&spec, &flags).sector() == Sector::X);
            }
        }
    }

    #[test]
    fn single_tile_matches_global() {
        let spec = build_lattice(9).unwrap();
        let plan = make_tiling(&spec, 9, 0.25).unwrap();
        let params = NoiseParams::new(0.6, 0.1).unwrap();
        for i in 0..50 {
            let flags = sample_flags(&spec, &params, StreamSeed::new(2, i));
            let g = decode_global(&spec, &flags).unwrap();
            let q = decode_quasilocal(&spec, &flags, &plan).unwrap();
            assert_eq!(g, q);
        }
    }

    #[test]
    fn tally_agrees_with_first_abort() {
        let spec = build_lattice(21).unwrap();
        let plan = make_tiling(&spec, 10, 0.4).unwrap();
        let params = NoiseParams::new(0.1, 0.1).unwrap();
        let mut completed = 0;
        for i in 0..60 {
            let flags = sample_flags(&spec, &params, StreamSeed::new(5, i));
            let r = decode_quasilocal(&spec, &flags, &plan).unwrap();
            let t = tally_tiles(&spec, &flags, &plan);
            assert_eq!(r.aborted, t.aborted > 0);
            assert_eq!(t.visited as usize, plan.tiles().len());
            if !r.aborted {
                completed += 1;
                assert_eq!(r.success, decode_global(&spec, &flags).unwrap().success);
            }
        }
        assert!(completed > 0);
    }
}
