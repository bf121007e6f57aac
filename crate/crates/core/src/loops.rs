//! Loop configurations induced by flag configurations.
//!
//! Each site pairs its four half-edges according to its flag and sublattice.
//! Composing these site pairings with the fixed bond dimers and boundary arcs
//! gives a set of closed loops plus two open strands joining the four corner
//! terminals.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::{Corner, Dir, LatticeSpec, Region, Sublattice, Tripartition};
use crate::sampler::{Flag, FlagConfig};

/// The three ways to split `{up, down, left, right}` into two pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Pairing {
    /// (up, right)(down, left)
    UpRight = 0,
    /// (up, left)(down, right)
    UpLeft = 1,
    /// (up, down)(left, right): the crossing
    Cross = 2,
}

// PARTNER[pairing][dir]
const PARTNER: [[u8; 4]; 3] = [
    [Dir::Right as u8, Dir::Left as u8, Dir::Down as u8, Dir::Up as u8],
    [Dir::Left as u8, Dir::Right as u8, Dir::Up as u8, Dir::Down as u8],
    [Dir::Down as u8, Dir::Up as u8, Dir::Right as u8, Dir::Left as u8],
];

impl Pairing {
    #[inline]
    pub fn partner(self, dir: Dir) -> Dir {
        Dir::from_index(PARTNER[self as usize][dir as usize] as usize)
    }

    pub fn pairs(self) -> [(Dir, Dir); 2] {
        match self {
            Pairing::UpRight => [(Dir::Up, Dir::Right), (Dir::Down, Dir::Left)],
            Pairing::UpLeft => [(Dir::Up, Dir::Left), (Dir::Down, Dir::Right)],
            Pairing::Cross => [(Dir::Up, Dir::Down), (Dir::Left, Dir::Right)],
        }
    }
}

/// Site rewiring table. Sublattice A swaps the X and Z rows of sublattice B.
pub fn rewire_rule(flag: Flag, sublattice: Sublattice) -> Pairing {
    match (flag, sublattice) {
        (Flag::Y, _) => Pairing::Cross,
        (Flag::X, Sublattice::B) | (Flag::Z, Sublattice::A) => Pairing::UpRight,
        (Flag::Z, Sublattice::B) | (Flag::X, Sublattice::A) => Pairing::UpLeft,
    }
}

pub fn pairings_of(spec: &LatticeSpec, flags: &FlagConfig) -> Vec<Pairing> {
    (0..spec.n_sites()).map(|s| rewire_rule(flags.get(s), spec.sublattice(s))).collect()
}

/// Half-edge reached by following the site pairing from `h`.
#[inline]
pub fn inner_partner(pairings: &[Pairing], h: usize) -> usize {
    let site = h >> 2;
    4 * site + PARTNER[pairings[site] as usize][h & 3] as usize
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sector {
    X,
    Y,
    Z,
}

/// A closed loop or open strand.
#[derive(Debug, Clone, Serialize)]
pub struct Loop {
    pub closed: bool,
    /// Half-edges in traversal order as (enter, exit) pairs, one pair per site visit.
    pub half_edges: Vec<u32>,
    /// Sites visited an odd number of times, ascending.
    pub odd_support: Vec<u32>,
    /// Number of Y-flagged sites in `odd_support`.
    pub n_y: u32,
}

impl Loop {
    /// Length in half-edges.
    pub fn len(&self) -> usize {
        self.half_edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.half_edges.is_empty()
    }

    /// Visited sites in traversal order (a site visited twice appears twice).
    pub fn visits(&self) -> impl Iterator<Item = usize> + '_ {
        self.half_edges.iter().step_by(2).map(|&h| (h >> 2) as usize)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LoopConfig {
    loops: Vec<Loop>,
    strands: [usize; 2],
    sector: Sector,
    #[serde(skip)]
    object_of: Vec<u32>,
}

impl LoopConfig {
    pub fn loops(&self) -> &[Loop] {
        &self.loops
    }

    pub fn closed_loops(&self) -> impl Iterator<Item = &Loop> + '_ {
        self.loops.iter().filter(|l| l.closed)
    }

    pub fn strands(&self) -> [&Loop; 2] {
        [&self.loops[self.strands[0]], &self.loops[self.strands[1]]]
    }

    pub fn strand_indices(&self) -> [usize; 2] {
        self.strands
    }

    pub fn sector(&self) -> Sector {
        self.sector
    }

    /// Index into `loops()` of the loop or strand containing half-edge `h`.
    pub fn object_of(&self, h: usize) -> usize {
        self.object_of[h] as usize
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("loop config serializes")
    }
}

pub fn trace_loops(spec: &LatticeSpec, flags: &FlagConfig) -> LoopConfig {
    let pairings = pairings_of(spec, flags);
    trace_pairings(spec, &pairings, flags).expect("pairing tables are involutions")
}

/// Traces the loops of an arbitrary site pairing. `flags` only feeds `n_y`.
pub fn trace_pairings(spec: &LatticeSpec, pairings: &[Pairing], flags: &FlagConfig) -> Result<LoopConfig> {
    let n_he = spec.n_half_edges();
    let mut object_of = vec![u32::MAX; n_he];
    let mut loops = Vec::new();
    let mut visit_parity = vec![false; spec.n_sites()];
    let corners = spec.corners();

    let mut walk = |start: usize, closed: bool, object_of: &mut Vec<u32>, loops: &mut Vec<Loop>| -> Result<usize> {
        let id = loops.len() as u32;
        let mut hes = Vec::new();
        let mut touched = Vec::new();
        let mut enter = start;
        loop {
            if object_of[enter] != u32::MAX {
                return Err(Error::Fault(format!("half-edge {enter} used twice")));
            }
            let exit = inner_partner(pairings, enter);
            object_of[enter] = id;
            object_of[exit] = id;
            hes.push(enter as u32);
            hes.push(exit as u32);
            let site = enter >> 2;
            visit_parity[site] = !visit_parity[site];
            touched.push(site as u32);
            match spec.external(exit) {
                Some(next) if closed && next == start => break,
                Some(next) => enter = next,
                None if !closed => break,
                None => return Err(Error::Fault("closed loop reached a corner".into())),
            }
        }
        let mut odd_support: Vec<u32> = touched
            .into_iter()
            .filter(|&s| {
                let odd = visit_parity[s as usize];
                visit_parity[s as usize] = false;
                odd
            })
            .collect();
        odd_support.sort_unstable();
        let n_y = odd_support.iter().filter(|&&s| flags.get(s as usize) == Flag::Y).count() as u32;
        loops.push(Loop { closed, half_edges: hes, odd_support, n_y });
        Ok(id as usize)
    };

    let s0 = walk(corners[0], false, &mut object_of, &mut loops)?;
    let other = corners[1..]
        .iter()
        .copied()
        .find(|&c| object_of[c] == u32::MAX)
        .ok_or_else(|| Error::Fault("strand endpoints inconsistent".into()))?;
    let s1 = walk(other, false, &mut object_of, &mut loops)?;
    if corners.iter().any(|&c| object_of[c] == u32::MAX) {
        return Err(Error::Fault("corner terminal left unmatched".into()));
    }
    for h in 0..n_he {
        if object_of[h] == u32::MAX {
            walk(h, true, &mut object_of, &mut loops)?;
        }
    }
    for l in loops.iter().filter(|l| l.closed) {
        if l.n_y % 2 != 0 {
            return Err(Error::Fault(format!("closed loop with odd N_Y = {}", l.n_y)));
        }
    }

    // the strand leaving the top-left corner decides the sector
    let end = *loops[s0].half_edges.last().expect("strand is nonempty") as usize;
    let sector = match spec.corner_of(end) {
        Some(Corner::TopRight) => Sector::X,
        Some(Corner::BottomRight) => Sector::Y,
        Some(Corner::BottomLeft) => Sector::Z,
        _ => return Err(Error::Fault("strand does not end at a corner".into())),
    };
    Ok(LoopConfig { loops, strands: [s0, s1], sector, object_of })
}

pub fn sector_of(lc: &LoopConfig) -> Sector {
    lc.sector()
}

pub fn loop_parity_sign(l: &Loop) -> Result<i8> {
    if !l.closed {
        return Err(Error::Domain("parity sign is defined for closed loops only".into()));
    }
    if !l.n_y.is_multiple_of(2) {
        return Err(Error::Fault(format!("closed loop with odd N_Y = {}", l.n_y)));
    }
    Ok(if (l.n_y / 2).is_multiple_of(2) { 1 } else { -1 })
}

/// Number of A-C transitions along a visit sequence after dropping B and
/// merging repeats.
fn ac_transitions(regions: impl Iterator<Item = Region>, cyclic: bool) -> usize {
    let mut seq: Vec<Region> = Vec::new();
    for r in regions.filter(|&r| r != Region::B) {
        if seq.last() != Some(&r) {
            seq.push(r);
        }
    }
    if cyclic && seq.len() > 1 && seq.first() == seq.last() {
        seq.pop();
    }
    match seq.len() {
        0 | 1 => 0,
        n if cyclic => n,
        n => n - 1,
    }
}

/// Number of closed-loop arcs running from A to C through B.
///
/// The two strands are excluded: in the X-pinned phase they hug the top and
/// bottom boundaries and cross every global tripartition at any separation.
pub fn spanning_number(lc: &LoopConfig, tri: &Tripartition) -> usize {
    lc.closed_loops().map(|l| ac_transitions(l.visits().map(|s| tri.label(s)), true)).sum()
}

/// A-C arcs along the two open strands.
pub fn strand_spanning_number(lc: &LoopConfig, tri: &Tripartition) -> usize {
    lc.strands().iter().map(|l| ac_transitions(l.visits().map(|s| tri.label(s)), false)).sum()
}

/// 1 iff two distinct objects each visit `site_a` once and `site_c` once.
///
/// The objects are the closed loops together with the union of the two
/// strands, whose combined odd support lies in the closed-loop span.
pub fn two_loop_connection(lc: &LoopConfig, site_a: usize, site_c: usize) -> u8 {
    let [s0, s1] = lc.strand_indices();
    let mut counts: Vec<(usize, u8, u8)> = Vec::with_capacity(4);
    for (i, l) in lc.loops().iter().enumerate() {
        let id = if i == s1 { s0 } else { i };
        for s in l.visits() {
            let (da, dc) = ((s == site_a) as u8, (s == site_c) as u8);
            if da + dc == 0 {
                continue;
            }
            match counts.iter_mut().find(|(o, _, _)| *o == id) {
                Some(e) => {
                    e.1 += da;
                    e.2 += dc;
                }
                None => counts.push((id, da, dc)),
            }
        }
    }
    let n = counts.iter().filter(|&&(_, a, c)| a == 1 && c == 1).count();
    (n == 2) as u8
}

/// Histogram of closed-loop lengths in half-edges.
pub fn loop_length_stats(lc: &LoopConfig) -> BTreeMap<usize, usize> {
    let mut hist = BTreeMap::new();
    for l in lc.closed_loops() {
        *hist.entry(l.len()).or_insert(0) += 1;
    }
    hist
}

/// Longest loop or strand, in half-edges.
pub fn max_object_length(lc: &LoopConfig) -> usize {
    lc.loops().iter().map(Loop::len).max().unwrap_or(0)
}
