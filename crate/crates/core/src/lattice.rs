//! Rotated surface-code patch geometry.
//!
//! Qubits sit on the sites of an `L x L` grid. Every site carries four
//! half-edges (up, down, left, right). Facing half-edges of neighbouring
//! sites are glued into fixed bond dimers; outward half-edges on the
//! boundary are glued pairwise into boundary arcs, except for one terminal
//! half-edge at each corner.
//!
//! Half-edge `h` of site `s` in direction `d` has index `4 * s + d`.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const NO_PARTNER: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Dir {
    Up = 0,
    Down = 1,
    Left = 2,
    Right = 3,
}

impl Dir {
    pub const ALL: [Dir; 4] = [Dir::Up, Dir::Down, Dir::Left, Dir::Right];

    pub fn from_index(i: usize) -> Dir {
        Dir::ALL[i & 3]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sublattice {
    A,
    B,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Corner {
    TopLeft,
    TopRight,
    BottomLeft,
    BottomRight,
}

/// Immutable geometry of a distance-`L` rotated patch.
#[derive(Debug, Clone)]
pub struct LatticeSpec {
    size: usize,
    external: Vec<u32>,
    corners: [usize; 4],
    bond_dimers: Vec<(usize, usize)>,
    boundary_arcs: Vec<(usize, usize)>,
}

impl LatticeSpec {
    pub fn new(size: usize) -> Result<Self> {
        build_lattice(size)
    }

    #[inline]
    pub fn size(&self) -> usize {
        self.size
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.size * self.size
    }

    #[inline]
    pub fn n_half_edges(&self) -> usize {
        4 * self.n_sites()
    }

    #[inline]
    pub fn site(&self, row: usize, col: usize) -> usize {
        row * self.size + col
    }

    #[inline]
    pub fn coords(&self, site: usize) -> (usize, usize) {
        (site / self.size, site % self.size)
    }

    /// Checkerboard parity: even `row + col` is sublattice A.
    #[inline]
    pub fn sublattice(&self, site: usize) -> Sublattice {
        let (r, c) = self.coords(site);
        if (r + c) % 2 == 0 {
            Sublattice::A
        } else {
            Sublattice::B
        }
    }

    #[inline]
    pub fn half_edge(&self, site: usize, dir: Dir) -> usize {
        4 * site + dir as usize
    }

    #[inline]
    pub fn site_of(&self, half_edge: usize) -> usize {
        half_edge >> 2
    }

    #[inline]
    pub fn dir_of(&self, half_edge: usize) -> Dir {
        Dir::from_index(half_edge)
    }

    /// Partner across a bond dimer or boundary arc; `None` for corner terminals.
    #[inline]
    pub fn external(&self, half_edge: usize) -> Option<usize> {
        let p = self.external[half_edge];
        (p != NO_PARTNER).then_some(p as usize)
    }

    /// Corner terminals in the order top-left, top-right, bottom-left, bottom-right.
    pub fn corners(&self) -> [usize; 4] {
        self.corners
    }

    pub fn corner_of(&self, half_edge: usize) -> Option<Corner> {
        const ORDER: [Corner; 4] = [Corner::TopLeft, Corner::TopRight, Corner::BottomLeft, Corner::BottomRight];
        self.corners.iter().position(|&h| h == half_edge).map(|i| ORDER[i])
    }

    pub fn bond_dimers(&self) -> &[(usize, usize)] {
        &self.bond_dimers
    }

    pub fn boundary_arcs(&self) -> &[(usize, usize)] {
        &self.boundary_arcs
    }

    /// Orthogonal neighbours of a site.
    pub fn neighbors(&self, site: usize) -> impl Iterator<Item = usize> + '_ {
        let (r, c) = self.coords(site);
        let l = self.size;
        let cand = [
            (r > 0).then(|| site - l),
            (r + 1 < l).then(|| site + l),
            (c > 0).then(|| site - 1),
            (c + 1 < l).then(|| site + 1),
        ];
        cand.into_iter().flatten()
    }

    /// The `(L-1)^2 / 2 + (L-1)` sites-sets of the X-type plaquettes: bulk faces
    /// whose top-left site has even parity, plus weight-two faces on the left and
    /// right boundaries.
    pub fn x_plaquettes(&self) -> Vec<Vec<usize>> {
        self.plaquettes(0)
    }

    /// Z-type plaquettes: odd bulk faces plus weight-two faces on the top and
    /// bottom boundaries.
    pub fn z_plaquettes(&self) -> Vec<Vec<usize>> {
        self.plaquettes(1)
    }

    fn plaquettes(&self, parity: usize) -> Vec<Vec<usize>> {
        let l = self.size;
        let mut out = Vec::new();
        for r in 0..l - 1 {
            for c in 0..l - 1 {
                if (r + c) % 2 == parity {
                    out.push(vec![self.site(r, c), self.site(r, c + 1), self.site(r + 1, c), self.site(r + 1, c + 1)]);
                }
            }
        }
        if parity == 0 {
            // left boundary faces span rows (r, r+1) with r odd, right ones r even
            for r in (1..l - 1).step_by(2) {
                out.push(vec![self.site(r, 0), self.site(r + 1, 0)]);
            }
            for r in (0..l - 1).step_by(2) {
                out.push(vec![self.site(r, l - 1), self.site(r + 1, l - 1)]);
            }
        } else {
            for c in (0..l - 1).step_by(2) {
                out.push(vec![self.site(0, c), self.site(0, c + 1)]);
            }
            for c in (1..l - 1).step_by(2) {
                out.push(vec![self.site(l - 1, c), self.site(l - 1, c + 1)]);
            }
        }
        out
    }
}

pub fn build_lattice(size: usize) -> Result<LatticeSpec> {
    if size < 3 || size.is_multiple_of(2) {
        return Err(Error::InvalidSize(size));
    }
    let l = size;
    let n = l * l;
    let he = |s: usize, d: Dir| 4 * s + d as usize;
    let mut external = vec![NO_PARTNER; 4 * n];
    let mut bond_dimers = Vec::with_capacity(2 * l * (l - 1));
    let mut boundary_arcs = Vec::with_capacity(2 * (l - 1));

    let glue = |ext: &mut Vec<u32>, a: usize, b: usize| {
        debug_assert!(ext[a] == NO_PARTNER && ext[b] == NO_PARTNER);
        ext[a] = b as u32;
        ext[b] = a as u32;
    };

    for r in 0..l {
        for c in 0..l {
            let s = r * l + c;
            if c + 1 < l {
                let (a, b) = (he(s, Dir::Right), he(s + 1, Dir::Left));
                glue(&mut external, a, b);
                bond_dimers.push((a, b));
            }
            if r + 1 < l {
                let (a, b) = (he(s, Dir::Down), he(s + l, Dir::Up));
                glue(&mut external, a, b);
                bond_dimers.push((a, b));
            }
        }
    }

    // Boundary arcs. The offsets are the ones for which the all-X configuration
    // closes every X plaquette into a loop and leaves strands along the top and
    // bottom rows.
    let mut arcs = Vec::new();
    for c in (0..l - 1).step_by(2) {
        arcs.push((he(c, Dir::Up), he(c + 1, Dir::Up)));
    }
    for c in (1..l - 1).step_by(2) {
        let (s, t) = ((l - 1) * l + c, (l - 1) * l + c + 1);
        arcs.push((he(s, Dir::Down), he(t, Dir::Down)));
    }
    for r in (1..l - 1).step_by(2) {
        arcs.push((he(r * l, Dir::Left), he((r + 1) * l, Dir::Left)));
    }
    for r in (0..l - 1).step_by(2) {
        let (s, t) = (r * l + l - 1, (r + 1) * l + l - 1);
        arcs.push((he(s, Dir::Right), he(t, Dir::Right)));
    }
    for (a, b) in arcs {
        glue(&mut external, a, b);
        boundary_arcs.push((a, b));
    }

    let corners = [he(0, Dir::Left), he(l - 1, Dir::Up), he((l - 1) * l, Dir::Down), he(n - 1, Dir::Right)];
    debug_assert!(corners.iter().all(|&h| external[h] == NO_PARTNER));
    debug_assert_eq!(external.iter().filter(|&&p| p == NO_PARTNER).count(), 4);

    Ok(LatticeSpec { size, external, corners, bond_dimers, boundary_arcs })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Region {
    A,
    B,
    C,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum GeometryKind {
    Global { r: usize },
    Local { r: usize },
    Pairwise { d_ac: usize },
}

impl fmt::Display for GeometryKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeometryKind::Global { r } => write!(f, "global:r={r}"),
            GeometryKind::Local { r } => write!(f, "local:r={r}"),
            GeometryKind::Pairwise { d_ac } => write!(f, "pairwise:d={d_ac}"),
        }
    }
}

/// A labelling of every site as A, B or C.
#[derive(Debug, Clone)]
pub struct Tripartition {
    labels: Vec<Region>,
    kind: GeometryKind,
}

impl Tripartition {
    /// Builds a tripartition from explicit labels and checks that B separates
    /// A from C.
    pub fn from_labels(spec: &LatticeSpec, labels: Vec<Region>, kind: GeometryKind) -> Result<Self> {
        if labels.len() != spec.n_sites() {
            return Err(Error::InvalidRegion("label vector has wrong length".into()));
        }
        let t = Tripartition { labels, kind };
        if t.sites(Region::A).next().is_none() || t.sites(Region::C).next().is_none() {
            return Err(Error::InvalidRegion("A and C must be nonempty".into()));
        }
        if !t.is_separating(spec) {
            return Err(Error::InvalidRegion("B does not separate A from C".into()));
        }
        Ok(t)
    }

    #[inline]
    pub fn label(&self, site: usize) -> Region {
        self.labels[site]
    }

    pub fn labels(&self) -> &[Region] {
        &self.labels
    }

    pub fn kind(&self) -> GeometryKind {
        self.kind
    }

    pub fn sites(&self, region: Region) -> impl Iterator<Item = usize> + '_ {
        self.labels.iter().enumerate().filter(move |(_, &l)| l == region).map(|(s, _)| s)
    }

    pub fn count(&self, region: Region) -> usize {
        self.labels.iter().filter(|&&l| l == region).count()
    }

    /// Breadth-first search from A through non-B sites; true if C is unreachable.
    pub fn is_separating(&self, spec: &LatticeSpec) -> bool {
        let mut seen = vec![false; spec.n_sites()];
        let mut queue: VecDeque<usize> = self.sites(Region::A).collect();
        for &s in &queue {
            seen[s] = true;
        }
        while let Some(s) = queue.pop_front() {
            for t in spec.neighbors(s) {
                if seen[t] || self.labels[t] == Region::B {
                    continue;
                }
                if self.labels[t] == Region::C {
                    return false;
                }
                seen[t] = true;
                queue.push_back(t);
            }
        }
        true
    }
}

/// A = left strip, C = right strip of equal width `(L - r) / 2`, B = the rest.
pub fn tripartition_global(spec: &LatticeSpec, r: usize) -> Result<Tripartition> {
    let l = spec.size();
    if r < 1 || r > l - 2 {
        return Err(Error::InvalidRegion(format!("global separation r={r} outside 1..={}", l - 2)));
    }
    let w = (l - r) / 2;
    let labels = (0..spec.n_sites())
        .map(|s| {
            let c = s % l;
            if c < w {
                Region::A
            } else if c >= l - w {
                Region::C
            } else {
                Region::B
            }
        })
        .collect();
    Tripartition::from_labels(spec, labels, GeometryKind::Global { r })
}

/// A = central site, B = Chebyshev annulus of thickness `r`, C = everything else.
pub fn tripartition_local(spec: &LatticeSpec, r: usize) -> Result<Tripartition> {
    let m = spec.size() / 2;
    tripartition_local_at(spec, spec.site(m, m), r)
}

/// Local geometry anchored at an arbitrary site.
pub fn tripartition_local_at(spec: &LatticeSpec, center: usize, r: usize) -> Result<Tripartition> {
    if r < 1 {
        return Err(Error::InvalidRegion("local annulus thickness must be at least 1".into()));
    }
    if center >= spec.n_sites() {
        return Err(Error::InvalidRegion(format!("site {center} is off the lattice")));
    }
    let (r0, c0) = spec.coords(center);
    let labels: Vec<Region> = (0..spec.n_sites())
        .map(|s| {
            let (rr, cc) = spec.coords(s);
            let d = rr.abs_diff(r0).max(cc.abs_diff(c0));
            match d {
                0 => Region::A,
                d if d <= r => Region::B,
                _ => Region::C,
            }
        })
        .collect();
    if !labels.contains(&Region::C) {
        return Err(Error::InvalidRegion(format!("local annulus r={r} leaves C empty")));
    }
    Tripartition::from_labels(spec, labels, GeometryKind::Local { r })
}

/// Single-site A and C on the central row, `d_ac` apart and centred.
pub fn tripartition_pairwise(spec: &LatticeSpec, d_ac: usize) -> Result<Tripartition> {
    let (a, c) = pairwise_sites(spec, d_ac)?;
    let mut labels = vec![Region::B; spec.n_sites()];
    labels[a] = Region::A;
    labels[c] = Region::C;
    Tripartition::from_labels(spec, labels, GeometryKind::Pairwise { d_ac })
}

/// The (A, C) sites of the pairwise geometry.
pub fn pairwise_sites(spec: &LatticeSpec, d_ac: usize) -> Result<(usize, usize)> {
    let l = spec.size();
    if d_ac <= 1 || d_ac >= l {
        return Err(Error::InvalidRegion(format!("pairwise distance {d_ac} outside 2..{l}")));
    }
    let m = (l - 1) / 2;
    let ca = m.checked_sub(d_ac / 2);
    match ca {
        Some(ca) if ca + d_ac < l => Ok((spec.site(m, ca), spec.site(m, ca + d_ac))),
        _ => Err(Error::InvalidRegion(format!("pairwise sites at distance {d_ac} fall off the lattice"))),
    }
}

pub fn geometry(spec: &LatticeSpec, kind: GeometryKind) -> Result<Tripartition> {
    match kind {
        GeometryKind::Global { r } => tripartition_global(spec, r),
        GeometryKind::Local { r } => tripartition_local(spec, r),
        GeometryKind::Pairwise { d_ac } => tripartition_pairwise(spec, d_ac),
    }
}

/// Half-open rectangle of sites `[r0, r1) x [c0, c1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Rect {
    pub r0: usize,
    pub r1: usize,
    pub c0: usize,
    pub c1: usize,
}

impl Rect {
    #[inline]
    pub fn contains(&self, r: usize, c: usize) -> bool {
        r >= self.r0 && r < self.r1 && c >= self.c0 && c < self.c1
    }

    pub fn is_empty(&self) -> bool {
        self.r0 >= self.r1 || self.c0 >= self.c1
    }

    pub fn area(&self) -> usize {
        if self.is_empty() {
            0
        } else {
            (self.r1 - self.r0) * (self.c1 - self.c0)
        }
    }

    pub fn intersects(&self, other: &Rect) -> bool {
        self.r0 < other.r1 && other.r0 < self.r1 && self.c0 < other.c1 && other.c0 < self.c1
    }

    /// Sites in row-major order.
    pub fn sites(&self, size: usize) -> impl Iterator<Item = usize> + '_ {
        (self.r0..self.r1).flat_map(move |r| (self.c0..self.c1).map(move |c| r * size + c))
    }
}

/// Centred square hole.
#[derive(Debug, Clone)]
pub struct PunctureMask {
    punctured: Vec<bool>,
    gamma: f64,
    hole: Rect,
}

impl PunctureMask {
    #[inline]
    pub fn is_punctured(&self, site: usize) -> bool {
        self.punctured[site]
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn hole(&self) -> Rect {
        self.hole
    }

    pub fn side(&self) -> usize {
        self.hole.r1 - self.hole.r0
    }

    pub fn punctured_sites(&self) -> impl Iterator<Item = usize> + '_ {
        self.punctured.iter().enumerate().filter(|(_, &p)| p).map(|(s, _)| s)
    }

    pub fn len(&self) -> usize {
        self.punctured.iter().filter(|&&p| p).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Side length and offset of a centred hole of linear size `round(gamma * size)`.
pub fn hole_extent(size: usize, gamma: f64) -> (usize, usize) {
    let side = (gamma * size as f64).round() as usize;
    let side = side.min(size);
    (side, (size - side) / 2)
}

pub fn puncture_central(spec: &LatticeSpec, gamma: f64) -> Result<PunctureMask> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidRegion(format!("puncture fraction {gamma} outside (0, 1)")));
    }
    let l = spec.size();
    let (side, off) = hole_extent(l, gamma);
    if side == 0 {
        return Err(Error::InvalidRegion(format!("puncture fraction {gamma} gives an empty hole")));
    }
    if side >= l {
        return Err(Error::InvalidRegion("puncture covers a corner terminal".into()));
    }
    let hole = Rect { r0: off, r1: off + side, c0: off, c1: off + side };
    let punctured = (0..spec.n_sites())
        .map(|s| {
            let (r, c) = spec.coords(s);
            hole.contains(r, c)
        })
        .collect();
    Ok(PunctureMask { punctured, gamma, hole })
}

/// A tile and the core whose sites it is responsible for converting.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tile {
    pub region: Rect,
    pub core: Rect,
}

#[derive(Debug, Clone)]
pub struct TilingPlan {
    tile_size: usize,
    buffer_fraction: f64,
    core_size: usize,
    tiles: Vec<Tile>,
    layers: Vec<Vec<usize>>,
}

impl TilingPlan {
    pub fn tile_size(&self) -> usize {
        self.tile_size
    }

    pub fn buffer_fraction(&self) -> f64 {
        self.buffer_fraction
    }

    pub fn core_size(&self) -> usize {
        self.core_size
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn layers(&self) -> &[Vec<usize>] {
        &self.layers
    }

    /// True when the plan is one tile spanning the whole lattice.
    pub fn is_single_tile(&self, spec: &LatticeSpec) -> bool {
        let l = spec.size();
        self.tiles.len() == 1 && self.tiles[0].region == (Rect { r0: 0, r1: l, c0: 0, c1: l })
    }

    /// Builds a plan from explicit tiles and layers (used to compare buffer sizes
    /// at fixed cores).
    pub fn from_parts(
        spec: &LatticeSpec,
        tile_size: usize,
        buffer_fraction: f64,
        core_size: usize,
        tiles: Vec<Tile>,
        layers: Vec<Vec<usize>>,
    ) -> Result<Self> {
        let plan = TilingPlan { tile_size, buffer_fraction, core_size, tiles, layers };
        plan.validate(spec)?;
        Ok(plan)
    }

    fn validate(&self, spec: &LatticeSpec) -> Result<()> {
        let l = spec.size();
        let mut covered = vec![false; spec.n_sites()];
        for t in &self.tiles {
            if t.core.is_empty() {
                return Err(Error::InvalidRegion("empty tile core".into()));
            }
            if !(t.region.r0 <= t.core.r0
                && t.core.r1 <= t.region.r1
                && t.region.c0 <= t.core.c0
                && t.core.c1 <= t.region.c1)
            {
                return Err(Error::InvalidRegion("core not inside its tile".into()));
            }
            for s in t.core.sites(l) {
                covered[s] = true;
            }
        }
        if covered.iter().any(|&c| !c) {
            return Err(Error::InvalidRegion("tile cores do not cover the lattice".into()));
        }
        for layer in &self.layers {
            for (i, &a) in layer.iter().enumerate() {
                for &b in &layer[i + 1..] {
                    if self.tiles[a].region.intersects(&self.tiles[b].region) {
                        return Err(Error::InvalidRegion("overlapping tiles in one layer".into()));
                    }
                }
            }
        }
        Ok(())
    }
}

/// Tiles of side `tile_size` with centred cores of side `round((1 - a) * tile_size)`.
///
/// Each layer is a full periodic tiling shifted by some offset; offsets are
/// chosen greedily until the cores cover every residue of the period torus.
/// A tile size of at least `L` yields the single whole-lattice tile.
pub fn make_tiling(spec: &LatticeSpec, tile_size: usize, a: f64) -> Result<TilingPlan> {
    let l = spec.size();
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::InvalidRegion(format!("buffer fraction {a} outside (0, 1)")));
    }
    if tile_size == 0 {
        return Err(Error::InvalidRegion("tile size must be positive".into()));
    }
    if tile_size > l {
        return Err(Error::InvalidRegion(format!("tile size {tile_size} exceeds L={l}")));
    }
    if tile_size == l {
        let whole = Rect { r0: 0, r1: l, c0: 0, c1: l };
        return TilingPlan::from_parts(spec, l, a, l, vec![Tile { region: whole, core: whole }], vec![vec![0]]);
    }
    let core = ((1.0 - a) * tile_size as f64).round() as usize;
    if core == 0 {
        return Err(Error::InvalidRegion("tile core is empty".into()));
    }
    let lead = (tile_size - core) / 2;
    let shifts = covering_shifts(tile_size, lead, core);

    let period = tile_size as isize;
    let li = l as isize;
    let clip = |lo: isize, hi: isize| -> (usize, usize) { (lo.clamp(0, li) as usize, hi.clamp(0, li) as usize) };
    let mut tiles = Vec::new();
    let mut layers = Vec::new();
    for (sr, sc) in shifts {
        let mut layer = Vec::new();
        // tile origins o = shift + k * period, for every k whose core meets the lattice
        let origins = |s: usize| {
            let s = s as isize;
            let mut v = Vec::new();
            let mut o = s - period * ((s + period) / period);
            while o < li {
                let (c0, c1) = (o + lead as isize, o + lead as isize + core as isize);
                if c1 > 0 && c0 < li {
                    v.push(o);
                }
                o += period;
            }
            v
        };
        for &orow in &origins(sr) {
            for &ocol in &origins(sc) {
                let (r0, r1) = clip(orow, orow + period);
                let (c0, c1) = clip(ocol, ocol + period);
                let (cr0, cr1) = clip(orow + lead as isize, orow + (lead + core) as isize);
                let (cc0, cc1) = clip(ocol + lead as isize, ocol + (lead + core) as isize);
                layer.push(tiles.len());
                tiles.push(Tile { region: Rect { r0, r1, c0, c1 }, core: Rect { r0: cr0, r1: cr1, c0: cc0, c1: cc1 } });
            }
        }
        layers.push(layer);
    }
    TilingPlan::from_parts(spec, tile_size, a, core, tiles, layers)
}

/// Greedy cover of the `period x period` torus by translates of the core square.
fn covering_shifts(period: usize, lead: usize, core: usize) -> Vec<(usize, usize)> {
    let in_core = |x: usize, s: usize| {
        (x + period - s % period) % period >= lead && (x + period - s % period) % period < lead + core
    };
    let mut uncovered = vec![true; period * period];
    let mut left = period * period;
    let mut shifts = Vec::new();
    while left > 0 {
        let mut best = (0usize, (0usize, 0usize));
        for sr in 0..period {
            for sc in 0..period {
                let gain = (0..period)
                    .filter(|&x| in_core(x, sr))
                    .map(|x| (0..period).filter(|&y| in_core(y, sc) && uncovered[x * period + y]).count())
                    .sum::<usize>();
                if gain > best.0 {
                    best = (gain, (sr, sc));
                }
            }
        }
        let (sr, sc) = best.1;
        for x in (0..period).filter(|&x| in_core(x, sr)) {
            for y in (0..period).filter(|&y| in_core(y, sc)) {
                if uncovered[x * period + y] {
                    uncovered[x * period + y] = false;
                    left -= 1;
                }
            }
        }
        shifts.push((sr, sc));
    }
    shifts
}
