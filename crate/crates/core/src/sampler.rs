//! Heralded dephasing flags and reproducible random streams.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lattice::LatticeSpec;

/// Largest configuration count `enumerate_flags` accepts by default.
pub const ENUMERATION_CAP: u128 = 1 << 24;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Flag {
    X = 0,
    Y = 1,
    Z = 2,
}

impl Flag {
    pub const ALL: [Flag; 3] = [Flag::X, Flag::Y, Flag::Z];

    #[inline]
    fn from_code(code: u64) -> Flag {
        match code {
            0 => Flag::X,
            1 => Flag::Y,
            2 => Flag::Z,
            _ => unreachable!("invalid flag code {code}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseParams {
    p: f64,
    q: f64,
}

impl NoiseParams {
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) || !(0.0..=1.0).contains(&q) {
            return Err(Error::InvalidNoise { p, q });
        }
        Ok(NoiseParams { p, q })
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    /// Per-site probabilities of X, Y, Z flags.
    pub fn flag_probs(&self) -> [f64; 3] {
        let (p, q) = (self.p, self.q);
        [(1.0 - p) * (1.0 - q), p, (1.0 - p) * q]
    }
}

/// One heralded trajectory, packed at two bits per site.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FlagConfig {
    words: Vec<u64>,
    n_sites: usize,
}

impl FlagConfig {
    pub fn uniform(n_sites: usize, flag: Flag) -> Self {
        let mut f = FlagConfig { words: vec![0; n_sites.div_ceil(32)], n_sites };
        if flag != Flag::X {
            for s in 0..n_sites {
                f.set(s, flag);
            }
        }
        f
    }

    pub fn from_flags(flags: &[Flag]) -> Self {
        let mut f = FlagConfig::uniform(flags.len(), Flag::X);
        for (s, &fl) in flags.iter().enumerate() {
            f.set(s, fl);
        }
        f
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n_sites
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n_sites == 0
    }

    #[inline]
    pub fn get(&self, site: usize) -> Flag {
        debug_assert!(site < self.n_sites);
        Flag::from_code((self.words[site >> 5] >> ((site & 31) * 2)) & 3)
    }

    #[inline]
    pub fn set(&mut self, site: usize, flag: Flag) {
        debug_assert!(site < self.n_sites);
        let shift = (site & 31) * 2;
        let w = &mut self.words[site >> 5];
        *w = (*w & !(3 << shift)) | ((flag as u64) << shift);
    }

    pub fn iter(&self) -> impl Iterator<Item = Flag> + '_ {
        (0..self.n_sites).map(|s| self.get(s))
    }

    pub fn count(&self, flag: Flag) -> usize {
        self.iter().filter(|&f| f == flag).count()
    }

    /// Probability of this configuration under `params`.
    pub fn weight(&self, params: &NoiseParams) -> f64 {
        let probs = params.flag_probs();
        self.iter().map(|f| probs[f as usize]).product()
    }
}

/// Identifies an independent random stream.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct StreamSeed {
    pub master_seed: u64,
    pub sample_index: u64,
}

impl StreamSeed {
    pub fn new(master_seed: u64, sample_index: u64) -> Self {
        StreamSeed { master_seed, sample_index }
    }

    /// The ChaCha key comes from the mixed master seed; the sample index selects
    /// the stream, so streams never overlap.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(self.master_seed));
        rng.set_stream(self.sample_index);
        rng
    }
}

/// SplitMix64 finalizer.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed for parameter point `index` of a run with `master_seed`.
pub fn derive_seed(master_seed: u64, index: u64) -> u64 {
    splitmix64(splitmix64(master_seed) ^ index.wrapping_mul(0xd1b5_4a32_d192_ed03))
}

pub fn sample_flags(spec: &LatticeSpec, params: &NoiseParams, stream: StreamSeed) -> FlagConfig {
    let mut rng = stream.rng();
    sample_flags_with(spec.n_sites(), params, &mut rng)
}

pub fn sample_flags_with<R: Rng>(n_sites: usize, params: &NoiseParams, rng: &mut R) -> FlagConfig {
    let [px, py, _] = params.flag_probs();
    let cut = px + py;
    let mut f = FlagConfig::uniform(n_sites, Flag::X);
    for s in 0..n_sites {
        let u: f64 = rng.random();
        let flag = if u < px {
            Flag::X
        } else if u < cut {
            Flag::Y
        } else {
            Flag::Z
        };
        if flag != Flag::X {
            f.set(s, flag);
        }
    }
    f
}

/// Exhaustive iterator over all `3^n` flag configurations with their weights.
pub struct FlagEnumeration {
    digits: Vec<u8>,
    probs: [f64; 3],
    done: bool,
}

impl Iterator for FlagEnumeration {
    type Item = (FlagConfig, f64);

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        let flags: Vec<Flag> = self.digits.iter().map(|&d| Flag::ALL[d as usize]).collect();
        let weight = flags.iter().map(|&f| self.probs[f as usize]).product();
        // base-3 increment
        self.done = true;
        for d in self.digits.iter_mut() {
            if *d < 2 {
                *d += 1;
                self.done = false;
                break;
            }
            *d = 0;
        }
        Some((FlagConfig::from_flags(&flags), weight))
    }
}

pub fn enumerate_flags(spec: &LatticeSpec, params: &NoiseParams) -> Result<FlagEnumeration> {
    enumerate_flags_capped(spec, params, ENUMERATION_CAP)
}

pub fn enumerate_flags_capped(spec: &LatticeSpec, params: &NoiseParams, cap: u128) -> Result<FlagEnumeration> {
    let n = spec.n_sites();
    let count = 3u128.checked_pow(n as u32).unwrap_or(u128::MAX);
    if count > cap {
        return Err(Error::EnumerationTooLarge { count, cap });
    }
    Ok(FlagEnumeration { digits: vec![0; n], probs: params.flag_probs(), done: false })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::build_lattice;

    #[test]
    fn degenerate_params() {
        let spec = build_lattice(7).unwrap();
        let f = sample_flags(&spec, &NoiseParams::new(0.0, 0.0).unwrap(), StreamSeed::new(1, 0));
        assert_eq!(f.count(Flag::X), 49);
        let f = sample_flags(&spec, &NoiseParams::new(1.0, 0.3).unwrap(), StreamSeed::new(1, 0));
        assert_eq!(f.count(Flag::Y), 49);
        let f = sample_flags(&spec, &NoiseParams::new(0.0, 1.0).unwrap(), StreamSeed::new(1, 0));
        assert_eq!(f.count(Flag::Z), 49);
        assert!(NoiseParams::new(-0.1, 0.0).is_err());
        assert!(NoiseParams::new(0.5, 1.5).is_err());
    }

    #[test]
    fn frequencies_within_four_sigma() {
        let params = NoiseParams::new(0.3, 0.5).unwrap();
        let n = 100_000usize;
        let mut rng = StreamSeed::new(42, 0).rng();
        let f = sample_flags_with(n, &params, &mut rng);
        for (flag, pr) in Flag::ALL.iter().zip([0.35, 0.30, 0.35]) {
            let sigma = (pr * (1.0 - pr) / n as f64).sqrt();
            let freq = f.count(*flag) as f64 / n as f64;
            assert!((freq - pr).abs() < 4.0 * sigma, "{flag:?}: {freq}");
        }
    }

    #[test]
    fn streams_reproducible_and_distinct() {
        let spec = build_lattice(9).unwrap();
        let params = NoiseParams::new(0.5, 0.5).unwrap();
        let a = sample_flags(&spec, &params, StreamSeed::new(3, 17));
        let b = sample_flags(&spec, &params, StreamSeed::new(3, 17));
        let c = sample_flags(&spec, &params, StreamSeed::new(3, 18));
        let d = sample_flags(&spec, &params, StreamSeed::new(4, 17));
        assert_eq!(a, b);
        assert_ne!(a, c);
        assert_ne!(a, d);
    }

    #[test]
    fn packing_round_trip() {
        let flags: Vec<Flag> = (0..100).map(|i| Flag::ALL[(i * 7 + i / 3) % 3]).collect();
        let f = FlagConfig::from_flags(&flags);
        assert_eq!(f.iter().collect::<Vec<_>>(), flags);
    }

    #[test]
    fn enumeration_l3() {
        let spec = build_lattice(3).unwrap();
        let params = NoiseParams::new(0.4, 0.2).unwrap();
        let (count, total) =
            enumerate_flags(&spec, &params).unwrap().fold((0usize, 0.0f64), |(c, t), (_, w)| (c + 1, t + w));
        assert_eq!(count, 19683);
        assert!((total - 1.0).abs() < 1e-12);

        let uniform = NoiseParams::new(1.0 / 3.0, 0.5).unwrap();
        let expected = 3f64.powi(-9);
        assert!(enumerate_flags(&spec, &uniform).unwrap().all(|(_, w)| (w - expected).abs() < 1e-15));

        let spec5 = build_lattice(5).unwrap();
        assert!(matches!(enumerate_flags(&spec5, &params), Err(Error::EnumerationTooLarge { .. })));
    }
}
