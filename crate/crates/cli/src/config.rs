//! Experiment configuration and its flat `key=value` file format.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::error::{invalid, CliError, CliResult};
use crate::grid::{format_usize_list, parse_usize_list, Grid};

macro_rules! keyword_enum {
    ($name:ident { $($variant:ident => $text:literal),+ $(,)? }) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq)]
        pub enum $name { $($variant),+ }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn as_str(self) -> &'static str {
                match self { $($name::$variant => $text),+ }
            }
        }

        impl FromStr for $name {
            type Err = CliError;

            fn from_str(s: &str) -> CliResult<Self> {
                match s.trim() {
                    $($text => Ok($name::$variant),)+
                    other => Err(invalid(format!(
                        "unknown {} {other:?}; expected one of: {}",
                        stringify!($name).to_lowercase(),
                        [$($text),+].join(", ")
                    ))),
                }
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
    };
}

keyword_enum!(Command {
    Cmi => "cmi",
    Memory => "memory",
    Punctured => "punctured",
    Decoder => "decoder",
    Sweep => "sweep",
    Collapse => "collapse",
    Oracle => "oracle",
});

keyword_enum!(Geometry {
    Global => "global",
    Local => "local",
    Pairwise => "pairwise",
});

keyword_enum!(Format {
    Csv => "csv",
    Jsonl => "jsonl",
});

keyword_enum!(Preset {
    Q0Crossover => "q0-crossover",
    Percolation => "percolation",
    Markov => "markov",
});

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub command: Command,
    pub p: Grid,
    pub q: Grid,
    pub sizes: Vec<usize>,
    pub geometry: Geometry,
    /// Separation for global/local geometries; `None` means `L / 2`.
    pub r: Option<usize>,
    /// Pairwise distance; `None` means `L / 2`.
    pub d_ac: Option<usize>,
    /// Separation sweep for the markov preset.
    pub r_grid: Option<Vec<usize>>,
    pub gamma: f64,
    pub tiles: Vec<usize>,
    pub a: f64,
    pub samples: u64,
    pub seed: u64,
    pub workers: usize,
    pub output: Option<PathBuf>,
    pub format: Format,
    pub preset: Option<Preset>,
    pub input: Vec<PathBuf>,
    pub observable: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            command: Command::Cmi,
            p: Grid::single(0.3),
            q: Grid::single(0.1),
            sizes: vec![21],
            geometry: Geometry::Global,
            r: None,
            d_ac: None,
            r_grid: None,
            gamma: 0.5,
            tiles: vec![8, 12, 16],
            a: 0.25,
            samples: 1000,
            seed: 1,
            workers: std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
            output: None,
            format: Format::Csv,
            preset: None,
            input: Vec::new(),
            observable: "cmi".into(),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> CliResult<T> {
    v.trim().parse().map_err(|_| invalid(format!("{key}: cannot parse {v:?}")))
}

fn opt_usize(key: &str, v: &str) -> CliResult<Option<usize>> {
    match v.trim() {
        "" | "auto" => Ok(None),
        s => parse_num(key, s).map(Some),
    }
}

impl ExperimentConfig {
    /// Sets one key from its text form.
    pub fn set(&mut self, key: &str, value: &str) -> CliResult<()> {
        let v = value.trim();
        match key.trim() {
            "command" => self.command = v.parse()?,
            "p" => self.p = v.parse()?,
            "q" => self.q = v.parse()?,
            "L" => self.sizes = parse_usize_list(v)?,
            "geometry" => self.geometry = v.parse()?,
            "r" => self.r = opt_usize("r", v)?,
            "d_ac" => self.d_ac = opt_usize("d_ac", v)?,
            "r_grid" => {
                self.r_grid = match v {
                    "" | "auto" => None,
                    s => Some(parse_usize_list(s)?),
                }
            }
            "gamma" => self.gamma = parse_num("gamma", v)?,
            "tile" => self.tiles = parse_usize_list(v)?,
            "a" => self.a = parse_num("a", v)?,
            "samples" => self.samples = parse_num("samples", v)?,
            "seed" => self.seed = parse_num("seed", v)?,
            "workers" => self.workers = parse_num("workers", v)?,
            "output" => self.output = (!v.is_empty()).then(|| PathBuf::from(v)),
            "format" => self.format = v.parse()?,
            "preset" => {
                self.preset = match v {
                    "" => None,
                    s => Some(s.parse()?),
                }
            }
            "input" => self.input = v.split(',').filter(|s| !s.is_empty()).map(PathBuf::from).collect(),
            "observable" => self.observable = v.to_string(),
            other => return Err(invalid(format!("unknown configuration key {other:?}"))),
        }
        Ok(())
    }

    /// Parses the flat format: one `key=value` per line, `#` comments.
    pub fn from_config_str(text: &str) -> CliResult<Self> {
        let mut cfg = ExperimentConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) =
                line.split_once('=').ok_or_else(|| invalid(format!("config line {}: expected key=value", i + 1)))?;
            cfg.set(k, v)?;
        }
        Ok(cfg)
    }

    pub fn to_config_string(&self) -> String {
        let opt = |v: Option<usize>| v.map(|x| x.to_string()).unwrap_or_else(|| "auto".into());
        let paths = |v: &[PathBuf]| v.iter().map(|p| p.display().to_string()).collect::<Vec<_>>().join(",");
        let lines = [
            ("command", self.command.to_string()),
            ("p", self.p.to_string()),
            ("q", self.q.to_string()),
            ("L", format_usize_list(&self.sizes)),
            ("geometry", self.geometry.to_string()),
            ("r", opt(self.r)),
            ("d_ac", opt(self.d_ac)),
            ("r_grid", self.r_grid.as_deref().map(format_usize_list).unwrap_or_else(|| "auto".into())),
            ("gamma", self.gamma.to_string()),
            ("tile", format_usize_list(&self.tiles)),
            ("a", self.a.to_string()),
            ("samples", self.samples.to_string()),
            ("seed", self.seed.to_string()),
            ("workers", self.workers.to_string()),
            ("output", self.output.as_ref().map(|p| p.display().to_string()).unwrap_or_default()),
            ("format", self.format.to_string()),
            ("preset", self.preset.map(|p| p.to_string()).unwrap_or_default()),
            ("input", paths(&self.input)),
            ("observable", self.observable.clone()),
        ];
        lines.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    /// Range checks that need no sampling. Geometry fit per size is checked
    /// by the command before it starts.
    pub fn validate(&self) -> CliResult<()> {
        for (name, grid) in [("p", &self.p), ("q", &self.q)] {
            let v = grid.values();
            if v.is_empty() {
                return Err(invalid(format!("{name} grid is empty")));
            }
            if let Some(x) = v.iter().find(|x| !(0.0..=1.0).contains(*x)) {
                return Err(invalid(format!("{name}={x} outside [0, 1]")));
            }
        }
        if self.sizes.is_empty() {
            return Err(invalid("no lattice sizes given"));
        }
        if let Some(l) = self.sizes.iter().find(|&&l| l < 3 || l % 2 == 0) {
            return Err(invalid(format!("L={l} must be odd and at least 3")));
        }
        if self.samples == 0 {
            return Err(invalid("samples must be at least 1"));
        }
        if self.workers == 0 {
            return Err(invalid("workers must be at least 1"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(invalid(format!("gamma={} outside (0, 1)", self.gamma)));
        }
        if !(self.a > 0.0 && self.a < 1.0) {
            return Err(invalid(format!("buffer fraction a={} outside (0, 1)", self.a)));
        }
        if self.command == Command::Decoder && self.tiles.contains(&0) {
            return Err(invalid("tile sizes must be positive"));
        }
        if self.command == Command::Sweep && self.preset.is_none() {
            return Err(invalid("sweep needs a preset (q0-crossover, percolation, markov)"));
        }
        if self.command == Command::Collapse && self.input.is_empty() {
            return Err(invalid("collapse needs at least one input file"));
        }
        if self.command == Command::Oracle && self.sizes != [3] {
            return Err(invalid("the exhaustive oracle runs at L=3 only"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_default_and_custom() {
        let d = ExperimentConfig::default();
        assert_eq!(ExperimentConfig::from_config_str(&d.to_config_string()).unwrap(), d);
        let mut c = d.clone();
        c.command = Command::Decoder;
        c.p = "0.1:0.9:0.05".parse().unwrap();
        c.q = "0,0.1,0.30000000000000004".parse().unwrap();
        c.sizes = vec![21, 41];
        c.geometry = Geometry::Pairwise;
        c.r = Some(3);
        c.d_ac = Some(7);
        c.r_grid = Some(vec![5, 7, 9]);
        c.gamma = 0.1 + 0.2;
        c.tiles = vec![9];
        c.samples = 12345;
        c.seed = u64::MAX;
        c.workers = 3;
        c.output = Some("out dir/res.csv".into());
        c.format = Format::Jsonl;
        c.preset = Some(Preset::Markov);
        c.input = vec!["a.csv".into(), "b.jsonl".into()];
        c.observable = "i_rq".into();
        assert_eq!(ExperimentConfig::from_config_str(&c.to_config_string()).unwrap(), c);
    }

    #[test]
    fn comments_and_errors() {
        let c = ExperimentConfig::from_config_str("# sweep\ncommand = memory\n\nL=5,7\n").unwrap();
        assert_eq!(c.command, Command::Memory);
        assert_eq!(c.sizes, vec![5, 7]);
        assert!(ExperimentConfig::from_config_str("bogus=1").is_err());
        assert!(ExperimentConfig::from_config_str("command").is_err());
        assert!(ExperimentConfig::from_config_str("command=fly").is_err());
    }

    #[test]
    fn validation() {
        let ok = ExperimentConfig::default();
        assert!(ok.validate().is_ok());
        let bad = |f: fn(&mut ExperimentConfig)| {
            let mut c = ExperimentConfig::default();
            f(&mut c);
            c.validate().is_err()
        };
        assert!(bad(|c| c.p = "0.5:1.2:0.1".parse().unwrap()));
        assert!(bad(|c| c.sizes = vec![20]));
        assert!(bad(|c| c.samples = 0));
        assert!(bad(|c| c.gamma = 1.0));
        assert!(bad(|c| c.command = Command::Sweep));
        assert!(bad(|c| c.command = Command::Oracle));
    }
}
