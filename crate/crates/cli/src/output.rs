//! Result records and their CSV / JSONL files.

use std::fs::{File, OpenOptions};
use std::io::{self, BufRead, BufReader, Read, Seek, SeekFrom, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::Format;
use crate::error::{invalid, CliError, CliResult};

pub const CSV_HEADER: &str = "p,q,L,geometry,observable,mean,stderr,n,seed,wall_ms";

/// One estimate at one parameter point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub p: f64,
    pub q: f64,
    #[serde(rename = "L")]
    pub size: usize,
    pub geometry: String,
    pub observable: String,
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
    pub seed: u64,
    pub wall_ms: f64,
}

impl RunResult {
    /// The record without its timing column, for reproducibility checks.
    pub fn data_key(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.p, self.q, self.size, self.geometry, self.observable, self.mean, self.stderr, self.n, self.seed
        )
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io { path: path.to_path_buf(), source }
}

fn csv_err(path: &Path) -> impl FnOnce(csv::Error) -> CliError + '_ {
    move |source| CliError::Csv { path: path.to_path_buf(), source }
}

enum Target {
    Stdout,
    File(File),
}

/// Append-only result writer.
pub struct ResultSink {
    target: Target,
    path: PathBuf,
    format: Format,
}

impl ResultSink {
    /// Opens `path` for appending; new or empty CSV files get the header and
    /// existing ones must already carry it. `None` writes to stdout.
    pub fn open(path: Option<&Path>, format: Format) -> CliResult<ResultSink> {
        let Some(path) = path else {
            if format == Format::Csv {
                writeln!(io::stdout().lock(), "{CSV_HEADER}").map_err(io_err(Path::new("<stdout>")))?;
            }
            return Ok(ResultSink { target: Target::Stdout, path: "<stdout>".into(), format });
        };
        let mut file = OpenOptions::new()
            .read(true)
            .append(true)
            .create(true)
            .open(path)
            .map_err(|e| invalid(format!("cannot open output {}: {e}", path.display())))?;
        let len = file.metadata().map_err(io_err(path))?.len();
        if format == Format::Csv {
            if len == 0 {
                writeln!(file, "{CSV_HEADER}").map_err(io_err(path))?;
            } else {
                file.seek(SeekFrom::Start(0)).map_err(io_err(path))?;
                let mut first = String::new();
                BufReader::new(&mut file).read_line(&mut first).map_err(io_err(path))?;
                if first.trim_end() != CSV_HEADER {
                    return Err(invalid(format!("{} exists with a different header", path.display())));
                }
            }
        }
        Ok(ResultSink { target: Target::File(file), path: path.to_path_buf(), format })
    }

    pub fn write(&mut self, r: &RunResult) -> CliResult<()> {
        let line = match self.format {
            Format::Csv => {
                let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(Vec::new());
                w.serialize(r).map_err(csv_err(&self.path))?;
                String::from_utf8(w.into_inner().map_err(|e| CliError::Fault(e.to_string()))?)
                    .map_err(|e| CliError::Fault(e.to_string()))?
            }
            Format::Jsonl => {
                let mut s = serde_json::to_string(r).map_err(|e| CliError::Fault(e.to_string()))?;
                s.push('\n');
                s
            }
        };
        match &mut self.target {
            Target::Stdout => io::stdout().lock().write_all(line.as_bytes()).map_err(io_err(&self.path)),
            Target::File(f) => f.write_all(line.as_bytes()).map_err(io_err(&self.path)),
        }
    }

    pub fn is_stdout(&self) -> bool {
        matches!(self.target, Target::Stdout)
    }
}

/// Reads CSV or JSONL results; the format is taken from the extension.
pub fn read_results(path: &Path) -> CliResult<Vec<RunResult>> {
    let mut text = String::new();
    let mut file = File::open(path).map_err(|e| invalid(format!("cannot open input {}: {e}", path.display())))?;
    file.read_to_string(&mut text).map_err(io_err(path))?;
    if path.extension().is_some_and(|e| e == "jsonl") {
        text.lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| invalid(format!("{}: {e}", path.display()))))
            .collect()
    } else {
        if text.lines().next().map(str::trim_end) != Some(CSV_HEADER) {
            return Err(invalid(format!("{}: missing or unexpected CSV header", path.display())));
        }
        csv::Reader::from_reader(text.as_bytes())
            .deserialize()
            .collect::<Result<Vec<RunResult>, _>>()
            .map_err(|e| invalid(format!("{}: {e}", path.display())))
    }
}
