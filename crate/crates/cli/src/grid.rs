//! Parameter grids: `start:stop:step` ranges and comma lists.

use std::fmt;
use std::str::FromStr;

use crate::error::{invalid, CliError};

#[derive(Debug, Clone, PartialEq)]
pub enum Grid {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl Grid {
    pub fn single(v: f64) -> Grid {
        Grid::List(vec![v])
    }

    /// Expanded values. Ranges include `stop` when it lies within half a step
    /// of the last point; values are rounded to 12 decimals so that
    /// `0.1 + 3 * 0.1` prints as `0.4`.
    pub fn values(&self) -> Vec<f64> {
        match *self {
            Grid::List(ref v) => v.clone(),
            Grid::Range { start, stop, step } => {
                let n = ((stop - start) / step + 0.5).floor() as usize;
                (0..=n).map(|k| round12(start + k as f64 * step)).collect()
            }
        }
    }
}

fn round12(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

fn parse_f64(s: &str) -> Result<f64, CliError> {
    let v: f64 = s.trim().parse().map_err(|_| invalid(format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(invalid(format!("not a finite number: {s:?}")));
    }
    Ok(v)
}

impl FromStr for Grid {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        match parts.as_slice() {
            [a, b, c] => {
                let (start, stop, step) = (parse_f64(a)?, parse_f64(b)?, parse_f64(c)?);
                if step <= 0.0 {
                    return Err(invalid(format!("grid step must be positive in {s:?}")));
                }
                if stop < start {
                    return Err(invalid(format!("grid stop below start in {s:?}")));
                }
                if (stop - start) / step > 1e6 {
                    return Err(invalid(format!("grid {s:?} has too many points")));
                }
                Ok(Grid::Range { start, stop, step })
            }
            [list] => {
                let v = list.split(',').map(parse_f64).collect::<Result<Vec<_>, _>>()?;
                Ok(Grid::List(v))
            }
            _ => Err(invalid(format!("grid {s:?} is neither start:stop:step nor a comma list"))),
        }
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Grid::List(v) => {
                let s: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "{}", s.join(","))
            }
            Grid::Range { start, stop, step } => write!(f, "{start}:{stop}:{step}"),
        }
    }
}

/// Comma list of positive integers.
pub fn parse_usize_list(s: &str) -> Result<Vec<usize>, CliError> {
    s.split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|_| invalid(format!("not a non-negative integer: {t:?}"))))
        .collect()
}

pub fn format_usize_list(v: &[usize]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}
