//! Estimators and fits: exponential and polylogarithmic decay, finite-size
//! scaling collapse, and the crossover-drift formula.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub mean: f64,
    pub stderr: f64,
    pub n: u64,
}

impl Estimate {
    /// From the sample count and the integer sums of values and squared values.
    /// Integer sums make the result independent of reduction order.
    pub fn from_sums(n: u64, sum: i128, sum_sq: i128) -> Estimate {
        assert!(n >= 1, "estimate needs at least one sample");
        let nf = n as f64;
        let mean = sum as f64 / nf;
        let stderr = if n > 1 {
            // n * sum_sq - sum^2 is exact in i128 for the ranges used here
            let num = (n as i128) * sum_sq - sum * sum;
            let var = num as f64 / (nf * (nf - 1.0));
            (var.max(0.0) / nf).sqrt()
        } else {
            0.0
        };
        Estimate { mean, stderr, n }
    }

    pub fn from_values(values: &[f64]) -> Estimate {
        assert!(!values.is_empty(), "estimate needs at least one sample");
        let nf = values.len() as f64;
        let mean = values.iter().sum::<f64>() / nf;
        let stderr = if values.len() > 1 {
            let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (nf - 1.0);
            (var / nf).sqrt()
        } else {
            0.0
        };
        Estimate { mean, stderr, n: values.len() as u64 }
    }

    pub fn exact(value: f64) -> Estimate {
        Estimate { mean: value, stderr: 0.0, n: 1 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DecayFit {
    pub xi: f64,
    pub xi_err: f64,
    pub amplitude: f64,
    pub fit_range: (f64, f64),
    pub r2: f64,
    /// Weighted residual sum of squares in log space.
    pub chi2: f64,
    pub n_points: usize,
}

struct LineFit {
    intercept: f64,
    slope: f64,
    slope_err: f64,
    r2: f64,
    chi2: f64,
}

/// Weighted least squares `y = a + b x`. With `sigma = None` all weights are 1
/// and the slope error comes from the residual scatter.
fn fit_line(x: &[f64], y: &[f64], sigma: Option<&[f64]>) -> LineFit {
    let w: Vec<f64> = match sigma {
        Some(s) => s.iter().map(|s| 1.0 / (s * s)).collect(),
        None => vec![1.0; x.len()],
    };
    let sw: f64 = w.iter().sum();
    let sx: f64 = w.iter().zip(x).map(|(w, x)| w * x).sum();
    let sy: f64 = w.iter().zip(y).map(|(w, y)| w * y).sum();
    let sxx: f64 = w.iter().zip(x).map(|(w, x)| w * x * x).sum();
    let sxy: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * x * y).sum();
    let delta = sw * sxx - sx * sx;
    let slope = (sw * sxy - sx * sy) / delta;
    let intercept = (sxx * sy - sx * sxy) / delta;
    let chi2: f64 = w.iter().zip(x).zip(y).map(|((w, x), y)| w * (y - intercept - slope * x).powi(2)).sum();
    let ybar = sy / sw;
    let ss_tot: f64 = w.iter().zip(y).map(|(w, y)| w * (y - ybar).powi(2)).sum();
    let r2 = if ss_tot > 0.0 { 1.0 - chi2 / ss_tot } else { 1.0 };
    let dof = x.len().saturating_sub(2).max(1) as f64;
    let var_slope = match sigma {
        // scale by the reduced chi-square only when the scatter exceeds the errors
        Some(_) => sw / delta * (chi2 / dof).max(1.0),
        None => sw / delta * chi2 / dof,
    };
    LineFit { intercept, slope, slope_err: var_slope.sqrt(), r2, chi2 }
}

/// Log-space sigmas, or `None` when any point carries no error (exact data).
fn log_sigmas(points: &[(f64, Estimate)]) -> Option<Vec<f64>> {
    if points.iter().any(|(_, e)| e.stderr <= 0.0) {
        return None;
    }
    Some(points.iter().map(|(_, e)| e.stderr / e.mean).collect())
}

/// Fits `mean = amplitude * exp(-r / xi)` by weighted least squares on `ln mean`.
pub fn fit_exponential(points: &[(f64, Estimate)]) -> Result<DecayFit> {
    if points.len() < 3 {
        return Err(Error::FitRefused(format!("need at least 3 points, got {}", points.len())));
    }
    if let Some((r, _)) = points.iter().find(|(_, e)| !(e.mean > 0.0)) {
        return Err(Error::FitRefused(format!("non-positive mean at r={r}")));
    }
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1.mean.ln()).collect();
    let sig = log_sigmas(points);
    let f = fit_line(&x, &y, sig.as_deref());
    if !(f.slope < 0.0) {
        return Err(Error::FitRefused("data do not decay".into()));
    }
    let xi = -1.0 / f.slope;
    let lo = x.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = x.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok(DecayFit {
        xi,
        xi_err: f.slope_err / (f.slope * f.slope),
        amplitude: f.intercept.exp(),
        fit_range: (lo, hi),
        r2: f.r2,
        chi2: f.chi2,
        n_points: points.len(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PolylogFit {
    pub alpha: f64,
    pub alpha_err: f64,
    pub l0: f64,
    pub amplitude: f64,
    pub r2: f64,
    pub chi2: f64,
    /// Goodness of the competing exponential fit on the same points.
    pub exp_r2: f64,
    pub exp_chi2: f64,
}

impl PolylogFit {
    /// True when the polylogarithmic model has the smaller residual.
    pub fn prefers_polylog(&self) -> bool {
        self.chi2 < self.exp_chi2
    }
}

/// Fits `mean = amplitude * [ln(r / l0)]^(-alpha)`, profiling `l0` over
/// `l0_grid` (every value must lie below the smallest r). Passing a single
/// value fixes `l0`, which gives both models two free parameters.
pub fn polylog_fit(points: &[(f64, Estimate)], l0_grid: &[f64]) -> Result<PolylogFit> {
    if points.len() < 4 {
        return Err(Error::FitRefused(format!("need at least 4 points, got {}", points.len())));
    }
    if let Some((r, _)) = points.iter().find(|(_, e)| !(e.mean > 0.0)) {
        return Err(Error::FitRefused(format!("non-positive mean at r={r}")));
    }
    let rmin = points.iter().map(|p| p.0).fold(f64::INFINITY, f64::min);
    let rmax = points.iter().map(|p| p.0).fold(f64::NEG_INFINITY, f64::max);
    if !(rmax > rmin) {
        return Err(Error::FitRefused("degenerate r range".into()));
    }
    let y: Vec<f64> = points.iter().map(|p| p.1.mean.ln()).collect();
    let sig = log_sigmas(points);
    let mut best: Option<(f64, LineFit)> = None;
    for &l0 in l0_grid {
        if !(l0 > 0.0 && l0 < rmin / std::f64::consts::E) {
            continue;
        }
        let x: Vec<f64> = points.iter().map(|p| (p.0 / l0).ln().ln()).collect();
        let f = fit_line(&x, &y, sig.as_deref());
        if best.as_ref().is_none_or(|(_, b)| f.chi2 < b.chi2) {
            best = Some((l0, f));
        }
    }
    let Some((l0, f)) = best else {
        return Err(Error::FitRefused("no admissible l0 (need l0 < r_min / e)".into()));
    };
    let xs: Vec<f64> = points.iter().map(|p| p.0).collect();
    let e = fit_line(&xs, &y, sig.as_deref());
    Ok(PolylogFit {
        alpha: -f.slope,
        alpha_err: f.slope_err,
        l0,
        amplitude: f.intercept.exp(),
        r2: f.r2,
        chi2: f.chi2,
        exp_r2: e.r2,
        exp_chi2: e.chi2,
    })
}

/// `-2 ln((1-p1)/(1-p0)) + c (1/(1-p1) - 1/(1-p0))`: the log of the size ratio
/// needed for an apparent crossing to drift from `p0` to `p1`.
pub fn crossover_shift(p0: f64, p1: f64, c: f64) -> Result<f64> {
    if !(p0 > 0.0 && p0 <= p1 && p1 < 1.0) {
        return Err(Error::Domain(format!("need 0 < p0 <= p1 < 1, got p0={p0}, p1={p1}")));
    }
    if !(c >= 0.0) {
        return Err(Error::Domain(format!("need c >= 0, got {c}")));
    }
    Ok(-2.0 * ((1.0 - p1) / (1.0 - p0)).ln() + c * (1.0 / (1.0 - p1) - 1.0 / (1.0 - p0)))
}

/// One data point of a finite-size scaling grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingPoint {
    pub size: usize,
    pub p: f64,
    pub value: Estimate,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingFit {
    pub p_c: f64,
    pub nu: f64,
    pub residual: f64,
    pub grid: Vec<ScalingPoint>,
}

#[derive(Debug, Clone)]
pub struct CollapseOptions {
    pub p_c_starts: Vec<f64>,
    pub nu_starts: Vec<f64>,
    /// Minimum fraction of points that must overlap another size's range.
    pub min_overlap: f64,
    pub max_iter: usize,
}

impl Default for CollapseOptions {
    fn default() -> Self {
        CollapseOptions { p_c_starts: vec![], nu_starts: vec![0.8, 1.5, 2.5, 4.0], min_overlap: 0.3, max_iter: 400 }
    }
}

/// Piecewise-linear interpolation through `(x, y)` sorted by x.
fn interpolate(curve: &[(f64, f64)], x: f64) -> Option<f64> {
    let (first, last) = (curve.first()?, curve.last()?);
    if x < first.0 || x > last.0 {
        return None;
    }
    let i = curve.partition_point(|&(cx, _)| cx < x);
    if i < curve.len() && curve[i].0 == x {
        return Some(curve[i].1);
    }
    let (a, b) = (curve[i - 1], curve[i]);
    Some(a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0))
}

/// Collapse objective: each point's squared deviation from the pooled
/// piecewise-linear curve of all other sizes, averaged over the points that
/// fall inside the other sizes' range. `None` if too few points overlap.
/// Repeated `(size, p)` entries count once.
pub fn collapse_residual(points: &[ScalingPoint], p_c: f64, nu: f64, min_overlap: f64) -> Option<f64> {
    if !(nu > 0.0) {
        return None;
    }
    let points = dedup_points(points);
    let scaled: Vec<(usize, f64, f64)> =
        points.iter().map(|pt| (pt.size, (pt.p - p_c) * (pt.size as f64).powf(1.0 / nu), pt.value.mean)).collect();
    let mut sizes: Vec<usize> = points.iter().map(|p| p.size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    let mut total = 0.0;
    let mut count = 0usize;
    for &size in &sizes {
        let mut others: Vec<(f64, f64)> = scaled.iter().filter(|s| s.0 != size).map(|s| (s.1, s.2)).collect();
        others.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        // equal abscissae are averaged so the pooled curve is a function
        let mut pooled: Vec<(f64, f64)> = Vec::with_capacity(others.len());
        let mut i = 0;
        while i < others.len() {
            let mut j = i;
            let mut s = 0.0;
            while j < others.len() && others[j].0 == others[i].0 {
                s += others[j].1;
                j += 1;
            }
            pooled.push((others[i].0, s / (j - i) as f64));
            i = j;
        }
        for s in scaled.iter().filter(|s| s.0 == size) {
            if let Some(yhat) = interpolate(&pooled, s.1) {
                total += (s.2 - yhat).powi(2);
                count += 1;
            }
        }
    }
    let frac = count as f64 / points.len() as f64;
    (count > 0 && frac >= min_overlap).then(|| total / count as f64)
}

fn nelder_mead<F: Fn([f64; 2]) -> f64>(f: &F, start: [f64; 2], step: [f64; 2], max_iter: usize) -> ([f64; 2], f64) {
    let mut simplex = [start, [start[0] + step[0], start[1]], [start[0], start[1] + step[1]]];
    let mut values = simplex.map(f);
    for _ in 0..max_iter {
        let mut order = [0usize, 1, 2];
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.map(|i| simplex[i]);
        values = order.map(|i| values[i]);
        let spread = (values[2] - values[0]).abs();
        let size = (0..2)
            .map(|k| (simplex[1][k] - simplex[0][k]).abs().max((simplex[2][k] - simplex[0][k]).abs()))
            .fold(0.0, f64::max);
        if spread.is_finite() && spread < 1e-14 && size < 1e-9 {
            break;
        }
        let centroid = [(simplex[0][0] + simplex[1][0]) / 2.0, (simplex[0][1] + simplex[1][1]) / 2.0];
        let along =
            |t: f64| [centroid[0] + t * (simplex[2][0] - centroid[0]), centroid[1] + t * (simplex[2][1] - centroid[1])];
        let reflected = along(-1.0);
        let fr = f(reflected);
        if fr < values[0] {
            let expanded = along(-2.0);
            let fe = f(expanded);
            if fe < fr {
                simplex[2] = expanded;
                values[2] = fe;
            } else {
                simplex[2] = reflected;
                values[2] = fr;
            }
        } else if fr < values[1] {
            simplex[2] = reflected;
            values[2] = fr;
        } else {
            let contracted = if fr < values[2] { along(-0.5) } else { along(0.5) };
            let fc = f(contracted);
            if fc < values[2].min(fr) {
                simplex[2] = contracted;
                values[2] = fc;
            } else {
                for i in 1..3 {
                    simplex[i] = [
                        simplex[0][0] + 0.5 * (simplex[i][0] - simplex[0][0]),
                        simplex[0][1] + 0.5 * (simplex[i][1] - simplex[0][1]),
                    ];
                    values[i] = f(simplex[i]);
                }
            }
        }
    }
    let best = (0..3).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("three vertices");
    (simplex[best], values[best])
}

/// Duplicate (size, p) entries are merged by averaging, so repeating a point
/// leaves the objective unchanged.
/// Merges points sharing `(size, p)`: exact copies are dropped, distinct
/// values are averaged.
fn dedup_points(grid: &[ScalingPoint]) -> Vec<ScalingPoint> {
    let mut unique: Vec<ScalingPoint> = Vec::new();
    for pt in grid {
        if !unique.iter().any(|q| q.size == pt.size && q.p == pt.p && q.value.mean == pt.value.mean) {
            unique.push(*pt);
        }
    }
    let mut out: Vec<(ScalingPoint, usize)> = Vec::new();
    for pt in &unique {
        match out.iter_mut().find(|(q, _)| q.size == pt.size && q.p == pt.p) {
            Some((q, k)) => {
                q.value.mean += pt.value.mean;
                *k += 1;
            }
            None => out.push((*pt, 1)),
        }
    }
    out.into_iter()
        .map(|(mut q, k)| {
            q.value.mean /= k as f64;
            q
        })
        .collect()
}

/// Finds `(p_c, nu)` minimizing [`collapse_residual`] by simplex search from a
/// grid of starting points.
pub fn scaling_collapse(grid: &[ScalingPoint], opts: &CollapseOptions) -> Result<ScalingFit> {
    let points = dedup_points(grid);
    let mut sizes: Vec<usize> = points.iter().map(|p| p.size).collect();
    sizes.sort_unstable();
    sizes.dedup();
    if sizes.len() < 3 {
        return Err(Error::FitRefused(format!("collapse needs at least 3 sizes, got {}", sizes.len())));
    }
    let pmin = points.iter().map(|p| p.p).fold(f64::INFINITY, f64::min);
    let pmax = points.iter().map(|p| p.p).fold(f64::NEG_INFINITY, f64::max);
    let p_starts: Vec<f64> = if opts.p_c_starts.is_empty() {
        (1..=5).map(|k| pmin + (pmax - pmin) * k as f64 / 6.0).collect()
    } else {
        opts.p_c_starts.clone()
    };
    let objective = |v: [f64; 2]| {
        if v[1] < 0.1 || v[1] > 50.0 {
            return f64::INFINITY;
        }
        collapse_residual(&points, v[0], v[1], opts.min_overlap).unwrap_or(f64::INFINITY)
    };
    let step_p = ((pmax - pmin) / 10.0).max(1e-3);
    let mut best: Option<([f64; 2], f64)> = None;
    for &p0 in &p_starts {
        for &nu0 in &opts.nu_starts {
            if !objective([p0, nu0]).is_finite() {
                continue;
            }
            let (v, fv) = nelder_mead(&objective, [p0, nu0], [step_p, 0.3 * nu0], opts.max_iter);
            if fv.is_finite() && best.as_ref().is_none_or(|b| fv < b.1) {
                best = Some((v, fv));
            }
        }
    }
    let Some((v, residual)) = best else {
        return Err(Error::FitRefused("scaled data do not overlap for any start".into()));
    };
    Ok(ScalingFit { p_c: v[0], nu: v[1], residual, grid: points })
}

/// Crossing of two curves sampled on a common p grid, by linear interpolation
/// of their difference. Returns the first sign change.
pub fn crossing_point(ps: &[f64], a: &[f64], b: &[f64]) -> Option<f64> {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    (1..ps.len()).find_map(|i| {
        if d[i - 1] == 0.0 {
            Some(ps[i - 1])
        } else if d[i - 1].signum() != d[i].signum() {
            Some(ps[i - 1] + (ps[i] - ps[i - 1]) * d[i - 1] / (d[i - 1] - d[i]))
        } else {
            None
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn estimate_from_sums() {
        let vals = [1i128, 0, 2, 1, 1];
        let e = Estimate::from_sums(5, vals.iter().sum(), vals.iter().map(|v| v * v).sum());
        let f = Estimate::from_values(&[1.0, 0.0, 2.0, 1.0, 1.0]);
        assert!((e.mean - f.mean).abs() < 1e-15);
        assert!((e.stderr - f.stderr).abs() < 1e-15);
        assert!((e.stderr - (0.5f64 / 5.0).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn exact_exponential() {
        let pts: Vec<(f64, Estimate)> =
            (1..8).map(|r| (r as f64, Estimate::exact(3.0 * (-(r as f64) / 5.0).exp()))).collect();
        let fit = fit_exponential(&pts).unwrap();
        assert!((fit.xi - 5.0).abs() < 1e-9);
        assert!((fit.amplitude - 3.0).abs() < 1e-9);
        assert!(fit.r2 > 0.999_999);
        assert!(fit_exponential(&pts[..2]).is_err());
        let mut bad = pts.clone();
        bad[3].1.mean = 0.0;
        assert!(fit_exponential(&bad).is_err());
    }

    #[test]
    fn polylog_recovers_alpha() {
        let pts: Vec<(f64, Estimate)> = [8.0, 12.0, 20.0, 32.0, 50.0, 80.0]
            .iter()
            .map(|&r: &f64| (r, Estimate::exact(2.0 * (r / 1.5).ln().powf(-12.0))))
            .collect();
        let grid: Vec<f64> = (1..=20).map(|k| 0.25 * k as f64).collect();
        let fit = polylog_fit(&pts, &grid).unwrap();
        assert!((fit.alpha - 12.0).abs() < 0.2 * 12.0, "alpha={}", fit.alpha);
        assert!(fit.prefers_polylog());
    }

    #[test]
    fn crossover_arithmetic() {
        let v = crossover_shift(0.70, 0.75, 1.0).unwrap();
        let closed = -2.0 * (0.25f64 / 0.30).ln() + (4.0 - 1.0 / 0.3);
        assert!((v - closed).abs() < 1e-12);
        assert!((v - 1.03).abs() < 0.01);
        assert!((v.exp() - 2.8).abs() < 0.05);
        assert_eq!(crossover_shift(0.6, 0.6, 3.0).unwrap(), 0.0);
        let c0 = crossover_shift(0.2, 0.5, 0.0).unwrap();
        assert!((c0 - (-2.0 * (0.5f64 / 0.8).ln())).abs() < 1e-12);
        assert!(crossover_shift(0.8, 0.7, 1.0).is_err());
        assert!(crossover_shift(0.7, 0.8, -1.0).is_err());
    }

    fn synthetic(p_c: f64, nu: f64) -> Vec<ScalingPoint> {
        let mut g = Vec::new();
        for &size in &[21usize, 31, 41, 61] {
            for k in 0..=16 {
                let p = 0.45 + 0.015 * k as f64;
                let x = (p - p_c) * (size as f64).powf(1.0 / nu);
                g.push(ScalingPoint { size, p, value: Estimate::exact(0.5 * (1.0 + (1.5 * x).tanh())) });
            }
        }
        g
    }

    #[test]
    fn collapse_synthetic() {
        let fit = scaling_collapse(&synthetic(0.571, 2.79), &CollapseOptions::default()).unwrap();
        assert!((fit.p_c - 0.571).abs() < 0.01, "p_c={}", fit.p_c);
        assert!((fit.nu - 2.79).abs() < 0.15, "nu={}", fit.nu);
    }

    #[test]
    fn collapse_needs_three_sizes() {
        let g: Vec<_> = synthetic(0.571, 2.79).into_iter().filter(|p| p.size < 41).collect();
        assert!(scaling_collapse(&g, &CollapseOptions::default()).is_err());
    }

    #[test]
    fn crossing() {
        let ps = [0.0, 1.0, 2.0];
        assert_eq!(crossing_point(&ps, &[0.0, 1.0, 2.0], &[1.0, 1.5, 1.0]), Some(1.0 + 0.5 / 1.5));
        assert_eq!(crossing_point(&ps, &[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0]), None);
    }
}
