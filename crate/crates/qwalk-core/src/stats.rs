//! Observables over channel-position distributions: moments, entropies,
//! exponential-tail fits, the scaling collapse and small curve utilities.
//!
//! All functions take a plain probability vector indexed by channel slot;
//! the slot's half-integer coordinate is `k − N/2 + ½` with N = len.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::walk::channel_coordinate;

/// Collapse exponents fitted in the source analysis.
pub const DEFAULT_ALPHA: f64 = 1.04;
pub const DEFAULT_BETA: f64 = 1.67;

/// Normalization tolerance for distribution inputs.
const DIST_TOLERANCE: f64 = 1e-6;

/// Probability floor below which Monte Carlo estimates are unresolved:
/// 10·(1/R)/N.
pub fn monte_carlo_floor(runs: usize, n: usize) -> f64 {
    10.0 / (runs as f64 * n as f64)
}

fn check_distribution(dist: &[f64]) -> Result<()> {
    let sum: f64 = dist.iter().sum();
    if (sum - 1.0).abs() > DIST_TOLERANCE {
        return Err(Error::NotADistribution {
            sum,
            tolerance: DIST_TOLERANCE,
        });
    }
    Ok(())
}

/// Σ p_k x_k over half-integer coordinates.
pub fn position_mean(dist: &[f64]) -> f64 {
    let n = dist.len();
    dist.iter()
        .enumerate()
        .map(|(k, p)| p * channel_coordinate(n, k))
        .sum()
}

/// Var = Σ p_k x_k² − (Σ p_k x_k)². Input must sum to 1 within 1e−6.
pub fn position_variance(dist: &[f64]) -> Result<f64> {
    check_distribution(dist)?;
    let n = dist.len();
    let mean = position_mean(dist);
    Ok(dist
        .iter()
        .enumerate()
        .map(|(k, p)| {
            let d = channel_coordinate(n, k) - mean;
            p * d * d
        })
        .sum())
}

/// Second moment about an arbitrary center (e.g. the injection channel).
pub fn second_moment_about(dist: &[f64], center: f64) -> f64 {
    let n = dist.len();
    dist.iter()
        .enumerate()
        .map(|(k, p)| {
            let d = channel_coordinate(n, k) - center;
            p * d * d
        })
        .sum()
}

/// Excess kurtosis μ₄/μ₂² − 3 about the mean.
pub fn excess_kurtosis(dist: &[f64]) -> Result<f64> {
    check_distribution(dist)?;
    let n = dist.len();
    let mean = position_mean(dist);
    let (mut m2, mut m4) = (0.0, 0.0);
    for (k, p) in dist.iter().enumerate() {
        let d = channel_coordinate(n, k) - mean;
        m2 += p * d * d;
        m4 += p * d * d * d * d;
    }
    if m2 <= 0.0 {
        return Err(Error::DegenerateFit);
    }
    Ok(m4 / (m2 * m2) - 3.0)
}

/// −Σ p ln p in nats, with 0·ln 0 = 0.
pub fn shannon_entropy(dist: &[f64]) -> f64 {
    dist.iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| -p * p.ln())
        .sum()
}

/// S_q = (1 − Σ p^q)/(q − 1); dispatches to Shannon at q = 1.
pub fn tsallis_entropy(dist: &[f64], q: f64) -> Result<f64> {
    if q <= 0.0 || !q.is_finite() {
        return Err(Error::InvalidTsallisOrder { q });
    }
    if q == 1.0 {
        return Ok(shannon_entropy(dist));
    }
    let moment: f64 = dist
        .iter()
        .filter(|&&p| p > 0.0)
        .map(|&p| p.powf(q))
        .sum();
    Ok((1.0 - moment) / (q - 1.0))
}

/// Half-open channel-coordinate interval [lo, hi).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub lo: f64,
    pub hi: f64,
}

impl Window {
    pub fn new(lo: f64, hi: f64) -> Self {
        Window { lo, hi }
    }

    /// Channels with |x − μ| ≤ T (coordinates sit on the half-integer grid,
    /// so the half-open upper bound μ+T+½ captures x = μ+T exactly).
    pub fn whole_distribution(mu: f64, steps: usize) -> Self {
        Window {
            lo: mu - steps as f64,
            hi: mu + steps as f64 + 0.5,
        }
    }

    /// Width-j interval centered on μ: [μ − j/2, μ + j/2).
    pub fn central_peak(mu: f64, j: usize) -> Self {
        let half = j as f64 / 2.0;
        Window {
            lo: mu - half,
            hi: mu + half,
        }
    }

    #[inline]
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x < self.hi
    }
}

/// Choice of the Laplace center μ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CenterMode {
    /// Fix μ (typically at the injection channel).
    Fixed(f64),
    /// Use the location of the largest probability inside the window.
    Free,
}

/// Result of a log-linear exponential-decay fit ln p = ln C − |x−μ|/a.
///
/// `inv_a` is the raw −slope: it is ≥ 0 for genuinely decaying profiles and
/// may come out negative when the windowed data grows with |x−μ| (the window
/// then does not contain a Laplace peak).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaplaceFit {
    pub inv_a: f64,
    /// Amplitude C at the center.
    pub amplitude: f64,
    pub mu: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub points_used: usize,
}

impl LaplaceFit {
    /// Variance of the ideal fitted Laplace, 2a².
    pub fn implied_variance(&self) -> f64 {
        2.0 / (self.inv_a * self.inv_a)
    }
}

/// Least-squares fit of ln p against |x − μ| over window entries with
/// p > floor (and p > 0). Needs at least 3 usable points.
pub fn laplace_fit(
    dist: &[f64],
    window: Window,
    center: CenterMode,
    floor: f64,
) -> Result<LaplaceFit> {
    let n = dist.len();
    let usable: Vec<(f64, f64)> = dist
        .iter()
        .enumerate()
        .filter_map(|(k, &p)| {
            let x = channel_coordinate(n, k);
            (window.contains(x) && p > floor && p > 0.0).then_some((x, p))
        })
        .collect();
    let mu = match center {
        CenterMode::Fixed(mu) => mu,
        CenterMode::Free => {
            usable
                .iter()
                .copied()
                .max_by(|a, b| a.1.total_cmp(&b.1))
                .ok_or(Error::TooFewFitPoints { found: 0, need: 3 })?
                .0
        }
    };
    if usable.len() < 3 {
        return Err(Error::TooFewFitPoints {
            found: usable.len(),
            need: 3,
        });
    }
    let xs: Vec<f64> = usable.iter().map(|(x, _)| (x - mu).abs()).collect();
    let ys: Vec<f64> = usable.iter().map(|(_, p)| p.ln()).collect();
    let line = linear_fit(&xs, &ys)?;
    Ok(LaplaceFit {
        inv_a: -line.slope,
        amplitude: line.intercept.exp(),
        mu,
        r_squared: line.r_squared,
        window: (window.lo, window.hi),
        points_used: usable.len(),
    })
}

/// Ordinary least squares y = slope·x + intercept.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    if xs.len() < 2 || xs.len() != ys.len() {
        return Err(Error::TooFewPoints {
            need: 2,
            found: xs.len().min(ys.len()),
        });
    }
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= f64::EPSILON * n * mx.abs().max(1.0) {
        return Err(Error::DegenerateFit);
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = xs
        .iter()
        .zip(ys)
        .map(|(x, y)| {
            let e = y - (slope * x + intercept);
            e * e
        })
        .sum();
    let ss_tot: f64 = ys.iter().map(|y| (y - my) * (y - my)).sum();
    let r_squared = if ss_tot <= f64::EPSILON {
        1.0
    } else {
        1.0 - ss_res / ss_tot
    };
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

/// One rescaled point of the variance collapse.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CollapsePoint {
    /// p·j^α
    pub x: f64,
    /// j^(−β)·Var
    pub y: f64,
    pub alpha: f64,
    pub beta: f64,
}

/// Map (p, j, Var) rows onto the collapse coordinates.
pub fn collapse_points(rows: &[(f64, usize, f64)], alpha: f64, beta: f64) -> Vec<CollapsePoint> {
    rows.iter()
        .map(|&(p, j, var)| CollapsePoint {
            x: p * (j as f64).powf(alpha),
            y: (j as f64).powf(-beta) * var,
            alpha,
            beta,
        })
        .collect()
}

fn quadratic_fit(xs: &[f64], ys: &[f64]) -> Option<(f64, f64, f64)> {
    // normal equations for y = a x² + b x + c
    let n = xs.len() as f64;
    let (mut s1, mut s2, mut s3, mut s4) = (0.0, 0.0, 0.0, 0.0);
    let (mut t0, mut t1, mut t2) = (0.0, 0.0, 0.0);
    for (&x, &y) in xs.iter().zip(ys) {
        let x2 = x * x;
        s1 += x;
        s2 += x2;
        s3 += x2 * x;
        s4 += x2 * x2;
        t0 += y;
        t1 += x * y;
        t2 += x2 * y;
    }
    let mut m = [[s4, s3, s2, t2], [s3, s2, s1, t1], [s2, s1, n, t0]];
    // Gaussian elimination with partial pivoting
    for col in 0..3 {
        let pivot = (col..3).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    Some((m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]))
}

/// Locate the minimum of a noisy U-shaped curve.
///
/// Each point is smoothed by a local quadratic over its 5 nearest
/// neighbours; the smoothed minimum must be interior. The returned x is the
/// vertex of the quadratic around the minimum when that vertex is convex and
/// falls inside the smoothing window, otherwise the minimizing sample's x.
pub fn ushape_minimum(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 5 {
        return Err(Error::TooFewPoints {
            need: 5,
            found: points.len(),
        });
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = pts.len();
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let window_of = |i: usize| i.saturating_sub(2).min(n - 5);
    let smoothed: Vec<f64> = (0..n)
        .map(|i| {
            let lo = window_of(i);
            match quadratic_fit(&xs[lo..lo + 5], &ys[lo..lo + 5]) {
                Some((a, b, c)) => a * xs[i] * xs[i] + b * xs[i] + c,
                None => ys[i],
            }
        })
        .collect();
    let argmin = smoothed
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .map(|(i, _)| i)
        .unwrap();
    if argmin == 0 || argmin == n - 1 {
        return Err(Error::NoInteriorMinimum);
    }
    let lo = window_of(argmin);
    if let Some((a, b, _)) = quadratic_fit(&xs[lo..lo + 5], &ys[lo..lo + 5]) {
        if a > 0.0 {
            let vertex = -b / (2.0 * a);
            if vertex >= xs[lo] && vertex <= xs[lo + 4] {
                return Ok(vertex);
            }
        }
    }
    Ok(xs[argmin])
}

/// Non-circular, mean-removed autocorrelation for lags 0..=max_lag.
pub fn autocorrelation(dist: &[f64], max_lag: usize) -> Vec<f64> {
    let n = dist.len();
    let mean = dist.iter().sum::<f64>() / n as f64;
    let centered: Vec<f64> = dist.iter().map(|p| p - mean).collect();
    (0..=max_lag.min(n - 1))
        .map(|lag| {
            centered[..n - lag]
                .iter()
                .zip(&centered[lag..])
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect()
}

/// Symmetric moving average with half-width `half_width`, clipped at the
/// edges.
pub fn moving_average(xs: &[f64], half_width: usize) -> Vec<f64> {
    let n = xs.len();
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(half_width);
            let hi = (i + half_width + 1).min(n);
            xs[lo..hi].iter().sum::<f64>() / (hi - lo) as f64
        })
        .collect()
}

/// Indices of strict interior local maxima.
pub fn local_maxima(xs: &[f64]) -> Vec<usize> {
    (1..xs.len().saturating_sub(1))
        .filter(|&i| xs[i] > xs[i - 1] && xs[i] > xs[i + 1])
        .collect()
}

/// Spread of a family of curves after interpolation onto a shared grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurveSpread {
    /// RMS deviation from the cross-curve mean, over all grid points.
    pub rms_spread: f64,
    /// max − min over all interpolated values.
    pub y_range: f64,
    pub grid_points: usize,
}

fn interp(curve: &[(f64, f64)], x: f64) -> Option<f64> {
    if curve.is_empty() || x < curve[0].0 || x > curve[curve.len() - 1].0 {
        return None;
    }
    let idx = curve.partition_point(|&(cx, _)| cx <= x);
    if idx == 0 {
        return Some(curve[0].1);
    }
    if idx == curve.len() {
        return Some(curve[curve.len() - 1].1);
    }
    let (x0, y0) = curve[idx - 1];
    let (x1, y1) = curve[idx];
    if x1 == x0 {
        return Some(y0);
    }
    Some(y0 + (y1 - y0) * (x - x0) / (x1 - x0))
}

/// Inter-curve spread at matched x. Curves must be sorted by x; the first
/// curve's grid points inside the common overlap form the comparison grid.
pub fn collapse_spread(curves: &[Vec<(f64, f64)>]) -> Result<CurveSpread> {
    if curves.len() < 2 || curves.iter().any(|c| c.len() < 2) {
        return Err(Error::TooFewPoints {
            need: 2,
            found: curves.iter().map(Vec::len).min().unwrap_or(0),
        });
    }
    let lo = curves
        .iter()
        .map(|c| c[0].0)
        .fold(f64::NEG_INFINITY, f64::max);
    let hi = curves
        .iter()
        .map(|c| c[c.len() - 1].0)
        .fold(f64::INFINITY, f64::min);
    let grid: Vec<f64> = curves[0]
        .iter()
        .map(|&(x, _)| x)
        .filter(|&x| x >= lo && x <= hi)
        .collect();
    if grid.is_empty() {
        return Err(Error::NoInteriorMinimum);
    }
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    let mut y_min = f64::INFINITY;
    let mut y_max = f64::NEG_INFINITY;
    for &x in &grid {
        let values: Vec<f64> = curves.iter().filter_map(|c| interp(c, x)).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        for v in &values {
            sum_sq += (v - mean) * (v - mean);
            count += 1;
            y_min = y_min.min(*v);
            y_max = y_max.max(*v);
        }
    }
    Ok(CurveSpread {
        rms_spread: (sum_sq / count as f64).sqrt(),
        y_range: y_max - y_min,
        grid_points: grid.len(),
    })
}

/// Mean over x of (max − min)/|mean| across curves sharing an x grid.
pub fn relative_spread(curves: &[Vec<(f64, f64)>]) -> Result<f64> {
    if curves.len() < 2 || curves.iter().any(Vec::is_empty) {
        return Err(Error::TooFewPoints {
            need: 2,
            found: curves.iter().map(Vec::len).min().unwrap_or(0),
        });
    }
    let len = curves[0].len();
    if curves.iter().any(|c| c.len() != len) {
        return Err(Error::DegenerateFit);
    }
    let mut acc = 0.0;
    for i in 0..len {
        let values: Vec<f64> = curves.iter().map(|c| c[i].1).collect();
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
        if mean.abs() > f64::EPSILON {
            acc += (max - min) / mean.abs();
        }
    }
    Ok(acc / len as f64)
}

/// Grid-search (α, β) minimizing the normalized collapse spread of
/// (p, j, Var) rows. Returns (alpha, beta, rms_spread/y_range).
pub fn fit_collapse_exponents(
    rows: &[(f64, usize, f64)],
    alphas: &[f64],
    betas: &[f64],
) -> Result<(f64, f64, f64)> {
    let mut js: Vec<usize> = rows.iter().map(|r| r.1).collect();
    js.sort_unstable();
    js.dedup();
    if js.len() < 2 {
        return Err(Error::TooFewPoints {
            need: 2,
            found: js.len(),
        });
    }
    let mut best: Option<(f64, f64, f64)> = None;
    for &alpha in alphas {
        for &beta in betas {
            let mut curves: Vec<Vec<(f64, f64)>> = Vec::with_capacity(js.len());
            for &j in &js {
                let mut curve: Vec<(f64, f64)> = rows
                    .iter()
                    .filter(|r| r.1 == j)
                    .map(|&(p, j, var)| {
                        (p * (j as f64).powf(alpha), (j as f64).powf(-beta) * var)
                    })
                    .collect();
                curve.sort_by(|a, b| a.0.total_cmp(&b.0));
                curves.push(curve);
            }
            // the narrowest-x curve (smallest j) leads the grid
            let spread = match collapse_spread(&curves) {
                Ok(s) => s,
                Err(_) => continue,
            };
            if spread.y_range <= 0.0 {
                continue;
            }
            let score = spread.rms_spread / spread.y_range;
            if best.map_or(true, |(_, _, s)| score < s) {
                best = Some((alpha, beta, score));
            }
        }
    }
    best.ok_or(Error::NoInteriorMinimum)
}
