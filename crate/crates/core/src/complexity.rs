//! Separated nets and log-log growth-rate estimators.

use std::collections::HashMap;

use serde::Serialize;

use crate::dynamics::{DynamicalSystem, ShiftProfile};
use crate::error::{Error, Result};

/// A maximal ε-separated subset of a candidate list in the metric `d_l`.
#[derive(Debug, Clone)]
pub struct SeparatedNet<S> {
    pub length: usize,
    pub epsilon: f64,
    pub points: Vec<S>,
    /// Positions of the kept points in the candidate list.
    pub indices: Vec<usize>,
}

impl<S> SeparatedNet<S> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn orbit_segment<D: DynamicalSystem>(sys: &D, x: &D::State, l: usize) -> Vec<D::State> {
    let mut out = Vec::with_capacity(l + 1);
    out.push(x.clone());
    for k in 0..l {
        let next = sys.step(&out[k]);
        out.push(next);
    }
    out
}

fn segment_close<D: DynamicalSystem>(sys: &D, a: &[D::State], b: &[D::State], eps: f64) -> bool {
    a.iter().zip(b).all(|(x, y)| sys.distance(x, y) < eps)
}

fn segment_distance<D: DynamicalSystem>(sys: &D, a: &[D::State], b: &[D::State]) -> f64 {
    a.iter().zip(b).map(|(x, y)| sys.distance(x, y)).fold(0.0, f64::max)
}

/// Greedy pass in candidate order: a candidate is kept iff it is at least
/// `epsilon` from every kept point in `d_l`.
///
/// The result is the same as the naive quadratic pass. Two shortcuts prune
/// comparisons: the system's `separation_cell` hook when available, and
/// otherwise the triangle inequality against a pivot.
pub fn maximal_separated_net<D: DynamicalSystem>(
    sys: &D,
    candidates: &[D::State],
    epsilon: f64,
    l: usize,
) -> SeparatedNet<D::State> {
    assert!(!candidates.is_empty(), "no candidates");
    let segments: Vec<Vec<D::State>> = candidates.iter().map(|c| orbit_segment(sys, c, l)).collect();
    let cells: Option<Vec<Vec<u32>>> = candidates
        .iter()
        .map(|c| sys.separation_cell(c, epsilon, l))
        .collect();

    let mut kept: Vec<usize> = Vec::new();
    match cells {
        Some(cells) => {
            let mut buckets: HashMap<&[u32], Vec<usize>> = HashMap::new();
            for (i, cell) in cells.iter().enumerate() {
                let bucket = buckets.entry(cell.as_slice()).or_default();
                if bucket
                    .iter()
                    .all(|&k| !segment_close(sys, &segments[i], &segments[k], epsilon))
                {
                    bucket.push(i);
                    kept.push(i);
                }
            }
            kept.sort_unstable();
        }
        None => {
            // |key_i - key_k| >= ε implies d_l(i, k) >= ε; a small margin
            // keeps the pruning on the safe side of rounding.
            let pivot = &segments[0];
            let keys: Vec<f64> = segments.iter().map(|s| segment_distance(sys, s, pivot)).collect();
            let margin = epsilon * (1.0 + 1e-9) + 1e-15;
            let mut by_key: Vec<(f64, usize)> = Vec::new();
            for i in 0..segments.len() {
                let lo = by_key.partition_point(|&(k, _)| k <= keys[i] - margin);
                let far = by_key[lo..]
                    .iter()
                    .take_while(|&&(k, _)| k < keys[i] + margin)
                    .all(|&(_, j)| !segment_close(sys, &segments[i], &segments[j], epsilon));
                if far {
                    let at = by_key.partition_point(|&(k, _)| k < keys[i]);
                    by_key.insert(at, (keys[i], i));
                    kept.push(i);
                }
            }
        }
    }
    SeparatedNet {
        length: l,
        epsilon,
        points: kept.iter().map(|&i| candidates[i].clone()).collect(),
        indices: kept,
    }
}

/// Fit-window selection for log-log slopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FitPolicy {
    /// Points dropped from each end before the window search.
    pub trim: usize,
    pub min_window: usize,
    /// Largest RMS residual accepted by the window search.
    pub residual_target: f64,
}

impl Default for FitPolicy {
    fn default() -> Self {
        Self {
            trim: 2,
            min_window: 5,
            residual_target: 0.05,
        }
    }
}

/// A least-squares slope with the window it was fitted on.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRateEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// Half-open index range into `samples`.
    pub window: (usize, usize),
    /// RMS residual of the fit on the window.
    pub residual: f64,
    pub samples: Vec<(f64, f64)>,
}

fn least_squares(points: &[(f64, f64)]) -> (f64, f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1 - intercept - slope * p.0).powi(2))
        .sum();
    (slope, intercept, (rss / n).sqrt())
}

impl FitPolicy {
    /// Fits `samples` (x increasing along the asymptotic direction).
    pub fn fit(&self, samples: Vec<(f64, f64)>) -> Result<GrowthRateEstimate> {
        let n = samples.len();
        if n < 2 {
            return Err(Error::TooFewResolved { needed: 2, have: n });
        }
        let (lo, hi) = if n >= 2 * self.trim + self.min_window {
            (self.trim, n - self.trim)
        } else {
            (0, n)
        };
        let mut best: Option<((usize, usize), f64)> = None;
        if hi - lo >= self.min_window {
            for len in (self.min_window..=hi - lo).rev() {
                for a in lo..=hi - len {
                    let (_, _, r) = least_squares(&samples[a..a + len]);
                    if r < self.residual_target && best.is_none_or(|(_, br)| r < br) {
                        best = Some(((a, a + len), r));
                    }
                }
                if best.is_some() {
                    break;
                }
            }
        }
        let window = best.map_or((lo, hi), |(w, _)| w);
        let (slope, intercept, residual) = least_squares(&samples[window.0..window.1]);
        Ok(GrowthRateEstimate {
            slope,
            intercept,
            window,
            residual,
            samples,
        })
    }
}

/// Net sizes `N(X, ε)` for each ε of a grid, on the given candidates.
pub fn net_sizes<D: DynamicalSystem>(sys: &D, candidates: &[D::State], epsilons: &[f64], l: usize) -> Vec<usize> {
    epsilons
        .iter()
        .map(|&e| maximal_separated_net(sys, candidates, e, l).len())
        .collect()
}

/// Slope of `log N(X, ε)` against `-log ε`.
pub fn box_dimension_estimate<D: DynamicalSystem>(
    sys: &D,
    candidates: &[D::State],
    epsilons: &[f64],
    policy: &FitPolicy,
) -> Result<GrowthRateEstimate> {
    let sizes = net_sizes(sys, candidates, epsilons, 0);
    if sizes.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::DegenerateFit(format!("all net sizes equal {}", sizes[0])));
    }
    let samples = epsilons
        .iter()
        .zip(&sizes)
        .map(|(&e, &n)| (-e.ln(), (n as f64).ln()))
        .collect();
    policy.fit(samples)
}

/// Slope of `log N_T(l, ε)` against `l` at a fixed ε.
///
/// A constant count is a legitimate zero slope (isometries); only a count
/// of one everywhere, which carries no information, is rejected.
pub fn topological_entropy_estimate<D: DynamicalSystem>(
    sys: &D,
    candidates: &[D::State],
    epsilon: f64,
    lengths: &[usize],
    policy: &FitPolicy,
) -> Result<GrowthRateEstimate> {
    let sizes: Vec<usize> = lengths
        .iter()
        .map(|&l| maximal_separated_net(sys, candidates, epsilon, l).len())
        .collect();
    if sizes.iter().all(|&n| n == 1) {
        return Err(Error::DegenerateFit("every net has a single point".into()));
    }
    let samples = lengths
        .iter()
        .zip(&sizes)
        .map(|(&l, &n)| (l as f64, (n as f64).ln()))
        .collect();
    policy.fit(samples)
}

/// Slope of `log F_x^l(ε)` against `-log ε`, over resolved entries.
pub fn growth_rate_f(profile: &ShiftProfile, policy: &FitPolicy) -> Result<GrowthRateEstimate> {
    let samples: Vec<(f64, f64)> = profile
        .resolved()
        .map(|(e, v)| (-e.ln(), (v as f64).ln()))
        .collect();
    if samples.len() < 5 {
        return Err(Error::TooFewResolved { needed: 5, have: samples.len() });
    }
    policy.fit(samples)
}

/// Slope of `log F_x^l(ε)` against `l` at a fixed grid ε, one profile per length.
pub fn growth_rate_g(profiles: &[ShiftProfile], epsilon: f64, policy: &FitPolicy) -> Result<GrowthRateEstimate> {
    let mut samples = Vec::new();
    for p in profiles {
        match p.value_at(epsilon) {
            Some(Some(v)) => samples.push((p.length as f64, (v as f64).ln())),
            Some(None) => {}
            None => {
                return Err(Error::InvalidInput(format!(
                    "epsilon {epsilon} is not on the grid of the length-{} profile",
                    p.length
                )))
            }
        }
    }
    if samples.len() < 5 {
        return Err(Error::TooFewResolved { needed: 5, have: samples.len() });
    }
    samples.sort_by(|a, b| a.0.total_cmp(&b.0));
    policy.fit(samples)
}

/// Slope of the last estimate of an ε-sweep if it moved by at most `tol`
/// from the previous one.
pub fn stabilized_slope(sweep: &[GrowthRateEstimate], tol: f64) -> Option<f64> {
    match sweep {
        [.., a, b] if (a.slope - b.slope).abs() <= tol => Some(b.slope),
        _ => None,
    }
}
