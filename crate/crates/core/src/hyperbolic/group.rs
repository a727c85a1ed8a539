//! Finitely generated groups of isometries: word balls, orbital counting,
//! Schottky generators and penetration of geodesics into translated tubes.

use serde::Serialize;

use super::lemmas::sample_grid;
use super::{axis, hyp_distance, translation_length, GeodesicSegment, HPoint, Isometry, DELTA_ZERO};
use crate::complexity::{FitPolicy, GrowthRateEstimate};
use crate::error::{Error, Result};

/// Distinct group elements given by reduced words of length at most `radius`.
///
/// Letter `2i` is generator `i` and letter `2i + 1` its inverse. Matrices
/// are compared up to sign with tolerance `1e-9·max(1, |entries|)`.
pub fn word_ball(generators: &[Isometry], radius: usize) -> Vec<Isometry> {
    let letters: Vec<Isometry> = generators.iter().flat_map(|g| [*g, g.inverse()]).collect();
    let mut all = vec![Isometry::identity()];
    // (element, last letter) for words of the current length.
    let mut frontier: Vec<(Isometry, usize)> = Vec::new();
    for (k, g) in letters.iter().enumerate() {
        frontier.push((*g, k));
    }
    for len in 1..=radius {
        all.extend(frontier.iter().map(|(g, _)| *g));
        if len == radius {
            break;
        }
        let mut next = Vec::with_capacity(frontier.len() * letters.len());
        for (g, last) in &frontier {
            for (k, h) in letters.iter().enumerate() {
                if k != (last ^ 1) {
                    next.push((g.compose(h), k));
                }
            }
        }
        frontier = next;
    }
    dedup(all)
}

fn dedup(elements: Vec<Isometry>) -> Vec<Isometry> {
    let mut v: Vec<Isometry> = elements.iter().map(Isometry::sign_normalized).collect();
    v.sort_by(|x, y| x.entries()[0].total_cmp(&y.entries()[0]));
    let mut kept: Vec<Isometry> = Vec::with_capacity(v.len());
    for g in v {
        let scale = g.entries().iter().fold(1.0f64, |m, e| m.max(e.abs()));
        let tol = 1e-9 * scale;
        let a = g.entries()[0];
        let dup = kept
            .iter()
            .rev()
            .take_while(|h| a - h.entries()[0] <= tol)
            .any(|h| h.approx_eq(&g, tol));
        if !dup {
            kept.push(g);
        }
    }
    kept
}

/// Number of elements `g` of the word ball with `d(x, gx) <= l`.
///
/// A lower bound for the orbital counting function of the whole group.
pub fn orbital_counting(generators: &[Isometry], x: &HPoint, l: f64, radius: usize) -> usize {
    word_ball(generators, radius)
        .iter()
        .filter(|g| hyp_distance(x, &g.apply(x)) <= l)
        .count()
}

/// [`orbital_counting`] at several lengths, sharing one word ball.
pub fn orbital_counting_profile(generators: &[Isometry], x: &HPoint, lengths: &[f64], radius: usize) -> Vec<(f64, usize)> {
    let mut disp: Vec<f64> = word_ball(generators, radius)
        .iter()
        .map(|g| hyp_distance(x, &g.apply(x)))
        .collect();
    disp.sort_by(f64::total_cmp);
    lengths
        .iter()
        .map(|&l| (l, disp.partition_point(|&d| d <= l)))
        .collect()
}

/// Slope of `log N(x, l)` against `l`.
///
/// Lengths should stay below the displacement reached by every word of
/// length `radius + 1`, or the truncated ball flattens the curve.
pub fn volume_entropy_estimate(
    generators: &[Isometry],
    x: &HPoint,
    lengths: &[f64],
    radius: usize,
    policy: &FitPolicy,
) -> Result<GrowthRateEstimate> {
    let counts = orbital_counting_profile(generators, x, lengths, radius);
    if counts.iter().all(|&(_, n)| n == 1) {
        return Err(Error::DegenerateFit("only the identity was counted".into()));
    }
    policy.fit(counts.into_iter().map(|(l, n)| (l, (n as f64).ln())).collect())
}

/// Smallest translation length among the hyperbolic elements given.
pub fn min_translation_length(elements: &[Isometry]) -> Option<f64> {
    elements
        .iter()
        .filter_map(|g| translation_length(g).ok())
        .min_by(f64::total_cmp)
}

/// Whether the pairing discs of [`schottky_generators`] are disjoint.
///
/// The discs of the first generator cover `±[tanh(τ/4), coth(τ/4)]`, the
/// second generator pairs `|z| < e^{-τ/2}` with `|z| > e^{τ/2}`. They are
/// disjoint exactly when `τ > 2δ₀`.
pub fn schottky_ping_pong(tau: f64) -> bool {
    (tau / 4.0).tanh() > (-tau / 2.0).exp()
}

/// Two hyperbolic generators of translation length `tau`, with axes the
/// geodesic from −1 to 1 and the imaginary axis.
pub fn schottky_generators(tau: f64) -> Result<[Isometry; 2]> {
    if !(tau.is_finite() && tau > 2.0 * DELTA_ZERO && schottky_ping_pong(tau)) {
        return Err(Error::PreconditionFailed(format!("τ = {tau} does not give disjoint discs")));
    }
    let (ch, sh) = ((tau / 2.0).cosh(), (tau / 2.0).sinh());
    let a = Isometry::normalized(ch, sh, sh, ch)?;
    Ok([a, Isometry::dilation(tau)])
}

/// Parameter interval where a geodesic segment is inside a tube.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Penetration {
    /// Index of the translate `g` in the list passed in.
    pub index: usize,
    pub entry: f64,
    pub exit: f64,
    pub length: f64,
}

/// For each translate `g·A_ψ`, the parameter interval on which the segment
/// stays within `ε₀/2` of it.
///
/// Distance to a geodesic is convex along another geodesic, so the set is
/// an interval. It is located on the sampling grid and its ends are refined
/// by bisection; tubes grazed only between samples are missed.
pub fn geodesic_penetration(
    segment: &GeodesicSegment,
    psi: &Isometry,
    epsilon0: f64,
    translates: &[Isometry],
) -> Result<Vec<Penetration>> {
    if !(epsilon0 > 0.0) {
        return Err(Error::InvalidInput(format!("ε₀ = {epsilon0} must be positive")));
    }
    let base = axis(psi)?;
    let radius = epsilon0 / 2.0;
    let grid: Vec<f64> = sample_grid(segment.start, segment.end).collect();
    let mut out = Vec::new();
    for (index, g) in translates.iter().enumerate() {
        let line = base.transformed(g);
        let inside = |t: f64| line.distance(&segment.point(t)) <= radius;
        let Some(first) = grid.iter().position(|&t| inside(t)) else {
            continue;
        };
        let last = grid.iter().rposition(|&t| inside(t)).expect("first exists");
        let entry = if first == 0 { grid[0] } else { bisect(&inside, grid[first - 1], grid[first]) };
        let exit = if last + 1 == grid.len() { grid[last] } else { bisect(&inside, grid[last + 1], grid[last]) };
        out.push(Penetration { index, entry, exit, length: exit - entry });
    }
    Ok(out)
}

/// Boundary between `outside` (predicate false) and `inside` (true).
fn bisect(pred: &impl Fn(f64) -> bool, mut outside: f64, mut inside: f64) -> f64 {
    for _ in 0..60 {
        let mid = 0.5 * (outside + inside);
        if pred(mid) {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    0.5 * (outside + inside)
}
