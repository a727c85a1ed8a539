//! Sampled checks of the displacement, neighbourhood and closing lemmas.
//!
//! Containment statements are checked on a parameter grid of spacing at most
//! [`SAMPLE_STEP`]. Distance to a geodesic is 1-Lipschitz along a unit-speed
//! curve, so between samples it exceeds the sampled maximum by at most half a
//! step; reports carry that margin alongside the sampled values.

use rand::Rng;
use serde::Serialize;

use super::{axis, hyp_distance, translation_length, GeodesicLine, GeodesicSegment, HPoint, Isometry, DELTA_ZERO};
use crate::error::{Error, Result};

/// Grid spacing for sampled containment checks.
pub const SAMPLE_STEP: f64 = 0.01;

/// Slack allowed for floating-point error when comparing against bounds.
const TOL: f64 = 1e-9;

/// Evenly spaced parameters covering `[a, b]` with spacing at most `SAMPLE_STEP`.
pub(crate) fn sample_grid(a: f64, b: f64) -> impl Iterator<Item = f64> {
    let n = (((b - a) / SAMPLE_STEP).ceil() as usize).max(1);
    (0..=n).map(move |k| if k == n { b } else { a + (b - a) * k as f64 / n as f64 })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DisplacementReport {
    pub displacement: f64,
    pub axis_distance: f64,
    pub translation: f64,
    pub lower: f64,
    pub upper: f64,
    pub lower_slack: f64,
    pub upper_slack: f64,
}

impl DisplacementReport {
    pub fn holds(&self) -> bool {
        self.lower_slack >= -TOL && self.upper_slack >= -TOL
    }
}

/// Compares `d(z, ψz)` with `max{2 d(z, A_ψ), |ψ|} − 4δ₀` and `|ψ| + 2 d(z, A_ψ)`.
pub fn displacement_bounds_check(psi: &Isometry, z: &HPoint) -> Result<DisplacementReport> {
    let translation = translation_length(psi)?;
    if translation < 4.0 * DELTA_ZERO {
        return Err(Error::PreconditionFailed(format!(
            "translation length {translation} is below 4δ₀"
        )));
    }
    let axis_distance = axis(psi)?.distance(z);
    let displacement = hyp_distance(z, &psi.apply(z));
    let lower = (2.0 * axis_distance).max(translation) - 4.0 * DELTA_ZERO;
    let upper = translation + 2.0 * axis_distance;
    Ok(DisplacementReport {
        displacement,
        axis_distance,
        translation,
        lower,
        upper,
        lower_slack: displacement - lower,
        upper_slack: upper - displacement,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ContainmentReport {
    /// Trim `c = D − ln ε` at each end.
    pub c: f64,
    pub half_length: f64,
    pub samples: usize,
    pub max_distance: f64,
    /// `ε − max_distance`.
    pub slack: f64,
    /// Bound on how far the unsampled maximum can exceed `max_distance`.
    pub lipschitz_margin: f64,
}

impl ContainmentReport {
    pub fn holds(&self) -> bool {
        self.slack >= -TOL
    }
}

/// Checks that the segment, trimmed by `c = D − ln ε` at both ends, stays
/// within `ε` of `alpha`, given that both endpoints lie within `D` of it.
pub fn neighbor_containment_check(
    segment: &GeodesicSegment,
    alpha: &GeodesicLine,
    d_bound: f64,
    epsilon: f64,
) -> Result<ContainmentReport> {
    if !(epsilon > 0.0 && d_bound >= epsilon) {
        return Err(Error::PreconditionFailed(format!("need D >= ε > 0, got D = {d_bound}, ε = {epsilon}")));
    }
    let c = d_bound - epsilon.ln();
    let half_length = segment.length() / 2.0;
    if half_length < 2.0 * c {
        return Err(Error::PreconditionFailed(format!(
            "half-length {half_length} is below 2(D − ln ε) = {}",
            2.0 * c
        )));
    }
    for t in [segment.start, segment.end] {
        let d = alpha.distance(&segment.point(t));
        if d > d_bound + TOL {
            return Err(Error::PreconditionFailed(format!("endpoint at distance {d} > D = {d_bound}")));
        }
    }
    let mut samples = 0;
    let mut max_distance: f64 = 0.0;
    for t in sample_grid(segment.start + c, segment.end - c) {
        samples += 1;
        max_distance = max_distance.max(alpha.distance(&segment.point(t)));
    }
    Ok(ContainmentReport {
        c,
        half_length,
        samples,
        max_distance,
        slack: epsilon - max_distance,
        lipschitz_margin: SAMPLE_STEP / 2.0,
    })
}

/// Constants of the metric closing lemma for a given `ε₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosingConstants {
    pub epsilon0: f64,
    /// Minimal shift `4ε₀ + 6δ₀`.
    pub s0: f64,
    /// Trim `2δ₀ + ε₀ − ln(ε₀/8)`.
    pub c0: f64,
    /// Minimal length `max(4δ₀ + ε₀, 2c₀ − s₀)`.
    pub l0: f64,
}

impl ClosingConstants {
    pub fn new(epsilon0: f64) -> Result<Self> {
        if !(epsilon0 > 0.0) {
            return Err(Error::PreconditionFailed(format!("ε₀ = {epsilon0} must be positive")));
        }
        let s0 = 4.0 * epsilon0 + 6.0 * DELTA_ZERO;
        let c0 = 2.0 * DELTA_ZERO + epsilon0 - (epsilon0 / 8.0).ln();
        let l0 = (4.0 * DELTA_ZERO + epsilon0).max(2.0 * c0 - s0);
        Ok(Self { epsilon0, s0, c0, l0 })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosingLemmaReport {
    pub constants: ClosingConstants,
    pub translation: f64,
    /// Largest sampled `d(γ(s + t), ψγ(t))` over `t ∈ [0, l]`.
    pub shadowing: f64,
    /// `|ψ| − (s − 2ε₀)`.
    pub lower_slack: f64,
    /// `s + ε₀ − |ψ|`.
    pub upper_slack: f64,
    /// Largest sampled distance to the axis over `[c₀, s + l − c₀]`.
    pub tube_distance: f64,
    /// `ε₀/8 − tube_distance`.
    pub tube_slack: f64,
    pub lipschitz_margin: f64,
}

impl ClosingLemmaReport {
    pub fn sandwich_holds(&self) -> bool {
        self.lower_slack >= -TOL && self.upper_slack >= -TOL
    }

    pub fn tube_holds(&self) -> bool {
        self.tube_slack >= -TOL
    }

    pub fn holds(&self) -> bool {
        self.sandwich_holds() && self.tube_holds()
    }
}

/// Checks the conclusions of the metric closing lemma for `γ` on `[0, s + l]`.
///
/// Returns `HypothesisFailed` when `γ(s + ·)` does not `ε₀`-shadow `ψγ(·)` on
/// `[0, l]`; such inputs are not instances of the lemma.
pub fn closing_lemma_check(
    segment: &GeodesicSegment,
    psi: &Isometry,
    epsilon0: f64,
    s: f64,
    l: f64,
) -> Result<ClosingLemmaReport> {
    let constants = ClosingConstants::new(epsilon0)?;
    let translation = translation_length(psi)?;
    if translation < 4.0 * DELTA_ZERO {
        return Err(Error::PreconditionFailed(format!("|ψ| = {translation} is below 4δ₀")));
    }
    if l < constants.l0 {
        return Err(Error::PreconditionFailed(format!("l = {l} is below l₀ = {}", constants.l0)));
    }
    if s <= constants.s0 {
        return Err(Error::PreconditionFailed(format!("s = {s} is not above s₀ = {}", constants.s0)));
    }
    if segment.start > TOL || segment.end < s + l - TOL {
        return Err(Error::PreconditionFailed(format!(
            "segment [{}, {}] does not cover [0, {}]",
            segment.start,
            segment.end,
            s + l
        )));
    }
    let shadowing = sample_grid(0.0, l)
        .map(|t| hyp_distance(&segment.point(s + t), &psi.apply(&segment.point(t))))
        .fold(0.0, f64::max);
    if shadowing > epsilon0 {
        return Err(Error::HypothesisFailed(format!(
            "shadowing distance {shadowing} exceeds ε₀ = {epsilon0}"
        )));
    }
    let ax = axis(psi)?;
    let tube_distance = sample_grid(constants.c0, s + l - constants.c0)
        .map(|t| ax.distance(&segment.point(t)))
        .fold(0.0, f64::max);
    Ok(ClosingLemmaReport {
        constants,
        translation,
        shadowing,
        lower_slack: translation - (s - 2.0 * epsilon0),
        upper_slack: s + epsilon0 - translation,
        tube_distance,
        tube_slack: epsilon0 / 8.0 - tube_distance,
        lipschitz_margin: SAMPLE_STEP / 2.0,
    })
}

/// A randomized input for [`closing_lemma_check`].
///
/// In the frame of the axis, `γ` joins points at perpendicular offsets up to
/// `ε₀/2` from `A_ψ`, `s + l` apart along it, with `s` within `ε₀` of `|ψ|`
/// and `l ∈ [l₀, l₀ + 5]`. The whole picture is then moved by a random
/// isometry. Draws that violate the shadowing hypothesis are left to the
/// checker to reject.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosingInstance {
    pub segment: GeodesicSegment,
    pub psi: Isometry,
    pub epsilon0: f64,
    pub s: f64,
    pub l: f64,
}

impl ClosingInstance {
    pub fn random<R: Rng + ?Sized>(rng: &mut R, epsilon0: f64, translation: f64) -> Result<Self> {
        let k = ClosingConstants::new(epsilon0)?;
        let s = translation + rng.gen_range(-epsilon0..=epsilon0);
        let l = k.l0 + rng.gen_range(0.0..5.0);
        let half = epsilon0 / 2.0;
        let ax = GeodesicLine::imaginary_axis();
        let p = ax.offset_point(0.0, rng.gen_range(-half..=half));
        let q = ax.offset_point(s + l, rng.gen_range(-half..=half));
        let h = Isometry::random(rng, 2.0);
        let line = GeodesicLine::joining(&p, &q)?.transformed(&h);
        Ok(Self {
            segment: GeodesicSegment::new(line, 0.0, s + l)?,
            psi: h.conjugate(&Isometry::dilation(translation)),
            epsilon0,
            s,
            l,
        })
    }

    pub fn check(&self) -> Result<ClosingLemmaReport> {
        closing_lemma_check(&self.segment, &self.psi, self.epsilon0, self.s, self.l)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn grid_covers_interval() {
        let g: Vec<f64> = sample_grid(0.0, 1.0).collect();
        assert_eq!(g.len(), 101);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert!(g.windows(2).all(|w| w[1] - w[0] <= SAMPLE_STEP + 1e-15));
        assert_eq!(sample_grid(2.0, 2.0).count(), 2);
    }

    #[test]
    fn displacement_on_axis() {
        let psi = Isometry::dilation(5.0);
        let r = displacement_bounds_check(&psi, &HPoint::i()).unwrap();
        assert!((r.displacement - 5.0).abs() < 1e-12);
        assert!(r.holds());
        assert!(r.lower_slack > 3.0);
    }

    #[test]
    fn displacement_requires_long_translation() {
        let psi = Isometry::dilation(1.0);
        assert!(matches!(
            displacement_bounds_check(&psi, &HPoint::i()),
            Err(Error::PreconditionFailed(_))
        ));
    }

    #[test]
    fn displacement_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..2000 {
            let h = Isometry::random(&mut rng, 2.0);
            let tau = rng.gen_range(4.0 * DELTA_ZERO..20.0);
            let psi = h.conjugate(&Isometry::dilation(tau));
            let line = GeodesicLine::imaginary_axis().transformed(&h);
            let z = line.offset_point(rng.gen_range(-3.0..3.0), rng.gen_range(-10.0..10.0));
            let r = displacement_bounds_check(&psi, &z).unwrap();
            assert!(r.holds(), "{r:?}");
        }
    }

    #[test]
    fn containment_on_the_line_itself() {
        let line = GeodesicLine::imaginary_axis();
        let seg = GeodesicSegment::new(line, -10.0, 10.0).unwrap();
        let r = neighbor_containment_check(&seg, &line, 1.0, 0.5).unwrap();
        assert!(r.holds());
        assert!(r.max_distance < 1e-12);
    }

    #[test]
    fn containment_for_offset_endpoints() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let alpha = GeodesicLine::imaginary_axis();
        for _ in 0..200 {
            let eps = rng.gen_range(0.05..1.0);
            let d = rng.gen_range(eps..5.0);
            let half = 2.0 * (d - f64::ln(eps)) + rng.gen_range(0.0..3.0);
            let side = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            let p = alpha.offset_point(-half, d);
            let q = alpha.offset_point(half, side * d);
            let line = GeodesicLine::joining(&p, &q).unwrap();
            let len = hyp_distance(&p, &q);
            let seg = GeodesicSegment::new(line.shifted(len / 2.0), -len / 2.0, len / 2.0).unwrap();
            let r = neighbor_containment_check(&seg, &alpha, d, eps).unwrap();
            assert!(r.holds(), "{r:?}");
        }
    }

    #[test]
    fn containment_rejects_short_segments() {
        let line = GeodesicLine::imaginary_axis();
        let seg = GeodesicSegment::new(line, -1.0, 1.0).unwrap();
        assert!(matches!(
            neighbor_containment_check(&seg, &line, 1.0, 0.5),
            Err(Error::PreconditionFailed(_))
        ));
    }

    #[test]
    fn closing_constants() {
        let k = ClosingConstants::new(0.1).unwrap();
        assert!((k.s0 - (0.4 + 6.0 * DELTA_ZERO)).abs() < 1e-12);
        assert!(k.l0 >= 4.0 * DELTA_ZERO + 0.1);
        assert!(k.s0 + k.l0 >= 2.0 * k.c0 - 1e-12);
    }

    #[test]
    fn closing_on_the_axis() {
        let psi = Isometry::dilation(8.0);
        let k = ClosingConstants::new(0.1).unwrap();
        let seg = GeodesicSegment::new(GeodesicLine::imaginary_axis(), 0.0, 8.0 + k.l0).unwrap();
        let r = closing_lemma_check(&seg, &psi, 0.1, 8.0, k.l0).unwrap();
        assert!(r.shadowing < 1e-9);
        assert!(r.holds());
        assert!(r.tube_distance < 1e-12);
    }

    #[test]
    fn closing_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let (mut held, mut rejected) = (0, 0);
        while held < 200 {
            let tau = rng.gen_range(7.0..20.0);
            match ClosingInstance::random(&mut rng, 0.1, tau).unwrap().check() {
                Ok(r) => {
                    assert!(r.holds(), "{r:?}");
                    held += 1;
                }
                Err(Error::HypothesisFailed(_)) => rejected += 1,
                Err(e) => panic!("{e}"),
            }
        }
        assert!(rejected < 2000);
    }

    #[test]
    fn closing_rejects_small_shift() {
        let psi = Isometry::dilation(8.0);
        let k = ClosingConstants::new(0.1).unwrap();
        let seg = GeodesicSegment::new(GeodesicLine::imaginary_axis(), 0.0, 20.0).unwrap();
        assert!(matches!(
            closing_lemma_check(&seg, &psi, 0.1, k.s0, k.l0),
            Err(Error::PreconditionFailed(_))
        ));
    }

    #[test]
    fn closing_reports_failed_hypothesis() {
        let psi = Isometry::dilation(8.0);
        let k = ClosingConstants::new(0.1).unwrap();
        let seg = GeodesicSegment::new(GeodesicLine::imaginary_axis(), 0.0, 20.0).unwrap();
        assert!(matches!(
            closing_lemma_check(&seg, &psi, 0.1, 9.0, k.l0),
            Err(Error::HypothesisFailed(_))
        ));
    }
}
