//! Geometry of the upper half-plane.
//!
//! Points, isometries in PSL(2,R), unit-speed geodesics and the metric
//! lemmas about hyperbolic isometries. Every geodesic is stored as an
//! isometry `g` with `γ(t) = g(i·e^t)`, so distance and projection questions
//! reduce to the imaginary axis.

mod group;
mod lemmas;
mod schottky;

pub use group::{
    geodesic_penetration, min_translation_length, orbital_counting, orbital_counting_profile,
    schottky_generators, schottky_ping_pong, volume_entropy_estimate, word_ball, Penetration,
};
pub use lemmas::{
    closing_lemma_check, displacement_bounds_check, neighbor_containment_check, ClosingConstants, ClosingInstance,
    ClosingLemmaReport, ContainmentReport, DisplacementReport, SAMPLE_STEP,
};
pub use schottky::{BoundaryWord, SchottkyBoundaryMap};

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ln(1 + √2)`: geodesic triangles in the plane are this thin.
pub const DELTA_ZERO: f64 = 0.881_373_587_019_543;

/// A point `u + iv` with `v > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HPoint {
    u: f64,
    v: f64,
}

impl HPoint {
    pub fn new(u: f64, v: f64) -> Result<Self> {
        if !(v > 1e-300) || !u.is_finite() || !v.is_finite() {
            return Err(Error::DomainError(format!("({u}, {v}) is not in the upper half-plane")));
        }
        Ok(Self { u, v })
    }

    pub fn i() -> Self {
        Self { u: 0.0, v: 1.0 }
    }

    pub fn u(&self) -> f64 {
        self.u
    }

    pub fn v(&self) -> f64 {
        self.v
    }

    fn complex(&self) -> Complex64 {
        Complex64::new(self.u, self.v)
    }
}

/// `d(z, w)`, written as `2·asinh(|z − w| / 2√(vv'))` to keep precision for nearby points.
pub fn hyp_distance(z: &HPoint, w: &HPoint) -> f64 {
    let chord = (z.complex() - w.complex()).norm();
    2.0 * (chord / (2.0 * (z.v * w.v).sqrt())).asinh()
}

/// A boundary point of the half-plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Ideal {
    Finite(f64),
    Infinity,
}

/// An element of PSL(2,R), acting by Möbius transformations.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "[[f64; 2]; 2]", into = "[[f64; 2]; 2]")]
pub struct Isometry {
    a: f64,
    b: f64,
    c: f64,
    d: f64,
}

impl TryFrom<[[f64; 2]; 2]> for Isometry {
    type Error = Error;

    fn try_from(m: [[f64; 2]; 2]) -> Result<Self> {
        Isometry::new(m[0][0], m[0][1], m[1][0], m[1][1])
    }
}

impl From<Isometry> for [[f64; 2]; 2] {
    fn from(g: Isometry) -> Self {
        [[g.a, g.b], [g.c, g.d]]
    }
}

impl Isometry {
    /// Checks `|det − 1| < 1e-12`.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !((det - 1.0).abs() < 1e-12) {
            return Err(Error::InvalidInput(format!("determinant {det} is not 1")));
        }
        Ok(Self { a, b, c, d })
    }

    /// Divides by `√det`; needs a positive determinant.
    pub fn normalized(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        let det = a * d - b * c;
        if !(det > 0.0) || !det.is_finite() {
            return Err(Error::InvalidInput(format!("determinant {det} is not positive")));
        }
        let r = det.sqrt();
        Ok(Self { a: a / r, b: b / r, c: c / r, d: d / r })
    }

    pub fn identity() -> Self {
        Self { a: 1.0, b: 0.0, c: 0.0, d: 1.0 }
    }

    /// `z ↦ e^t z`, translation by `t` along the imaginary axis.
    pub fn dilation(t: f64) -> Self {
        Self { a: (t / 2.0).exp(), b: 0.0, c: 0.0, d: (-t / 2.0).exp() }
    }

    /// `z ↦ z + x`.
    pub fn translation(x: f64) -> Self {
        Self { a: 1.0, b: x, c: 0.0, d: 1.0 }
    }

    /// Rotation by angle `2θ` about `i`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Self { a: c, b: s, c: -s, d: c }
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.a, self.b, self.c, self.d]
    }

    pub fn trace(&self) -> f64 {
        self.a + self.d
    }

    pub fn is_hyperbolic(&self) -> bool {
        self.trace().abs() > 2.0
    }

    /// `self ∘ other`, renormalized to determinant one.
    pub fn compose(&self, other: &Isometry) -> Isometry {
        let a = self.a * other.a + self.b * other.c;
        let b = self.a * other.b + self.b * other.d;
        let c = self.c * other.a + self.d * other.c;
        let d = self.c * other.b + self.d * other.d;
        let r = (a * d - b * c).sqrt();
        Isometry { a: a / r, b: b / r, c: c / r, d: d / r }
    }

    pub fn inverse(&self) -> Isometry {
        Isometry { a: self.d, b: -self.b, c: -self.c, d: self.a }
    }

    /// `self ∘ g ∘ self⁻¹`.
    pub fn conjugate(&self, g: &Isometry) -> Isometry {
        self.compose(g).compose(&self.inverse())
    }

    pub fn apply(&self, z: &HPoint) -> HPoint {
        let z = z.complex();
        let den = Complex64::new(self.c, 0.0) * z + self.d;
        let num = Complex64::new(self.a, 0.0) * z + self.b;
        let n2 = den.norm_sqr();
        // With det = 1, Im(g z) = Im z / |cz + d|^2 exactly.
        HPoint { u: (num * den.conj()).re / n2, v: z.im / n2 }
    }

    pub fn apply_ideal(&self, x: Ideal) -> Ideal {
        match x {
            Ideal::Infinity => {
                if self.c == 0.0 {
                    Ideal::Infinity
                } else {
                    Ideal::Finite(self.a / self.c)
                }
            }
            Ideal::Finite(x) => {
                let den = self.c * x + self.d;
                if den == 0.0 {
                    Ideal::Infinity
                } else {
                    Ideal::Finite((self.a * x + self.b) / den)
                }
            }
        }
    }

    /// Same element of PSL(2,R) within `tol`, up to the sign of the matrix.
    pub fn approx_eq(&self, other: &Isometry, tol: f64) -> bool {
        let x = self.entries();
        let y = other.entries();
        let plus = x.iter().zip(&y).all(|(p, q)| (p - q).abs() <= tol);
        let minus = x.iter().zip(&y).all(|(p, q)| (p + q).abs() <= tol);
        plus || minus
    }

    /// Representative with the first nonzero entry positive.
    pub fn sign_normalized(&self) -> Isometry {
        let lead = if self.a != 0.0 { self.a } else { self.b };
        if lead < 0.0 {
            Isometry { a: -self.a, b: -self.b, c: -self.c, d: -self.d }
        } else {
            *self
        }
    }

    /// A random isometry: translation, dilation and rotation with parameters
    /// drawn from `[-spread, spread]`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, spread: f64) -> Isometry {
        let x = rng.gen_range(-spread..=spread);
        let t = rng.gen_range(-spread..=spread);
        let theta = rng.gen_range(0.0..std::f64::consts::PI);
        Isometry::translation(x)
            .compose(&Isometry::dilation(t))
            .compose(&Isometry::rotation(theta))
    }
}

/// `2·acosh(|tr|/2)`.
pub fn translation_length(psi: &Isometry) -> Result<f64> {
    let tr = psi.trace().abs();
    if tr <= 2.0 {
        return Err(Error::NotHyperbolic(psi.trace()));
    }
    Ok(2.0 * (tr / 2.0).acosh())
}

/// A unit-speed geodesic `γ(t) = g(i·e^t)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicLine {
    frame: Isometry,
}

impl GeodesicLine {
    /// The imaginary axis, `γ(t) = i·e^t`.
    pub fn imaginary_axis() -> Self {
        Self { frame: Isometry::identity() }
    }

    pub fn from_frame(frame: Isometry) -> Self {
        Self { frame }
    }

    /// Geodesic running from `origin` (at `t = −∞`) to `target` (at `t = +∞`).
    pub fn through(origin: Ideal, target: Ideal) -> Result<Self> {
        let frame = match (origin, target) {
            (Ideal::Finite(r), Ideal::Finite(a)) if a > r => Isometry::normalized(a, r, 1.0, 1.0)?,
            (Ideal::Finite(r), Ideal::Finite(a)) if a < r => Isometry::normalized(a, -r, 1.0, -1.0)?,
            (Ideal::Finite(r), Ideal::Infinity) => Isometry::translation(r),
            (Ideal::Infinity, Ideal::Finite(a)) => Isometry { a, b: -1.0, c: 1.0, d: 0.0 },
            _ => return Err(Error::InvalidInput("geodesic endpoints must be distinct".into())),
        };
        Ok(Self { frame })
    }

    /// Geodesic through two distinct points, with `γ(0) = z` and `γ(d(z, w)) = w`.
    pub fn joining(z: &HPoint, w: &HPoint) -> Result<Self> {
        if hyp_distance(z, w) == 0.0 {
            return Err(Error::InvalidInput("points coincide".into()));
        }
        // Normalize z to i; the line through i and w1 is vertical or a circle
        // centred at c with radius √(1 + c²).
        let t = Isometry::dilation(-z.v.ln()).compose(&Isometry::translation(-z.u));
        let w1 = t.apply(w);
        let line = if w1.u == 0.0 {
            if w1.v > 1.0 {
                GeodesicLine::imaginary_axis()
            } else {
                GeodesicLine::imaginary_axis().reversed()
            }
        } else {
            let c = (w1.u * w1.u + w1.v * w1.v - 1.0) / (2.0 * w1.u);
            let r = (1.0 + c * c).sqrt();
            let (lo, hi) = if c > 0.0 { (-1.0 / (c + r), c + r) } else { (c - r, 1.0 / (r - c)) };
            let line = GeodesicLine::through(Ideal::Finite(lo), Ideal::Finite(hi))?;
            if line.project(&w1) < line.project(&HPoint::i()) {
                line.reversed()
            } else {
                line
            }
        };
        let line = line.shifted(line.project(&HPoint::i()));
        Ok(line.transformed(&t.inverse()))
    }

    pub fn frame(&self) -> &Isometry {
        &self.frame
    }

    pub fn point(&self, t: f64) -> HPoint {
        self.frame.apply(&HPoint { u: 0.0, v: t.exp() })
    }

    /// `(γ(−∞), γ(+∞))`.
    pub fn endpoints(&self) -> (Ideal, Ideal) {
        (
            self.frame.apply_ideal(Ideal::Finite(0.0)),
            self.frame.apply_ideal(Ideal::Infinity),
        )
    }

    /// Same line, with `γ'(t) = γ(t + t0)`.
    pub fn shifted(&self, t0: f64) -> Self {
        Self { frame: self.frame.compose(&Isometry::dilation(t0)) }
    }

    /// Same line traversed backwards, `γ'(t) = γ(−t)`.
    pub fn reversed(&self) -> Self {
        Self { frame: self.frame.compose(&Isometry { a: 0.0, b: 1.0, c: -1.0, d: 0.0 }) }
    }

    /// `g ∘ γ`.
    pub fn transformed(&self, g: &Isometry) -> Self {
        Self { frame: g.compose(&self.frame) }
    }

    /// Point at signed distance `eta` from the line whose foot is `γ(t)`.
    pub fn offset_point(&self, t: f64, eta: f64) -> HPoint {
        let r = t.exp();
        self.frame.apply(&HPoint { u: r * eta.tanh(), v: r / eta.cosh() })
    }

    /// Distance from `z` to the line.
    pub fn distance(&self, z: &HPoint) -> f64 {
        let w = self.frame.inverse().apply(z);
        (w.u.abs() / w.v).asinh()
    }

    /// Parameter of the orthogonal projection of `z` onto the line.
    pub fn project(&self, z: &HPoint) -> f64 {
        let w = self.frame.inverse().apply(z);
        w.complex().norm().ln()
    }
}

/// Distance from `z` to `line`.
pub fn dist_to_geodesic(z: &HPoint, line: &GeodesicLine) -> f64 {
    line.distance(z)
}

/// A parameter interval `[start, end]` of a geodesic.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeodesicSegment {
    pub line: GeodesicLine,
    pub start: f64,
    pub end: f64,
}

impl GeodesicSegment {
    pub fn new(line: GeodesicLine, start: f64, end: f64) -> Result<Self> {
        if !(start <= end) {
            return Err(Error::InvalidInput(format!("segment [{start}, {end}] is empty")));
        }
        Ok(Self { line, start, end })
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn point(&self, t: f64) -> HPoint {
        self.line.point(t)
    }
}

/// Axis of a hyperbolic isometry, oriented so that `ψ(γ(t)) = γ(t + |ψ|)`.
pub fn axis(psi: &Isometry) -> Result<GeodesicLine> {
    translation_length(psi)?;
    let [a, b, c, d] = psi.entries();
    let (repelling, attracting) = if c == 0.0 {
        let fixed = Ideal::Finite(b / (d - a));
        if a.abs() > d.abs() {
            (fixed, Ideal::Infinity)
        } else {
            (Ideal::Infinity, fixed)
        }
    } else {
        // Fixed points solve c z^2 + (d - a) z - b = 0.
        let disc = ((a + d) * (a + d) - 4.0).sqrt();
        let m = d - a;
        let sign = if m >= 0.0 { 1.0 } else { -1.0 };
        let q = -0.5 * (m + sign * disc);
        let z1 = q / c;
        let z2 = -b / q;
        // Attracting iff |g'(z)| = 1/|cz + d|^2 < 1.
        if (c * z1 + d).abs() > (c * z2 + d).abs() {
            (Ideal::Finite(z2), Ideal::Finite(z1))
        } else {
            (Ideal::Finite(z1), Ideal::Finite(z2))
        }
    };
    GeodesicLine::through(repelling, attracting)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pt(u: f64, v: f64) -> HPoint {
        HPoint::new(u, v).unwrap()
    }

    #[test]
    fn delta_zero_value() {
        assert!((DELTA_ZERO - (1.0 + 2f64.sqrt()).ln()).abs() < 1e-15);
    }

    #[test]
    fn distance_examples() {
        let e = std::f64::consts::E;
        assert!((hyp_distance(&HPoint::i(), &pt(0.0, e)) - 1.0).abs() < 1e-14);
        assert_eq!(hyp_distance(&pt(0.3, 2.0), &pt(0.3, 2.0)), 0.0);
        assert!((hyp_distance(&HPoint::i(), &pt(1.0, 1.0)) - 1.5f64.acosh()).abs() < 1e-14);
    }

    #[test]
    fn distance_matches_path_integral() {
        // The geodesic from i to 1 + i is an arc of the circle of centre 1/2;
        // along it ds = dθ / sin θ.
        let a0 = 1f64.atan2(-0.5);
        let a1 = 1f64.atan2(0.5);
        let n = 100_000;
        let h = (a0 - a1) / n as f64;
        let total: f64 = (0..n).map(|k| h / (a1 + h * (k as f64 + 0.5)).sin()).sum();
        assert!((total - 1.5f64.acosh()).abs() < 1e-8, "{total}");
    }

    #[test]
    fn rejects_points_off_the_half_plane() {
        assert!(matches!(HPoint::new(0.0, 0.0), Err(Error::DomainError(_))));
        assert!(matches!(HPoint::new(1.0, -1.0), Err(Error::DomainError(_))));
    }

    #[test]
    fn translation_length_examples() {
        assert!((translation_length(&Isometry::dilation(1.7)).unwrap() - 1.7).abs() < 1e-14);
        let psi = Isometry::new(2.0, 1.0, 1.0, 1.0).unwrap();
        assert!((translation_length(&psi).unwrap() - 2.0 * 1.5f64.acosh()).abs() < 1e-14);
        assert!(matches!(translation_length(&Isometry::translation(1.0)), Err(Error::NotHyperbolic(_))));
    }

    #[test]
    fn translation_length_is_min_displacement() {
        let psi = Isometry::new(2.0, 1.0, 1.0, 1.0).unwrap();
        let len = translation_length(&psi).unwrap();
        let ax = axis(&psi).unwrap();
        let z = ax.point(0.37);
        assert!((hyp_distance(&z, &psi.apply(&z)) - len).abs() < 1e-12);
        let off = ax.offset_point(0.1, 0.5);
        assert!(hyp_distance(&off, &psi.apply(&off)) > len);
    }

    #[test]
    fn axis_examples() {
        let psi = Isometry::dilation(1.0);
        let (r, a) = axis(&psi).unwrap().endpoints();
        assert_eq!(r, Ideal::Finite(0.0));
        assert_eq!(a, Ideal::Infinity);

        let conj = Isometry::translation(1.0).conjugate(&psi);
        let (r, a) = axis(&conj).unwrap().endpoints();
        match r {
            Ideal::Finite(x) => assert!((x - 1.0).abs() < 1e-12),
            _ => panic!("{r:?}"),
        }
        assert_eq!(a, Ideal::Infinity);
        assert!(axis(&Isometry::rotation(0.3)).is_err());
    }

    #[test]
    fn axis_is_invariant_and_oriented() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let h = Isometry::random(&mut rng, 2.0);
            let tau = rng.gen_range(0.2..8.0);
            let psi = h.conjugate(&Isometry::dilation(tau));
            let ax = axis(&psi).unwrap();
            let len = translation_length(&psi).unwrap();
            assert!((len - tau).abs() < 1e-8 * tau.max(1.0));
            for t in [-2.0, -0.5, 0.0, 0.7, 3.0] {
                let img = psi.apply(&ax.point(t));
                assert!(ax.distance(&img) < 1e-9);
                assert!(hyp_distance(&img, &ax.point(t + len)) < 1e-8);
            }
        }
    }

    #[test]
    fn distance_to_line_examples() {
        let ax = GeodesicLine::imaginary_axis();
        assert_eq!(ax.distance(&pt(0.0, 3.0)), 0.0);
        assert!((ax.distance(&pt(1.0, 1.0)) - 2f64.sqrt().acosh()).abs() < 1e-15);
        assert!((ax.distance(&pt(1.0, 1.0)) - DELTA_ZERO).abs() < 1e-15);
    }

    #[test]
    fn lines_through_endpoints() {
        let cases = [
            (Ideal::Finite(-1.0), Ideal::Finite(2.0)),
            (Ideal::Finite(3.0), Ideal::Finite(-0.5)),
            (Ideal::Finite(0.25), Ideal::Infinity),
            (Ideal::Infinity, Ideal::Finite(-4.0)),
        ];
        for (r, a) in cases {
            let line = GeodesicLine::through(r, a).unwrap();
            let (r1, a1) = line.endpoints();
            for (x, y) in [(r, r1), (a, a1)] {
                match (x, y) {
                    (Ideal::Finite(x), Ideal::Finite(y)) => assert!((x - y).abs() < 1e-12),
                    (Ideal::Infinity, Ideal::Infinity) => {}
                    _ => panic!("{x:?} vs {y:?}"),
                }
            }
            for (s, t) in [(0.0, 1.0), (-3.0, 2.5), (1.0, 1.001)] {
                let d = hyp_distance(&line.point(s), &line.point(t));
                assert!((d - (t - s)).abs() < 1e-9);
            }
        }
        assert!(GeodesicLine::through(Ideal::Finite(1.0), Ideal::Finite(1.0)).is_err());
    }

    #[test]
    fn joining_places_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let z = pt(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..4.0));
            let w = pt(rng.gen_range(-3.0..3.0), rng.gen_range(0.1..4.0));
            let line = GeodesicLine::joining(&z, &w).unwrap();
            let d = hyp_distance(&z, &w);
            assert!(hyp_distance(&line.point(0.0), &z) < 1e-9);
            assert!(hyp_distance(&line.point(d), &w) < 1e-8);
        }
    }

    #[test]
    fn offsets_and_projection() {
        let line = GeodesicLine::through(Ideal::Finite(-1.0), Ideal::Finite(2.0)).unwrap();
        for (t, eta) in [(0.0, 0.3), (1.5, -2.0), (-2.0, 0.01)] {
            let z = line.offset_point(t, eta);
            assert!((line.distance(&z) - eta.abs()).abs() < 1e-12);
            assert!((line.project(&z) - t).abs() < 1e-12);
        }
        let rev = line.reversed();
        assert!(hyp_distance(&rev.point(1.0), &line.point(-1.0)) < 1e-12);
        let sh = line.shifted(0.5);
        assert!(hyp_distance(&sh.point(1.0), &line.point(1.5)) < 1e-12);
    }

    #[test]
    fn isometry_serde_validates() {
        let g: Isometry = serde_json::from_str("[[2.0, 1.0], [1.0, 1.0]]").unwrap();
        assert_eq!(g.trace(), 3.0);
        assert!(serde_json::from_str::<Isometry>("[[2.0, 1.0], [1.0, 2.0]]").is_err());
    }
}
