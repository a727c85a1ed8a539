//! Geometry of the upper half-plane: isometry invariance, thin triangles,
//! displacement, and the closing lemma on axes of Schottky group elements.

use aperiodic::hyperbolic::{
    axis, closing_lemma_check, geodesic_penetration, hyp_distance, schottky_generators, translation_length,
    word_ball, ClosingConstants, GeodesicLine, GeodesicSegment, HPoint, Isometry, DELTA_ZERO,
};
use aperiodic::Error;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn point() -> impl Strategy<Value = HPoint> {
    (-5.0..5.0f64, -4.0..4.0f64).prop_map(|(u, lv)| HPoint::new(u, lv.exp()).unwrap())
}

fn isometry() -> impl Strategy<Value = Isometry> {
    any::<u64>().prop_map(|seed| Isometry::random(&mut ChaCha8Rng::seed_from_u64(seed), 3.0))
}

fn hyperbolic() -> impl Strategy<Value = Isometry> {
    (isometry(), 0.05..15.0f64).prop_map(|(g, t)| g.conjugate(&Isometry::dilation(t)))
}

/// Distance from `z` to a geodesic segment: project, then clamp.
fn dist_to_segment(z: &HPoint, seg: &GeodesicSegment) -> f64 {
    let t = seg.line.project(z).clamp(seg.start, seg.end);
    hyp_distance(z, &seg.point(t))
}

fn side(a: &HPoint, b: &HPoint) -> GeodesicSegment {
    let line = GeodesicLine::joining(a, b).unwrap();
    GeodesicSegment::new(line, 0.0, hyp_distance(a, b)).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn isometries_preserve_distance(g in isometry(), z in point(), w in point()) {
        let d = hyp_distance(&z, &w);
        let dg = hyp_distance(&g.apply(&z), &g.apply(&w));
        prop_assert!((d - dg).abs() < 1e-9 * d.max(1.0), "{} vs {}", d, dg);
    }

    #[test]
    fn isometries_have_unit_determinant(g in isometry(), h in isometry()) {
        for m in [g, h, g.compose(&h), g.inverse(), g.conjugate(&h)] {
            let [a, b, c, d] = m.entries();
            // The determinant cannot be evaluated more accurately than the
            // products it subtracts.
            let scale = 1.0f64.max((a * d).abs() + (b * c).abs());
            prop_assert!((a * d - b * c - 1.0).abs() < 1e-12 * scale);
            prop_assert_eq!(m.is_hyperbolic(), m.trace().abs() > 2.0);
        }
    }

    #[test]
    fn lines_have_unit_speed(g in isometry(), t in -8.0..8.0f64, dt in -5.0..5.0f64) {
        let line = GeodesicLine::imaginary_axis().transformed(&g);
        let d = hyp_distance(&line.point(t), &line.point(t + dt));
        prop_assert!((d - dt.abs()).abs() < 1e-9 * (1.0 + dt.abs()));
    }

    #[test]
    fn triangles_are_thin(a in point(), b in point(), c in point()) {
        prop_assume!(hyp_distance(&a, &b) > 1e-6 && hyp_distance(&b, &c) > 1e-6 && hyp_distance(&a, &c) > 1e-6);
        let sides = [side(&a, &b), side(&b, &c), side(&c, &a)];
        for i in 0..3 {
            let (s, o1, o2) = (&sides[i], &sides[(i + 1) % 3], &sides[(i + 2) % 3]);
            let n = (s.length() / 0.01).ceil().max(1.0) as usize;
            for k in 0..=n {
                let z = s.point(s.length() * k as f64 / n as f64);
                let d = dist_to_segment(&z, o1).min(dist_to_segment(&z, o2));
                prop_assert!(d <= DELTA_ZERO + 1e-9, "side {} point {}: {}", i, k, d);
            }
        }
    }

    #[test]
    fn translation_length_is_minimal_displacement(psi in hyperbolic(), z in point(), t in -5.0..5.0f64) {
        let tau = translation_length(&psi).unwrap();
        prop_assert!(hyp_distance(&z, &psi.apply(&z)) >= tau - 1e-9);
        let on_axis = axis(&psi).unwrap().point(t);
        prop_assert!((hyp_distance(&on_axis, &psi.apply(&on_axis)) - tau).abs() < 1e-6);
    }

    #[test]
    fn distance_grows_along_perpendiculars(g in isometry(), t in -3.0..3.0f64, a in 0.0..5.0f64, b in 0.0..5.0f64) {
        let line = GeodesicLine::imaginary_axis().transformed(&g);
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        let d1 = line.distance(&line.offset_point(t, lo));
        let d2 = line.distance(&line.offset_point(t, hi));
        prop_assert!(d1 <= d2 + 1e-9);
        prop_assert!((d2 - hi).abs() < 1e-8);
    }
}

#[test]
fn penetration_is_equivariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    let psi = Isometry::dilation(2.5);
    for _ in 0..100 {
        let g = Isometry::random(&mut rng, 1.5);
        let line = GeodesicLine::imaginary_axis()
            .transformed(&Isometry::rotation(rng.gen_range(0.05..1.5)))
            .transformed(&Isometry::random(&mut rng, 0.3));
        let seg = GeodesicSegment::new(line, -4.0, 4.0).unwrap();
        let moved = GeodesicSegment::new(line.transformed(&g.inverse()), -4.0, 4.0).unwrap();
        let a = geodesic_penetration(&seg, &psi, 0.3, &[g]).unwrap();
        let b = geodesic_penetration(&moved, &psi, 0.3, &[Isometry::identity()]).unwrap();
        assert_eq!(a.len(), b.len());
        for (p, q) in a.iter().zip(&b) {
            assert!((p.entry - q.entry).abs() < 1e-6 && (p.exit - q.exit).abs() < 1e-6);
        }
    }
}

/// Axes of products `ψ^k u` in a Schottky group fellow-travel the axis of
/// `ψ`. Wherever such an axis shadows itself under `ψ` with shift `|ψ|`, the
/// closing lemma applies, and the axis penetrates the tube around `A_ψ`.
#[test]
fn closing_lemma_on_schottky_axes() {
    let gens = schottky_generators(4.0).unwrap();
    let ball = word_ball(&gens, 2);
    let mut rng = ChaCha8Rng::seed_from_u64(32);
    let eps0 = 0.1;
    let k = ClosingConstants::new(eps0).unwrap();
    let mut instances = 0;
    let mut rejected = 0;
    for _ in 0..60 {
        let psi = ball[rng.gen_range(1..ball.len())];
        let u = ball[rng.gen_range(1..ball.len())];
        let mut w = u;
        for _ in 0..4 {
            w = psi.compose(&w);
        }
        let (Ok(tau), Ok(gamma)) = (translation_length(&psi), axis(&w)) else {
            continue;
        };
        if tau < 4.0 * DELTA_ZERO || tau <= k.s0 {
            continue;
        }
        let s = tau;
        let l = k.l0 + 1.0;
        let mut t0 = -40.0;
        while t0 < 40.0 {
            let seg = GeodesicSegment::new(gamma.shifted(t0), 0.0, s + l).unwrap();
            match closing_lemma_check(&seg, &psi, eps0, s, l) {
                Ok(r) => {
                    instances += 1;
                    assert!(r.holds(), "{r:?}");
                    let pen = geodesic_penetration(&seg, &psi, eps0, &[Isometry::identity()]).unwrap();
                    assert!(pen.len() == 1 && pen[0].entry <= k.c0 && pen[0].exit >= s + l - k.c0, "{pen:?}");
                }
                Err(Error::HypothesisFailed(_)) => rejected += 1,
                Err(e) => panic!("{e}"),
            }
            t0 += 0.5;
        }
    }
    assert!(instances >= 50, "{instances} instances, {rejected} rejected");
}
