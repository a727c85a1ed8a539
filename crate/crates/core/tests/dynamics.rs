//! Properties of Bowen metrics, shift functions, quantiles and nets on the
//! built-in systems.

use aperiodic::bernoulli::{BernoulliShift, SymbolWord};
use aperiodic::complexity::{maximal_separated_net, net_sizes};
use aperiodic::dynamics::{
    bowen_distance, shift_function, shift_profile, DynamicalSystem, EpsilonGrid, Interpolation, QuantileTable,
};
use aperiodic::hyperbolic::{BoundaryWord, SchottkyBoundaryMap};
use aperiodic::torus::{TorusRotation, TorusState};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn torus_state(dim: usize) -> impl Strategy<Value = TorusState> {
    (prop::collection::vec(0.0..1.0f64, dim), prop::collection::vec(0.0..1.0f64, dim))
        .prop_map(|(p, a)| TorusState::new(p, a))
}

fn word(n: u8) -> impl Strategy<Value = SymbolWord> {
    (prop::collection::vec(1..=n, 0..40), prop::collection::vec(1..=n, 1..5))
        .prop_map(move |(p, t)| SymbolWord::new(n, p, t).unwrap())
}

fn schottky_word(seed: u64) -> BoundaryWord {
    let sys = SchottkyBoundaryMap::new(3.0).unwrap();
    sys.random_word(&mut ChaCha8Rng::seed_from_u64(seed), 30, 2)
}

fn bowen_monotone<D: DynamicalSystem>(sys: &D, x: &D::State, y: &D::State) -> Result<(), TestCaseError> {
    prop_assert_eq!(bowen_distance(sys, x, y, 0), sys.distance(x, y));
    let d: Vec<f64> = (0..12).map(|l| bowen_distance(sys, x, y, l)).collect();
    prop_assert!(d.windows(2).all(|w| w[0] <= w[1]), "{:?}", d);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn bowen_monotone_on_torus(x in torus_state(2), y in torus_state(2)) {
        bowen_monotone(&TorusRotation::new(2), &x, &y)?;
    }

    #[test]
    fn bowen_monotone_on_words(x in word(3), y in word(3)) {
        bowen_monotone(&BernoulliShift { alphabet: 3 }, &x, &y)?;
    }

    #[test]
    fn bowen_monotone_on_schottky(a in any::<u64>(), b in any::<u64>()) {
        let sys = SchottkyBoundaryMap::new(3.0).unwrap();
        bowen_monotone(&sys, &schottky_word(a), &schottky_word(b))?;
    }
}

proptest! {
    #[test]
    fn torus_metric_is_translation_invariant(x in torus_state(2), y in torus_state(2), k in 1..1000usize) {
        let sys = TorusRotation::new(2);
        let y = TorusState::new(y.point, x.direction.clone());
        let d0 = sys.distance(&x, &y);
        let dk = sys.distance(&sys.iterate(&x, k), &sys.iterate(&y, k));
        prop_assert!((d0 - dk).abs() < 1e-9);
    }

    #[test]
    fn word_metric_takes_exponential_values(x in word(2), y in word(2)) {
        let d = BernoulliShift { alphabet: 2 }.distance(&x, &y);
        prop_assert!(d == 0.0 || (d.ln() - d.ln().round()).abs() < 1e-12);
    }

    /// If `F_x(ε) = F` with a horizon of at least `F`, the points `T^n x`,
    /// `n < F`, are ε-separated.
    #[test]
    fn shift_function_gives_separated_orbit(x in torus_state(1), k in 0..8i32) {
        let sys = TorusRotation::new(1);
        let eps = 0.2 * 0.5f64.powi(k);
        let f = shift_function(&sys, &x, eps, 0, 5000, 5000).expect("rotations recur");
        let orbit: Vec<TorusState> = (0..f).map(|n| sys.iterate(&x, n)).collect();
        for i in 0..orbit.len() {
            for j in 0..i {
                prop_assert!(sys.distance(&orbit[i], &orbit[j]) >= eps);
            }
        }
        // The same set survives the greedy net unchanged.
        let net = maximal_separated_net(&sys, &orbit, eps, 0);
        prop_assert_eq!(net.len(), orbit.len());
    }

    #[test]
    fn shift_function_monotone_in_window(x in word(2), eps_k in 1..6u32, l in 0..4usize) {
        let sys = BernoulliShift { alphabet: 2 };
        let eps = (-(eps_k as f64)).exp();
        let mut prev: Option<usize> = None;
        for horizon in [0, 5, 10, 20] {
            let f = shift_function(&sys, &x, eps, l, horizon, 60);
            if let (Some(p), Some(v)) = (prev, f) {
                prop_assert!(v <= p);
            }
            prev = f.or(prev);
        }
        let a = shift_function(&sys, &x, eps, l, 10, 60);
        let b = shift_function(&sys, &x, eps, l + 1, 10, 60);
        if let (Some(a), Some(b)) = (a, b) {
            prop_assert!(a <= b);
        }
    }

    #[test]
    fn profile_non_decreasing_along_grid(x in torus_state(1)) {
        let sys = TorusRotation::new(1);
        let grid = EpsilonGrid::dyadic(2, 10).values();
        let p = shift_profile(&sys, &x, &grid, 0, 20, 5000);
        let v: Vec<usize> = p.values.iter().map(|v| v.expect("resolved")).collect();
        prop_assert!(v.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn quantile_sandwich(
        c in 0.05..2.0f64,
        n in 0.5..3.0f64,
        s in 1.0..200.0f64,
        step in any::<bool>(),
    ) {
        let grid = EpsilonGrid::Geometric { eps_max: 1.0, ratio: 0.7, count: 40 }.values();
        let rows: Vec<(f64, f64)> = grid.iter().map(|&e| (e, c * e.powf(-n))).collect();
        let interp = if step { Interpolation::Step } else { Interpolation::PowerLaw };
        let f = QuantileTable::new(rows, interp).unwrap();
        let (Ok(left), Ok(right)) = (f.quantile_left(s), f.quantile_right(s)) else {
            return Ok(());
        };
        prop_assert!(right <= left);
        let mut probes: Vec<f64> = grid.clone();
        probes.extend(grid.windows(2).map(|w| (w[0] * w[1]).sqrt()));
        for e in probes {
            if e > left {
                prop_assert!(f.eval(e) <= s, "F({}) = {} > {} past F← = {}", e, f.eval(e), s, left);
            }
            if e < right {
                prop_assert!(f.eval(e) > s, "F({}) = {} <= {} before F→ = {}", e, f.eval(e), s, right);
            }
        }
    }
}

#[test]
fn isometry_reduction_on_the_torus() {
    // The profile of (x, α) does not depend on x.
    let sys = TorusRotation::new(2);
    let grid = EpsilonGrid::dyadic(3, 9).values();
    let alpha = vec![2f64.sqrt() - 1.0, 3f64.sqrt() - 1.0];
    let base = shift_profile(&sys, &TorusState::new(vec![0.0, 0.0], alpha.clone()), &grid, 0, 30, 20_000);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        use rand::Rng;
        let x = TorusState::new(vec![rng.gen(), rng.gen()], alpha.clone());
        assert_eq!(shift_profile(&sys, &x, &grid, 0, 30, 20_000).values, base.values);
    }
}

#[test]
fn net_sizes_grow_as_epsilon_shrinks_and_length_grows() {
    let sys = SchottkyBoundaryMap::new(3.0).unwrap();
    let cands = sys.cylinder_points(6);
    let grid = EpsilonGrid::dyadic(1, 12).values();
    let sizes = net_sizes(&sys, &cands, &grid, 0);
    assert!(sizes.windows(2).all(|w| w[0] <= w[1]), "{sizes:?}");
    let by_length: Vec<usize> = (0..5).map(|l| maximal_separated_net(&sys, &cands, 0.3, l).len()).collect();
    assert!(by_length.windows(2).all(|w| w[0] <= w[1]), "{by_length:?}");
}

#[test]
fn nets_are_separated_exhaustively() {
    let sys = BernoulliShift { alphabet: 2 };
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let cands: Vec<SymbolWord> = (0..3000)
        .map(|_| {
            use rand::Rng;
            let p = (0..12).map(|_| rng.gen_range(1..=2)).collect();
            SymbolWord::new(2, p, vec![1]).unwrap()
        })
        .collect();
    for l in [0, 2, 5] {
        let eps = (-3f64).exp();
        let net = maximal_separated_net(&sys, &cands, eps, l);
        for i in 0..net.len() {
            for j in 0..i {
                assert!(bowen_distance(&sys, &net.points[i], &net.points[j], l) >= eps);
            }
        }
        // Maximality: every candidate is within ε of some kept point.
        for c in &cands {
            assert!(net.points.iter().any(|p| bowen_distance(&sys, p, c, l) < eps));
        }
    }
}
