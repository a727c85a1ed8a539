//! Closing certificates, critical neighbourhoods and bounded sets on the
//! torus and the shift.

use aperiodic::bernoulli::{
    first_disagreement, is_phi_aperiodic, periodic_closing_witness, phi_aperiodic_search_auto, BernoulliShift,
    PhiTable, PhiWindow, SearchOptions, SymbolWord,
};
use aperiodic::dynamics::{
    bowen_distance, is_f_aperiodic, return_time, DynamicalSystem, EpsilonGrid, QuantileTable,
};
use aperiodic::periodic::{
    approximation_constant, classify_bounded, critical_radius, in_critical_neighborhood, penetration_length,
    PeriodicPoint, PeriodicRegistry,
};
use aperiodic::torus::{
    badly_approximable_constant, generate_bad_alpha, torus_closing_witness, RationalRegistry, TorusRotation,
    TorusState,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn torus_closing_certificates_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut checked = 0;
    while checked < 10_000 {
        let dim = rng.gen_range(1..=3);
        let s = rng.gen_range(1..=200usize);
        let eps = rng.gen_range(1e-6..0.2);
        let x = TorusState::new(
            (0..dim).map(|_| rng.gen()).collect(),
            (0..dim)
                .map(|_| (rng.gen_range(0..s) as f64 + rng.gen_range(-eps..eps) / dim as f64) / s as f64)
                .collect(),
        );
        let Ok(w) = torus_closing_witness(&x, s, eps) else {
            continue;
        };
        assert!(w.holds(), "s = {s}, ε = {eps}: {:?} / {:?}", w.start_distance, w.end_distance);
        let sys = TorusRotation::new(dim);
        let period_image = sys.iterate(&w.point.state, w.point.period);
        assert!(sys.distance(&period_image, &w.point.state) < 1e-9);
        checked += 1;
    }
}

#[test]
fn strong_closing_certificates_verify() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..10_000 {
        let n = rng.gen_range(2..=4u8);
        let s = rng.gen_range(1..=12usize);
        let l = rng.gen_range(0..=30usize);
        let block: Vec<u8> = (0..s).map(|_| rng.gen_range(1..=n)).collect();
        let mut prefix: Vec<u8> = (0..s + l).map(|i| block[i % s]).collect();
        prefix.extend((0..20).map(|_| rng.gen_range(1..=n)));
        let w = SymbolWord::new(n, prefix, vec![rng.gen_range(1..=n)]).unwrap();
        let cert = periodic_closing_witness(&w, s, l).expect("precondition engineered");
        assert!(cert.certifies(s + l), "{w} s={s} l={l}");
    }
}

/// Agreement run of `T^n w` and `T^{n+s} w` inside the first `len` symbols.
fn agreement(syms: &[u8], n: usize, s: usize) -> usize {
    (0..).take_while(|&k| n + s + k < syms.len() && syms[n + k] == syms[n + s + k]).count()
}

fn searched_word(delta: f64, target: usize) -> (usize, PhiTable, SymbolWord) {
    let phi = PhiTable::exponential(delta, target + 1);
    let (l0, w) = phi_aperiodic_search_auto(2, &phi, target, SearchOptions::default()).unwrap();
    (l0, phi, w)
}

#[test]
fn searched_words_translate_into_shift_functions() {
    let (l0, phi, w) = searched_word(0.5, 200);
    let sys = BernoulliShift { alphabet: 2 };
    let floored = phi.with_floor_below(l0);
    // F(e^{-(k+1)}) = φ(k), and at length l, G(e^{-(k+1)}, l) = φ(l + k).
    for l in 0..4 {
        let rows: Vec<(f64, f64)> = (0..=8)
            .map(|k| ((-((k + 1) as f64)).exp(), floored.get(l + k) as f64))
            .collect();
        let f = QuantileTable::step(rows).unwrap();
        let verdict = is_f_aperiodic(&sys, &w, &f, l, 100, 64);
        assert!(verdict.holds(), "l = {l}: {verdict:?}");
    }
}

#[test]
fn penetration_into_periodic_words_is_bounded() {
    let (l0, phi, w) = searched_word(0.5, 200);
    assert!(is_phi_aperiodic(&w, &phi, l0, PhiWindow::prefix(200)).verdict.holds());
    let syms = w.symbols(200);
    let sys = BernoulliShift { alphabet: 2 };
    let eps = (-1f64).exp();
    for n in 0..120 {
        let y = w.shifted(n);
        for s in 1..=8 {
            let anchor = SymbolWord::periodic(2, syms[n..n + s].to_vec()).unwrap();
            let pen = penetration_length(&sys, &anchor, &y, eps, 60).expect("prefix is long enough");
            // Past s symbols, agreement with the anchor is agreement of the
            // word with its own shift by s.
            assert_eq!(pen, s + agreement(&syms, n, s));
            let bound = s as i64 + (l0 as i64 - 1).max(phi.inverse(s as u64));
            assert!(pen as i64 <= bound, "n={n} s={s}: {pen} > {bound}");
        }
    }
}

#[test]
fn critical_neighbourhoods_force_short_returns() {
    let sys = TorusRotation::new(1);
    let grid = EpsilonGrid::Geometric { eps_max: 0.5, ratio: 0.8, count: 40 }.values();
    let f = QuantileTable::power_law(0.3, 1.0, &grid).unwrap();
    let registry = RationalRegistry { dimension: 1, max_denominator: 30 };
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    let mut hits = 0;
    for anchor in registry.anchors() {
        let Ok(rho) = critical_radius(&f, anchor.period) else {
            continue;
        };
        for _ in 0..50 {
            let y = TorusState::new(
                vec![anchor.state.point[0] + rng.gen_range(-rho..rho)],
                // The base point drifts by p times the direction offset.
                vec![anchor.state.direction[0] + rng.gen_range(-rho..rho) / anchor.period as f64],
            );
            if in_critical_neighborhood(&sys, &y, &anchor, rho) {
                hits += 1;
                let left = f.quantile_left(anchor.period as f64).unwrap();
                let r = return_time(&sys, &y, left, 0, anchor.period);
                assert!(r.is_some_and(|r| r <= anchor.period));
            }
        }
    }
    assert!(hits > 1000);
}

#[test]
fn anchors_are_outside_their_own_bounded_set() {
    let sys = TorusRotation::new(1);
    let grid = EpsilonGrid::Geometric { eps_max: 0.5, ratio: 0.8, count: 40 }.values();
    let f = QuantileTable::power_law(0.1, 1.0, &grid).unwrap();
    let anchor = PeriodicPoint::certify_exact(&sys, TorusState::new(vec![0.25], vec![2.0 / 7.0]), 7).unwrap();
    let r = classify_bounded(&sys, &anchor.state, &f, &[anchor.clone()], 50).unwrap();
    assert!(!r.entries[0].member && r.consistent());
}

#[test]
fn approximation_constant_decreases_with_horizon() {
    let sys = TorusRotation::new(1);
    let anchor = PeriodicPoint::certify_exact(&sys, TorusState::new(vec![0.0], vec![0.2]), 5).unwrap();
    let x = TorusState::new(vec![0.1], vec![generate_bad_alpha(4, 2).value()]);
    let c: Vec<f64> = [0, 10, 100, 1000]
        .iter()
        .map(|&n| approximation_constant(&sys, &x, &anchor, n).constant)
        .collect();
    assert!(c.windows(2).all(|w| w[1] <= w[0]), "{c:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Badly approximable directions give F-aperiodic orbits with
    /// `F(ε) = c/ε`, and F-aperiodic orbits are bounded for every anchor.
    #[test]
    fn badly_approximable_orbits_are_aperiodic_and_bounded(seed in any::<u64>(), bound in 1..5u64, x in 0.0..1.0f64) {
        let alpha = generate_bad_alpha(bound, seed).value();
        let c = badly_approximable_constant(&[alpha], 2000);
        let sys = TorusRotation::new(1);
        let state = TorusState::new(vec![x], vec![alpha]);
        let grid = EpsilonGrid::Geometric { eps_max: c, ratio: 0.8, count: 25 }.values();
        let f = QuantileTable::power_law(c, 1.0, &grid).unwrap();
        let verdict = is_f_aperiodic(&sys, &state, &f, 0, 500, 1500);
        prop_assert!(verdict.holds(), "{:?}", verdict);
        let anchors = RationalRegistry { dimension: 1, max_denominator: 20 }.anchors();
        let r = classify_bounded(&sys, &state, &f, &anchors, 500).unwrap();
        prop_assert!(r.all_members() && r.consistent());
        // Conversely a slightly larger constant is violated at the scale
        // just above the best approximation.
        let s_star = (1..=2000usize)
            .min_by(|&a, &b| {
                let k = |s: usize| s as f64 * (s as f64 * alpha - (s as f64 * alpha).round()).abs();
                k(a).total_cmp(&k(b))
            })
            .unwrap();
        let mut grid2 = EpsilonGrid::Geometric { eps_max: 1.05 * c, ratio: 0.8, count: 25 }.values();
        grid2.push(1.02 * c / s_star as f64);
        grid2.sort_by(|a, b| b.total_cmp(a));
        grid2.dedup();
        let f2 = QuantileTable::power_law(1.05 * c, 1.0, &grid2).unwrap();
        let origin = TorusState::new(vec![0.0], vec![alpha]);
        prop_assert!(!is_f_aperiodic(&sys, &origin, &f2, 0, 0, 2000).holds());
    }

    #[test]
    fn word_recurrences_have_witnesses(
        block in prop::collection::vec(1..=3u8, 1..8),
        l in 0..15usize,
        rest in prop::collection::vec(1..=3u8, 0..10),
    ) {
        let s = block.len();
        let mut prefix: Vec<u8> = (0..s + l + 1).map(|i| block[i % s]).collect();
        prefix.extend(rest);
        let w = SymbolWord::new(3, prefix, vec![1]).unwrap();
        let sys = BernoulliShift { alphabet: 3 };
        prop_assert!(bowen_distance(&sys, &w, &w.shifted(s), l) < (-1f64).exp());
        let cert = periodic_closing_witness(&w, s, l + 1).unwrap();
        prop_assert!(first_disagreement(&w, &cert.word).at_least(s + l + 1));
    }
}
