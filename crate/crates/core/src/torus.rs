//! Linear flows on the torus `T^n`, sampled at time one.
//!
//! A state is a point of `T^n` together with its direction `α`; the map
//! translates the point by `α`. Rotations with a fixed direction are the
//! restriction to one fibre.

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dynamics::DynamicalSystem;
use crate::error::{Error, Result};
use crate::periodic::{PeriodicPoint, PeriodicRegistry};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TorusState {
    pub point: Vec<f64>,
    pub direction: Vec<f64>,
}

impl TorusState {
    pub fn new(point: Vec<f64>, direction: Vec<f64>) -> Self {
        assert_eq!(point.len(), direction.len(), "dimension mismatch");
        let point = point.into_iter().map(|x| x.rem_euclid(1.0)).collect();
        Self { point, direction }
    }
}

/// The time-one map of the straight-line flow on `T^n × R^n`.
///
/// Directions are assumed to lie in `[0, 1]^n`, which fixes the diameter
/// bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TorusRotation {
    pub dimension: usize,
}

impl TorusRotation {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension >= 1);
        Self { dimension }
    }
}

fn wrap(d: f64) -> f64 {
    let d = d.rem_euclid(1.0);
    d.min(1.0 - d)
}

/// Quotient distance on `T^n`: Euclidean, minimised over integer translates.
pub fn torus_distance(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| wrap(a - b).powi(2)).sum::<f64>().sqrt()
}

/// `dist(v, Z^n)` with the nearest lattice point found by rounding.
pub fn lattice_distance(v: &[f64]) -> f64 {
    v.iter().map(|x| (x - x.round()).powi(2)).sum::<f64>().sqrt()
}

impl DynamicalSystem for TorusRotation {
    type State = TorusState;

    fn distance(&self, x: &TorusState, y: &TorusState) -> f64 {
        let base: f64 = x.point.iter().zip(&y.point).map(|(a, b)| wrap(a - b).powi(2)).sum();
        let dir: f64 = x.direction.iter().zip(&y.direction).map(|(a, b)| (a - b).powi(2)).sum();
        (base + dir).sqrt()
    }

    fn step(&self, x: &TorusState) -> TorusState {
        self.iterate(x, 1)
    }

    fn iterate(&self, x: &TorusState, k: usize) -> TorusState {
        TorusState {
            point: x
                .point
                .iter()
                .zip(&x.direction)
                .map(|(p, a)| (p + k as f64 * a).rem_euclid(1.0))
                .collect(),
            direction: x.direction.clone(),
        }
    }

    fn diameter_bound(&self) -> f64 {
        (5.0 * self.dimension as f64).sqrt() / 2.0
    }
}

/// A continued fraction `[a0; a1, a2, ...]` with a finite prefix and an
/// optional periodic tail.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ContinuedFraction {
    pub a0: i64,
    pub prefix: Vec<u64>,
    pub period: Vec<u64>,
}

impl ContinuedFraction {
    pub fn new(a0: i64, prefix: Vec<u64>, period: Vec<u64>) -> Result<Self> {
        if prefix.iter().chain(&period).any(|&a| a == 0) {
            return Err(Error::InvalidInput("partial quotients must be positive".into()));
        }
        Ok(Self { a0, prefix, period })
    }

    /// `(√5 - 1)/2 = [0; 1, 1, ...]`.
    pub fn golden() -> Self {
        Self { a0: 0, prefix: vec![], period: vec![1] }
    }

    /// `√2 - 1 = [0; 2, 2, ...]`.
    pub fn silver() -> Self {
        Self { a0: 0, prefix: vec![], period: vec![2] }
    }

    /// Expansion of a float, truncated after `depth` quotients or when the
    /// remainder vanishes.
    pub fn from_f64(x: f64, depth: usize) -> Self {
        let a0 = x.floor();
        let mut r = x - a0;
        let mut prefix = Vec::new();
        for _ in 0..depth {
            if r < 1e-12 {
                break;
            }
            let inv = 1.0 / r;
            let a = inv.floor();
            prefix.push(a as u64);
            r = inv - a;
        }
        Self { a0: a0 as i64, prefix, period: vec![] }
    }

    pub fn is_finite(&self) -> bool {
        self.period.is_empty()
    }

    /// Partial quotient `a_k` for `k >= 1`.
    pub fn quotient(&self, k: usize) -> Option<u64> {
        assert!(k >= 1);
        let i = k - 1;
        if i < self.prefix.len() {
            Some(self.prefix[i])
        } else if self.period.is_empty() {
            None
        } else {
            Some(self.period[(i - self.prefix.len()) % self.period.len()])
        }
    }

    /// Convergents `p_k/q_k` for `k = 0..=depth` (fewer for finite expansions).
    pub fn convergents(&self, depth: usize) -> Vec<(BigInt, BigInt)> {
        let mut out = Vec::with_capacity(depth + 1);
        let (mut p2, mut q2) = (BigInt::one(), BigInt::zero());
        let (mut p1, mut q1) = (BigInt::from(self.a0), BigInt::one());
        out.push((p1.clone(), q1.clone()));
        for k in 1..=depth {
            let Some(a) = self.quotient(k) else { break };
            let a = BigInt::from(a);
            let p = &a * &p1 + &p2;
            let q = &a * &q1 + &q2;
            p2 = std::mem::replace(&mut p1, p);
            q2 = std::mem::replace(&mut q1, q);
            out.push((p1.clone(), q1.clone()));
        }
        out
    }

    /// Float value, from a convergent with denominator beyond `1e10`.
    pub fn value(&self) -> f64 {
        let mut depth = 8;
        loop {
            let conv = self.convergents(depth);
            let (p, q) = conv.last().unwrap();
            if q > &BigInt::from(10_000_000_000u64) || conv.len() <= depth {
                return ratio(p, q);
            }
            depth *= 2;
        }
    }
}

fn ratio(p: &BigInt, q: &BigInt) -> f64 {
    p.to_f64().unwrap() / q.to_f64().unwrap()
}

/// `min_{1 <= s <= s_max} s^{1/n} · dist(sα, Z^n)`.
pub fn badly_approximable_constant(alpha: &[f64], s_max: usize) -> f64 {
    badly_approximable_tail_constant(alpha, 1, s_max)
}

/// As [`badly_approximable_constant`] with `s` restricted to `s_min..=s_max`.
///
/// Small `s` dominate the full minimum (for the golden mean the `s = 1`
/// term gives `0.3819...`); discarding them estimates the lim inf instead.
pub fn badly_approximable_tail_constant(alpha: &[f64], s_min: usize, s_max: usize) -> f64 {
    assert!(s_min >= 1 && s_max >= s_min);
    let n = alpha.len() as f64;
    let mut v = vec![0.0; alpha.len()];
    (s_min..=s_max)
        .map(|s| {
            for (vi, a) in v.iter_mut().zip(alpha) {
                *vi = s as f64 * a;
            }
            (s as f64).powf(1.0 / n) * lattice_distance(&v)
        })
        .fold(f64::INFINITY, f64::min)
}

/// `q_k · |q_k α - p_k|` along the convergents, in exact arithmetic up to the
/// final division. These are the local minima of `s‖sα‖`.
pub fn convergent_constants(cf: &ContinuedFraction, depth: usize) -> Vec<(u64, f64)> {
    let deep = cf.convergents(depth + 40);
    let (pd, qd) = deep.last().unwrap();
    deep.iter()
        .take(depth + 1)
        .skip(1)
        .filter_map(|(p, q)| {
            // |qα - p| ≈ |q·pd - p·qd| / qd
            let num: BigInt = q * pd - p * qd;
            let gap = ratio(&num, qd).abs();
            q.to_u64().map(|qq| (qq, qq as f64 * gap))
        })
        .collect()
}

/// Both sides of `d((x,α), φ^s(x,α)) < ε  ⇔  ∃p: ‖sα - p‖ < ε`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DaCheck {
    pub lhs: bool,
    pub rhs: bool,
    pub p: Vec<i64>,
}

pub fn verify_classical_da_equivalence(alpha: &[f64], x: &[f64], s: usize, epsilon: f64) -> DaCheck {
    let sys = TorusRotation::new(alpha.len());
    let state = TorusState::new(x.to_vec(), alpha.to_vec());
    let lhs = sys.distance(&state, &sys.iterate(&state, s)) < epsilon;
    let sa: Vec<f64> = alpha.iter().map(|a| s as f64 * a).collect();
    let p: Vec<i64> = sa.iter().map(|v| v.round() as i64).collect();
    let rhs = sa
        .iter()
        .zip(&p)
        .map(|(v, &q)| (v - q as f64).powi(2))
        .sum::<f64>()
        .sqrt()
        < epsilon;
    DaCheck { lhs, rhs, p }
}

/// A periodic point shadowing a torus recurrence, with its distance bounds.
#[derive(Debug, Clone)]
pub struct TorusClosingWitness {
    pub point: PeriodicPoint<TorusState>,
    pub p: Vec<i64>,
    /// `d(x, x_s)`, to be below `ε/s`.
    pub start_distance: f64,
    /// `d(φ^s x, x_s)`, to be below `(1 + 1/s)ε`.
    pub end_distance: f64,
    pub start_bound: f64,
    pub end_bound: f64,
}

impl TorusClosingWitness {
    pub fn holds(&self) -> bool {
        self.start_distance < self.start_bound && self.end_distance < self.end_bound
    }
}

/// The periodic point `(x, p/s)` with `p = round(sα)`.
pub fn torus_closing_witness(x: &TorusState, s: usize, epsilon: f64) -> Result<TorusClosingWitness> {
    let sys = TorusRotation::new(x.point.len());
    let image = sys.iterate(x, s);
    let d = sys.distance(x, &image);
    if s == 0 || !(d < epsilon) {
        return Err(Error::PreconditionFailed(format!("d(x, T^{s} x) = {d} is not below {epsilon}")));
    }
    let p: Vec<i64> = x.direction.iter().map(|a| (s as f64 * a).round() as i64).collect();
    let state = TorusState::new(x.point.clone(), p.iter().map(|&q| q as f64 / s as f64).collect());
    let residual = sys.distance(&sys.iterate(&state, s), &state);
    let period = s / p.iter().fold(s as i64, |g, &c| gcd(g, c)) as usize;
    let point = PeriodicPoint { state, period, residual };
    Ok(TorusClosingWitness {
        start_distance: sys.distance(x, &point.state),
        end_distance: sys.distance(&image, &point.state),
        start_bound: epsilon / s as f64,
        end_bound: (1.0 + 1.0 / s as f64) * epsilon,
        point,
        p,
    })
}

/// Continued fraction `[0; a_1, ..., a_64, 1, 1, ...]` with `a_i` drawn
/// uniformly from `1..=bound`.
pub fn generate_bad_alpha(bound: u64, seed: u64) -> ContinuedFraction {
    assert!(bound >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let prefix = (0..64).map(|_| rng.gen_range(1..=bound)).collect();
    ContinuedFraction { a0: 0, prefix, period: vec![1] }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// Rational directions: every `(x, p/q)`, with anchors at the origin for
/// `q <= max_denominator`.
#[derive(Debug, Clone, Copy)]
pub struct RationalRegistry {
    pub dimension: usize,
    pub max_denominator: usize,
}

impl RationalRegistry {
    fn point(&self, base: &[f64], p: &[i64], q: usize) -> PeriodicPoint<TorusState> {
        let g = p.iter().fold(q as i64, |g, &c| gcd(g, c));
        let period = (q as i64 / g) as usize;
        let direction = p.iter().map(|&c| c as f64 / q as f64).collect();
        PeriodicPoint {
            state: TorusState::new(base.to_vec(), direction),
            period,
            residual: 0.0,
        }
    }
}

fn lattice_box(lo: &[i64], hi: &[i64]) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for (a, b) in lo.iter().zip(hi) {
        out = out
            .into_iter()
            .flat_map(|v| {
                (*a..=*b).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

impl PeriodicRegistry<TorusState> for RationalRegistry {
    /// Points `(x, p/s)` with `|p/s - α_i| < radius` in each coordinate.
    fn candidates(&self, x: &TorusState, shift: usize, radius: f64) -> Vec<PeriodicPoint<TorusState>> {
        let s = shift as f64;
        let r = radius.min(2.0);
        let lo: Vec<i64> = x.direction.iter().map(|a| ((a - r) * s).floor() as i64).collect();
        let hi: Vec<i64> = x.direction.iter().map(|a| ((a + r) * s).ceil() as i64).collect();
        lattice_box(&lo, &hi)
            .into_iter()
            .map(|p| self.point(&x.point, &p, shift))
            .collect()
    }

    fn anchors(&self) -> Vec<PeriodicPoint<TorusState>> {
        let origin = vec![0.0; self.dimension];
        let mut out = Vec::new();
        for q in 1..=self.max_denominator {
            let hi = vec![q as i64 - 1; self.dimension];
            for p in lattice_box(&vec![0; self.dimension], &hi) {
                if p.iter().fold(q as i64, |g, &c| gcd(g, c)) == 1 {
                    out.push(self.point(&origin, &p, q));
                }
            }
        }
        out
    }
}
