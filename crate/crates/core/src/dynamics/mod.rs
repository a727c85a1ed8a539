//! Systems, Bowen metrics, return times and finite-window shift functions.
//!
//! Everything here works on a finite window: orbits are truncated at a
//! horizon `N` and return times are searched up to a cap `s_max`. A value of
//! `None` for a return time means "no return within `s_max`", nothing more.

mod grid;
mod quantile;

pub use grid::EpsilonGrid;
pub use quantile::{Interpolation, QuantileTable};

use serde::Serialize;

/// A compact metric space with a continuous self-map.
pub trait DynamicalSystem {
    type State: Clone;

    fn distance(&self, x: &Self::State, y: &Self::State) -> f64;

    fn step(&self, x: &Self::State) -> Self::State;

    /// An upper bound for the diameter of the space.
    fn diameter_bound(&self) -> f64;

    /// `T^k x`. Systems with a closed form should override this.
    fn iterate(&self, x: &Self::State, k: usize) -> Self::State {
        let mut y = x.clone();
        for _ in 0..k {
            y = self.step(&y);
        }
        y
    }

    /// Optional bucketing hook for separated-set construction.
    ///
    /// If it returns `Some` for two states, and the keys differ, the states
    /// must be at least `epsilon` apart in the Bowen metric of length `length`.
    /// Returning `None` for any candidate disables bucketing.
    fn separation_cell(&self, _x: &Self::State, _epsilon: f64, _length: usize) -> Option<Vec<u32>> {
        None
    }
}

/// Cached iterates `T^0 x, ..., T^N x`.
#[derive(Debug, Clone)]
pub struct OrbitWindow<S> {
    iterates: Vec<S>,
}

impl<S: Clone> OrbitWindow<S> {
    pub fn new<D: DynamicalSystem<State = S>>(sys: &D, x: &S, horizon: usize) -> Self {
        let mut iterates = Vec::with_capacity(horizon + 1);
        iterates.push(x.clone());
        for k in 0..horizon {
            let next = sys.step(&iterates[k]);
            iterates.push(next);
        }
        Self { iterates }
    }

    pub fn base(&self) -> &S {
        &self.iterates[0]
    }

    pub fn horizon(&self) -> usize {
        self.iterates.len() - 1
    }

    pub fn iterates(&self) -> &[S] {
        &self.iterates
    }

    pub fn get(&self, k: usize) -> &S {
        &self.iterates[k]
    }

    /// `d_l(T^i x, T^j x)`; needs `max(i, j) + l <= horizon`.
    pub fn bowen<D: DynamicalSystem<State = S>>(&self, sys: &D, i: usize, j: usize, l: usize) -> f64 {
        (0..=l)
            .map(|k| sys.distance(&self.iterates[i + k], &self.iterates[j + k]))
            .fold(0.0, f64::max)
    }

    /// Whether `d_l(T^i x, T^j x) < epsilon`, stopping at the first far pair.
    pub fn bowen_close<D: DynamicalSystem<State = S>>(
        &self,
        sys: &D,
        i: usize,
        j: usize,
        l: usize,
        epsilon: f64,
    ) -> bool {
        (0..=l).all(|k| sys.distance(&self.iterates[i + k], &self.iterates[j + k]) < epsilon)
    }
}

/// Bowen distance `d_l(x, y) = max_{0 <= i <= l} d(T^i x, T^i y)`.
pub fn bowen_distance<D: DynamicalSystem>(sys: &D, x: &D::State, y: &D::State, l: usize) -> f64 {
    let mut a = x.clone();
    let mut b = y.clone();
    let mut best = sys.distance(&a, &b);
    for _ in 0..l {
        a = sys.step(&a);
        b = sys.step(&b);
        best = best.max(sys.distance(&a, &b));
    }
    best
}

/// Least `s` in `1..=s_max` with `d_l(T^s x, x) < epsilon`.
pub fn return_time<D: DynamicalSystem>(
    sys: &D,
    x: &D::State,
    epsilon: f64,
    l: usize,
    s_max: usize,
) -> Option<usize> {
    let orbit = OrbitWindow::new(sys, x, s_max + l);
    (1..=s_max).find(|&s| orbit.bowen_close(sys, s, 0, l, epsilon))
}

fn shift_function_on<D: DynamicalSystem>(
    sys: &D,
    orbit: &OrbitWindow<D::State>,
    epsilon: f64,
    l: usize,
    horizon: usize,
    s_max: usize,
) -> Option<usize> {
    let mut best: Option<usize> = None;
    for n in 0..=horizon {
        let cap = best.map_or(s_max, |b| b - 1);
        if cap == 0 {
            break;
        }
        if let Some(s) = (1..=cap).find(|&s| orbit.bowen_close(sys, n + s, n, l, epsilon)) {
            best = Some(s);
        }
    }
    best
}

/// Finite-window shift function: `min_{n <= N}` of the return times of `T^n x`.
pub fn shift_function<D: DynamicalSystem>(
    sys: &D,
    x: &D::State,
    epsilon: f64,
    l: usize,
    horizon: usize,
    s_max: usize,
) -> Option<usize> {
    let orbit = OrbitWindow::new(sys, x, horizon + s_max + l);
    shift_function_on(sys, &orbit, epsilon, l, horizon, s_max)
}

/// Shift-function values over an ε-grid at a fixed length.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShiftProfile {
    pub length: usize,
    pub epsilons: Vec<f64>,
    pub values: Vec<Option<usize>>,
    pub horizon: usize,
    pub s_max: usize,
}

impl ShiftProfile {
    /// `(epsilon, value)` pairs for resolved entries.
    pub fn resolved(&self) -> impl Iterator<Item = (f64, usize)> + '_ {
        self.epsilons
            .iter()
            .zip(&self.values)
            .filter_map(|(&e, v)| v.map(|v| (e, v)))
    }

    pub fn value_at(&self, epsilon: f64) -> Option<Option<usize>> {
        grid::position(&self.epsilons, epsilon).map(|k| self.values[k])
    }
}

/// Shift profile over a strictly decreasing grid.
pub fn shift_profile<D: DynamicalSystem>(
    sys: &D,
    x: &D::State,
    epsilons: &[f64],
    l: usize,
    horizon: usize,
    s_max: usize,
) -> ShiftProfile {
    assert!(
        epsilons.windows(2).all(|w| w[0] > w[1]),
        "epsilon grid must be strictly decreasing"
    );
    let orbit = OrbitWindow::new(sys, x, horizon + s_max + l);
    shift_profile_on(sys, &orbit, epsilons, l, horizon, s_max)
}

/// Shift profile from a precomputed orbit of length at least `horizon + s_max + l`.
pub fn shift_profile_on<D: DynamicalSystem>(
    sys: &D,
    orbit: &OrbitWindow<D::State>,
    epsilons: &[f64],
    l: usize,
    horizon: usize,
    s_max: usize,
) -> ShiftProfile {
    assert!(orbit.horizon() >= horizon + s_max + l, "orbit window too short");
    let values = epsilons
        .iter()
        .map(|&e| shift_function_on(sys, orbit, e, l, horizon, s_max))
        .collect();
    ShiftProfile {
        length: l,
        epsilons: epsilons.to_vec(),
        values,
        horizon,
        s_max,
    }
}

/// Window-relative answer to "is the orbit F-aperiodic?".
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Verdict {
    HoldsOnWindow,
    Violated { n: usize, s: usize, epsilon: f64 },
    Inconclusive,
}

impl Verdict {
    pub fn holds(&self) -> bool {
        matches!(self, Verdict::HoldsOnWindow)
    }
}

/// Checks `d_l(T^n x, T^{n+s} x) < ε  ⇒  s >= F(ε)` for `n <= N` at every
/// ε in the table. Shifts below `F(ε)` beyond `s_max` make the verdict
/// inconclusive unless a violation is found.
pub fn is_f_aperiodic<D: DynamicalSystem>(
    sys: &D,
    x: &D::State,
    f: &QuantileTable,
    l: usize,
    horizon: usize,
    s_max: usize,
) -> Verdict {
    let orbit = OrbitWindow::new(sys, x, horizon + s_max + l);
    is_f_aperiodic_on(sys, &orbit, f, l, horizon, s_max)
}

/// As [`is_f_aperiodic`] on a precomputed orbit.
pub fn is_f_aperiodic_on<D: DynamicalSystem>(
    sys: &D,
    orbit: &OrbitWindow<D::State>,
    f: &QuantileTable,
    l: usize,
    horizon: usize,
    s_max: usize,
) -> Verdict {
    assert!(orbit.horizon() >= horizon + s_max + l, "orbit window too short");
    let mut truncated = false;
    for &(eps, value) in f.rows() {
        // shifts s with s < F(ε)
        let below = (value.ceil() as usize).saturating_sub(1);
        if below > s_max {
            truncated = true;
        }
        let cap = below.min(s_max);
        for n in 0..=horizon {
            if let Some(s) = (1..=cap).find(|&s| orbit.bowen_close(sys, n + s, n, l, eps)) {
                return Verdict::Violated { n, s, epsilon: eps };
            }
        }
    }
    if truncated {
        Verdict::Inconclusive
    } else {
        Verdict::HoldsOnWindow
    }
}
