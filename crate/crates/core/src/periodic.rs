//! Periodic points, critical neighbourhoods, approximation constants,
//! penetration lengths and closing-property checks.

use serde::Serialize;

use crate::dynamics::{is_f_aperiodic_on, DynamicalSystem, OrbitWindow, QuantileTable, Verdict};
use crate::error::{Error, Result};

/// A state together with a certified period.
#[derive(Debug, Clone)]
pub struct PeriodicPoint<S> {
    pub state: S,
    pub period: usize,
    /// `d(T^p x_p, x_p)`.
    pub residual: f64,
}

impl<S: Clone> PeriodicPoint<S> {
    /// Certifies an exactly periodic point: zero residual and primitive period.
    pub fn certify_exact<D: DynamicalSystem<State = S>>(sys: &D, state: S, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidInput("period must be positive".into()));
        }
        let mut y = state.clone();
        for q in 1..=period {
            y = sys.step(&y);
            let d = sys.distance(&y, &state);
            if q < period && d == 0.0 {
                return Err(Error::PreconditionFailed(format!("period {period} is not primitive, {q} divides it")));
            }
            if q == period && d != 0.0 {
                return Err(Error::PreconditionFailed(format!("residual {d} after {period} steps")));
            }
        }
        Ok(Self { state, period, residual: 0.0 })
    }

    /// Certifies a numerically periodic point, residual below `1e-10`.
    /// Primitivity is the caller's responsibility.
    pub fn certify_numeric<D: DynamicalSystem<State = S>>(sys: &D, state: S, period: usize) -> Result<Self> {
        if period == 0 {
            return Err(Error::InvalidInput("period must be positive".into()));
        }
        let residual = sys.distance(&sys.iterate(&state, period), &state);
        if residual >= 1e-10 {
            return Err(Error::PreconditionFailed(format!("residual {residual} after {period} steps")));
        }
        Ok(Self { state, period, residual })
    }
}

/// A source of periodic points.
pub trait PeriodicRegistry<S> {
    /// Every registered point whose period divides `shift` and which lies
    /// within `radius` of `x`. Extra points are allowed.
    fn candidates(&self, x: &S, shift: usize, radius: f64) -> Vec<PeriodicPoint<S>>;

    /// A finite list of anchors, for per-anchor constants.
    fn anchors(&self) -> Vec<PeriodicPoint<S>>;
}

/// A registry given as an explicit list.
#[derive(Debug, Clone)]
pub struct ListRegistry<S>(pub Vec<PeriodicPoint<S>>);

impl<S: Clone> PeriodicRegistry<S> for ListRegistry<S> {
    fn candidates(&self, _x: &S, shift: usize, _radius: f64) -> Vec<PeriodicPoint<S>> {
        self.0.iter().filter(|p| shift.is_multiple_of(p.period)).cloned().collect()
    }

    fn anchors(&self) -> Vec<PeriodicPoint<S>> {
        self.0.clone()
    }
}

/// `ε ↦ δ(ε)`, non-decreasing.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ClosingFunction {
    Linear { factor: f64 },
    /// Rows `(ε_k, δ_k)` with ε decreasing; reads the row with the smallest
    /// `ε_k >= ε`.
    Table { rows: Vec<(f64, f64)> },
}

impl ClosingFunction {
    pub fn eval(&self, eps: f64) -> f64 {
        match self {
            ClosingFunction::Linear { factor } => factor * eps,
            ClosingFunction::Table { rows } => rows
                .iter()
                .rev()
                .find(|&&(e, _)| e >= eps)
                .map_or(f64::INFINITY, |&(_, d)| d),
        }
    }
}

/// `(ε, l) ↦ δ_ε(l)`, non-decreasing in `l`.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum StrongClosingFunction {
    /// `δ_ε(l) = slope·l + offset` at every scale.
    Affine { slope: usize, offset: usize },
    /// Per-scale tables, rows `(ε_k, [δ(0), δ(1), ...])` with ε decreasing.
    Table { rows: Vec<(f64, Vec<usize>)> },
}

impl StrongClosingFunction {
    pub fn eval(&self, eps: f64, l: usize) -> Option<usize> {
        match self {
            StrongClosingFunction::Affine { slope, offset } => Some(slope * l + offset),
            StrongClosingFunction::Table { rows } => rows
                .iter()
                .rev()
                .find(|(e, _)| *e >= eps)
                .and_then(|(_, t)| t.get(l).copied()),
        }
    }
}

/// Radius of the critical neighbourhood of a period-`p` point: `F←(p)/2`.
pub fn critical_radius(f: &QuantileTable, p: usize) -> Result<f64> {
    Ok(f.quantile_left(p as f64)? / 2.0)
}

fn in_neighborhood<D: DynamicalSystem>(sys: &D, y: &D::State, anchor: &D::State, shift: usize, rho: f64) -> bool {
    sys.distance(y, anchor) < rho && sys.distance(&sys.iterate(y, shift), anchor) < rho
}

/// `d(y, x_p) < ρ` and `d(T^p y, x_p) < ρ`.
pub fn in_critical_neighborhood<D: DynamicalSystem>(
    sys: &D,
    y: &D::State,
    x_p: &PeriodicPoint<D::State>,
    rho: f64,
) -> bool {
    in_neighborhood(sys, y, &x_p.state, x_p.period, rho)
}

/// Approximation constant of an orbit window with respect to an anchor.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ApproximationRecord {
    pub horizon: usize,
    pub period: usize,
    pub constant: f64,
    pub time: usize,
}

/// `ĉ = min_{n <= N} max(d(T^n x, x_p), d(T^{n+p} x, x_p))`.
///
/// `T^n x` lies in the ε-neighbourhood of `x_p` exactly when that maximum is
/// below ε, so the infimum of the scales the window ever enters is this
/// minimum.
pub fn approximation_constant<D: DynamicalSystem>(
    sys: &D,
    x: &D::State,
    x_p: &PeriodicPoint<D::State>,
    horizon: usize,
) -> ApproximationRecord {
    let orbit = OrbitWindow::new(sys, x, horizon + x_p.period);
    approximation_constant_on(sys, &orbit, x_p, horizon)
}

pub fn approximation_constant_on<D: DynamicalSystem>(
    sys: &D,
    orbit: &OrbitWindow<D::State>,
    x_p: &PeriodicPoint<D::State>,
    horizon: usize,
) -> ApproximationRecord {
    let p = x_p.period;
    let dists: Vec<f64> = orbit.iterates()[..=horizon + p]
        .iter()
        .map(|y| sys.distance(y, &x_p.state))
        .collect();
    let (time, constant) = (0..=horizon)
        .map(|n| (n, dists[n].max(dists[n + p])))
        .fold((0, f64::INFINITY), |best, c| if c.1 < best.1 { c } else { best });
    ApproximationRecord { horizon, period: p, constant, time }
}

/// Number of leading iterates of `y` staying ε-close to the orbit of `x0`;
/// `None` when all of `0..=l_max` do.
///
/// This is `1 + max{l : d_l(y, x0) < ε}`, and 0 when `d(y, x0) >= ε`.
pub fn penetration_length<D: DynamicalSystem>(
    sys: &D,
    x0: &D::State,
    y: &D::State,
    epsilon: f64,
    l_max: usize,
) -> Option<usize> {
    let mut a = x0.clone();
    let mut b = y.clone();
    for i in 0..=l_max {
        if sys.distance(&a, &b) >= epsilon {
            return Some(i);
        }
        a = sys.step(&a);
        b = sys.step(&b);
    }
    None
}

/// A recurrence `d(x, T^s x) < ε`.
#[derive(Debug, Clone)]
pub struct ClosingEvent<S> {
    pub state: S,
    pub shift: usize,
    pub epsilon: f64,
}

/// A Bowen recurrence `d_l(x, T^s x) < ε`.
#[derive(Debug, Clone)]
pub struct StrongClosingEvent<S> {
    pub state: S,
    pub shift: usize,
    pub length: usize,
    pub epsilon: f64,
}

pub const CLOSING_SEMANTICS: &str =
    "counterexamples are events with no witness in the supplied registry; an empty list means no counterexample within this registry and event budget";

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClosingReport {
    pub checked: usize,
    /// Events skipped because `δ(ε)` exceeds the diameter bound.
    pub vacuous: usize,
    /// Indices of events without a witness.
    pub counterexamples: Vec<usize>,
    pub semantics: &'static str,
}

/// A registry point of period dividing `s` whose closing neighbourhood at
/// radius `δ(ε)` contains `x`, if any.
pub fn find_closing_witness<D, R>(
    sys: &D,
    delta: &ClosingFunction,
    registry: &R,
    event: &ClosingEvent<D::State>,
) -> Option<PeriodicPoint<D::State>>
where
    D: DynamicalSystem,
    R: PeriodicRegistry<D::State> + ?Sized,
{
    let radius = delta.eval(event.epsilon);
    let image = sys.iterate(&event.state, event.shift);
    registry
        .candidates(&event.state, event.shift, radius)
        .into_iter()
        .find(|c| sys.distance(&event.state, &c.state) < radius && sys.distance(&image, &c.state) < radius)
}

/// Searches a closing witness for every event.
pub fn check_delta_closing<D, R>(
    sys: &D,
    delta: &ClosingFunction,
    registry: &R,
    events: &[ClosingEvent<D::State>],
) -> Result<ClosingReport>
where
    D: DynamicalSystem,
    R: PeriodicRegistry<D::State> + ?Sized,
{
    let mut report = ClosingReport {
        checked: 0,
        vacuous: 0,
        counterexamples: Vec::new(),
        semantics: CLOSING_SEMANTICS,
    };
    for (index, ev) in events.iter().enumerate() {
        let distance = sys.distance(&ev.state, &sys.iterate(&ev.state, ev.shift));
        if ev.shift == 0 || !(distance < ev.epsilon) {
            return Err(Error::MalformedEvent { index, distance, epsilon: ev.epsilon });
        }
        if delta.eval(ev.epsilon) > sys.diameter_bound() {
            report.vacuous += 1;
            continue;
        }
        report.checked += 1;
        if find_closing_witness(sys, delta, registry, ev).is_none() {
            report.counterexamples.push(index);
        }
    }
    Ok(report)
}

/// Searches, for every event, a registry point `x_s` with
/// `penetration_length(x_s, x, ε) >= s + δ_ε(l) + 1`.
pub fn check_strong_delta_closing<D, R>(
    sys: &D,
    delta: &StrongClosingFunction,
    registry: &R,
    events: &[StrongClosingEvent<D::State>],
) -> Result<ClosingReport>
where
    D: DynamicalSystem,
    R: PeriodicRegistry<D::State> + ?Sized,
{
    let mut report = ClosingReport {
        checked: 0,
        vacuous: 0,
        counterexamples: Vec::new(),
        semantics: CLOSING_SEMANTICS,
    };
    for (index, ev) in events.iter().enumerate() {
        let image = sys.iterate(&ev.state, ev.shift);
        let distance = crate::dynamics::bowen_distance(sys, &ev.state, &image, ev.length);
        if ev.shift == 0 || !(distance < ev.epsilon) {
            return Err(Error::MalformedEvent { index, distance, epsilon: ev.epsilon });
        }
        let Some(d) = delta.eval(ev.epsilon, ev.length) else {
            report.vacuous += 1;
            continue;
        };
        report.checked += 1;
        let target = ev.shift + d + 1;
        let found = registry
            .candidates(&ev.state, ev.shift, ev.epsilon)
            .iter()
            .any(|c| penetration_length(sys, &c.state, &ev.state, ev.epsilon, target - 1).is_none());
        if !found {
            report.counterexamples.push(index);
        }
    }
    Ok(report)
}

/// Largest approximation constant over a sample; a lower bound for the
/// Hurwitz constant of the anchor.
pub fn hurwitz_estimate<D: DynamicalSystem>(
    sys: &D,
    x_p: &PeriodicPoint<D::State>,
    sample: &[D::State],
    horizon: usize,
) -> f64 {
    assert!(!sample.is_empty(), "empty sample");
    let h = sample
        .iter()
        .map(|x| approximation_constant(sys, x, x_p, horizon).constant)
        .fold(0.0, f64::max);
    debug_assert!(h <= sys.diameter_bound());
    h
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedEntry {
    pub period: usize,
    pub radius: f64,
    /// The window never enters the critical neighbourhood.
    pub member: bool,
    pub constant: f64,
    pub time: usize,
    /// `member` agrees with `constant >= radius`.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedReport {
    pub horizon: usize,
    pub entries: Vec<BoundedEntry>,
}

impl BoundedReport {
    pub fn all_members(&self) -> bool {
        self.entries.iter().all(|e| e.member)
    }

    pub fn consistent(&self) -> bool {
        self.entries.iter().all(|e| e.consistent)
    }
}

/// Membership of the orbit window in the F-bounded set of each anchor.
pub fn classify_bounded<D: DynamicalSystem>(
    sys: &D,
    x: &D::State,
    f: &QuantileTable,
    anchors: &[PeriodicPoint<D::State>],
    horizon: usize,
) -> Result<BoundedReport> {
    let max_p = anchors.iter().map(|a| a.period).max().unwrap_or(0);
    let orbit = OrbitWindow::new(sys, x, horizon + max_p);
    let mut entries = Vec::with_capacity(anchors.len());
    for a in anchors {
        let radius = critical_radius(f, a.period)?;
        let member = (0..=horizon).all(|n| {
            !(sys.distance(orbit.get(n), &a.state) < radius
                && sys.distance(orbit.get(n + a.period), &a.state) < radius)
        });
        let rec = approximation_constant_on(sys, &orbit, a, horizon);
        entries.push(BoundedEntry {
            period: a.period,
            radius,
            member,
            constant: rec.constant,
            time: rec.time,
            consistent: member == (rec.constant >= radius),
        });
    }
    Ok(BoundedReport { horizon, entries })
}

/// Finite window for the bounded-set round trip.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RecurrenceWindow {
    pub horizon: usize,
    pub s_max: usize,
    pub length: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundedConverseReport {
    pub anchors_checked: usize,
    /// Anchors (listed or used as witnesses) with `ĉ <= F→(p)`.
    pub anchor_failures: Vec<(usize, f64, f64)>,
    pub closing: ClosingReport,
    pub premise: bool,
    pub conclusion: Verdict,
    /// Premise holds but the conclusion does not.
    pub violated: bool,
}

/// Window form of "bounded for every anchor + δ-closing ⇒ aperiodic for
/// `F∘δ`" with a linear δ.
///
/// Recurrence events are collected from the window at the scales of the
/// composed table. Closing witnesses found for events that could violate
/// `F∘δ`-aperiodicity join the anchor list of the premise.
pub fn check_bounded_converse<D, R>(
    sys: &D,
    x: &D::State,
    f: &QuantileTable,
    delta: &ClosingFunction,
    registry: &R,
    window: RecurrenceWindow,
) -> Result<BoundedConverseReport>
where
    D: DynamicalSystem,
    R: PeriodicRegistry<D::State> + ?Sized,
{
    let ClosingFunction::Linear { factor } = *delta else {
        return Err(Error::InvalidInput("composition needs a linear closing function".into()));
    };
    let composed = f.rescaled(factor);
    let RecurrenceWindow { horizon, s_max, length } = window;
    let mut anchors = registry.anchors();
    let max_p = anchors.iter().map(|a| a.period).max().unwrap_or(0).max(s_max);
    let orbit = OrbitWindow::new(sys, x, horizon + max_p + length);

    let mut events = Vec::new();
    let mut relevant = Vec::new();
    for &(eps, value) in composed.rows() {
        for n in 0..=horizon {
            for s in 1..=s_max {
                if sys.distance(orbit.get(n), orbit.get(n + s)) < eps {
                    if (s as f64) < value {
                        relevant.push(events.len());
                    }
                    events.push(ClosingEvent { state: orbit.get(n).clone(), shift: s, epsilon: eps });
                }
            }
        }
    }
    let closing = check_delta_closing(sys, delta, registry, &events)?;
    for &i in &relevant {
        if let Some(w) = find_closing_witness(sys, delta, registry, &events[i]) {
            anchors.push(w);
        }
    }

    let mut anchor_failures = Vec::new();
    for a in &anchors {
        let c = approximation_constant_on(sys, &orbit, a, horizon).constant;
        match f.quantile_right(a.period as f64) {
            Ok(q) if c > q => {}
            Ok(q) => anchor_failures.push((a.period, c, q)),
            Err(_) => anchor_failures.push((a.period, c, f64::NAN)),
        }
    }
    let premise = anchor_failures.is_empty() && closing.counterexamples.is_empty();
    let conclusion = is_f_aperiodic_on(sys, &orbit, &composed, length, horizon, s_max);
    Ok(BoundedConverseReport {
        anchors_checked: anchors.len(),
        anchor_failures,
        closing,
        premise,
        violated: premise && !conclusion.holds(),
        conclusion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Rotation(f64);

    impl DynamicalSystem for Rotation {
        type State = f64;
        fn distance(&self, x: &f64, y: &f64) -> f64 {
            let d = (x - y).rem_euclid(1.0);
            d.min(1.0 - d)
        }
        fn step(&self, x: &f64) -> f64 {
            (x + self.0).rem_euclid(1.0)
        }
        fn diameter_bound(&self) -> f64 {
            0.5
        }
    }

    #[test]
    fn floor_table_radius() {
        let f = QuantileTable::step((1..=20).map(|k| (1.0 / k as f64, k as f64)).collect()).unwrap();
        assert_eq!(critical_radius(&f, 2).unwrap(), 1.0 / 6.0);
    }

    #[test]
    fn exact_certification() {
        let r = Rotation(0.25);
        assert_eq!(PeriodicPoint::certify_exact(&r, 0.0, 4).unwrap().period, 4);
        assert!(PeriodicPoint::certify_exact(&r, 0.0, 8).is_err());
        assert!(PeriodicPoint::certify_exact(&r, 0.0, 3).is_err());
    }

    #[test]
    fn anchor_has_zero_constant() {
        let r = Rotation(0.25);
        let xp = PeriodicPoint::certify_exact(&r, 0.5, 4).unwrap();
        let rec = approximation_constant(&r, &0.5, &xp, 10);
        assert_eq!((rec.constant, rec.time), (0.0, 0));
        assert!(in_critical_neighborhood(&r, &0.5, &xp, 1e-9));
        assert!(!in_critical_neighborhood(&r, &0.6, &xp, 0.05));
        assert_eq!(hurwitz_estimate(&r, &xp, &[0.5], 5), 0.0);
    }

    #[test]
    fn penetration_of_fixed_point_is_unresolved() {
        let r = Rotation(0.0);
        assert_eq!(penetration_length(&r, &0.0, &0.0, 0.1, 50), None);
        assert_eq!(penetration_length(&r, &0.0, &0.3, 0.1, 50), Some(0));
    }

    #[test]
    fn empty_registry_gives_counterexample() {
        let r = Rotation(0.5);
        let reg: ListRegistry<f64> = ListRegistry(Vec::new());
        let ev = [ClosingEvent { state: 0.0, shift: 2, epsilon: 0.1 }];
        let rep = check_delta_closing(&r, &ClosingFunction::Linear { factor: 2.0 }, &reg, &ev).unwrap();
        assert_eq!(rep.counterexamples, vec![0]);
        let bad = [ClosingEvent { state: 0.0, shift: 1, epsilon: 0.1 }];
        assert!(matches!(
            check_delta_closing(&r, &ClosingFunction::Linear { factor: 2.0 }, &reg, &bad),
            Err(Error::MalformedEvent { index: 0, .. })
        ));
    }

    #[test]
    fn own_anchor_is_not_bounded() {
        let r = Rotation(0.2);
        let xp = PeriodicPoint::certify_exact(&r, 0.0, 5).unwrap();
        let f = QuantileTable::step(vec![(0.1, 1.0), (0.05, 10.0)]).unwrap();
        let rep = classify_bounded(&r, &0.0, &f, &[xp], 20).unwrap();
        assert!(!rep.entries[0].member);
        assert!(rep.consistent());
    }
}
