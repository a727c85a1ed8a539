//! The subcommands. Each renders its outputs into an [`Artifacts`] buffer;
//! nothing touches the disk here.

use aperiodic::bernoulli::{
    blocks, is_phi_aperiodic, phi_aperiodic_search_auto, verify_prop34, BernoulliShift, PeriodicWords, PhiTable,
    PhiWindow, SearchOptions, SymbolWord,
};
use aperiodic::complexity::{growth_rate_f, growth_rate_g, maximal_separated_net, stabilized_slope, FitPolicy, GrowthRateEstimate};
use aperiodic::dynamics::{is_f_aperiodic, shift_profile_on, DynamicalSystem, OrbitWindow, QuantileTable, ShiftProfile};
use aperiodic::hyperbolic::{
    displacement_bounds_check, hyp_distance, neighbor_containment_check, orbital_counting_profile,
    schottky_generators, volume_entropy_estimate, BoundaryWord, ClosingInstance, GeodesicLine, GeodesicSegment,
    HPoint, Isometry, SchottkyBoundaryMap, DELTA_ZERO,
};
use aperiodic::periodic::{
    check_delta_closing, check_strong_delta_closing, classify_bounded, ClosingEvent, ClosingFunction,
    PeriodicRegistry, StrongClosingEvent, StrongClosingFunction,
};
use aperiodic::torus::{
    badly_approximable_constant, badly_approximable_tail_constant, convergent_constants, torus_closing_witness,
    verify_classical_da_equivalence, RationalRegistry, TorusRotation, TorusState,
};
use aperiodic::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::config::{ConfigError, ExperimentConfig, SystemConfig};
use crate::output::{Artifacts, PlotRow, ProfileRow};

/// Allowed excess of 𝓕 over the box dimension and of 𝓖 over the entropy.
pub const INEQUALITY_TOLERANCE: f64 = 0.15;

const DEFAULT_STABILIZATION_TOL: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Profile,
    Dimension,
    Entropy,
    Torus,
    Bernoulli,
    Hyperbolic,
    CheckClosing,
    Report,
}

/// Logging switch passed down to the commands.
#[derive(Debug, Clone, Copy, Default)]
pub struct Context {
    pub verbose: bool,
}

impl Context {
    fn note(&self, msg: impl AsRef<str>) {
        if self.verbose {
            eprintln!("[aperiodic] {}", msg.as_ref());
        }
    }
}

/// Independent random stream `stream` of the experiment seed.
fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

/// A fit, or the reason it could not be made.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EstimateRecord {
    pub quantity: &'static str,
    pub point: Option<usize>,
    pub epsilon: Option<f64>,
    pub slope: Option<f64>,
    pub intercept: Option<f64>,
    pub residual: Option<f64>,
    pub window: Option<(usize, usize)>,
    pub samples: Vec<(f64, f64)>,
    pub error: Option<String>,
}

impl EstimateRecord {
    fn new(quantity: &'static str, point: Option<usize>, epsilon: Option<f64>, fit: Result<GrowthRateEstimate, Error>) -> Self {
        let mut r = Self {
            quantity,
            point,
            epsilon,
            slope: None,
            intercept: None,
            residual: None,
            window: None,
            samples: Vec::new(),
            error: None,
        };
        match fit {
            Ok(g) => {
                r.slope = Some(g.slope);
                r.intercept = Some(g.intercept);
                r.residual = Some(g.residual);
                r.window = Some(g.window);
                r.samples = g.samples;
            }
            Err(e) => r.error = Some(e.to_string()),
        }
        r
    }

    fn plot_rows(&self) -> impl Iterator<Item = PlotRow> + '_ {
        let series = match (self.point, self.epsilon) {
            (Some(p), Some(e)) => format!("{}[point={p},epsilon={e}]", self.quantity),
            (Some(p), None) => format!("{}[point={p}]", self.quantity),
            (None, Some(e)) => format!("{}[epsilon={e}]", self.quantity),
            (None, None) => self.quantity.to_string(),
        };
        self.samples.iter().map(move |&(x, y)| PlotRow { series: series.clone(), x, y })
    }
}

/// Fit of log sizes with the same degeneracy rule as the library estimators.
fn fit_sizes(policy: &FitPolicy, xs: &[f64], sizes: &[usize], single_point_only: bool) -> Result<GrowthRateEstimate, Error> {
    if single_point_only && sizes.iter().all(|&n| n == 1) {
        return Err(Error::DegenerateFit("every net has a single point".into()));
    }
    if !single_point_only && sizes.windows(2).all(|w| w[0] == w[1]) {
        return Err(Error::DegenerateFit(format!("all net sizes equal {}", sizes[0])));
    }
    policy.fit(xs.iter().zip(sizes).map(|(&x, &n)| (x, (n as f64).ln())).collect())
}

/// A system with its starting points and net candidates.
struct Setup<D: DynamicalSystem> {
    name: &'static str,
    sys: D,
    /// The configured point first, then random samples.
    points: Vec<D::State>,
    candidates: Vec<D::State>,
    entropy_epsilons: Vec<f64>,
    entropy_lengths: Vec<usize>,
}

fn words_of_length(n: u8, len: usize) -> Vec<SymbolWord> {
    blocks(n, len)
        .into_iter()
        .filter(|b| b.len() == len)
        .map(|b| SymbolWord::new(n, b, vec![1]).expect("symbols in range"))
        .collect()
}

fn random_symbol_word(rng: &mut ChaCha8Rng, n: u8, len: usize) -> SymbolWord {
    let prefix = (0..len).map(|_| rng.gen_range(1..=n)).collect();
    let tail = (0..7).map(|_| rng.gen_range(1..=n)).collect();
    SymbolWord::new(n, prefix, tail).expect("symbols in range")
}

fn torus_setup(config: &ExperimentConfig) -> Result<Setup<TorusRotation>, ConfigError> {
    let SystemConfig::Torus { point, .. } = &config.system else {
        unreachable!()
    };
    let alpha = config.alpha()?;
    let dim = alpha.len();
    let mut r = rng(config.seed, 1);
    let mut points = vec![TorusState::new(point.clone().unwrap_or_else(|| vec![0.0; dim]), alpha.clone())];
    points.extend((1..config.samples.points).map(|_| TorusState::new((0..dim).map(|_| r.gen()).collect(), alpha.clone())));
    let m = config.samples.candidates;
    let candidates = if dim == 1 {
        (0..m).map(|k| TorusState::new(vec![k as f64 / m as f64], alpha.clone())).collect()
    } else {
        (0..m).map(|_| TorusState::new((0..dim).map(|_| r.gen()).collect(), alpha.clone())).collect()
    };
    Ok(Setup {
        name: "torus",
        sys: TorusRotation::new(dim),
        points,
        candidates,
        entropy_epsilons: config.entropy.epsilons.clone().unwrap_or_else(|| vec![0.1, 0.05]),
        entropy_lengths: config.entropy.lengths.clone().unwrap_or_else(|| (1..=8).collect()),
    })
}

fn bernoulli_setup(config: &ExperimentConfig) -> Result<Setup<BernoulliShift>, ConfigError> {
    let SystemConfig::Bernoulli { alphabet: n, word, prefix_len } = &config.system else {
        unreachable!()
    };
    let (n, prefix_len) = (*n, *prefix_len);
    let mut r = rng(config.seed, 1);
    let first = match word {
        Some(w) => SymbolWord::parse(n, w).map_err(|e| ConfigError::new("system.word", e.to_string()))?,
        None => random_symbol_word(&mut r, n, prefix_len),
    };
    let mut points = vec![first];
    points.extend((1..config.samples.points).map(|_| random_symbol_word(&mut r, n, prefix_len)));
    // All words of the largest length the candidate budget allows.
    let depth = (1..)
        .take_while(|&k| (n as usize).checked_pow(k as u32).is_some_and(|c| c <= config.samples.candidates))
        .last()
        .unwrap_or(0);
    let entropy_lengths = match &config.entropy.lengths {
        Some(l) => l.clone(),
        None => {
            if depth < 6 {
                return Err(ConfigError::new(
                    "samples.candidates",
                    format!("allows words of length {depth} only; default entropy lengths need at least 6"),
                ));
            }
            (1..depth).collect()
        }
    };
    Ok(Setup {
        name: "bernoulli",
        sys: BernoulliShift { alphabet: n },
        points,
        candidates: words_of_length(n, depth.max(1)),
        entropy_epsilons: config.entropy.epsilons.clone().unwrap_or_else(|| vec![(-1f64).exp()]),
        entropy_lengths,
    })
}

fn schottky_setup(config: &ExperimentConfig) -> Result<Setup<SchottkyBoundaryMap>, ConfigError> {
    let SystemConfig::Schottky { tau, prefix_len, tail_len } = &config.system else {
        unreachable!()
    };
    let sys = SchottkyBoundaryMap::new(*tau).map_err(|e| ConfigError::new("system.tau", e.to_string()))?;
    let mut r = rng(config.seed, 1);
    let points: Vec<BoundaryWord> = (0..config.samples.points)
        .map(|_| sys.random_word(&mut r, *prefix_len, *tail_len))
        .collect();
    // Reduced words of length d number 4·3^(d-1).
    let depth = (1..)
        .take_while(|&d| 4 * 3usize.pow(d as u32 - 1) <= config.samples.candidates)
        .last()
        .unwrap_or(1);
    Ok(Setup {
        name: "schottky",
        candidates: sys.cylinder_points(depth),
        sys,
        points,
        entropy_epsilons: config.entropy.epsilons.clone().unwrap_or_else(|| vec![0.5]),
        entropy_lengths: config.entropy.lengths.clone().unwrap_or_else(|| (1..=6).collect()),
    })
}

/// Runs `$body` with `$s` bound to the setup of the configured system.
macro_rules! with_setup {
    ($config:expr, $s:ident => $body:expr) => {
        match &$config.system {
            SystemConfig::Torus { .. } => {
                let $s = torus_setup($config)?;
                $body
            }
            SystemConfig::Bernoulli { .. } => {
                let $s = bernoulli_setup($config)?;
                $body
            }
            SystemConfig::Schottky { .. } => {
                let $s = schottky_setup($config)?;
                $body
            }
        }
    };
}

pub fn run(command: Command, config: &ExperimentConfig, ctx: Context) -> Result<Artifacts, ConfigError> {
    ctx.note(format!("{command:?} on {} with seed {}", config.system_name(), config.seed));
    let mut out = Artifacts::default();
    match command {
        Command::Profile => with_setup!(config, s => profile(&s, config, ctx, &mut out)),
        Command::Dimension => with_setup!(config, s => dimension(&s, config, ctx, &mut out)),
        Command::Entropy => with_setup!(config, s => entropy(&s, config, ctx, &mut out)),
        Command::Report => with_setup!(config, s => report(&s, config, ctx, &mut out)),
        Command::Torus => torus(config, ctx, &mut out)?,
        Command::Bernoulli => bernoulli(config, ctx, &mut out)?,
        Command::Hyperbolic => hyperbolic(config, ctx, &mut out),
        Command::CheckClosing => check_closing(config, ctx, &mut out)?,
    }
    out.add_json("config.json", config);
    Ok(out)
}

fn write_estimates(out: &mut Artifacts, config: &ExperimentConfig, records: &[EstimateRecord], extra: serde_json::Value) {
    let plot: Vec<PlotRow> = records.iter().flat_map(EstimateRecord::plot_rows).collect();
    out.add_csv("plot.csv", &plot);
    out.add_json(
        "estimate.json",
        &json!({
            "system": config.system_name(),
            "seed": config.seed,
            "policy": FitPolicy::default(),
            "estimates": records,
            "summary": extra,
        }),
    );
}

/// Profiles of one point for every length, sharing one orbit window.
fn profiles<D>(sys: &D, x: &D::State, epsilons: &[f64], lengths: &[usize], config: &ExperimentConfig) -> Vec<ShiftProfile>
where
    D: DynamicalSystem + Sync,
    D::State: Send + Sync,
{
    let w = config.window;
    let l_max = lengths.iter().copied().max().unwrap_or(0);
    let orbit = OrbitWindow::new(sys, x, w.horizon + w.s_max + l_max);
    lengths
        .par_iter()
        .map(|&l| shift_profile_on(sys, &orbit, epsilons, l, w.horizon, w.s_max))
        .collect()
}

fn profile_rows(system: &'static str, quantity: &'static str, point: usize, profiles: &[ShiftProfile]) -> Vec<ProfileRow> {
    profiles
        .iter()
        .flat_map(|p| {
            p.epsilons.iter().zip(&p.values).map(move |(&e, v)| ProfileRow {
                system,
                quantity,
                point,
                epsilon: Some(e),
                length: Some(p.length as f64),
                value: v.map(|v| v as f64),
            })
        })
        .collect()
}

fn stabilized(records: &[EstimateRecord], tol: f64) -> Option<f64> {
    let fits: Vec<GrowthRateEstimate> = records
        .iter()
        .filter_map(|r| {
            Some(GrowthRateEstimate {
                slope: r.slope?,
                intercept: r.intercept?,
                window: r.window?,
                residual: r.residual?,
                samples: Vec::new(),
            })
        })
        .collect();
    stabilized_slope(&fits, tol)
}

fn profile<D>(s: &Setup<D>, config: &ExperimentConfig, ctx: Context, out: &mut Artifacts)
where
    D: DynamicalSystem + Sync,
    D::State: Send + Sync,
{
    let grid = config.grid_values().expect("validated");
    let lengths: Vec<usize> = (0..=config.window.max_length).collect();
    ctx.note(format!("profiles for l = 0..={} over {} scales", config.window.max_length, grid.len()));
    let ps = profiles(&s.sys, &s.points[0], &grid, &lengths, config);
    let policy = FitPolicy::default();
    let mut records = vec![EstimateRecord::new("F", Some(0), None, growth_rate_f(&ps[0], &policy))];
    let g: Vec<EstimateRecord> = grid
        .iter()
        .map(|&e| EstimateRecord::new("G", Some(0), Some(e), growth_rate_g(&ps, e, &policy)))
        .collect();
    let tol = config.entropy.stabilization_tol.unwrap_or(DEFAULT_STABILIZATION_TOL);
    let g_stable = stabilized(&g, tol);
    records.extend(g);
    out.add_csv("profile.csv", &profile_rows(s.name, "F", 0, &ps));
    write_estimates(out, config, &records, json!({ "F": records[0].slope, "G_stabilized": g_stable }));
}

/// Net sizes for each `(ε, l)` pair, computed in parallel.
fn net_grid<D>(s: &Setup<D>, pairs: &[(f64, usize)]) -> Vec<usize>
where
    D: DynamicalSystem + Sync,
    D::State: Send + Sync,
{
    pairs
        .par_iter()
        .map(|&(e, l)| maximal_separated_net(&s.sys, &s.candidates, e, l).len())
        .collect()
}

fn size_rows(system: &'static str, pairs: &[(f64, usize)], sizes: &[usize]) -> Vec<ProfileRow> {
    pairs
        .iter()
        .zip(sizes)
        .map(|(&(e, l), &n)| ProfileRow {
            system,
            quantity: "net_size",
            point: 0,
            epsilon: Some(e),
            length: Some(l as f64),
            value: Some(n as f64),
        })
        .collect()
}

fn dimension_record<D>(s: &Setup<D>, grid: &[f64]) -> (EstimateRecord, Vec<ProfileRow>)
where
    D: DynamicalSystem + Sync,
    D::State: Send + Sync,
{
    let pairs: Vec<(f64, usize)> = grid.iter().map(|&e| (e, 0)).collect();
    let sizes = net_grid(s, &pairs);
    let xs: Vec<f64> = grid.iter().map(|e| -e.ln()).collect();
    let fit = fit_sizes(&FitPolicy::default(), &xs, &sizes, false);
    (EstimateRecord::new("box_dimension", None, None, fit), size_rows(s.name, &pairs, &sizes))
}

fn entropy_records<D>(s: &Setup<D>) -> (Vec<EstimateRecord>, Vec<ProfileRow>)
where
    D: DynamicalSystem + Sync,
    D::State: Send + Sync,
{
    let pairs: Vec<(f64, usize)> = s
        .entropy_epsilons
        .iter()
        .flat_map(|&e| s.entropy_lengths.iter().map(move |&l| (e, l)))
        .collect();
    let sizes = net_grid(s, &pairs);
    let xs: Vec<f64> = s.entropy_lengths.iter().map(|&l| l as f64).collect();
    let records = sizes
        .chunks(s.entropy_lengths.len())
        .zip(&s.entropy_epsilons)
        .map(|(chunk, &e)| EstimateRecord::new("entropy", None, Some(e), fit_sizes(&FitPolicy::default(), &xs, chunk, true)))
        .collect();
    (records, size_rows(s.name, &pairs, &sizes))
}

fn dimension<D>(s: &Setup<D>, config: &ExperimentConfig, ctx: Context, out: &mut Artifacts)
where
    D: DynamicalSystem + Sync,
    D::State: Send + Sync,
{
    let grid = config.grid_values().expect("validated");
    ctx.note(format!("nets of {} candidates over {} scales", s.candidates.len(), grid.len()));
    let (record, rows) = dimension_record(s, &grid);
    out.add_csv("profile.csv", &rows);
    let slope = record.slope;
    write_estimates(out, config, &[record], json!({ "box_dimension": slope, "candidates": s.candidates.len() }));
}

fn entropy<D>(s: &Setup<D>, config: &ExperimentConfig, ctx: Context, out: &mut Artifacts)
where
    D: DynamicalSystem + Sync,
    D::State: Send + Sync,
{
    ctx.note(format!(
        "nets of {} candidates at {} scales and {} lengths",
        s.candidates.len(),
        s.entropy_epsilons.len(),
        s.entropy_lengths.len()
    ));
    let (records, rows) = entropy_records(s);
    out.add_csv("profile.csv", &rows);
    let tol = config.entropy.stabilization_tol.unwrap_or(DEFAULT_STABILIZATION_TOL);
    let summary = json!({
        "entropy_last": records.last().and_then(|r| r.slope),
        "entropy_stabilized": stabilized(&records, tol),
        "candidates": s.candidates.len(),
    });
    write_estimates(out, config, &records, summary);
}

#[derive(Serialize)]
struct InequalityCheck {
    quantity: &'static str,
    epsilon: Option<f64>,
    /// Largest estimate over the sampled points.
    sample_max: Option<f64>,
    bound: Option<f64>,
    tolerance: f64,
    /// `bound + tolerance − sample_max`.
    slack: Option<f64>,
    holds: Option<bool>,
}

impl InequalityCheck {
    fn new(quantity: &'static str, epsilon: Option<f64>, values: &[Option<f64>], bound: Option<f64>) -> Self {
        let sample_max = values.iter().flatten().copied().reduce(f64::max);
        let slack = sample_max.zip(bound).map(|(m, b)| b + INEQUALITY_TOLERANCE - m);
        Self {
            quantity,
            epsilon,
            sample_max,
            bound,
            tolerance: INEQUALITY_TOLERANCE,
            slack,
            holds: slack.map(|s| s >= 0.0),
        }
    }
}

fn report<D>(s: &Setup<D>, config: &ExperimentConfig, ctx: Context, out: &mut Artifacts)
where
    D: DynamicalSystem + Sync,
    D::State: Send + Sync,
{
    let grid = config.grid_values().expect("validated");
    let policy = FitPolicy::default();
    let lengths: Vec<usize> = (0..=config.window.max_length).collect();
    ctx.note(format!("shift functions of {} points", s.points.len()));
    let per_point: Vec<(Vec<ProfileRow>, Vec<EstimateRecord>)> = s
        .points
        .par_iter()
        .enumerate()
        .map(|(i, x)| {
            let f = profiles(&s.sys, x, &grid, &[0], config);
            let g = profiles(&s.sys, x, &s.entropy_epsilons, &lengths, config);
            let mut rows = profile_rows(s.name, "F", i, &f);
            rows.extend(profile_rows(s.name, "G", i, &g));
            let mut records = vec![EstimateRecord::new("F", Some(i), None, growth_rate_f(&f[0], &policy))];
            records.extend(
                s.entropy_epsilons
                    .iter()
                    .map(|&e| EstimateRecord::new("G", Some(i), Some(e), growth_rate_g(&g, e, &policy))),
            );
            (rows, records)
        })
        .collect();
    ctx.note("nets for dimension and entropy");
    let (dim, dim_rows) = dimension_record(s, &grid);
    let (ent, ent_rows) = entropy_records(s);

    let mut rows: Vec<ProfileRow> = per_point.iter().flat_map(|(r, _)| r.iter().cloned()).collect();
    rows.extend(dim_rows);
    rows.extend(ent_rows);
    let mut records: Vec<EstimateRecord> = per_point.into_iter().flat_map(|(_, r)| r).collect();

    let f_values: Vec<Option<f64>> = records.iter().filter(|r| r.quantity == "F").map(|r| r.slope).collect();
    let mut checks = vec![InequalityCheck::new("F", None, &f_values, dim.slope)];
    for (k, &e) in s.entropy_epsilons.iter().enumerate() {
        let g: Vec<Option<f64>> = records
            .iter()
            .filter(|r| r.quantity == "G" && r.epsilon == Some(e))
            .map(|r| r.slope)
            .collect();
        checks.push(InequalityCheck::new("G", Some(e), &g, ent[k].slope));
    }
    for c in &checks {
        if c.holds == Some(false) {
            out.fail(format!("{} exceeds its bound at epsilon {:?}", c.quantity, c.epsilon));
        }
    }
    records.push(dim);
    records.extend(ent);
    out.add_csv("profile.csv", &rows);
    out.add_json(
        "checks.json",
        &json!({
            "system": s.name,
            "points": s.points.len(),
            "inequalities": checks,
            "failures": out.failures,
        }),
    );
    write_estimates(out, config, &records, json!({ "inequalities_hold": out.failures.is_empty() }));
}

fn require_torus(config: &ExperimentConfig, command: &str) -> Result<(), ConfigError> {
    match config.system {
        SystemConfig::Torus { .. } => Ok(()),
        _ => Err(ConfigError::new("system.kind", format!("`{command}` needs a torus system"))),
    }
}

fn torus(config: &ExperimentConfig, ctx: Context, out: &mut Artifacts) -> Result<(), ConfigError> {
    require_torus(config, "torus")?;
    let s = torus_setup(config)?;
    let alpha = config.alpha()?;
    let n = alpha.len();
    let w = config.window;
    let grid = config.grid_values().expect("validated");

    ctx.note("approximation constants");
    let constant = badly_approximable_constant(&alpha, w.s_max);
    let tail_constant = (w.s_max >= 10).then(|| badly_approximable_tail_constant(&alpha, 10, w.s_max));
    let convergents = config.continued_fraction().map(|cf| convergent_constants(&cf, 30));

    // F(ε) = c^n ε^{-n} for the observed constant.
    let f = QuantileTable::power_law(constant.powi(n as i32), n as f64, &grid).expect("grid validated");
    let verdict = is_f_aperiodic(&s.sys, &s.points[0], &f, 0, w.horizon, w.s_max);
    if matches!(verdict, aperiodic::dynamics::Verdict::Violated { .. }) {
        out.fail("orbit violates F(ε) = c^n ε^{-n}");
    }
    let registry = RationalRegistry { dimension: n, max_denominator: config.registry.max_denominator };
    // Anchors whose period lies outside the range of F have no critical
    // neighbourhood at the tabulated scales.
    let (anchors, out_of_range): (Vec<_>, Vec<_>) = registry
        .anchors()
        .into_iter()
        .partition(|a| f.quantile_left(a.period as f64).is_ok());
    let bounded = classify_bounded(&s.sys, &s.points[0], &f, &anchors, w.horizon);
    let bounded_json = match &bounded {
        Ok(r) => {
            if !r.consistent() {
                out.fail("bounded-set membership disagrees with the approximation constants");
            }
            if verdict.holds() && !r.all_members() {
                out.fail("aperiodic orbit enters a critical neighbourhood");
            }
            json!({
                "anchors": r.entries.len(),
                "anchors_out_of_range": out_of_range.len(),
                "members": r.entries.iter().filter(|e| e.member).count(),
                "consistent": r.consistent(),
                "min_constant_over_radius": r.entries.iter().map(|e| e.constant / e.radius).reduce(f64::min),
            })
        }
        Err(e) => json!({ "error": e.to_string() }),
    };

    ctx.note(format!("{} recurrence equivalence and closing samples", config.closing.events));
    let mut r = rng(config.seed, 2);
    let mut da_mismatch = 0;
    let mut witnesses = (0, 0);
    for _ in 0..config.closing.events {
        let x: Vec<f64> = (0..n).map(|_| r.gen()).collect();
        let s_shift = r.gen_range(1..=w.s_max.min(1000));
        let eps = r.gen_range(1e-4..0.3);
        let check = verify_classical_da_equivalence(&alpha, &x, s_shift, eps);
        da_mismatch += usize::from(check.lhs != check.rhs);

        // A recurrence engineered at a random rational direction.
        let direction = (0..n)
            .map(|_| (r.gen_range(0..s_shift) as f64 + r.gen_range(-eps..eps) / n as f64) / s_shift as f64)
            .collect();
        if let Ok(wit) = torus_closing_witness(&TorusState::new(x, direction), s_shift, eps) {
            witnesses.0 += 1;
            witnesses.1 += usize::from(!wit.holds());
        }
    }
    if da_mismatch > 0 {
        out.fail(format!("{da_mismatch} recurrence/approximation mismatches"));
    }
    if witnesses.1 > 0 {
        out.fail(format!("{} closing witnesses out of bounds", witnesses.1));
    }
    out.add_json(
        "checks.json",
        &json!({
            "alpha": alpha,
            "constant": { "s_max": w.s_max, "min": constant, "tail_from_10": tail_constant },
            "convergent_constants": convergents,
            "f_aperiodic": { "c_pow_n": constant.powi(n as i32), "exponent": n, "verdict": verdict },
            "bounded": bounded_json,
            "recurrence_equivalence": { "samples": config.closing.events, "mismatches": da_mismatch },
            "closing_witnesses": { "checked": witnesses.0, "out_of_bounds": witnesses.1 },
            "failures": out.failures,
        }),
    );
    Ok(())
}

fn bernoulli(config: &ExperimentConfig, ctx: Context, out: &mut Artifacts) -> Result<(), ConfigError> {
    let SystemConfig::Bernoulli { alphabet: n, .. } = config.system else {
        return Err(ConfigError::new("system.kind", "`bernoulli` needs a bernoulli system"));
    };
    let sc = config.search;
    let phi = PhiTable::exponential(sc.delta, sc.target + 1);
    let options = SearchOptions { symbol_seed: Some(config.seed), max_nodes: sc.max_nodes };
    ctx.note(format!("searching a word of length {} with delta {}", sc.target, sc.delta));
    let result = match phi_aperiodic_search_auto(n, &phi, sc.target, options) {
        Ok((l0, w)) => {
            let cert = is_phi_aperiodic(&w, &phi, l0, PhiWindow::prefix(sc.target));
            if !cert.verdict.holds() {
                out.fail("searched word fails re-certification");
            }
            let anchors = blocks(n, config.registry.max_period);
            let prop = verify_prop34(&w, &phi, &anchors, sc.target);
            if !(prop.forward_holds && prop.converse_holds) {
                out.fail("aperiodicity and distance bound disagree");
            }
            let word = w.to_string();
            out.add_text("word.txt", format!("{word}\n"));
            json!({
                "outcome": "found",
                "l0": l0,
                "word": word,
                "certificate": cert,
                "distance_equivalence": prop,
            })
        }
        Err(Error::Exhausted { max_depth }) => json!({ "outcome": "exhausted", "max_depth": max_depth }),
        Err(Error::BudgetExceeded { nodes, max_depth }) => {
            json!({ "outcome": "budget_exceeded", "nodes": nodes, "max_depth": max_depth })
        }
        Err(e) => json!({ "outcome": "error", "error": e.to_string() }),
    };
    out.add_json(
        "checks.json",
        &json!({
            "alphabet": n,
            "delta": sc.delta,
            "target": sc.target,
            "phi": phi.values(),
            "search": result,
            "failures": out.failures,
        }),
    );
    Ok(())
}

fn hyperbolic(config: &ExperimentConfig, ctx: Context, out: &mut Artifacts) {
    let h = &config.hyperbolic;
    let mut r = rng(config.seed, 3);
    let floor = 4.0 * DELTA_ZERO;

    ctx.note(format!("{} closing lemma instances", h.instances));
    let (mut sandwich, mut tube, mut redrawn) = (0, 0, 0);
    let mut min_tube = f64::INFINITY;
    let mut min_sandwich = f64::INFINITY;
    let mut errors = Vec::new();
    for k in 0..h.instances {
        let eps0 = h.epsilon0[k % h.epsilon0.len()];
        loop {
            let tau = r.gen_range(floor..=h.max_translation);
            match ClosingInstance::random(&mut r, eps0, tau).and_then(|i| i.check()) {
                Ok(rep) => {
                    sandwich += usize::from(!rep.sandwich_holds());
                    tube += usize::from(!rep.tube_holds());
                    min_tube = min_tube.min(rep.tube_slack);
                    min_sandwich = min_sandwich.min(rep.lower_slack.min(rep.upper_slack));
                    break;
                }
                Err(Error::HypothesisFailed(_) | Error::PreconditionFailed(_)) => redrawn += 1,
                Err(e) => {
                    errors.push(e.to_string());
                    break;
                }
            }
        }
    }
    if sandwich + tube > 0 || !errors.is_empty() {
        out.fail(format!("closing lemma: {sandwich} sandwich and {tube} tube failures, {} errors", errors.len()));
    }

    ctx.note("displacement and containment checks");
    let mut displacement_bad = 0;
    let mut displacement_min = f64::INFINITY;
    for _ in 0..h.displacement_checks {
        let tau = r.gen_range(floor..=h.max_translation);
        let g = Isometry::random(&mut r, 2.0);
        let psi = g.conjugate(&Isometry::dilation(tau));
        let z = g.apply(&GeodesicLine::imaginary_axis().offset_point(r.gen_range(-3.0..3.0), r.gen_range(-6.0..6.0)));
        match displacement_bounds_check(&psi, &z) {
            Ok(rep) => {
                displacement_min = displacement_min.min(rep.lower_slack.min(rep.upper_slack));
                displacement_bad += usize::from(!rep.holds());
            }
            Err(_) => displacement_bad += 1,
        }
    }
    if displacement_bad > 0 {
        out.fail(format!("displacement: {displacement_bad} violations"));
    }

    let mut containment_bad = 0;
    let mut containment_min = f64::INFINITY;
    let alpha0 = GeodesicLine::imaginary_axis();
    for _ in 0..h.containment_checks {
        let eps = r.gen_range(0.05..1.0);
        let d = r.gen_range(eps..5.0);
        let half = 2.0 * (d - f64::ln(eps)) + r.gen_range(0.0..3.0);
        let g = Isometry::random(&mut r, 2.0);
        let p = g.apply(&alpha0.offset_point(-half, r.gen_range(-d..=d)));
        let q = g.apply(&alpha0.offset_point(half, r.gen_range(-d..=d)));
        let len = hyp_distance(&p, &q);
        let rep = GeodesicLine::joining(&p, &q)
            .and_then(|line| GeodesicSegment::new(line.shifted(len / 2.0), -len / 2.0, len / 2.0))
            .and_then(|seg| neighbor_containment_check(&seg, &alpha0.transformed(&g), d, eps));
        match rep {
            Ok(rep) => {
                containment_min = containment_min.min(rep.slack);
                containment_bad += usize::from(!rep.holds());
            }
            Err(_) => containment_bad += 1,
        }
    }
    if containment_bad > 0 {
        out.fail(format!("containment: {containment_bad} violations"));
    }

    ctx.note(format!("orbital counting, word radius {}", h.word_radius));
    let gens = schottky_generators(h.tau).expect("validated");
    let x = HPoint::i();
    let counts = orbital_counting_profile(&gens, &x, &h.lengths, h.word_radius);
    let fit = volume_entropy_estimate(&gens, &x, &h.lengths, h.word_radius, &FitPolicy::default());
    let rows: Vec<ProfileRow> = counts
        .iter()
        .map(|&(l, c)| ProfileRow {
            system: "schottky_group",
            quantity: "orbital_count",
            point: 0,
            epsilon: None,
            length: Some(l),
            value: Some(c as f64),
        })
        .collect();
    out.add_csv("profile.csv", &rows);
    let record = EstimateRecord::new("volume_entropy", None, None, fit);
    let slope = record.slope;
    write_estimates(out, config, &[record], json!({ "volume_entropy": slope, "tau": h.tau }));

    out.add_json(
        "checks.json",
        &json!({
            "closing_lemma": {
                "instances": h.instances,
                "redrawn": redrawn,
                "sandwich_failures": sandwich,
                "tube_failures": tube,
                "min_sandwich_slack": min_sandwich,
                "min_tube_slack": min_tube,
                "errors": errors,
            },
            "displacement": { "checks": h.displacement_checks, "violations": displacement_bad, "min_slack": displacement_min },
            "containment": { "checks": h.containment_checks, "violations": containment_bad, "min_slack": containment_min },
            "failures": out.failures,
        }),
    );
}

fn check_closing(config: &ExperimentConfig, ctx: Context, out: &mut Artifacts) -> Result<(), ConfigError> {
    let c = config.closing;
    let mut r = rng(config.seed, 4);
    ctx.note(format!("{} engineered recurrences", c.events));
    let report = match config.system {
        SystemConfig::Torus { .. } => {
            let n = config.alpha()?.len();
            let sys = TorusRotation::new(n);
            let registry = RationalRegistry { dimension: n, max_denominator: config.registry.max_denominator };
            // Recurrences near directions p/s, s <= max_denominator; δ = factor·ε
            // is capped so witnesses are never vacuous.
            let events: Vec<ClosingEvent<TorusState>> = (0..c.events)
                .map(|_| {
                    let s = r.gen_range(1..=config.registry.max_denominator);
                    let eps: f64 = r.gen_range(1e-4..0.3);
                    let bound = 0.999 * eps / (n as f64).sqrt();
                    let direction = (0..n)
                        .map(|_| (r.gen_range(0..s) as f64 + r.gen_range(-bound..bound)) / s as f64)
                        .collect();
                    let point = (0..n).map(|_| r.gen()).collect();
                    ClosingEvent { state: TorusState::new(point, direction), shift: s, epsilon: eps }
                })
                .collect();
            check_delta_closing(&sys, &ClosingFunction::Linear { factor: c.factor }, &registry, &events)
                .map(|rep| (rep, registry.anchors().len()))
        }
        SystemConfig::Bernoulli { alphabet: n, .. } => {
            let sys = BernoulliShift { alphabet: n };
            let p = config.registry.max_period;
            let registry = PeriodicWords { alphabet: n, max_period: p };
            let events: Vec<StrongClosingEvent<SymbolWord>> = (0..c.events)
                .map(|_| {
                    let s = r.gen_range(1..=p);
                    let l = r.gen_range(0..=20usize);
                    let block: Vec<u8> = (0..s).map(|_| r.gen_range(1..=n)).collect();
                    let mut prefix: Vec<u8> = (0..s + l + 1).map(|i| block[i % s]).collect();
                    prefix.extend((0..30).map(|_| r.gen_range(1..=n)));
                    StrongClosingEvent {
                        state: SymbolWord::new(n, prefix, vec![r.gen_range(1..=n)]).expect("symbols in range"),
                        shift: s,
                        length: l,
                        epsilon: (-1f64).exp(),
                    }
                })
                .collect();
            let delta = StrongClosingFunction::Affine { slope: c.slope, offset: c.offset };
            check_strong_delta_closing(&sys, &delta, &registry, &events).map(|rep| (rep, registry.anchors().len()))
        }
        SystemConfig::Schottky { .. } => {
            return Err(ConfigError::new("system.kind", "`check-closing` supports torus and bernoulli systems"))
        }
    };
    let (report, anchors) = report.map_err(|e| ConfigError::new("closing", e.to_string()))?;
    if !report.counterexamples.is_empty() {
        out.fail(format!("{} events without a closing witness", report.counterexamples.len()));
    }
    out.add_json(
        "checks.json",
        &json!({
            "system": config.system_name(),
            "events": c.events,
            "registry_anchors": anchors,
            "report": report,
            "failures": out.failures,
        }),
    );
    Ok(())
}
