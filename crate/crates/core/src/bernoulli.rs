//! The one-sided full shift on `n` symbols.
//!
//! Words are indexed from 1 and use symbols `1..=n`. The metric is
//! `d(w, w') = e^{-i}` where `i` is the first index at which the words
//! differ. Every exact decision is made on first-disagreement indices.

use std::collections::HashSet;
use std::fmt;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Serialize, Serializer};

use crate::dynamics::DynamicalSystem;
use crate::error::{Error, Result};
use crate::periodic::{PeriodicPoint, PeriodicRegistry};

#[derive(Debug, PartialEq, Eq)]
struct WordData {
    prefix: Vec<u8>,
    tail: Vec<u8>,
}

/// A finite prefix followed by an optional periodic tail.
///
/// Words without a tail are cylinders: symbols past the prefix are unknown.
#[derive(Clone, PartialEq, Eq)]
pub struct SymbolWord {
    alphabet: u8,
    data: Arc<WordData>,
    offset: usize,
}

impl SymbolWord {
    pub fn new(alphabet: u8, prefix: Vec<u8>, tail: Vec<u8>) -> Result<Self> {
        if alphabet == 0 || alphabet > 9 {
            return Err(Error::InvalidInput(format!("alphabet size {alphabet} is not in 1..=9")));
        }
        if let Some(&c) = prefix.iter().chain(&tail).find(|&&c| c == 0 || c > alphabet) {
            return Err(Error::InvalidInput(format!("symbol {c} is not in 1..={alphabet}")));
        }
        Ok(Self {
            alphabet,
            data: Arc::new(WordData { prefix, tail }),
            offset: 0,
        })
    }

    pub fn finite(alphabet: u8, prefix: Vec<u8>) -> Result<Self> {
        Self::new(alphabet, prefix, Vec::new())
    }

    /// `block^∞`.
    pub fn periodic(alphabet: u8, block: Vec<u8>) -> Result<Self> {
        if block.is_empty() {
            return Err(Error::InvalidInput("empty periodic block".into()));
        }
        Self::new(alphabet, Vec::new(), block)
    }

    /// Parses `"prefix|tail"`, `"prefix"` or `"|tail"` over the digits `1..=9`.
    pub fn parse(alphabet: u8, s: &str) -> Result<Self> {
        let digits = |t: &str| -> Result<Vec<u8>> {
            t.chars()
                .map(|c| {
                    c.to_digit(10)
                        .map(|d| d as u8)
                        .ok_or_else(|| Error::InvalidInput(format!("bad symbol {c:?} in word {s:?}")))
                })
                .collect()
        };
        match s.split_once('|') {
            Some((p, t)) if !t.is_empty() => Self::new(alphabet, digits(p)?, digits(t)?),
            Some((p, _)) => Self::finite(alphabet, digits(p)?),
            None => Self::finite(alphabet, digits(s)?),
        }
    }

    pub fn alphabet(&self) -> u8 {
        self.alphabet
    }

    pub fn is_infinite(&self) -> bool {
        !self.data.tail.is_empty()
    }

    /// Number of known symbols, `None` for infinite words.
    pub fn known_len(&self) -> Option<usize> {
        if self.is_infinite() {
            None
        } else {
            Some(self.data.prefix.len().saturating_sub(self.offset))
        }
    }

    /// Symbol `w(i)` for `i >= 1`, `None` past the end of a finite word.
    pub fn symbol(&self, i: usize) -> Option<u8> {
        assert!(i >= 1, "words are indexed from 1");
        let j = self.offset + i - 1;
        let d = &self.data;
        if j < d.prefix.len() {
            Some(d.prefix[j])
        } else if d.tail.is_empty() {
            None
        } else {
            Some(d.tail[(j - d.prefix.len()) % d.tail.len()])
        }
    }

    /// The first `len` symbols, or fewer if the word ends.
    pub fn symbols(&self, len: usize) -> Vec<u8> {
        (1..=len).map_while(|i| self.symbol(i)).collect()
    }

    /// `T^k w`: drops the first `k` symbols.
    pub fn shifted(&self, k: usize) -> Self {
        Self {
            alphabet: self.alphabet,
            data: Arc::clone(&self.data),
            offset: self.offset + k,
        }
    }

    /// Symbols before the periodic part starts, and the period.
    fn shape(&self) -> (usize, usize) {
        (
            self.data.prefix.len().saturating_sub(self.offset),
            self.data.tail.len(),
        )
    }
}

impl fmt::Display for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (pre, q) = self.shape();
        for i in 1..=pre {
            write!(f, "{}", self.symbol(i).unwrap())?;
        }
        if q > 0 {
            write!(f, "|")?;
            for i in pre + 1..=pre + q {
                write!(f, "{}", self.symbol(i).unwrap())?;
            }
        }
        Ok(())
    }
}

impl fmt::Debug for SymbolWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "SymbolWord({self})")
    }
}

impl Serialize for SymbolWord {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// How two words compare.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Agreement {
    Equal,
    /// First index (from 1) at which the words differ.
    DisagreeAt { index: usize },
    /// The first `agree` symbols match and one of the words ends there.
    Unknown { agree: usize },
}

impl Agreement {
    /// Length of the common prefix; `None` for equal words.
    pub fn common_prefix(&self) -> Option<usize> {
        match *self {
            Agreement::Equal => None,
            Agreement::DisagreeAt { index } => Some(index - 1),
            Agreement::Unknown { agree } => Some(agree),
        }
    }

    /// Common prefix is at least `k`.
    pub fn at_least(&self, k: usize) -> bool {
        self.common_prefix().is_none_or(|a| a >= k)
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Exact comparison of two words.
pub fn first_disagreement(a: &SymbolWord, b: &SymbolWord) -> Agreement {
    let bound = match (a.is_infinite(), b.is_infinite()) {
        (true, true) => {
            let (pa, qa) = a.shape();
            let (pb, qb) = b.shape();
            Some(pa.max(pb) + qa / gcd(qa, qb) * qb)
        }
        _ => None,
    };
    let mut i = 1;
    loop {
        if bound.is_some_and(|m| i > m) {
            return Agreement::Equal;
        }
        match (a.symbol(i), b.symbol(i)) {
            (Some(x), Some(y)) if x == y => i += 1,
            (Some(_), Some(_)) => return Agreement::DisagreeAt { index: i },
            _ => return Agreement::Unknown { agree: i - 1 },
        }
    }
}

/// `e^{-i}` with `i` the first disagreement. When a finite word runs out
/// first, returns `e^{-(k+1)}` for a common prefix of length `k`: the
/// largest distance any completion can have.
pub fn word_distance(a: &SymbolWord, b: &SymbolWord) -> f64 {
    match first_disagreement(a, b) {
        Agreement::Equal => 0.0,
        Agreement::DisagreeAt { index } => exp_neg(index),
        Agreement::Unknown { agree } => exp_neg(agree + 1),
    }
}

fn exp_neg(i: usize) -> f64 {
    (-(i as f64)).exp()
}

/// Largest `j` with `e^{-j} >= epsilon`, using the same `exp` as the metric.
fn scale_index(epsilon: f64) -> Option<usize> {
    if exp_neg(0) < epsilon {
        return None;
    }
    let mut j = (-epsilon.ln()).floor().max(0.0) as usize;
    while j > 0 && exp_neg(j) < epsilon {
        j -= 1;
    }
    while exp_neg(j + 1) >= epsilon {
        j += 1;
    }
    Some(j)
}

/// The full shift on `alphabet` symbols.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BernoulliShift {
    pub alphabet: u8,
}

impl DynamicalSystem for BernoulliShift {
    type State = SymbolWord;

    fn distance(&self, x: &SymbolWord, y: &SymbolWord) -> f64 {
        word_distance(x, y)
    }

    fn step(&self, x: &SymbolWord) -> SymbolWord {
        x.shifted(1)
    }

    fn iterate(&self, x: &SymbolWord, k: usize) -> SymbolWord {
        x.shifted(k)
    }

    fn diameter_bound(&self) -> f64 {
        exp_neg(1)
    }

    /// Prefixes of length `l + j` with `j = max{j : e^{-j} >= ε}`: words with
    /// different such prefixes first differ at some `i <= l + j`, so
    /// `d_l = e^{-max(1, i - l)} >= ε`.
    fn separation_cell(&self, x: &SymbolWord, epsilon: f64, length: usize) -> Option<Vec<u32>> {
        let m = match scale_index(epsilon) {
            None => return Some(Vec::new()),
            Some(0) => return Some(Vec::new()),
            Some(j) => length + j,
        };
        let s = x.symbols(m);
        (s.len() == m).then(|| s.into_iter().map(u32::from).collect())
    }
}

/// A non-decreasing integer function `l ↦ φ(l)`, tabulated for `l = 0..len`.
/// Lengths past the table read the last value.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PhiTable {
    values: Vec<u64>,
}

impl PhiTable {
    pub fn new(values: Vec<u64>) -> Result<Self> {
        if values.is_empty() || values[0] == 0 {
            return Err(Error::InvalidInput("φ table must be non-empty and positive".into()));
        }
        if values.windows(2).any(|w| w[1] < w[0]) {
            return Err(Error::InvalidInput("φ table must be non-decreasing".into()));
        }
        Ok(Self { values })
    }

    pub fn constant(c: u64, len: usize) -> Self {
        Self::new(vec![c.max(1); len.max(1)]).unwrap()
    }

    /// `φ(l) = ⌈2^{δ·l}⌉` for `l = 0..len`; exact powers of two are not
    /// bumped up by rounding.
    pub fn exponential(delta: f64, len: usize) -> Self {
        let values = (0..len.max(1))
            .map(|l| {
                let v = 2f64.powf(delta * l as f64);
                if v >= 1e18 {
                    u64::MAX / 4
                } else {
                    (v * (1.0 - 1e-12)).ceil().max(1.0) as u64
                }
            })
            .collect();
        Self::new(values).unwrap()
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[u64] {
        &self.values
    }

    pub fn get(&self, l: usize) -> u64 {
        self.values[l.min(self.values.len() - 1)]
    }

    /// `max{l : φ(l) <= s}`, or -1 if `φ(0) > s`.
    pub fn inverse(&self, s: u64) -> i64 {
        self.values.partition_point(|&v| v <= s) as i64 - 1
    }

    /// `φ` with every length below `l0` set to 1.
    pub fn with_floor_below(&self, l0: usize) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(l, &v)| if l < l0 { 1 } else { v })
            .collect();
        Self { values }
    }
}

/// Which triples `(n, s, l)` a verification covers: `n <= max_time`,
/// `1 <= s <= max_shift`, `l <= max_length`, and `n + s + l <= max_extent`
/// when set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PhiWindow {
    pub max_time: usize,
    pub max_shift: usize,
    pub max_length: usize,
    pub max_extent: Option<usize>,
}

impl PhiWindow {
    /// Every triple determined by the first `len` symbols.
    pub fn prefix(len: usize) -> Self {
        Self {
            max_time: len,
            max_shift: len,
            max_length: len,
            max_extent: Some(len),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum WordVerdict {
    HoldsOnWindow,
    /// `T^n w` and `T^{n+s} w` share `length` symbols while `s < φ(length)`.
    Violated { n: usize, s: usize, length: usize },
    Inconclusive,
}

impl WordVerdict {
    pub fn holds(&self) -> bool {
        matches!(self, WordVerdict::HoldsOnWindow)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AperiodicityCertificate {
    pub word: SymbolWord,
    pub phi: PhiTable,
    pub l0: usize,
    pub window: PhiWindow,
    pub verdict: WordVerdict,
}

/// Checks `d(T^n w, T^{n+s} w) <= e^{-(l+1)}  ⇒  s >= φ(l)` for every
/// triple of the window with `l >= l0`.
///
/// The premise says that the two shifted words share their first `l`
/// symbols.
pub fn is_phi_aperiodic(w: &SymbolWord, phi: &PhiTable, l0: usize, window: PhiWindow) -> AperiodicityCertificate {
    let reach = window.max_extent.unwrap_or(window.max_time + window.max_shift + window.max_length);
    let syms = w.symbols(reach);
    let mut inconclusive = false;
    let mut verdict = None;
    'outer: for n in 0..=window.max_time {
        for s in 1..=window.max_shift {
            let mut lmax = window.max_length;
            if let Some(e) = window.max_extent {
                if n + s > e {
                    break;
                }
                lmax = lmax.min(e - n - s);
            }
            if lmax < l0 {
                continue;
            }
            let mut agree = 0;
            let mut determined = true;
            while agree < lmax {
                let (i, j) = (n + agree, n + s + agree);
                if j >= syms.len() {
                    determined = false;
                    break;
                }
                if syms[i] != syms[j] {
                    break;
                }
                agree += 1;
            }
            if agree >= l0 && phi.get(agree) > s as u64 {
                let length = (l0..=agree).find(|&l| phi.get(l) > s as u64).unwrap();
                verdict = Some(WordVerdict::Violated { n, s, length });
                break 'outer;
            }
            if !determined {
                inconclusive = true;
            }
        }
    }
    let verdict = verdict.unwrap_or(if inconclusive {
        WordVerdict::Inconclusive
    } else {
        WordVerdict::HoldsOnWindow
    });
    AperiodicityCertificate {
        word: w.clone(),
        phi: phi.clone(),
        l0,
        window,
        verdict,
    }
}

/// Options for [`phi_aperiodic_search`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SearchOptions {
    /// Seed for a permutation of the symbol order; lexicographic if unset.
    pub symbol_seed: Option<u64>,
    /// Node budget; unlimited if unset.
    pub max_nodes: Option<usize>,
}

/// Depth-first search for a word of length `target` on which every
/// determined triple satisfies the φ-condition for lengths `l >= l0`.
///
/// When symbol `m` (0-based) is placed, the new triples are those ending at
/// `m`. For each shift `s` the run `r` of agreements between `w` and `w`
/// shifted by `s` ending at `m` is maintained incrementally, and the triple
/// set is violated iff `r >= l0` and `φ(r) > s`.
pub fn phi_aperiodic_search(
    alphabet: u8,
    phi: &PhiTable,
    l0: usize,
    target: usize,
    options: SearchOptions,
) -> Result<SymbolWord> {
    let mut order: Vec<u8> = (1..=alphabet).collect();
    if let Some(seed) = options.symbol_seed {
        order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    let k = order.len();
    let mut word: Vec<u8> = Vec::with_capacity(target);
    let mut choice: Vec<usize> = Vec::with_capacity(target);
    // runs[m][s] for 1 <= s <= m
    let mut runs: Vec<Vec<u32>> = Vec::with_capacity(target);
    let mut nodes = 0usize;
    let mut max_depth = 0usize;

    let fits = |word: &[u8], runs: &[Vec<u32>], m: usize, out: &mut Vec<u32>| -> bool {
        out.clear();
        out.push(0);
        for s in 1..=m + 1 {
            let r = if s <= m && word[m] == word[m - s] {
                if s < m {
                    runs[m - 1][s] + 1
                } else {
                    1
                }
            } else {
                0
            };
            if r as usize >= l0 && phi.get(r as usize) > s as u64 {
                return false;
            }
            if s <= m {
                out.push(r);
            }
        }
        true
    };

    let mut scratch = Vec::new();
    if target == 0 {
        return SymbolWord::finite(alphabet, Vec::new());
    }
    choice.push(0);
    loop {
        let m = word.len();
        let c = choice[m];
        if c == k {
            choice.pop();
            if m == 0 {
                return Err(Error::Exhausted { max_depth });
            }
            word.pop();
            runs.pop();
            choice[m - 1] += 1;
            continue;
        }
        nodes += 1;
        if options.max_nodes.is_some_and(|b| nodes > b) {
            return Err(Error::BudgetExceeded { nodes: nodes - 1, max_depth });
        }
        word.push(order[c]);
        if fits(&word, &runs, m, &mut scratch) {
            runs.push(scratch.clone());
            max_depth = max_depth.max(m + 1);
            if word.len() == target {
                return SymbolWord::finite(alphabet, word);
            }
            choice.push(0);
        } else {
            word.pop();
            choice[m] += 1;
        }
    }
}

/// Largest `l0` worth trying for a target length: `φ(l0) + l0 <= target/2`,
/// so that at least half of the window carries binding constraints.
pub fn max_useful_l0(phi: &PhiTable, target: usize) -> usize {
    (0..phi.len())
        .take_while(|&l| phi.get(l) as usize + l <= target / 2)
        .last()
        .unwrap_or(0)
}

/// Runs [`phi_aperiodic_search`] for `l0 = 0, 1, ...` up to
/// [`max_useful_l0`] and returns the first success with its `l0`.
pub fn phi_aperiodic_search_auto(
    alphabet: u8,
    phi: &PhiTable,
    target: usize,
    options: SearchOptions,
) -> Result<(usize, SymbolWord)> {
    let mut deepest = 0;
    let mut budget_hit = None;
    for l0 in 0..=max_useful_l0(phi, target) {
        match phi_aperiodic_search(alphabet, phi, l0, target, options) {
            Ok(w) => return Ok((l0, w)),
            Err(Error::Exhausted { max_depth }) => deepest = deepest.max(max_depth),
            Err(e @ Error::BudgetExceeded { .. }) => budget_hit = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(budget_hit.unwrap_or(Error::Exhausted { max_depth: deepest }))
}

/// A periodic word shadowing a recurrence, with its exact agreement.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WordClosingWitness {
    pub word: SymbolWord,
    pub agreement: Agreement,
}

impl WordClosingWitness {
    /// `d(w, w_s) <= e^{-(k+1)}`, i.e. at least `k` shared symbols.
    pub fn certifies(&self, k: usize) -> bool {
        self.agreement.at_least(k)
    }
}

/// `w_s = (w(1..s))^∞` for a recurrence `d(w, T^s w) <= e^{-(l+1)}`.
pub fn periodic_closing_witness(w: &SymbolWord, s: usize, l: usize) -> Result<WordClosingWitness> {
    if s == 0 {
        return Err(Error::PreconditionFailed("shift must be positive".into()));
    }
    let recurrence = first_disagreement(w, &w.shifted(s));
    if !recurrence.at_least(l) {
        return Err(Error::PreconditionFailed(format!(
            "w and T^{s} w share {:?} symbols, fewer than {l}",
            recurrence.common_prefix()
        )));
    }
    let block = w.symbols(s);
    if block.len() < s {
        return Err(Error::PreconditionFailed(format!("word has fewer than {s} symbols")));
    }
    let ws = SymbolWord::periodic(w.alphabet(), block)?;
    let agreement = first_disagreement(w, &ws);
    Ok(WordClosingWitness { word: ws, agreement })
}

/// All blocks of length `1..=max_len`, shortest first, lexicographic.
pub fn blocks(alphabet: u8, max_len: usize) -> Vec<Vec<u8>> {
    let mut out = Vec::new();
    let mut layer: Vec<Vec<u8>> = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|b| {
                (1..=alphabet).map(move |c| {
                    let mut v = b.clone();
                    v.push(c);
                    v
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn primitive_period(block: &[u8]) -> usize {
    let n = block.len();
    (1..=n)
        .find(|&p| n.is_multiple_of(p) && (p..n).all(|i| block[i] == block[i - p]))
        .unwrap()
}

/// Periodic words `u^∞` with `|u| <= max_period`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PeriodicWords {
    pub alphabet: u8,
    pub max_period: usize,
}

impl PeriodicWords {
    fn point(&self, block: Vec<u8>) -> PeriodicPoint<SymbolWord> {
        let period = primitive_period(&block);
        PeriodicPoint {
            state: SymbolWord::periodic(self.alphabet, block).unwrap(),
            period,
            residual: 0.0,
        }
    }
}

impl PeriodicRegistry<SymbolWord> for PeriodicWords {
    /// Blocks of every length `p <= max_period` dividing `shift` whose
    /// periodic extension could lie within `radius` of `x`: points within
    /// `radius` share their first `m` symbols with `x`, which fixes the
    /// first `min(m, p)` block symbols.
    fn candidates(&self, x: &SymbolWord, shift: usize, radius: f64) -> Vec<PeriodicPoint<SymbolWord>> {
        // d < radius iff the first disagreement index i satisfies e^{-i} < radius
        let m = scale_index(radius).unwrap_or_default();
        let mut out = Vec::new();
        for p in (1..=self.max_period.min(shift)).filter(|p| shift.is_multiple_of(*p)) {
            let fixed = x.symbols(m.min(p));
            let mut layer = vec![fixed];
            for _ in layer[0].len()..p {
                layer = layer
                    .iter()
                    .flat_map(|b| {
                        (1..=self.alphabet).map(move |c| {
                            let mut v = b.clone();
                            v.push(c);
                            v
                        })
                    })
                    .collect();
            }
            out.extend(layer.into_iter().map(|b| self.point(b)));
        }
        out
    }

    fn anchors(&self) -> Vec<PeriodicPoint<SymbolWord>> {
        blocks(self.alphabet, self.max_period)
            .into_iter()
            .map(|b| self.point(b))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Prop34Report {
    pub window: usize,
    pub max_period: usize,
    /// First violation of the φ-condition (`l0 = 0`) over all shifts.
    pub ap_violation: Option<WordVerdict>,
    /// As above, restricted to shifts `s <= max_period`.
    pub ap_violation_registry: Option<WordVerdict>,
    /// Whether every triple of the window was determined.
    pub determined: bool,
    /// First `(n, block)` with `T^n w` sharing more than `s + φ^{-1}(s)`
    /// symbols with `block^∞`, `s = |block|`.
    pub distance_violation: Option<(usize, Vec<u8>)>,
    pub anchors_checked: usize,
    /// φ-aperiodic ⇒ distance bound.
    pub forward_holds: bool,
    /// Distance bound ⇒ φ-aperiodic for shifts up to `max_period`.
    pub converse_holds: bool,
}

/// Both directions of the equivalence between φ-aperiodicity (`l0 = 0`) and
/// the lower bound `d(T^n w, u^∞) >= e^{-(s + φ^{-1}(s) + 1)}`, `s = |u|`,
/// on the first `window` symbols.
///
/// Only the anchor `u = w(n+1..n+s)` can share `s` or more symbols with
/// `T^n w`, so each `(n, s)` needs one lookup in `anchors`.
pub fn verify_prop34(w: &SymbolWord, phi: &PhiTable, anchors: &[Vec<u8>], window: usize) -> Prop34Report {
    let syms = w.symbols(window);
    let window = syms.len().min(window);
    let max_period = anchors.iter().map(Vec::len).max().unwrap_or(0);
    let registry: HashSet<&[u8]> = anchors.iter().map(Vec::as_slice).collect();

    let full = is_phi_aperiodic(w, phi, 0, PhiWindow::prefix(window));
    let restricted = is_phi_aperiodic(
        w,
        phi,
        0,
        PhiWindow {
            max_shift: max_period,
            ..PhiWindow::prefix(window)
        },
    );
    let violation = |v: WordVerdict| matches!(v, WordVerdict::Violated { .. }).then_some(v);

    let mut distance_violation = None;
    let mut anchors_checked = 0;
    'scan: for n in 0..window {
        for s in 1..=max_period.min(window - n) {
            let block = &syms[n..n + s];
            if !registry.contains(block) {
                continue;
            }
            anchors_checked += 1;
            let shared = (0..window - n).take_while(|&k| syms[n + k] == block[k % s]).count();
            let bound = s as i64 + phi.inverse(s as u64);
            if shared as i64 > bound {
                distance_violation = Some((n, block.to_vec()));
                break 'scan;
            }
        }
    }
    let ap_violation = violation(full.verdict);
    let ap_violation_registry = violation(restricted.verdict);
    Prop34Report {
        window,
        max_period,
        determined: full.verdict != WordVerdict::Inconclusive,
        forward_holds: ap_violation.is_some() || distance_violation.is_none(),
        converse_holds: distance_violation.is_some() || ap_violation_registry.is_none(),
        ap_violation,
        ap_violation_registry,
        distance_violation,
        anchors_checked,
    }
}
