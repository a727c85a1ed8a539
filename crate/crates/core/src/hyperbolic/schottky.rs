//! The boundary map of a two-generator Schottky group.
//!
//! Limit points are coded by infinite reduced words over `a, a⁻¹, b, b⁻¹`
//! (letters 0..4, inverse pairs `2i, 2i + 1`). The map drops the first
//! letter, `ξ(w₁w₂…) ↦ ξ(w₂w₃…)`, which is `w₁⁻¹` acting on the boundary.
//! Points are compared in the chordal metric of the Riemann sphere.

use std::fmt;
use std::sync::Arc;

use rand::Rng;

use super::{schottky_generators, Isometry};
use crate::dynamics::DynamicalSystem;
use crate::error::{Error, Result};

#[derive(Debug)]
struct WordData {
    prefix: Vec<u8>,
    tail: Vec<u8>,
    /// Homogeneous coordinates of the limit point of every suffix: first one
    /// per prefix position, then one per rotation of the tail.
    points: Vec<[f64; 2]>,
}

/// An eventually periodic reduced word `prefix · tail^∞` and its limit point.
#[derive(Clone)]
pub struct BoundaryWord {
    data: Arc<WordData>,
    offset: usize,
}

impl BoundaryWord {
    fn position(&self) -> usize {
        let p = self.data.prefix.len();
        if self.offset < p {
            self.offset
        } else {
            p + (self.offset - p) % self.data.tail.len()
        }
    }

    pub fn letter(&self, i: usize) -> u8 {
        let k = self.offset + i;
        let d = &self.data;
        if k < d.prefix.len() {
            d.prefix[k]
        } else {
            d.tail[(k - d.prefix.len()) % d.tail.len()]
        }
    }

    /// Homogeneous coordinates `(x, y)` of the limit point `x / y`.
    pub fn point(&self) -> [f64; 2] {
        self.data.points[self.position()]
    }

    pub fn shifted(&self, k: usize) -> Self {
        Self { data: Arc::clone(&self.data), offset: self.offset + k }
    }
}

impl fmt::Debug for BoundaryWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        const NAMES: [char; 4] = ['a', 'A', 'b', 'B'];
        let d = &self.data;
        let head: String = (self.offset..d.prefix.len()).map(|k| NAMES[d.prefix[k] as usize]).collect();
        let start = self.offset.saturating_sub(d.prefix.len()) % d.tail.len();
        let tail: String = (0..d.tail.len())
            .map(|k| NAMES[d.tail[(start + k) % d.tail.len()] as usize])
            .collect();
        write!(f, "{head}({tail})")
    }
}

/// Left shift on the limit set of the Schottky group of [`schottky_generators`].
#[derive(Debug, Clone)]
pub struct SchottkyBoundaryMap {
    letters: [Isometry; 4],
}

fn apply(g: &Isometry, v: [f64; 2]) -> [f64; 2] {
    let [a, b, c, d] = g.entries();
    let w = [a * v[0] + b * v[1], c * v[0] + d * v[1]];
    let n = w[0].hypot(w[1]);
    [w[0] / n, w[1] / n]
}

/// Eigenvector of the eigenvalue of largest modulus.
fn attracting_vector(m: [f64; 4]) -> [f64; 2] {
    let [a, b, c, d] = m;
    let tr = a + d;
    let det = a * d - b * c;
    let root = (tr * tr - 4.0 * det).max(0.0).sqrt();
    let lambda = 0.5 * (tr + tr.signum() * root);
    let u = [b, lambda - a];
    let w = [lambda - d, c];
    let v = if u[0].hypot(u[1]) >= w[0].hypot(w[1]) { u } else { w };
    let n = v[0].hypot(v[1]);
    [v[0] / n, v[1] / n]
}

impl SchottkyBoundaryMap {
    pub fn new(tau: f64) -> Result<Self> {
        let [a, b] = schottky_generators(tau)?;
        Ok(Self { letters: [a, a.inverse(), b, b.inverse()] })
    }

    pub fn generator(&self, letter: u8) -> &Isometry {
        &self.letters[letter as usize]
    }

    /// Builds `prefix · tail^∞`, which must be reduced, with a cyclically
    /// reduced nonempty tail.
    pub fn word(&self, prefix: &[u8], tail: &[u8]) -> Result<BoundaryWord> {
        if tail.is_empty() {
            return Err(Error::InvalidInput("tail must be nonempty".into()));
        }
        let full: Vec<u8> = prefix.iter().chain(tail).chain(tail.first()).copied().collect();
        if full.iter().any(|&x| x > 3) {
            return Err(Error::InvalidInput("letters must be in 0..4".into()));
        }
        if full.windows(2).any(|w| w[1] == w[0] ^ 1) {
            return Err(Error::InvalidInput("word is not reduced".into()));
        }
        let q = tail.len();
        // Product of the tail in normalized form; its attracting vector is
        // the limit point of tail^∞.
        let mut m = Isometry::identity();
        for &x in tail {
            m = m.compose(&self.letters[x as usize]);
        }
        let mut tail_points = vec![[0.0; 2]; q];
        tail_points[0] = attracting_vector(m.entries());
        // ξ(u_r u_{r+1} …) = u_r ξ(u_{r+1} …), walked backwards from rotation 0.
        for r in (1..q).rev() {
            let next = if r + 1 == q { tail_points[0] } else { tail_points[r + 1] };
            tail_points[r] = apply(&self.letters[tail[r] as usize], next);
        }
        let mut points = vec![[0.0; 2]; prefix.len()];
        let mut next = tail_points[0];
        for j in (0..prefix.len()).rev() {
            next = apply(&self.letters[prefix[j] as usize], next);
            points[j] = next;
        }
        points.extend(tail_points);
        Ok(BoundaryWord {
            data: Arc::new(WordData { prefix: prefix.to_vec(), tail: tail.to_vec(), points }),
            offset: 0,
        })
    }

    /// One point per reduced word of length `depth`, each followed by a
    /// constant tail.
    pub fn cylinder_points(&self, depth: usize) -> Vec<BoundaryWord> {
        let mut words: Vec<Vec<u8>> = vec![Vec::new()];
        for _ in 0..depth {
            let mut next = Vec::with_capacity(words.len() * 3 + 1);
            for w in &words {
                for x in 0..4u8 {
                    if w.last().is_none_or(|&l| x != l ^ 1) {
                        let mut v = w.clone();
                        v.push(x);
                        next.push(v);
                    }
                }
            }
            words = next;
        }
        words
            .into_iter()
            .map(|w| {
                let t = w.last().map_or(0, |&l| if l < 2 { 2 } else { 0 });
                self.word(&w, &[t]).expect("reduced by construction")
            })
            .collect()
    }

    /// A random reduced word with the given prefix and tail lengths.
    pub fn random_word<R: Rng + ?Sized>(&self, rng: &mut R, prefix_len: usize, tail_len: usize) -> BoundaryWord {
        loop {
            let mut letters: Vec<u8> = Vec::with_capacity(prefix_len + tail_len);
            while letters.len() < prefix_len + tail_len.max(1) {
                let x = rng.gen_range(0..4u8);
                if letters.last().is_none_or(|&l| x != l ^ 1) {
                    letters.push(x);
                }
            }
            let (p, t) = letters.split_at(prefix_len);
            if let Ok(w) = self.word(p, t) {
                return w;
            }
        }
    }
}

impl DynamicalSystem for SchottkyBoundaryMap {
    type State = BoundaryWord;

    /// Chordal distance `2|x₁y₂ − x₂y₁| / (|v₁||v₂|)` on the Riemann sphere.
    fn distance(&self, x: &BoundaryWord, y: &BoundaryWord) -> f64 {
        let [x1, y1] = x.point();
        let [x2, y2] = y.point();
        2.0 * (x1 * y2 - x2 * y1).abs() / (x1.hypot(y1) * x2.hypot(y2))
    }

    fn step(&self, x: &BoundaryWord) -> BoundaryWord {
        x.shifted(1)
    }

    fn iterate(&self, x: &BoundaryWord, k: usize) -> BoundaryWord {
        x.shifted(k)
    }

    fn diameter_bound(&self) -> f64 {
        2.0
    }
}
