use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

/// A point of ℂⁿ. Real sets live on ℝⁿ + i·0.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point(Vec<Complex64>);

impl Point {
    pub fn new(coords: Vec<Complex64>) -> Self {
        Point(coords)
    }

    pub fn real(coords: &[f64]) -> Self {
        Point(coords.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn scalar(z: Complex64) -> Self {
        Point(vec![z])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[Complex64] {
        &self.0
    }

    pub fn coord(&self, i: usize) -> Complex64 {
        self.0[i]
    }

    /// Real parts, meaningful for points of real sets.
    pub fn re(&self) -> Vec<f64> {
        self.0.iter().map(|z| z.re).collect()
    }

    pub fn is_real(&self, tol: f64) -> bool {
        self.0.iter().all(|z| z.im.abs() <= tol)
    }

    /// Max-coordinate distance; the closed cube D(p, r) is its ball.
    pub fn dist_inf(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn dist(&self, other: &Point) -> f64 {
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    pub fn norm_inf(&self) -> f64 {
        self.0.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn add(&self, other: &Point) -> Point {
        Point(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, s: Complex64) -> Point {
        Point(self.0.iter().map(|a| a * s).collect())
    }

    /// Total order: lexicographic on `(re, im)` per coordinate, `-0.0 == 0.0`.
    pub fn total_cmp(&self, other: &Point) -> std::cmp::Ordering {
        let z = |x: f64| if x == 0.0 { 0.0 } else { x };
        for (a, b) in self.0.iter().zip(&other.0) {
            let o = z(a.re).total_cmp(&z(b.re)).then(z(a.im).total_cmp(&z(b.im)));
            if o.is_ne() {
                return o;
            }
        }
        self.0.len().cmp(&other.0.len())
    }

    /// Bitwise key for deduplication of exact duplicates.
    pub(crate) fn key(&self) -> Vec<(u64, u64)> {
        self.0
            .iter()
            .map(|z| (canonical_bits(z.re), canonical_bits(z.im)))
            .collect()
    }
}

fn canonical_bits(x: f64) -> u64 {
    // -0.0 and 0.0 are the same point
    if x == 0.0 {
        0
    } else {
        x.to_bits()
    }
}

impl fmt::Display for Point {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, z) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            if z.im == 0.0 {
                write!(f, "{}", z.re)?;
            } else {
                write!(f, "{}{:+}i", z.re, z.im)?;
            }
        }
        write!(f, ")")
    }
}

impl From<f64> for Point {
    fn from(x: f64) -> Self {
        Point::real(&[x])
    }
}

impl From<Complex64> for Point {
    fn from(z: Complex64) -> Self {
        Point::scalar(z)
    }
}
