//! Closed-form W1 on the real line and on a circle.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use num_complex::Complex64;

use super::MeasureDescriptor;
use crate::error::{input, Result};

pub(super) fn arcsine_cdf(a: f64, b: f64, x: f64) -> f64 {
    if x <= a {
        0.0
    } else if x >= b {
        1.0
    } else {
        let xi = ((2.0 * x - a - b) / (b - a)).clamp(-1.0, 1.0);
        0.5 + xi.asin() / PI
    }
}

/// `∫_{x0}^{x1} F(x) dx` for the arcsine CDF on `[a, b]`, with `a ≤ x0 ≤ x1 ≤ b`.
fn arcsine_cdf_integral(a: f64, b: f64, x0: f64, x1: f64) -> f64 {
    let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
    let prim = |x: f64| {
        let xi = ((x - m) / h).clamp(-1.0, 1.0);
        h * (xi / 2.0 + (xi * xi.asin() + (1.0 - xi * xi).max(0.0).sqrt()) / PI)
    };
    prim(x1) - prim(x0)
}

/// Inverse of the arcsine CDF.
fn arcsine_quantile(a: f64, b: f64, p: f64) -> f64 {
    let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
    m + h * (PI * (p - 0.5)).sin()
}

pub(super) enum LineCdf {
    /// Sorted `(x, F(x))` after each atom.
    Steps(Vec<(f64, f64)>),
    Arcsine(f64, f64),
}

impl LineCdf {
    pub fn of(m: &MeasureDescriptor) -> Result<Self> {
        match m {
            MeasureDescriptor::Arcsine { a, b } => {
                if !(a < b) {
                    return input("arcsine measure needs a < b");
                }
                Ok(LineCdf::Arcsine(*a, *b))
            }
            _ => {
                let d = m.atoms().expect("line measure");
                let mut xs: Vec<(f64, f64)> = d
                    .atoms()
                    .iter()
                    .zip(d.weights())
                    .map(|(p, &w)| (p.coord(0).re, w))
                    .collect();
                xs.sort_by(|p, q| p.0.total_cmp(&q.0));
                let mut acc = 0.0;
                Ok(LineCdf::Steps(
                    xs.into_iter()
                        .map(|(x, w)| {
                            acc += w;
                            (x, acc)
                        })
                        .collect(),
                ))
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            LineCdf::Steps(s) => s.iter().map(|p| p.0).collect(),
            LineCdf::Arcsine(a, b) => vec![*a, *b],
        }
    }

    /// Value on the open piece right of `x` (right-continuous CDF).
    fn at(&self, x: f64) -> f64 {
        match self {
            LineCdf::Steps(s) => {
                let k = s.partition_point(|p| p.0 <= x);
                if k == 0 {
                    0.0
                } else {
                    s[k - 1].1.min(1.0)
                }
            }
            LineCdf::Arcsine(a, b) => arcsine_cdf(*a, *b, x),
        }
    }
}

/// `∫_{x0}^{x1} |c − F(x)| dx` for an arcsine CDF `F` on a piece inside
/// `[a, b]`.
fn step_vs_arcsine(c: f64, a: f64, b: f64, x0: f64, x1: f64) -> f64 {
    let root = arcsine_quantile(a, b, c.clamp(0.0, 1.0)).clamp(x0, x1);
    let below = c * (root - x0) - arcsine_cdf_integral(a, b, x0, root);
    let above = arcsine_cdf_integral(a, b, root, x1) - c * (x1 - root);
    below.max(0.0) + above.max(0.0)
}

/// `(1/π) ∫_{-π/2}^{π/2} |A + B sin t| dt`.
fn abs_sine_integral(a: f64, b: f64) -> f64 {
    let prim = |t: f64| a * t - b * t.cos();
    let whole = |t0: f64, t1: f64| (prim(t1) - prim(t0)).abs();
    let total = if b != 0.0 && (a / b).abs() < 1.0 {
        let t0 = (-a / b).asin();
        whole(-FRAC_PI_2, t0) + whole(t0, FRAC_PI_2)
    } else {
        whole(-FRAC_PI_2, FRAC_PI_2)
    };
    total / PI
}

pub(super) fn line_w1(f: &LineCdf, g: &LineCdf) -> f64 {
    if let (LineCdf::Arcsine(a1, b1), LineCdf::Arcsine(a2, b2)) = (f, g) {
        // quantile coupling: Q1 − Q2 = Δm + Δh·sin(π(p − ½))
        let dm = (a1 + b1) / 2.0 - (a2 + b2) / 2.0;
        let dh = (b1 - a1) / 2.0 - (b2 - a2) / 2.0;
        return abs_sine_integral(dm, dh);
    }
    let mut bp = f.breakpoints();
    bp.extend(g.breakpoints());
    bp.sort_by(f64::total_cmp);
    bp.dedup();
    let mut total = 0.0;
    for w in bp.windows(2) {
        let (x0, x1) = (w[0], w[1]);
        if x1 <= x0 {
            continue;
        }
        total += match (f, g) {
            (LineCdf::Steps(_), LineCdf::Steps(_)) => (f.at(x0) - g.at(x0)).abs() * (x1 - x0),
            (LineCdf::Steps(_), LineCdf::Arcsine(a, b)) | (LineCdf::Arcsine(a, b), LineCdf::Steps(_)) => {
                let c = if matches!(f, LineCdf::Steps(_)) { f.at(x0) } else { g.at(x0) };
                if x1 <= *a {
                    c * (x1 - x0)
                } else if x0 >= *b {
                    (1.0 - c) * (x1 - x0)
                } else {
                    step_vs_arcsine(c, *a, *b, x0, x1)
                }
            }
            _ => unreachable!("both arcsine handled above"),
        };
    }
    total
}

/// Piece of the CDF difference on the circle: linear from `d0` to `d1` over
/// an angle of `len`.
#[derive(Clone, Copy, Debug)]
struct Piece {
    d0: f64,
    d1: f64,
    len: f64,
}

fn angle(z: Complex64, center: Complex64) -> f64 {
    let t = (z - center).arg().rem_euclid(TAU);
    if t >= TAU {
        0.0
    } else {
        t
    }
}

/// Angles and masses, plus the density rate of the continuous part.
fn circle_parts(m: &MeasureDescriptor, center: Complex64) -> (Vec<(f64, f64)>, f64) {
    match m {
        MeasureDescriptor::UniformCircle { .. } => (Vec::new(), 1.0 / TAU),
        _ => {
            let d = m.atoms().expect("circle measure");
            (
                d.atoms()
                    .iter()
                    .zip(d.weights())
                    .map(|(p, &w)| (angle(p.coord(0), center), w))
                    .collect(),
                0.0,
            )
        }
    }
}

fn pieces(mu: &MeasureDescriptor, nu: &MeasureDescriptor, center: Complex64) -> Vec<Piece> {
    let (am, rm) = circle_parts(mu, center);
    let (an, rn) = circle_parts(nu, center);
    let mut bp: Vec<f64> = am.iter().chain(&an).map(|p| p.0).collect();
    bp.push(0.0);
    bp.push(TAU);
    bp.sort_by(f64::total_cmp);
    bp.dedup();
    let mass_upto = |atoms: &[(f64, f64)], t: f64| atoms.iter().filter(|p| p.0 <= t).map(|p| p.1).sum::<f64>();
    bp.windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| {
            let (t0, t1) = (w[0], w[1]);
            let d0 = mass_upto(&am, t0) + rm * t0 - mass_upto(&an, t0) - rn * t0;
            let d1 = d0 + (rm - rn) * (t1 - t0);
            Piece { d0, d1, len: t1 - t0 }
        })
        .collect()
}

/// `∫ |D(θ) − c| dθ` over all pieces.
fn offset_cost(pieces: &[Piece], c: f64) -> f64 {
    pieces
        .iter()
        .map(|p| {
            let (u, v) = (p.d0 - c, p.d1 - c);
            if u * v >= 0.0 {
                p.len * (u + v).abs() / 2.0
            } else {
                p.len * (u * u + v * v) / (2.0 * (v - u).abs())
            }
        })
        .sum()
}

/// W1 on the circle of radius `r` (arc length):
/// `r · min_c ∫ |F_μ − F_ν − c| dθ`. The offset is chosen among the piece
/// endpoint values, then polished by golden-section search between the
/// neighbouring candidates (the cost is convex in `c`).
pub(super) fn circle_w1(mu: &MeasureDescriptor, nu: &MeasureDescriptor, center: Complex64, r: f64) -> f64 {
    let ps = pieces(mu, nu, center);
    let mut cands: Vec<f64> = ps.iter().flat_map(|p| [p.d0, p.d1]).collect();
    cands.sort_by(f64::total_cmp);
    cands.dedup();
    let costs: Vec<f64> = cands.iter().map(|&c| offset_cost(&ps, c)).collect();
    let k = costs
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
        .map(|(i, _)| i)
        .expect("at least one piece");
    let (mut lo, mut hi) = (cands[k.saturating_sub(1)], cands[(k + 1).min(cands.len() - 1)]);
    let mut best = costs[k];
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (hi - phi * (hi - lo), lo + phi * (hi - lo));
    let (mut f1, mut f2) = (offset_cost(&ps, x1), offset_cost(&ps, x2));
    for _ in 0..200 {
        if hi - lo <= 1e-16 * (1.0 + lo.abs().max(hi.abs())) {
            break;
        }
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = offset_cost(&ps, x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = offset_cost(&ps, x2);
        }
    }
    best = best.min(f1).min(f2);
    r * best
}
