use std::collections::HashSet;
use std::f64::consts::PI;

use num_complex::Complex64;

use super::set::{cartesian, Ambient, CompactSetModel};
use crate::error::{input, Error, Result};
use crate::point::Point;

/// Finite candidate set used in place of the continuum K when maximizing
/// Vandermonde determinants.
#[derive(Clone, Debug, PartialEq)]
pub struct CandidateMesh {
    pub points: Vec<Point>,
    pub spacing: f64,
    pub max_valid_degree: usize,
}

impl CandidateMesh {
    /// Wraps an explicit point list; rejects duplicates.
    pub fn from_points(points: Vec<Point>, spacing: f64, max_valid_degree: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::DegenerateSet("empty point list".into()));
        }
        let dim = points[0].dim();
        let mut seen = HashSet::with_capacity(points.len());
        for p in &points {
            if p.dim() != dim {
                return Err(Error::Dimension {
                    expected: dim,
                    got: p.dim(),
                });
            }
            if !seen.insert(p.key()) {
                return input(format!("duplicate mesh point {p}"));
            }
        }
        Ok(CandidateMesh {
            points,
            spacing,
            max_valid_degree,
        })
    }

    /// `count` equispaced points on `[a, b]`, endpoints included.
    pub fn uniform_interval(a: f64, b: f64, count: usize) -> Result<Self> {
        if count < 2 || !(a < b) {
            return input("uniform_interval needs count >= 2 and a < b");
        }
        let pts = axis(a, b, count - 1).into_iter().map(Point::from).collect();
        Self::from_points(pts, (b - a) / (count - 1) as f64, count - 1)
    }

    /// The `count`-th roots of unity scaled to `radius` around `center`,
    /// starting at angle 0.
    pub fn roots_of_unity(count: usize, center: Complex64, radius: f64) -> Result<Self> {
        if count < 1 || !(radius > 0.0) {
            return input("roots_of_unity needs count >= 1 and radius > 0");
        }
        let pts = ring(center, radius, count);
        Self::from_points(pts, 2.0 * PI * radius / count as f64, count - 1)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.points.first().map_or(0, |p| p.dim())
    }

    /// Index of an exactly matching point.
    pub fn index_of(&self, p: &Point) -> Option<usize> {
        self.points.iter().position(|q| q == p)
    }

    /// Index of the nearest point (Euclidean), lowest index on ties.
    pub fn nearest(&self, p: &Point) -> usize {
        let mut best = (0, f64::INFINITY);
        for (i, q) in self.points.iter().enumerate() {
            let d = q.dist(p);
            if d < best.1 {
                best = (i, d);
            }
        }
        best.0
    }
}

/// `k + 1` points `lo + (hi - lo)·j/k` with both endpoints exact.
fn axis(lo: f64, hi: f64, k: usize) -> Vec<f64> {
    (0..=k)
        .map(|j| {
            if j == k {
                hi
            } else {
                lo + (hi - lo) * j as f64 / k as f64
            }
        })
        .collect()
}

fn ring(center: Complex64, radius: f64, count: usize) -> Vec<Point> {
    (0..count)
        .map(|k| {
            let t = 2.0 * PI * k as f64 / count as f64;
            let p = if k == 0 {
                Complex64::new(radius, 0.0)
            } else {
                Complex64::from_polar(radius, t)
            };
            Point::scalar(center + p)
        })
        .collect()
}

/// Boundary samples for models whose Fekete points concentrate on a circle a
/// square grid would miss.
fn boundary_ring(set: &CompactSetModel, h: f64) -> Vec<Point> {
    match set {
        CompactSetModel::Disk { center, radius } | CompactSetModel::Circle { center, radius } => {
            let count = ((2.0 * PI * radius / h).ceil() as usize).max(3);
            ring(Complex64::new(center[0], center[1]), *radius, count)
        }
        CompactSetModel::Union { parts } => parts.iter().flat_map(|p| boundary_ring(p, h)).collect(),
        CompactSetModel::BallSection { base, .. } => boundary_ring(base, h)
            .into_iter()
            .filter(|p| set.contains_unchecked(p))
            .collect(),
        _ => Vec::new(),
    }
}

fn is_curve(set: &CompactSetModel) -> bool {
    match set {
        CompactSetModel::Circle { .. } => true,
        CompactSetModel::BallSection { base, .. } => is_curve(base),
        CompactSetModel::Union { parts } => parts.iter().all(is_curve),
        _ => false,
    }
}

/// Candidate mesh for degree-`degree` problems: a grid with spacing at most
/// `c / (density·d²)` per axis (c = half the longest bounding-box side),
/// filtered by membership. Circles and disks also get a boundary ring with
/// the same arc spacing.
pub fn generate_mesh(set: &CompactSetModel, degree: usize, density: f64) -> Result<CandidateMesh> {
    if degree < 1 {
        return input("mesh degree must be >= 1");
    }
    if !(density >= 1.0) || !density.is_finite() {
        return input(format!("mesh density must be >= 1, got {density}"));
    }
    let errs = set.validate();
    if !errs.is_empty() {
        return input(errs.join("; "));
    }
    let bb = set.bounding_box();
    if bb.lo.iter().zip(&bb.hi).any(|(l, h)| !(l <= h)) {
        return Err(Error::DegenerateSet(format!("{} has an empty bounding box", set.name())));
    }
    let c = bb.max_side() / 2.0;
    let target = c / (density * (degree * degree) as f64);
    if !(target > 0.0) {
        return Err(Error::DegenerateSet(format!("{} has zero extent", set.name())));
    }

    let mut points = boundary_ring(set, target);
    let mut spacing = if points.is_empty() { 0.0 } else { target };
    if !is_curve(set) {
        let axes: Vec<Vec<f64>> = bb
            .lo
            .iter()
            .zip(&bb.hi)
            .map(|(&l, &h)| {
                let k = (((h - l) / target).ceil() as usize).max(1);
                if h > l {
                    spacing = f64::max(spacing, (h - l) / k as f64);
                    axis(l, h, k)
                } else {
                    vec![l]
                }
            })
            .collect();
        points.extend(
            cartesian(&axes)
                .into_iter()
                .map(|coords| set.point_from_real_coords(&coords))
                .filter(|p| set.contains_unchecked(p)),
        );
    }

    let mut seen = HashSet::with_capacity(points.len());
    points.retain(|p| seen.insert(p.key()));
    if points.is_empty() {
        return Err(Error::DegenerateSet(format!(
            "{} has no mesh points at spacing {target:.3e}",
            set.name()
        )));
    }
    debug_assert!(set.ambient() == Ambient::Complex || points.iter().all(|p| p.is_real(0.0)));
    Ok(CandidateMesh {
        points,
        spacing,
        max_valid_degree: degree,
    })
}
