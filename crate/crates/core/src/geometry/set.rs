use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::point::Point;

/// Absolute slack applied to every defining inequality; sets are closed, so
/// boundary points produced by floating-point arithmetic still count as inside.
pub const MEMBERSHIP_TOL: f64 = 1e-12;

/// Whether a model lives on ℝⁿ (embedded as ℝⁿ + i·0) or on ℂⁿ.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ambient {
    Real,
    Complex,
}

/// Declarative description of a compact set in ℝⁿ or ℂⁿ.
///
/// Complex models (`disk`, `circle`) are one-dimensional with centers given as
/// `[re, im]`. The comb is the closure of `[0,1]×[-1,1]` minus the open teeth
/// `{x < y, |y - a_k| < eps_k}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum CompactSetModel {
    Interval {
        a: f64,
        b: f64,
    },
    Box {
        lo: Vec<f64>,
        hi: Vec<f64>,
    },
    Disk {
        center: [f64; 2],
        radius: f64,
    },
    Circle {
        center: [f64; 2],
        radius: f64,
    },
    ConvexPolygon {
        vertices: Vec<[f64; 2]>,
    },
    PowerCusp {
        #[serde(rename = "M")]
        coef: f64,
        m: u32,
        extent: f64,
    },
    Comb {
        a: Vec<f64>,
        eps: Vec<f64>,
    },
    Union {
        parts: Vec<CompactSetModel>,
    },
    /// `base ∩ B(center, radius)` with the Euclidean ball of ℂⁿ.
    BallSection {
        base: Box<CompactSetModel>,
        center: Vec<[f64; 2]>,
        radius: f64,
    },
}

/// Axis-aligned box in the underlying real coordinates: `n` coordinates for
/// real models, `(re, im)` for the one-dimensional complex models.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundingBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl BoundingBox {
    pub fn max_side(&self) -> f64 {
        self.lo
            .iter()
            .zip(&self.hi)
            .map(|(l, h)| h - l)
            .fold(0.0, f64::max)
    }

    fn intersect(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.max(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.min(*b)).collect(),
        }
    }

    fn union(&self, other: &BoundingBox) -> BoundingBox {
        BoundingBox {
            lo: self.lo.iter().zip(&other.lo).map(|(a, b)| a.min(*b)).collect(),
            hi: self.hi.iter().zip(&other.hi).map(|(a, b)| a.max(*b)).collect(),
        }
    }
}

fn c2(z: [f64; 2]) -> Complex64 {
    Complex64::new(z[0], z[1])
}

impl CompactSetModel {
    pub fn interval(a: f64, b: f64) -> Result<Self> {
        let s = CompactSetModel::Interval { a, b };
        s.validate_or_err()?;
        Ok(s)
    }

    pub fn unit_box(n: usize) -> Self {
        CompactSetModel::Box {
            lo: vec![0.0; n],
            hi: vec![1.0; n],
        }
    }

    pub fn unit_disk() -> Self {
        CompactSetModel::Disk {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }

    pub fn unit_circle() -> Self {
        CompactSetModel::Circle {
            center: [0.0, 0.0],
            radius: 1.0,
        }
    }

    pub fn power_cusp(coef: f64, m: u32, extent: f64) -> Result<Self> {
        let s = CompactSetModel::PowerCusp { coef, m, extent };
        s.validate_or_err()?;
        Ok(s)
    }

    /// Comb with teeth `a_k = 1/k`, `eps_k = exp(-k²)/2` for `k = 2..=k_max`.
    pub fn comb(k_max: usize) -> Result<Self> {
        let ks = 2..=k_max.max(2);
        let a = ks.clone().map(|k| 1.0 / k as f64).collect();
        let eps = ks.map(|k| (-((k * k) as f64)).exp() / 2.0).collect();
        let s = CompactSetModel::Comb { a, eps };
        s.validate_or_err()?;
        Ok(s)
    }

    pub fn ball_section(base: CompactSetModel, center: &Point, radius: f64) -> Result<Self> {
        if base.dim() != center.dim() {
            return Err(Error::Dimension {
                expected: base.dim(),
                got: center.dim(),
            });
        }
        let s = CompactSetModel::BallSection {
            base: Box::new(base),
            center: center.coords().iter().map(|z| [z.re, z.im]).collect(),
            radius,
        };
        s.validate_or_err()?;
        Ok(s)
    }

    pub fn name(&self) -> &'static str {
        match self {
            CompactSetModel::Interval { .. } => "interval",
            CompactSetModel::Box { .. } => "box",
            CompactSetModel::Disk { .. } => "disk",
            CompactSetModel::Circle { .. } => "circle",
            CompactSetModel::ConvexPolygon { .. } => "convex-polygon",
            CompactSetModel::PowerCusp { .. } => "power-cusp",
            CompactSetModel::Comb { .. } => "comb",
            CompactSetModel::Union { .. } => "union",
            CompactSetModel::BallSection { .. } => "ball-section",
        }
    }

    /// All constraint violations of the model parameters.
    pub fn validate(&self) -> Vec<String> {
        let mut errs = Vec::new();
        let finite = |v: &[f64]| v.iter().all(|x| x.is_finite());
        match self {
            CompactSetModel::Interval { a, b } => {
                if !(finite(&[*a, *b]) && a < b) {
                    errs.push(format!("interval requires finite a < b, got [{a}, {b}]"));
                }
            }
            CompactSetModel::Box { lo, hi } => {
                if lo.is_empty() || lo.len() != hi.len() {
                    errs.push("box requires lo and hi of equal nonzero length".into());
                } else if lo.len() > 2 {
                    errs.push("box dimension must be 1 or 2".into());
                } else if !lo.iter().zip(hi).all(|(l, h)| l.is_finite() && h.is_finite() && l < h) {
                    errs.push("box requires finite lo < hi in every coordinate".into());
                }
            }
            CompactSetModel::Disk { center, radius } | CompactSetModel::Circle { center, radius } => {
                if !(finite(center) && radius.is_finite() && *radius > 0.0) {
                    errs.push(format!("{} requires a finite center and radius > 0", self.name()));
                }
            }
            CompactSetModel::ConvexPolygon { vertices } => {
                if vertices.len() < 3 {
                    errs.push("convex-polygon requires at least 3 vertices".into());
                } else if polygon_orientation(vertices).is_none() {
                    errs.push("convex-polygon vertices must be strictly convex and consistently oriented".into());
                }
            }
            CompactSetModel::PowerCusp { coef, m, extent } => {
                if !(coef.is_finite() && *coef > 0.0) {
                    errs.push("power-cusp requires M > 0".into());
                }
                if *m == 0 {
                    errs.push("power-cusp requires m >= 1".into());
                }
                if !(extent.is_finite() && *extent > 0.0) {
                    errs.push("power-cusp requires extent > 0".into());
                }
            }
            CompactSetModel::Comb { a, eps } => {
                if a.len() != eps.len() || a.is_empty() {
                    errs.push("comb requires equally long nonempty a and eps sequences".into());
                } else {
                    for k in 0..a.len() {
                        if !(a[k] > 0.0 && eps[k] > 0.0) {
                            errs.push(format!("comb tooth {k}: a and eps must be positive"));
                        }
                        if k + 1 < a.len() && a[k] - a[k + 1] <= eps[k] + eps[k + 1] {
                            errs.push(format!(
                                "comb teeth {k},{}: need a_k - a_(k+1) > eps_k + eps_(k+1)",
                                k + 1
                            ));
                        }
                    }
                }
            }
            CompactSetModel::Union { parts } => {
                if parts.is_empty() {
                    errs.push("union requires at least one part".into());
                }
                for p in parts {
                    errs.extend(p.validate());
                }
                if let Some(first) = parts.first() {
                    if parts
                        .iter()
                        .any(|p| p.dim() != first.dim() || p.ambient() != first.ambient())
                    {
                        errs.push("union parts must share dimension and ambient space".into());
                    }
                }
            }
            CompactSetModel::BallSection { base, center, radius } => {
                errs.extend(base.validate());
                if center.len() != base.dim() {
                    errs.push("ball-section center dimension mismatch".into());
                }
                if !(radius.is_finite() && *radius > 0.0) {
                    errs.push("ball-section requires radius > 0".into());
                }
            }
        }
        errs
    }

    fn validate_or_err(&self) -> Result<()> {
        let errs = self.validate();
        if errs.is_empty() {
            Ok(())
        } else {
            input(errs.join("; "))
        }
    }

    pub fn ambient(&self) -> Ambient {
        match self {
            CompactSetModel::Disk { .. } | CompactSetModel::Circle { .. } => Ambient::Complex,
            CompactSetModel::Union { parts } => parts.first().map_or(Ambient::Real, |p| p.ambient()),
            CompactSetModel::BallSection { base, .. } => base.ambient(),
            _ => Ambient::Real,
        }
    }

    /// Dimension n of the ambient 𝕂ⁿ.
    pub fn dim(&self) -> usize {
        match self {
            CompactSetModel::Interval { .. }
            | CompactSetModel::Disk { .. }
            | CompactSetModel::Circle { .. } => 1,
            CompactSetModel::Box { lo, .. } => lo.len(),
            CompactSetModel::ConvexPolygon { .. }
            | CompactSetModel::PowerCusp { .. }
            | CompactSetModel::Comb { .. } => 2,
            CompactSetModel::Union { parts } => parts.first().map_or(0, |p| p.dim()),
            CompactSetModel::BallSection { base, .. } => base.dim(),
        }
    }

    pub fn bounding_box(&self) -> BoundingBox {
        match self {
            CompactSetModel::Interval { a, b } => BoundingBox {
                lo: vec![*a],
                hi: vec![*b],
            },
            CompactSetModel::Box { lo, hi } => BoundingBox {
                lo: lo.clone(),
                hi: hi.clone(),
            },
            CompactSetModel::Disk { center, radius } | CompactSetModel::Circle { center, radius } => {
                BoundingBox {
                    lo: vec![center[0] - radius, center[1] - radius],
                    hi: vec![center[0] + radius, center[1] + radius],
                }
            }
            CompactSetModel::ConvexPolygon { vertices } => {
                let xs = vertices.iter().map(|v| v[0]);
                let ys = vertices.iter().map(|v| v[1]);
                BoundingBox {
                    lo: vec![xs.clone().fold(f64::INFINITY, f64::min), ys.clone().fold(f64::INFINITY, f64::min)],
                    hi: vec![xs.fold(f64::NEG_INFINITY, f64::max), ys.fold(f64::NEG_INFINITY, f64::max)],
                }
            }
            CompactSetModel::PowerCusp { coef, m, extent } => {
                let h = coef * extent.powi(*m as i32);
                BoundingBox {
                    lo: vec![0.0, -h],
                    hi: vec![*extent, h],
                }
            }
            CompactSetModel::Comb { .. } => BoundingBox {
                lo: vec![0.0, -1.0],
                hi: vec![1.0, 1.0],
            },
            CompactSetModel::Union { parts } => {
                let mut it = parts.iter().map(|p| p.bounding_box());
                let first = it.next().expect("validated union is nonempty");
                it.fold(first, |acc, b| acc.union(&b))
            }
            CompactSetModel::BallSection { base, center, radius } => {
                let ball = match base.ambient() {
                    Ambient::Real => BoundingBox {
                        lo: center.iter().map(|c| c[0] - radius).collect(),
                        hi: center.iter().map(|c| c[0] + radius).collect(),
                    },
                    Ambient::Complex => BoundingBox {
                        lo: vec![center[0][0] - radius, center[0][1] - radius],
                        hi: vec![center[0][0] + radius, center[0][1] + radius],
                    },
                };
                base.bounding_box().intersect(&ball)
            }
        }
    }

    fn check_dim(&self, z: &Point) -> Result<()> {
        if z.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: z.dim(),
            });
        }
        Ok(())
    }

    /// Membership in the closed set; boundary points are inside.
    pub fn contains(&self, z: &Point) -> Result<bool> {
        self.check_dim(z)?;
        Ok(self.contains_unchecked(z))
    }

    pub(crate) fn contains_unchecked(&self, z: &Point) -> bool {
        const T: f64 = MEMBERSHIP_TOL;
        if self.ambient() == Ambient::Real && !z.is_real(T) {
            return false;
        }
        match self {
            CompactSetModel::Interval { a, b } => {
                let x = z.coord(0).re;
                x >= a - T && x <= b + T
            }
            CompactSetModel::Box { lo, hi } => z
                .coords()
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(c, (l, h))| c.re >= l - T && c.re <= h + T),
            CompactSetModel::Disk { center, radius } => (z.coord(0) - c2(*center)).norm() <= radius + T,
            CompactSetModel::Circle { center, radius } => {
                ((z.coord(0) - c2(*center)).norm() - radius).abs() <= T
            }
            CompactSetModel::ConvexPolygon { vertices } => {
                let (x, y) = (z.coord(0).re, z.coord(1).re);
                polygon_halfplanes(vertices)
                    .iter()
                    .all(|(nx, ny, c)| nx * x + ny * y <= c + T)
            }
            CompactSetModel::PowerCusp { coef, m, extent } => {
                let (x, y) = (z.coord(0).re, z.coord(1).re);
                x >= -T && x <= extent + T && y.abs() <= coef * x.max(0.0).powi(*m as i32) + T
            }
            CompactSetModel::Comb { a, eps } => {
                let (x, y) = (z.coord(0).re, z.coord(1).re);
                let in_box = x >= -T && x <= 1.0 + T && y.abs() <= 1.0 + T;
                in_box
                    && a.iter()
                        .zip(eps)
                        .all(|(ak, ek)| !(x < y - T && (y - ak).abs() < ek - T))
            }
            CompactSetModel::Union { parts } => parts.iter().any(|p| p.contains_unchecked(z)),
            CompactSetModel::BallSection { base, center, radius } => {
                let c = Point::new(center.iter().map(|c| c2(*c)).collect());
                base.contains_unchecked(z) && z.dist(&c) <= radius + T
            }
        }
    }

    /// Max-coordinate distance from `z` to the complement of the set in 𝕂ⁿ,
    /// i.e. the radius of the largest closed cube D(z, ρ) inside the set.
    /// Zero for points outside. Unions report the best single part, which is
    /// a lower bound.
    pub fn dist_to_complement(&self, z: &Point) -> Result<f64> {
        self.check_dim(z)?;
        Ok(self.dist_unchecked(z))
    }

    pub(crate) fn dist_unchecked(&self, z: &Point) -> f64 {
        if !self.contains_unchecked(z) {
            return 0.0;
        }
        let d = match self {
            CompactSetModel::Interval { a, b } => {
                let x = z.coord(0).re;
                (x - a).min(b - x)
            }
            CompactSetModel::Box { lo, hi } => z
                .coords()
                .iter()
                .zip(lo.iter().zip(hi))
                .map(|(c, (l, h))| (c.re - l).min(h - c.re))
                .fold(f64::INFINITY, f64::min),
            CompactSetModel::Disk { center, radius } => radius - (z.coord(0) - c2(*center)).norm(),
            CompactSetModel::Circle { .. } => 0.0,
            CompactSetModel::ConvexPolygon { vertices } => {
                let (x, y) = (z.coord(0).re, z.coord(1).re);
                polygon_halfplanes(vertices)
                    .iter()
                    .map(|(nx, ny, c)| (c - nx * x - ny * y) / (nx.abs() + ny.abs()))
                    .fold(f64::INFINITY, f64::min)
            }
            CompactSetModel::PowerCusp { coef, m, extent } => {
                let (x, y) = (z.coord(0).re, z.coord(1).re);
                let fits = |r: f64| {
                    x - r >= 0.0 && x + r <= *extent && y.abs() + r <= coef * (x - r).powi(*m as i32)
                };
                largest_true(fits, x.min(extent - x))
            }
            CompactSetModel::Comb { a, eps } => {
                let (x, y) = (z.coord(0).re, z.coord(1).re);
                let box_d = x.min(1.0 - x).min(1.0 - y.abs());
                let fits = |r: f64| {
                    a.iter().zip(eps).all(|(ak, ek)| {
                        let ylo = (y - r).max(ak - ek);
                        let yhi = (y + r).min(ak + ek);
                        !(ylo < yhi && x - r < yhi)
                    })
                };
                largest_true(fits, box_d)
            }
            CompactSetModel::Union { parts } => parts
                .iter()
                .map(|p| p.dist_unchecked(z))
                .fold(0.0, f64::max),
            CompactSetModel::BallSection { base, center, radius } => {
                let c = Point::new(center.iter().map(|c| c2(*c)).collect());
                let real_dims = match self.ambient() {
                    Ambient::Real => self.dim(),
                    Ambient::Complex => 2 * self.dim(),
                } as f64;
                let ball = (radius - z.dist(&c)) / real_dims.sqrt();
                base.dist_unchecked(z).min(ball)
            }
        };
        d.max(0.0)
    }

    /// Best interior point on a coarse probe grid together with its cube
    /// radius. `None` means no interior point was found, i.e. the set is not
    /// fat at probe resolution.
    pub fn interior_probe(&self, per_axis: usize) -> Option<(Point, f64)> {
        let bb = self.bounding_box();
        let axes: Vec<Vec<f64>> = bb
            .lo
            .iter()
            .zip(&bb.hi)
            .map(|(l, h)| (0..=per_axis).map(|i| l + (h - l) * i as f64 / per_axis as f64).collect())
            .collect();
        let mut best: Option<(Point, f64)> = None;
        for coords in cartesian(&axes) {
            let p = self.point_from_real_coords(&coords);
            let d = self.dist_unchecked(&p);
            if d > 0.0 && best.as_ref().map_or(true, |(_, bd)| d > *bd) {
                best = Some((p, d));
            }
        }
        best
    }

    pub(crate) fn point_from_real_coords(&self, coords: &[f64]) -> Point {
        match self.ambient() {
            Ambient::Real => Point::real(coords),
            Ambient::Complex => Point::scalar(Complex64::new(coords[0], coords[1])),
        }
    }

    pub fn is_fat(&self) -> bool {
        self.interior_probe(32).is_some()
    }
}

/// Largest `r ∈ [0, hi]` with `pred(r)`, for a predicate that is true on an
/// initial segment.
fn largest_true(pred: impl Fn(f64) -> bool, hi: f64) -> f64 {
    if hi <= 0.0 || !pred(0.0) {
        return 0.0;
    }
    if pred(hi) {
        return hi;
    }
    let (mut lo, mut hi) = (0.0, hi);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if pred(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub(crate) fn cartesian(axes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = vec![Vec::new()];
    for axis in axes {
        let mut next = Vec::with_capacity(out.len() * axis.len());
        for prefix in &out {
            for &v in axis {
                let mut p = prefix.clone();
                p.push(v);
                next.push(p);
            }
        }
        out = next;
    }
    out
}

/// +1 for counter-clockwise, -1 for clockwise, `None` if not strictly convex.
fn polygon_orientation(v: &[[f64; 2]]) -> Option<f64> {
    let n = v.len();
    let mut sign = 0.0;
    for i in 0..n {
        let (a, b, c) = (v[i], v[(i + 1) % n], v[(i + 2) % n]);
        let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
        if cross == 0.0 || (sign != 0.0 && cross.signum() != sign) {
            return None;
        }
        sign = cross.signum();
    }
    Some(sign)
}

/// Outward half-planes `nx·x + ny·y <= c` with unit normals.
fn polygon_halfplanes(v: &[[f64; 2]]) -> Vec<(f64, f64, f64)> {
    let orient = polygon_orientation(v).unwrap_or(1.0);
    let n = v.len();
    (0..n)
        .map(|i| {
            let (a, b) = (v[i], v[(i + 1) % n]);
            let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
            let len = dx.hypot(dy);
            // ccw: outward normal is (dy, -dx)
            let (nx, ny) = (orient * dy / len, -orient * dx / len);
            (nx, ny, nx * a[0] + ny * a[1])
        })
        .collect()
}
