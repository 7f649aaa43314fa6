//! Uniformly polynomially cuspidal structure: the curve families `h_x`, the
//! cusp sets `E_a` built from them, and the pyramid projection used to push
//! Hölder continuity of convex sets onto cusps.

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::set::{Ambient, CompactSetModel, MEMBERSHIP_TOL};
use crate::error::{input, Error, Result};
use crate::point::Point;

/// One coefficient `a_k(x) = matrix·x + offset` of the curve family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AffineCoefficient {
    pub matrix: Vec<Vec<f64>>,
    pub offset: Vec<Complex64>,
}

impl AffineCoefficient {
    fn eval(&self, x: &Point) -> Point {
        Point::new(
            self.matrix
                .iter()
                .zip(&self.offset)
                .map(|(row, off)| {
                    row.iter()
                        .zip(x.coords())
                        .map(|(a, xi)| xi * *a)
                        .sum::<Complex64>()
                        + off
                })
                .collect(),
        )
    }
}

/// UPC constants `(M, m, d)` together with the family
/// `h_x(t) = Σ_k a_k(x) t^k` realizing them. Families are affine in the
/// anchor `x`, which covers every built-in model.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UpcDescriptor {
    #[serde(rename = "M")]
    pub coef: f64,
    pub m: u32,
    pub degree: usize,
    #[serde(default = "default_ambient")]
    pub ambient: Ambient,
    pub coefficients: Vec<AffineCoefficient>,
}

fn default_ambient() -> Ambient {
    Ambient::Real
}

/// Resolution of the sampled checks: `t_count` values on the t-interval and
/// `u_count` values per real axis of the unit cube.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampleGrid {
    pub t_count: usize,
    pub u_count: usize,
}

impl Default for SampleGrid {
    fn default() -> Self {
        SampleGrid {
            t_count: 64,
            u_count: 16,
        }
    }
}

impl SampleGrid {
    pub fn t_values(&self, t_max: f64) -> Vec<f64> {
        linspace(0.0, t_max, self.t_count)
    }

    pub fn u_values(&self) -> Vec<f64> {
        linspace(-1.0, 1.0, self.u_count)
    }
}

fn linspace(a: f64, b: f64, count: usize) -> Vec<f64> {
    match count {
        0 => Vec::new(),
        1 => vec![a],
        _ => (0..count)
            .map(|i| {
                if i + 1 == count {
                    b
                } else {
                    a + (b - a) * i as f64 / (count - 1) as f64
                }
            })
            .collect(),
    }
}

fn binomial(n: u32, k: u32) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

impl UpcDescriptor {
    pub fn dim(&self) -> usize {
        self.coefficients.first().map_or(0, |c| c.offset.len())
    }

    pub fn validate_shape(&self) -> Vec<String> {
        let mut errs = Vec::new();
        if !(self.coef.is_finite() && self.coef > 0.0) {
            errs.push("UPC constant M must be positive".into());
        }
        if self.m == 0 {
            errs.push("UPC exponent m must be >= 1".into());
        }
        if self.coefficients.len() != self.degree + 1 {
            errs.push(format!(
                "UPC family of degree {} needs {} coefficients, got {}",
                self.degree,
                self.degree + 1,
                self.coefficients.len()
            ));
        }
        let n = self.dim();
        if n == 0 {
            errs.push("UPC coefficients must have nonzero dimension".into());
        }
        for (k, c) in self.coefficients.iter().enumerate() {
            if c.offset.len() != n || c.matrix.len() != n || c.matrix.iter().any(|r| r.len() != n) {
                errs.push(format!("UPC coefficient {k} must be an {n}x{n} matrix with an offset of length {n}"));
            }
        }
        errs
    }

    /// Built-in families for the model sets. Convex models contract to an
    /// interior point; the power cusp slides toward `(extent/2, 0)` while
    /// shrinking `y` like `(1-t)^m`. Circles, combs, unions and ball sections
    /// have no built-in family.
    pub fn builtin(set: &CompactSetModel) -> Option<UpcDescriptor> {
        let contract = |center: Vec<Complex64>, coef: f64, ambient: Ambient| {
            let n = center.len();
            let eye = |s: f64| -> Vec<Vec<f64>> {
                (0..n).map(|i| (0..n).map(|j| if i == j { s } else { 0.0 }).collect()).collect()
            };
            UpcDescriptor {
                coef,
                m: 1,
                degree: 1,
                ambient,
                coefficients: vec![
                    AffineCoefficient {
                        matrix: eye(1.0),
                        offset: vec![Complex64::new(0.0, 0.0); n],
                    },
                    AffineCoefficient {
                        matrix: eye(-1.0),
                        offset: center,
                    },
                ],
            }
        };
        let re = |x: f64| Complex64::new(x, 0.0);
        match set {
            CompactSetModel::Interval { a, b } => Some(contract(vec![re(0.5 * (a + b))], 0.5 * (b - a), Ambient::Real)),
            CompactSetModel::Box { lo, hi } => {
                let center = lo.iter().zip(hi).map(|(l, h)| re(0.5 * (l + h))).collect();
                let coef = lo.iter().zip(hi).map(|(l, h)| 0.5 * (h - l)).fold(f64::INFINITY, f64::min);
                Some(contract(center, coef, Ambient::Real))
            }
            CompactSetModel::Disk { center, radius } => Some(contract(
                vec![Complex64::new(center[0], center[1])],
                *radius,
                Ambient::Complex,
            )),
            CompactSetModel::ConvexPolygon { vertices } => {
                let k = vertices.len() as f64;
                let cx = vertices.iter().map(|v| v[0]).sum::<f64>() / k;
                let cy = vertices.iter().map(|v| v[1]).sum::<f64>() / k;
                let coef = set.dist_unchecked(&Point::real(&[cx, cy]));
                Some(contract(vec![re(cx), re(cy)], coef, Ambient::Real))
            }
            CompactSetModel::PowerCusp { coef, m, extent } => {
                let (c, m, e) = (*coef, *m, *extent);
                let degree = m.max(1) as usize;
                let coefficients = (0..=degree)
                    .map(|k| {
                        let kx = match k {
                            0 => 1.0,
                            1 => -1.0,
                            _ => 0.0,
                        };
                        let ky = if k as u32 <= m {
                            binomial(m, k as u32) * if k % 2 == 0 { 1.0 } else { -1.0 }
                        } else {
                            0.0
                        };
                        AffineCoefficient {
                            matrix: vec![vec![kx, 0.0], vec![0.0, ky]],
                            offset: vec![re(if k == 1 { 0.5 * e } else { 0.0 }), re(0.0)],
                        }
                    })
                    .collect();
                let upc_coef = c * (0.5 * e).powi(m as i32) / (1.0 + c * m as f64 * e.powi(m as i32 - 1));
                Some(UpcDescriptor {
                    coef: upc_coef,
                    m,
                    degree,
                    ambient: Ambient::Real,
                    coefficients,
                })
            }
            _ => None,
        }
    }

    /// Coefficients `a_0(x), …, a_d(x)`.
    pub fn coefficients_at(&self, x: &Point) -> Vec<Point> {
        self.coefficients.iter().map(|c| c.eval(x)).collect()
    }

    /// `h_x(t)` by Horner's rule.
    pub fn eval(&self, x: &Point, t: f64) -> Point {
        let coeffs = self.coefficients_at(x);
        let n = x.dim();
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for c in coeffs.iter().rev() {
            for (a, ci) in acc.iter_mut().zip(c.coords()) {
                *a = *a * t + ci;
            }
        }
        Point::new(acc)
    }

    /// Cube radius `M·t^m` of the cusp at parameter `t`.
    pub fn radius(&self, t: f64) -> f64 {
        self.coef * t.powi(self.m as i32)
    }

    fn check_point(&self, x: &Point) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: self.dim(),
                got: x.dim(),
            });
        }
        Ok(())
    }

    /// Samples of the unit cube in 𝕂ⁿ: real coordinates from `u`, or complex
    /// coordinates `u_re + i·u_im` clipped to the unit polydisc.
    fn cube_samples(&self, u: &[f64]) -> Vec<Vec<Complex64>> {
        let n = self.dim();
        let scalars: Vec<Complex64> = match self.ambient {
            Ambient::Real => u.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
            Ambient::Complex => u
                .iter()
                .flat_map(|&a| u.iter().map(move |&b| Complex64::new(a, b)))
                .filter(|z| z.norm() <= 1.0 + 1e-15)
                .collect(),
        };
        let mut out: Vec<Vec<Complex64>> = vec![Vec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|prefix| {
                    scalars.iter().map(move |s| {
                        let mut p = prefix.clone();
                        p.push(*s);
                        p
                    })
                })
                .collect();
        }
        out
    }

    /// Sampled invariants of the family: `h_x(0) = x`, `h_x([0,1]) ⊂ E`, and
    /// `dist_∞(h_x(t), complement) ≥ M·t^m`.
    pub fn validate(&self, set: &CompactSetModel, anchors: &[Point], grid: SampleGrid) -> Result<UpcValidation> {
        let errs = self.validate_shape();
        if !errs.is_empty() {
            return input(errs.join("; "));
        }
        if set.dim() != self.dim() {
            return Err(Error::Dimension {
                expected: set.dim(),
                got: self.dim(),
            });
        }
        let ts = grid.t_values(1.0);
        let mut witnesses = Vec::new();
        let mut checked = 0usize;
        for x in anchors {
            self.check_point(x)?;
            if !set.contains_unchecked(x) {
                return input(format!("anchor {x} is not in the set"));
            }
            let h0 = self.eval(x, 0.0);
            if h0.dist_inf(x) > 1e-12 {
                witnesses.push(UpcWitness {
                    anchor: x.to_string(),
                    t: 0.0,
                    reason: format!("h_x(0) = {h0} differs from the anchor"),
                });
            }
            for &t in &ts {
                checked += 1;
                let h = self.eval(x, t);
                if !set.contains_unchecked(&h) {
                    witnesses.push(UpcWitness {
                        anchor: x.to_string(),
                        t,
                        reason: format!("h_x(t) = {h} leaves the set"),
                    });
                    continue;
                }
                let d = set.dist_unchecked(&h);
                if d < self.radius(t) - MEMBERSHIP_TOL {
                    witnesses.push(UpcWitness {
                        anchor: x.to_string(),
                        t,
                        reason: format!("distance to complement {d:.6e} < M t^m = {:.6e}", self.radius(t)),
                    });
                }
            }
        }
        Ok(UpcValidation {
            ok: witnesses.is_empty(),
            anchors: anchors.len(),
            checked,
            grid,
            witnesses,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpcWitness {
    pub anchor: String,
    pub t: f64,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct UpcValidation {
    pub ok: bool,
    pub anchors: usize,
    pub checked: usize,
    pub grid: SampleGrid,
    pub witnesses: Vec<UpcWitness>,
}

/// Point cloud approximating the cusp set
/// `E_a = ⋃_t D(h_a(t), M t^m)` on the given grids. When a model is attached
/// every point must lie in it; the first violation is reported as a
/// descriptor error carrying the `(t, w)` witness.
pub fn cusp_set_samples(
    desc: &UpcDescriptor,
    set: Option<&CompactSetModel>,
    anchor: &Point,
    t_grid: &[f64],
    u_grid: &[f64],
) -> Result<Vec<Point>> {
    desc.check_point(anchor)?;
    if t_grid.is_empty() || u_grid.is_empty() {
        return input("cusp_set_samples needs nonempty grids");
    }
    if let Some(s) = set {
        if !s.contains_unchecked(anchor) {
            return input(format!("anchor {anchor} is not in the set"));
        }
    }
    let ws = desc.cube_samples(u_grid);
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for &t in t_grid {
        let h = desc.eval(anchor, t);
        let rad = desc.radius(t);
        for w in &ws {
            let p = h.add(&Point::new(w.iter().map(|wi| wi * rad).collect()));
            if let Some(s) = set {
                if !s.contains_unchecked(&p) {
                    return Err(Error::DescriptorInvalid {
                        witness: format!("anchor {anchor}, t = {t}, w = {}", Point::new(w.clone())),
                    });
                }
            }
            if seen.insert(p.key()) {
                out.push(p);
            }
        }
    }
    Ok(out)
}

/// Per-degree coefficient bounds `B_k = max_x |a_k(x)|_∞` recovered from
/// curve values, plus the worst disagreement with the stored coefficients.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CoefficientBounds {
    pub bounds: Vec<f64>,
    pub max_roundtrip_error: f64,
}

impl CoefficientBounds {
    pub fn sum(&self) -> f64 {
        self.bounds.iter().sum()
    }
}

/// Recovers `a_k(x)` from `h_x(1/j)`, `j = 1..=d+1`, by solving the
/// Vandermonde system at the nodes `1/j` for every anchor and coordinate.
pub fn coefficient_bound(desc: &UpcDescriptor, anchors: &[Point]) -> Result<CoefficientBounds> {
    let errs = desc.validate_shape();
    if !errs.is_empty() {
        return input(errs.join("; "));
    }
    let d = desc.degree;
    if anchors.len() < d + 1 {
        return input(format!("coefficient_bound needs at least {} anchors, got {}", d + 1, anchors.len()));
    }
    let nodes: Vec<f64> = (1..=d + 1).map(|j| 1.0 / j as f64).collect();
    let system = DMatrix::from_fn(d + 1, d + 1, |j, k| Complex64::new(nodes[j].powi(k as i32), 0.0));
    let lu = system.lu();
    if lu.determinant().norm() == 0.0 {
        return Err(Error::Internal("Vandermonde system at nodes 1/j is singular".into()));
    }
    let mut bounds = vec![0.0f64; d + 1];
    let mut err = 0.0f64;
    for x in anchors {
        desc.check_point(x)?;
        let stored = desc.coefficients_at(x);
        let values: Vec<Point> = nodes.iter().map(|&t| desc.eval(x, t)).collect();
        for s in 0..x.dim() {
            let rhs = DVector::from_iterator(d + 1, values.iter().map(|v| v.coord(s)));
            let sol = lu
                .solve(&rhs)
                .ok_or_else(|| Error::Internal("coefficient system solve failed".into()))?;
            for k in 0..=d {
                bounds[k] = bounds[k].max(sol[k].norm());
                err = err.max((sol[k] - stored[k].coord(s)).norm());
            }
        }
    }
    Ok(CoefficientBounds {
        bounds,
        max_roundtrip_error: err,
    })
}

/// One sampled point `p(t, t·u) = h_a(t) + M·((t u_1)^m, …, (t u_n)^m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct PyramidSample {
    pub t: f64,
    pub u: Vec<Complex64>,
    pub point: Point,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PyramidImage {
    pub r: f64,
    pub r_prime: f64,
    pub bounds: CoefficientBounds,
    pub samples: Vec<PyramidSample>,
}

/// Shrunken pyramid radius `r' = r / (1 + d!·Σ_ℓ B_ℓ + M)` with `B_ℓ` taken
/// from [`coefficient_bound`] over `bound_anchors`, and the sampled image of
/// the pyramid `S(r')` under `p(t, z) = h_a(t) + M·(z_1^m, …, z_n^m)`.
///
/// Only `t ∈ [0, r']` is sampled: the family maps `[0, 1]` into the set and
/// says nothing about negative parameters.
pub fn pyramid_image(
    desc: &UpcDescriptor,
    anchor: &Point,
    r: f64,
    bound_anchors: &[Point],
    grid: SampleGrid,
) -> Result<PyramidImage> {
    if !(r > 0.0 && r <= 1.0) {
        return input(format!("pyramid radius must lie in (0, 1], got {r}"));
    }
    desc.check_point(anchor)?;
    let bounds = coefficient_bound(desc, bound_anchors)?;
    let r_prime = r / (1.0 + factorial(desc.degree) * bounds.sum() + desc.coef);
    let us = desc.cube_samples(&grid.u_values());
    let mut samples = Vec::new();
    for t in grid.t_values(r_prime) {
        let h = desc.eval(anchor, t);
        for u in &us {
            let bump: Vec<Complex64> = u.iter().map(|ui| (ui * t).powu(desc.m) * desc.coef).collect();
            samples.push(PyramidSample {
                t,
                u: u.clone(),
                point: h.add(&Point::new(bump)),
            });
        }
    }
    Ok(PyramidImage {
        r,
        r_prime,
        bounds,
        samples,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionWitness {
    pub t: f64,
    pub u: String,
    pub point: String,
    pub reason: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InclusionReport {
    pub ok: bool,
    pub r: f64,
    pub r_prime: f64,
    pub checked: usize,
    pub grid: SampleGrid,
    pub witnesses: Vec<InclusionWitness>,
}

/// Checks `p(S(r')) ⊂ E_a ∩ D(a, r)` point by sampled point. Membership in
/// `E_a` means `|x - h_a(t)|_∞ ≤ M t^m`, and when a model is attached also
/// `dist_∞(h_a(t), complement) ≥ M t^m` and `x ∈ E`.
pub fn check_cusp_inclusion(
    desc: &UpcDescriptor,
    set: Option<&CompactSetModel>,
    anchor: &Point,
    r: f64,
    bound_anchors: &[Point],
    grid: SampleGrid,
) -> Result<InclusionReport> {
    let image = pyramid_image(desc, anchor, r, bound_anchors, grid)?;
    Ok(inclusion_of(desc, set, anchor, &image, grid))
}

pub(crate) fn inclusion_of(
    desc: &UpcDescriptor,
    set: Option<&CompactSetModel>,
    anchor: &Point,
    image: &PyramidImage,
    grid: SampleGrid,
) -> InclusionReport {
    const T: f64 = MEMBERSHIP_TOL;
    let mut witnesses = Vec::new();
    for s in &image.samples {
        let h = desc.eval(anchor, s.t);
        let rad = desc.radius(s.t);
        let mut reasons = Vec::new();
        if s.point.dist_inf(&h) > rad + T {
            reasons.push(format!("outside the cube D(h_a(t), M t^m) of radius {rad:.6e}"));
        }
        if let Some(set) = set {
            let d = set.dist_unchecked(&h);
            if d < rad - T {
                reasons.push(format!("dist(h_a(t), complement) = {d:.6e} < M t^m = {rad:.6e}"));
            }
            if !set.contains_unchecked(&s.point) {
                reasons.push("point lies outside the set".into());
            }
        }
        if s.point.dist_inf(anchor) > image.r + T {
            reasons.push(format!("outside the cube D(a, r) with r = {}", image.r));
        }
        if !reasons.is_empty() {
            witnesses.push(InclusionWitness {
                t: s.t,
                u: Point::new(s.u.clone()).to_string(),
                point: s.point.to_string(),
                reason: reasons.join("; "),
            });
        }
    }
    InclusionReport {
        ok: witnesses.is_empty(),
        r: image.r,
        r_prime: image.r_prime,
        checked: image.samples.len(),
        grid,
        witnesses,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::generate_mesh;

    fn unit_interval() -> CompactSetModel {
        CompactSetModel::interval(0.0, 1.0).unwrap()
    }

    /// h_x(t) = (1 - t)x + t/2 on [0, 1], M = 1/2, m = 1.
    fn interval_desc() -> UpcDescriptor {
        UpcDescriptor::builtin(&unit_interval()).unwrap()
    }

    fn anchors(set: &CompactSetModel, d: usize) -> Vec<Point> {
        generate_mesh(set, d, 1.0).unwrap().points
    }

    #[test]
    fn builtin_interval_family_is_the_contraction_to_the_midpoint() {
        let u = interval_desc();
        assert_eq!(u.coef, 0.5);
        assert_eq!(u.m, 1);
        let h = u.eval(&Point::from(0.2), 0.5);
        assert!((h.coord(0).re - 0.35).abs() < 1e-15);
    }

    #[test]
    fn t_zero_slice_is_the_anchor() {
        let u = interval_desc();
        let a = Point::from(0.3);
        let pts = cusp_set_samples(&u, Some(&unit_interval()), &a, &[0.0], &SampleGrid::default().u_values()).unwrap();
        assert_eq!(pts, vec![a]);
    }

    #[test]
    fn interval_cusp_reaches_the_far_endpoint() {
        let u = interval_desc();
        let a = Point::from(0.0);
        let pts = cusp_set_samples(&u, Some(&unit_interval()), &a, &[1.0], &[1.0]).unwrap();
        assert_eq!(pts.len(), 1);
        assert!((pts[0].coord(0).re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn power_cusp_axis_family_on_a_restricted_grid() {
        // h(t) = (t, 0), M = 1/4, m = 2 leaves the cusp once t + t²/4 > 1, so
        // the t-grid stops at 0.8.
        let set = CompactSetModel::power_cusp(1.0, 2, 1.0).unwrap();
        let zero = Complex64::new(0.0, 0.0);
        let one = Complex64::new(1.0, 0.0);
        let u = UpcDescriptor {
            coef: 0.25,
            m: 2,
            degree: 1,
            ambient: Ambient::Real,
            coefficients: vec![
                AffineCoefficient {
                    matrix: vec![vec![1.0, 0.0], vec![0.0, 1.0]],
                    offset: vec![zero, zero],
                },
                AffineCoefficient {
                    matrix: vec![vec![0.0, 0.0], vec![0.0, 0.0]],
                    offset: vec![one, zero],
                },
            ],
        };
        let ts: Vec<f64> = (0..=40).map(|i| 0.8 * i as f64 / 40.0).collect();
        let pts = cusp_set_samples(&u, Some(&set), &Point::real(&[0.0, 0.0]), &ts, &SampleGrid::default().u_values())
            .unwrap();
        for p in &pts {
            let (x, y) = (p.coord(0).re, p.coord(1).re);
            assert!(y.abs() <= x * x + 1e-12);
        }
        // the full grid to t = 1 is a witness of the violation
        let full = cusp_set_samples(&u, Some(&set), &Point::real(&[0.0, 0.0]), &[1.0], &[1.0]);
        assert!(matches!(full, Err(Error::DescriptorInvalid { .. })));
    }

    #[test]
    fn builtin_cusp_family_validates() {
        let set = CompactSetModel::power_cusp(1.0, 2, 1.0).unwrap();
        let u = UpcDescriptor::builtin(&set).unwrap();
        assert!((u.coef - 1.0 / 12.0).abs() < 1e-15);
        let report = u.validate(&set, &anchors(&set, 4), SampleGrid::default()).unwrap();
        assert!(report.ok, "{:?}", report.witnesses.first());
    }

    #[test]
    fn builtin_families_validate_on_convex_models() {
        let tri = CompactSetModel::ConvexPolygon {
            vertices: vec![[0.0, 0.0], [2.0, 0.0], [0.0, 1.0]],
        };
        for set in [
            unit_interval(),
            CompactSetModel::unit_box(2),
            CompactSetModel::unit_disk(),
            tri,
        ] {
            let u = UpcDescriptor::builtin(&set).unwrap();
            let report = u.validate(&set, &anchors(&set, 3), SampleGrid::default()).unwrap();
            assert!(report.ok, "{}: {:?}", set.name(), report.witnesses.first());
        }
    }

    #[test]
    fn pyramid_radius_for_the_interval_family() {
        let u = interval_desc();
        let img = pyramid_image(&u, &Point::from(0.0), 1.0, &anchors(&unit_interval(), 2), SampleGrid::default())
            .unwrap();
        // B_0 = 1, B_1 = 1/2, d! = 1, M = 1/2
        assert_eq!(img.bounds.bounds, vec![1.0, 0.5]);
        assert!((img.r_prime - 1.0 / 3.0).abs() < 1e-15);
        let first = &img.samples[0];
        assert_eq!(first.t, 0.0);
        assert_eq!(first.point, Point::from(0.0));
    }

    #[test]
    fn pyramid_rejects_bad_radius() {
        let u = interval_desc();
        let a = anchors(&unit_interval(), 2);
        assert!(pyramid_image(&u, &Point::from(0.0), 0.0, &a, SampleGrid::default()).is_err());
        assert!(pyramid_image(&u, &Point::from(0.0), 1.5, &a, SampleGrid::default()).is_err());
    }

    #[test]
    fn inclusion_holds_and_detects_corruption() {
        let set = unit_interval();
        let u = interval_desc();
        let a = anchors(&set, 2);
        let rep = check_cusp_inclusion(&u, Some(&set), &Point::from(0.0), 1.0, &a, SampleGrid::default()).unwrap();
        assert!(rep.ok);
        assert_eq!(rep.checked, 64 * 16);

        let degenerate = SampleGrid { t_count: 1, u_count: 16 };
        let rep = check_cusp_inclusion(&u, Some(&set), &Point::from(0.0), 1.0, &a, degenerate).unwrap();
        assert!(rep.ok);

        let mut bad = u.clone();
        bad.coef *= 2.0;
        let rep = check_cusp_inclusion(&bad, Some(&set), &Point::from(0.0), 1.0, &a, SampleGrid::default()).unwrap();
        assert!(!rep.ok);
        assert!(!rep.witnesses.is_empty());
    }

    #[test]
    fn coefficient_bounds() {
        let set = unit_interval();
        let a = anchors(&set, 2);
        let constant = UpcDescriptor {
            coef: 0.5,
            m: 1,
            degree: 2,
            ambient: Ambient::Real,
            coefficients: vec![
                AffineCoefficient {
                    matrix: vec![vec![1.0]],
                    offset: vec![Complex64::new(0.0, 0.0)],
                },
                AffineCoefficient {
                    matrix: vec![vec![0.0]],
                    offset: vec![Complex64::new(0.0, 0.0)],
                },
                AffineCoefficient {
                    matrix: vec![vec![0.0]],
                    offset: vec![Complex64::new(0.0, 0.0)],
                },
            ],
        };
        let b = coefficient_bound(&constant, &a).unwrap();
        assert!((b.bounds[0] - 1.0).abs() < 1e-12);
        assert!(b.bounds[1] < 1e-12 && b.bounds[2] < 1e-12);

        let b = coefficient_bound(&interval_desc(), &a).unwrap();
        assert!((b.bounds[0] - 1.0).abs() < 1e-12);
        assert!((b.bounds[1] - 0.5).abs() < 1e-12);
        assert!(b.max_roundtrip_error < 1e-12);
    }

    #[test]
    fn coefficient_bound_needs_enough_anchors() {
        let u = interval_desc();
        assert!(coefficient_bound(&u, &[Point::from(0.0)]).is_err());
    }
}
