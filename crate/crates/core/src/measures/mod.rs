//! Fekete measures, closed-form equilibrium measures, Wasserstein-1 and
//! dist_γ brackets.

mod onedim;
mod transport;

use std::f64::consts::{PI, TAU};

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::fekete::{Configuration, FeketeProblem, Solver, SolverOptions};
use crate::geometry::{generate_mesh, CompactSetModel};
use crate::point::Point;

pub use transport::{transport, TransportPlan};

pub const DEFAULT_DICTIONARY_SIZE: usize = 64;
/// Atoms used to discretize a uniform circle measure when the other measure
/// does not live on that circle.
pub const CIRCLE_DISCRETIZATION: usize = 2048;
/// Gauss–Chebyshev nodes for integrals against arcsine measures.
const ARCSINE_NODES: usize = 2048;
/// Relative tolerance for atoms lying on a circle.
const ON_CIRCLE_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DiscreteMeasure {
    atoms: Vec<Point>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<Point>, weights: Vec<f64>) -> Result<Self> {
        if atoms.is_empty() || atoms.len() != weights.len() {
            return input("a discrete measure needs as many weights as atoms, at least one");
        }
        if weights.iter().any(|w| !(*w >= 0.0)) {
            return input("weights must be nonnegative");
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-12 {
            return input(format!("weights sum to {total}, expected 1"));
        }
        let dim = atoms[0].dim();
        if atoms.iter().any(|a| a.dim() != dim) {
            return input("atoms have mixed dimensions");
        }
        let mut sorted: Vec<&Point> = atoms.iter().collect();
        sorted.sort_by(|a, b| a.total_cmp(b));
        if sorted.windows(2).any(|w| w[0].total_cmp(w[1]).is_eq()) {
            return input("atoms must be distinct");
        }
        Ok(DiscreteMeasure { atoms, weights })
    }

    pub fn uniform(atoms: Vec<Point>) -> Result<Self> {
        let n = atoms.len();
        Self::new(atoms, vec![1.0 / n.max(1) as f64; n])
    }

    pub fn atoms(&self) -> &[Point] {
        &self.atoms
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.weights.iter().sum()
    }

    fn on_real_line(&self) -> bool {
        self.atoms.iter().all(|a| a.dim() == 1 && a.coord(0).im == 0.0)
    }

    fn on_circle(&self, center: Complex64, radius: f64) -> bool {
        self.atoms
            .iter()
            .all(|a| a.dim() == 1 && ((a.coord(0) - center).norm() - radius).abs() <= ON_CIRCLE_TOL * radius)
    }
}

/// `μ_d = (1/N_d) Σ δ_{ξ_j}`.
pub fn fekete_measure(config: &Configuration) -> DiscreteMeasure {
    DiscreteMeasure::uniform(config.points.clone()).expect("configuration points are distinct")
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MeasureDescriptor {
    /// Density `1/(π√((x−a)(b−x)))` on `[a, b]`.
    Arcsine { a: f64, b: f64 },
    UniformCircle { center: Complex64, radius: f64 },
    Discrete { measure: DiscreteMeasure },
    /// High-degree Fekete measure used when no closed form is known;
    /// `quality` is its distance to the measure at half the degree.
    EmpiricalReference { measure: DiscreteMeasure, degree: usize, quality: f64 },
}

impl MeasureDescriptor {
    pub fn kind(&self) -> &'static str {
        match self {
            MeasureDescriptor::Arcsine { .. } => "arcsine",
            MeasureDescriptor::UniformCircle { .. } => "uniform-circle",
            MeasureDescriptor::Discrete { .. } => "discrete",
            MeasureDescriptor::EmpiricalReference { .. } => "empirical-reference",
        }
    }

    pub fn discrete(measure: DiscreteMeasure) -> Self {
        MeasureDescriptor::Discrete { measure }
    }

    fn atoms(&self) -> Option<&DiscreteMeasure> {
        match self {
            MeasureDescriptor::Discrete { measure } | MeasureDescriptor::EmpiricalReference { measure, .. } => {
                Some(measure)
            }
            _ => None,
        }
    }

    /// One-dimensional CDF: in `x` for measures on the real line, in the
    /// angle `θ ∈ [0, 2π)` (from the positive axis) for the uniform circle
    /// measure. `None` for planar measures.
    pub fn cdf(&self, x: f64) -> Option<f64> {
        match self {
            MeasureDescriptor::Arcsine { a, b } => Some(onedim::arcsine_cdf(*a, *b, x)),
            MeasureDescriptor::UniformCircle { .. } => Some((x / TAU).clamp(0.0, 1.0)),
            _ => {
                let m = self.atoms()?;
                if !m.on_real_line() {
                    return None;
                }
                Some(
                    m.atoms
                        .iter()
                        .zip(&m.weights)
                        .filter(|(p, _)| p.coord(0).re <= x)
                        .map(|(_, w)| w)
                        .sum::<f64>()
                        .min(1.0),
                )
            }
        }
    }
}

/// Classical equilibrium measures: arcsine for intervals, uniform on the
/// boundary circle for disks and circles.
pub fn equilibrium_closed_form(set: &CompactSetModel) -> Result<MeasureDescriptor> {
    match set {
        CompactSetModel::Interval { a, b } => Ok(MeasureDescriptor::Arcsine { a: *a, b: *b }),
        CompactSetModel::Disk { center, radius } | CompactSetModel::Circle { center, radius } => {
            Ok(MeasureDescriptor::UniformCircle {
                center: Complex64::new(center[0], center[1]),
                radius: *radius,
            })
        }
        other => Err(Error::NoClosedForm(other.name().to_string())),
    }
}

/// Where a pair of measures lives, which decides how distances are computed.
#[derive(Clone, Copy, Debug, PartialEq)]
enum Ambient1d {
    Line,
    Circle(Complex64, f64),
}

fn common_1d(mu: &MeasureDescriptor, nu: &MeasureDescriptor) -> Option<Ambient1d> {
    let circle = |m: &MeasureDescriptor| match m {
        MeasureDescriptor::UniformCircle { center, radius } => Some((*center, *radius)),
        _ => None,
    };
    let line_ok = |m: &MeasureDescriptor| match m {
        MeasureDescriptor::Arcsine { .. } => true,
        MeasureDescriptor::UniformCircle { .. } => false,
        _ => m.atoms().is_some_and(|d| d.on_real_line()),
    };
    match (circle(mu), circle(nu)) {
        (Some(a), Some(b)) => (a == b).then_some(Ambient1d::Circle(a.0, a.1)),
        (Some((c, r)), None) => nu.atoms().filter(|d| d.on_circle(c, r)).map(|_| Ambient1d::Circle(c, r)),
        (None, Some((c, r))) => mu.atoms().filter(|d| d.on_circle(c, r)).map(|_| Ambient1d::Circle(c, r)),
        (None, None) => (line_ok(mu) && line_ok(nu)).then_some(Ambient1d::Line),
    }
}

/// Exact W1 on the real line or on a common circle (arc-length metric,
/// optimized over the rotation offset).
pub fn wasserstein1_1d(mu: &MeasureDescriptor, nu: &MeasureDescriptor) -> Result<f64> {
    match common_1d(mu, nu) {
        Some(Ambient1d::Line) => Ok(onedim::line_w1(&onedim::LineCdf::of(mu)?, &onedim::LineCdf::of(nu)?)),
        Some(Ambient1d::Circle(c, r)) => Ok(onedim::circle_w1(mu, nu, c, r)),
        None => input(format!(
            "{} and {} do not share a line or circle parameterization",
            mu.kind(),
            nu.kind()
        )),
    }
}

fn circle_atoms(center: Complex64, radius: f64, count: usize) -> DiscreteMeasure {
    // midpoints of equal arcs starting at angle 0
    let atoms = (0..count)
        .map(|k| Point::scalar(center + Complex64::from_polar(radius, TAU * (k as f64 + 0.5) / count as f64)))
        .collect();
    DiscreteMeasure::uniform(atoms).expect("distinct")
}

/// Planar stand-in for a measure plus the W1 error that stand-in introduces.
fn planar(m: &MeasureDescriptor) -> Result<(DiscreteMeasure, f64)> {
    match m {
        MeasureDescriptor::UniformCircle { center, radius } => {
            let n = CIRCLE_DISCRETIZATION;
            Ok((circle_atoms(*center, *radius, n), PI * radius / (2.0 * n as f64)))
        }
        MeasureDescriptor::Arcsine { .. } => input("an arcsine measure cannot be compared in the plane"),
        _ => Ok((m.atoms().expect("discrete").clone(), 0.0)),
    }
}

/// W1 in any supported geometry: exact on the line and circle, exact
/// discrete transport otherwise (uniform circles discretized, the
/// discretization error added).
pub fn wasserstein1(mu: &MeasureDescriptor, nu: &MeasureDescriptor) -> Result<f64> {
    if common_1d(mu, nu).is_some() {
        return wasserstein1_1d(mu, nu);
    }
    let (a, ea) = planar(mu)?;
    let (b, eb) = planar(nu)?;
    if a.atoms[0].dim() != b.atoms[0].dim() {
        return Err(Error::Dimension {
            expected: a.atoms[0].dim(),
            got: b.atoms[0].dim(),
        });
    }
    Ok(transport(&a.atoms, &a.weights, &b.atoms, &b.weights).cost + ea + eb)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DistGamma {
    pub lower: f64,
    pub upper: f64,
    pub w1: f64,
}

/// `‖cos(ω·)‖_γ` and `‖sin(ω·)‖_γ` bound: sup-norm plus Hölder seminorm
/// (γ ≤ 1), or sup + sup|v′| + (γ−1)-seminorm of v′ (γ > 1).
fn trig_norm(omega: f64, gamma: f64) -> f64 {
    if gamma <= 1.0 {
        1.0 + 2f64.powf(1.0 - gamma) * omega.powf(gamma)
    } else {
        1.0 + omega + 2f64.powf(2.0 - gamma) * omega.powf(gamma)
    }
}

/// Norm bound for a 1-Lipschitz function of oscillation ≤ h, centered.
fn potential_norm(h: f64, gamma: f64) -> f64 {
    h / 2.0 + h.powf(1.0 - gamma)
}

/// Integrals of a batch of test functions against a measure, in the
/// measure's own 1-D or planar coordinates.
trait Integrator {
    fn integrate(&self, f: &(dyn Fn(&Point) -> f64 + Sync)) -> f64;
}

impl Integrator for DiscreteMeasure {
    fn integrate(&self, f: &(dyn Fn(&Point) -> f64 + Sync)) -> f64 {
        self.atoms.iter().zip(&self.weights).map(|(a, w)| w * f(a)).sum()
    }
}

struct ArcsineRule(DiscreteMeasure);

impl ArcsineRule {
    /// Gauss–Chebyshev rule: exact for polynomials of degree < 2·nodes.
    fn new(a: f64, b: f64) -> Self {
        let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
        let n = ARCSINE_NODES;
        let atoms = (1..=n)
            .map(|j| Point::from(m + h * ((2 * j - 1) as f64 * PI / (2 * n) as f64).cos()))
            .collect();
        ArcsineRule(DiscreteMeasure {
            atoms,
            weights: vec![1.0 / n as f64; n],
        })
    }
}

fn integrator(m: &MeasureDescriptor) -> Box<dyn Integrator + Sync + '_> {
    match m {
        MeasureDescriptor::Arcsine { a, b } => Box::new(ArcsineRule::new(*a, *b).0),
        MeasureDescriptor::UniformCircle { center, radius } => {
            // trapezoid rule: spectrally accurate for the smooth periodic
            // dictionary
            Box::new(circle_atoms(*center, *radius, CIRCLE_DISCRETIZATION))
        }
        _ => Box::new(m.atoms().expect("discrete").clone()),
    }
}

/// Dictionary of test functions `v(x) = trig(ω·s(x))` with certified norm.
struct Dict {
    funcs: Vec<(Box<dyn Fn(&Point) -> f64 + Send + Sync>, f64)>,
}

fn line_dictionary(lo: f64, hi: f64, k_max: usize, gamma: f64) -> Dict {
    let h = hi - lo;
    let mut funcs: Vec<(Box<dyn Fn(&Point) -> f64 + Send + Sync>, f64)> = Vec::new();
    for k in 1..=k_max {
        let w = 2.0 * k as f64 * PI / h;
        let mid = (lo + hi) / 2.0;
        let norm = trig_norm(w, gamma);
        funcs.push((Box::new(move |p: &Point| (w * (p.coord(0).re - mid)).cos()), norm));
        funcs.push((Box::new(move |p: &Point| (w * (p.coord(0).re - mid)).sin()), norm));
    }
    Dict { funcs }
}

fn circle_dictionary(center: Complex64, radius: f64, k_max: usize, gamma: f64) -> Dict {
    let mut funcs: Vec<(Box<dyn Fn(&Point) -> f64 + Send + Sync>, f64)> = Vec::new();
    for k in 1..=k_max {
        let kf = k as f64;
        let norm = trig_norm(kf / radius, gamma);
        funcs.push((Box::new(move |p: &Point| (kf * (p.coord(0) - center).arg()).cos()), norm));
        funcs.push((Box::new(move |p: &Point| (kf * (p.coord(0) - center).arg()).sin()), norm));
    }
    Dict { funcs }
}

/// Real coordinates of a point of ℂⁿ as a vector of ℝ^{2n}.
fn flat(p: &Point) -> Vec<f64> {
    p.coords().iter().flat_map(|z| [z.re, z.im]).collect()
}

fn planar_dictionary(atoms: &[&Point], k_max: usize, gamma: f64) -> Dict {
    let dim = 2 * atoms[0].dim();
    let mut dirs: Vec<Vec<f64>> = Vec::new();
    for i in 0..dim {
        let mut e = vec![0.0; dim];
        e[i] = 1.0;
        dirs.push(e);
        for j in i + 1..dim {
            for s in [1.0, -1.0] {
                let mut e = vec![0.0; dim];
                e[i] = 1.0 / 2f64.sqrt();
                e[j] = s / 2f64.sqrt();
                dirs.push(e);
            }
        }
    }
    let mut funcs: Vec<(Box<dyn Fn(&Point) -> f64 + Send + Sync>, f64)> = Vec::new();
    for u in dirs {
        let proj = |p: &Point| flat(p).iter().zip(&u).map(|(a, b)| a * b).sum::<f64>();
        let (lo, hi) = atoms
            .iter()
            .map(|p| proj(p))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x)));
        if !(hi > lo) {
            continue;
        }
        for k in 1..=k_max {
            let w = 2.0 * k as f64 * PI / (hi - lo);
            let mid = (lo + hi) / 2.0;
            let norm = trig_norm(w, gamma);
            let u1 = u.clone();
            let u2 = u.clone();
            funcs.push((
                Box::new(move |p: &Point| {
                    (w * (flat(p).iter().zip(&u1).map(|(a, b)| a * b).sum::<f64>() - mid)).cos()
                }),
                norm,
            ));
            funcs.push((
                Box::new(move |p: &Point| {
                    (w * (flat(p).iter().zip(&u2).map(|(a, b)| a * b).sum::<f64>() - mid)).sin()
                }),
                norm,
            ));
        }
    }
    Dict { funcs }
}

fn dictionary_lower(dict: &Dict, mu: &MeasureDescriptor, nu: &MeasureDescriptor) -> f64 {
    let (im, inu) = (integrator(mu), integrator(nu));
    dict.funcs
        .par_iter()
        .map(|(f, norm)| (im.integrate(f.as_ref()) - inu.integrate(f.as_ref())).abs() / norm)
        .reduce(|| 0.0, f64::max)
}

fn support_hull(m: &MeasureDescriptor) -> (f64, f64) {
    match m {
        MeasureDescriptor::Arcsine { a, b } => (*a, *b),
        _ => m
            .atoms()
            .expect("line measure")
            .atoms
            .iter()
            .map(|p| p.coord(0).re)
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), x| (l.min(x), h.max(x))),
    }
}

/// Bracket `lower ≤ dist_γ(μ, ν) ≤ upper`.
///
/// Lower: best of a dictionary of rescaled sines/cosines (`dictionary_size`
/// frequencies) and, for γ ≤ 1, the Kantorovich potential of the W1 problem;
/// norms are the full `C^γ` norms (sup-norm included). Upper: `W1` for
/// γ ≥ 1 and `W1^γ` for γ < 1 (Hölder bound under an optimal coupling plus
/// Jensen).
pub fn dist_gamma(mu: &MeasureDescriptor, nu: &MeasureDescriptor, gamma: f64, dictionary_size: usize) -> Result<DistGamma> {
    if !(gamma > 0.0 && gamma <= 2.0) {
        return input(format!("γ must lie in (0, 2], got {gamma}"));
    }
    let (w1, dict, pot) = match common_1d(mu, nu) {
        Some(Ambient1d::Line) => {
            let w1 = wasserstein1_1d(mu, nu)?;
            let (l1, h1) = support_hull(mu);
            let (l2, h2) = support_hull(nu);
            let (lo, hi) = (l1.min(l2), h1.max(h2));
            let dict = (hi > lo).then(|| line_dictionary(lo, hi, dictionary_size, gamma));
            (w1, dict, (hi > lo).then(|| w1 / potential_norm(hi - lo, gamma)))
        }
        Some(Ambient1d::Circle(c, r)) => {
            let w1 = wasserstein1_1d(mu, nu)?;
            let dict = Some(circle_dictionary(c, r, dictionary_size, gamma));
            (w1, dict, Some(w1 / potential_norm(PI * r, gamma)))
        }
        None => {
            let (a, ea) = planar(mu)?;
            let (b, eb) = planar(nu)?;
            let plan = transport(&a.atoms, &a.weights, &b.atoms, &b.weights);
            let all: Vec<&Point> = a.atoms.iter().chain(&b.atoms).collect();
            let diam = all
                .par_iter()
                .map(|p| all.iter().map(|q| p.dist(q)).fold(0.0, f64::max))
                .reduce(|| 0.0, f64::max);
            let dual = a.weights.iter().zip(&plan.potential_src).map(|(w, f)| w * f).sum::<f64>()
                - b.weights.iter().zip(&plan.potential_dst).map(|(w, f)| w * f).sum::<f64>();
            let pot = (diam > 0.0).then(|| (dual - ea - eb).max(0.0) / potential_norm(diam, gamma));
            let dict = (diam > 0.0).then(|| planar_dictionary(&all, dictionary_size, gamma));
            (plan.cost + ea + eb, dict, pot)
        }
    };
    let mut lower = dict.map_or(0.0, |d| dictionary_lower(&d, mu, nu));
    if gamma <= 1.0 {
        lower = lower.max(pot.unwrap_or(0.0));
    }
    let upper = if gamma >= 1.0 { w1 } else { w1.powf(gamma) };
    assert!(
        lower <= upper * (1.0 + 1e-9) + 1e-12,
        "dist_gamma bracket inverted: {lower} > {upper}"
    );
    Ok(DistGamma {
        lower: lower.min(upper),
        upper,
        w1,
    })
}

/// High-degree Fekete measure (greedy + exchange) standing in for the
/// equilibrium measure, with its distance to the degree-`degree/2` measure.
pub fn empirical_reference(set: &CompactSetModel, degree: usize, density: f64) -> Result<MeasureDescriptor> {
    if degree < 2 {
        return input("reference degree must be >= 2");
    }
    let measure_at = |d: usize| -> Result<DiscreteMeasure> {
        let mesh = generate_mesh(set, d, density)?;
        let problem = FeketeProblem::new(&mesh, d)?;
        Ok(fekete_measure(&Solver::GreedyRefine.solve(&problem, SolverOptions::default())?))
    };
    let top = measure_at(degree)?;
    let half = measure_at(degree / 2)?;
    let quality = wasserstein1(&MeasureDescriptor::discrete(top.clone()), &MeasureDescriptor::discrete(half))?;
    Ok(MeasureDescriptor::EmpiricalReference {
        measure: top,
        degree,
        quality,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(xs: &[f64]) -> MeasureDescriptor {
        MeasureDescriptor::discrete(DiscreteMeasure::uniform(xs.iter().map(|&x| Point::from(x)).collect()).unwrap())
    }

    fn arcsine() -> MeasureDescriptor {
        MeasureDescriptor::Arcsine { a: -1.0, b: 1.0 }
    }

    #[test]
    fn measure_validation() {
        assert!(DiscreteMeasure::new(vec![Point::from(0.0)], vec![0.5]).is_err());
        assert!(DiscreteMeasure::uniform(vec![Point::from(0.0), Point::from(0.0)]).is_err());
        let m = DiscreteMeasure::uniform(vec![Point::from(-1.0), Point::from(0.0), Point::from(1.0)]).unwrap();
        assert!((m.total_mass() - 1.0).abs() < 1e-15);
        assert!(m.weights().iter().all(|&w| (w - 1.0 / 3.0).abs() < 1e-16));
    }

    #[test]
    fn arcsine_cdf_values() {
        let a = arcsine();
        assert_eq!(a.cdf(0.0), Some(0.5));
        assert!((a.cdf(0.5).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert_eq!(a.cdf(-2.0), Some(0.0));
        assert_eq!(a.cdf(1.0), Some(1.0));
        // quadrature of the density on [0, 1/2]
        let n = 200_000;
        let h = 0.5 / n as f64;
        let q: f64 = (0..n)
            .map(|i| {
                let x = (i as f64 + 0.5) * h;
                h / (PI * (1.0 - x * x).sqrt())
            })
            .sum();
        assert!((0.5 + q - 2.0 / 3.0).abs() < 1e-10);
        let xs: Vec<f64> = (0..=100).map(|i| -1.2 + 2.4 * i as f64 / 100.0).collect();
        assert!(xs.windows(2).all(|w| a.cdf(w[0]) <= a.cdf(w[1])));
    }

    #[test]
    fn closed_forms() {
        assert!(matches!(
            equilibrium_closed_form(&CompactSetModel::interval(-1.0, 1.0).unwrap()),
            Ok(MeasureDescriptor::Arcsine { .. })
        ));
        let c = equilibrium_closed_form(&CompactSetModel::unit_circle()).unwrap();
        assert_eq!(c.cdf(PI), Some(0.5));
        assert!(matches!(
            equilibrium_closed_form(&CompactSetModel::unit_box(2)),
            Err(Error::NoClosedForm(_))
        ));
    }

    #[test]
    fn w1_trivial_cases() {
        assert_eq!(wasserstein1_1d(&disc(&[0.0]), &disc(&[1.0])).unwrap(), 1.0);
        assert_eq!(wasserstein1_1d(&arcsine(), &arcsine()).unwrap(), 0.0);
        assert_eq!(wasserstein1_1d(&disc(&[0.1, 0.7]), &disc(&[0.1, 0.7])).unwrap(), 0.0);
        let circle = MeasureDescriptor::UniformCircle {
            center: Complex64::new(0.0, 0.0),
            radius: 1.0,
        };
        assert!(wasserstein1_1d(&arcsine(), &circle).is_err());
    }

    #[test]
    fn w1_three_points_vs_arcsine_matches_quadrature() {
        let got = wasserstein1_1d(&disc(&[-1.0, 0.0, 1.0]), &arcsine()).unwrap();
        let n = 1_000_000;
        let h = 2.0 / n as f64;
        let f = |x: f64| if x < 0.0 { 1.0 / 3.0 } else { 2.0 / 3.0 };
        let q: f64 = (0..n)
            .map(|i| {
                let x = -1.0 + (i as f64 + 0.5) * h;
                (f(x) - (0.5 + x.asin() / PI)).abs() * h
            })
            .sum();
        assert!((got - q).abs() < 1e-8, "{got} vs {q}");
        // 30-digit adaptive quadrature of the same integrand
        assert!((got - 0.200_628_648_190_663_91).abs() < 1e-13, "{got:.16}");
    }

    #[test]
    fn circle_w1_of_equispaced_atoms() {
        for n in [3usize, 6, 7] {
            let atoms = (0..n)
                .map(|k| Point::scalar(Complex64::from_polar(2.0, 0.3 + TAU * k as f64 / n as f64)))
                .collect();
            let mu = MeasureDescriptor::discrete(DiscreteMeasure::uniform(atoms).unwrap());
            let nu = MeasureDescriptor::UniformCircle {
                center: Complex64::new(0.0, 0.0),
                radius: 2.0,
            };
            let w = wasserstein1_1d(&mu, &nu).unwrap();
            assert!((w - 2.0 * PI / (2.0 * n as f64)).abs() < 1e-12, "n={n}: {w}");
        }
    }

    #[test]
    fn dist_gamma_brackets() {
        let z = dist_gamma(&disc(&[0.2, 0.5]), &disc(&[0.2, 0.5]), 0.5, 16).unwrap();
        assert_eq!((z.lower, z.upper), (0.0, 0.0));
        let p = dist_gamma(&disc(&[0.0]), &disc(&[1.0]), 1.0, 64).unwrap();
        assert_eq!(p.upper, 1.0);
        // the full-norm supremum is 2/3, attained by the centered potential
        assert!((p.lower - 2.0 / 3.0).abs() < 1e-12, "{}", p.lower);
        for g in [0.3, 1.0, 1.5, 2.0] {
            let d = dist_gamma(&disc(&[-1.0, 0.0, 1.0]), &arcsine(), g, 64).unwrap();
            assert!(d.lower <= d.upper && d.lower > 0.0);
            if g >= 1.0 {
                assert_eq!(d.upper, d.w1);
            }
        }
        assert!(dist_gamma(&arcsine(), &arcsine(), 2.5, 8).is_err());
        assert!(dist_gamma(&arcsine(), &arcsine(), 0.0, 8).is_err());
    }

    #[test]
    fn planar_distances() {
        let a = MeasureDescriptor::discrete(
            DiscreteMeasure::uniform(vec![Point::real(&[0.0, 0.0]), Point::real(&[1.0, 0.0])]).unwrap(),
        );
        let b = MeasureDescriptor::discrete(DiscreteMeasure::uniform(vec![Point::real(&[0.5, 1.0])]).unwrap());
        let w = wasserstein1(&a, &b).unwrap();
        assert!((w - 1.25f64.sqrt()).abs() < 1e-12);
        let d = dist_gamma(&a, &b, 0.7, 8).unwrap();
        assert!(d.lower > 0.0 && d.lower <= d.upper);
        assert!((d.upper - w.powf(0.7)).abs() < 1e-12);
    }

    #[test]
    fn disk_interior_atoms_fall_back_to_transport() {
        let mu = MeasureDescriptor::discrete(
            DiscreteMeasure::uniform(vec![Point::scalar(Complex64::new(0.0, 0.0))]).unwrap(),
        );
        let nu = MeasureDescriptor::UniformCircle {
            center: Complex64::new(0.0, 0.0),
            radius: 1.0,
        };
        let w = wasserstein1(&mu, &nu).unwrap();
        assert!(w >= 1.0 && w <= 1.0 + PI / (2.0 * CIRCLE_DISCRETIZATION as f64) + 1e-12);
    }

    #[test]
    fn reference_beats_low_degree_measure() {
        let k = CompactSetModel::interval(-1.0, 1.0).unwrap();
        let r = empirical_reference(&k, 40, 1.0).unwrap();
        let MeasureDescriptor::EmpiricalReference { measure, quality, .. } = &r else {
            panic!("kind")
        };
        assert!((measure.total_mass() - 1.0).abs() < 1e-12);
        assert!(*quality > 0.0);
        let mesh = generate_mesh(&k, 10, 1.0).unwrap();
        let c10 = Solver::GreedyRefine
            .solve(&FeketeProblem::new(&mesh, 10).unwrap(), SolverOptions::default())
            .unwrap();
        let d10 = wasserstein1_1d(&MeasureDescriptor::discrete(fekete_measure(&c10)), &arcsine()).unwrap();
        let d40 = wasserstein1_1d(&MeasureDescriptor::discrete(measure.clone()), &arcsine()).unwrap();
        assert!(d40 < d10, "{d40} vs {d10}");
    }
}
