//! Lagrange brackets for the Siciak–Zaharjuta extremal function, sampled
//! moduli of continuity, local HCP fits and two inequality probes.

use std::f64::consts::TAU;

use nalgebra::{DMatrix, DVector, Dyn, LU};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{input, Error, Result};
use crate::fekete::{Configuration, FeketeProblem, Solver, SolverOptions};
use crate::geometry::{generate_mesh, CandidateMesh, CompactSetModel};
use crate::point::Point;
use crate::polyspace::{log_abs_det, vandermonde, MultiIndexBasis, Weight};

/// Hard tolerance on `lower ≤ upper`.
pub const BRACKET_TOL: f64 = 1e-9;

/// `log|z + √(z²−1)|`, the extremal function of `[-1, 1]`.
pub fn interval_green(z: Complex64) -> f64 {
    let w = z + (z - 1.0).sqrt() * (z + 1.0).sqrt();
    w.norm().ln().abs()
}

/// Lagrange interpolation data at a configuration, with mesh sup-norms of
/// the fundamental polynomials.
pub struct ExtremalEstimate {
    pub degree: usize,
    pub config: Configuration,
    pub mesh_spacing: f64,
    /// `‖ℓ_j‖` over the mesh (and the configuration itself).
    pub sup_norms: Vec<f64>,
    /// `(1/d)·log max_j ‖ℓ_j‖_fine / ‖ℓ_j‖_mesh`; zero without a fine mesh.
    pub defect: f64,
    basis: MultiIndexBasis,
    lu: LU<Complex64, Dyn, Dyn>,
}

impl std::fmt::Debug for ExtremalEstimate {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ExtremalEstimate")
            .field("degree", &self.degree)
            .field("n_d", &self.sup_norms.len())
            .field("mesh_spacing", &self.mesh_spacing)
            .field("defect", &self.defect)
            .finish()
    }
}

fn sup_norms(lu: &LU<Complex64, Dyn, Dyn>, basis: &MultiIndexBasis, points: &[Point]) -> Vec<f64> {
    let n = basis.len();
    points
        .par_iter()
        .map(|x| {
            let l = lu.solve(&DVector::from_vec(basis.eval(x))).expect("invertible");
            l.iter().map(|c| c.norm()).collect::<Vec<f64>>()
        })
        .reduce(|| vec![0.0; n], |a, b| a.iter().zip(&b).map(|(x, y)| x.max(*y)).collect())
}

impl ExtremalEstimate {
    /// Interpolation data at `config`, sup-norms over `mesh`; `fine`, when
    /// given, estimates how much the mesh underestimates the norms.
    pub fn new(config: Configuration, mesh: &CandidateMesh, fine: Option<&CandidateMesh>) -> Result<Self> {
        let d = config.degree;
        if d < 1 {
            return input("extremal brackets need degree >= 1");
        }
        let basis = MultiIndexBasis::well_conditioned(mesh.dim(), d, mesh)?;
        if config.points.len() != basis.len() {
            return Err(Error::Shape(format!(
                "configuration has {} points, N_d = {}",
                config.points.len(),
                basis.len()
            )));
        }
        let v = vandermonde(&basis, &config.points, &Weight::Zero, 0.0, true)?;
        if log_abs_det(&v)? == f64::NEG_INFINITY {
            return Err(Error::DegenerateConfiguration("interpolation matrix is singular".into()));
        }
        let n = basis.len();
        let lu = DMatrix::from_fn(n, n, |i, j| v.entry(i, j)).lu();
        if !lu.is_invertible() {
            return Err(Error::DegenerateConfiguration("interpolation matrix is singular".into()));
        }
        let mut pts = mesh.points.clone();
        pts.extend(config.points.iter().cloned());
        let norms = sup_norms(&lu, &basis, &pts);
        let defect = match fine {
            Some(f) => {
                let fine_norms = sup_norms(&lu, &basis, &f.points);
                let worst = fine_norms
                    .iter()
                    .zip(&norms)
                    .map(|(a, b)| a / b)
                    .fold(1.0, f64::max);
                worst.ln() / d as f64
            }
            None => 0.0,
        };
        Ok(ExtremalEstimate {
            degree: d,
            mesh_spacing: mesh.spacing,
            sup_norms: norms,
            defect,
            config,
            basis,
            lu,
        })
    }

    /// Mesh at `density`, configuration by `solver`, defect from a mesh of
    /// twice the density.
    pub fn from_set(
        set: &CompactSetModel,
        degree: usize,
        density: f64,
        solver: Solver,
        opts: SolverOptions,
    ) -> Result<Self> {
        let mesh = generate_mesh(set, degree, density)?;
        let fine = generate_mesh(set, degree, 2.0 * density)?;
        let problem = FeketeProblem::new(&mesh, degree)?;
        let config = solver.solve(&problem, opts)?;
        Self::new(config, &mesh, Some(&fine))
    }

    /// `(1/d)·log N_d + defect`.
    pub fn slack(&self) -> f64 {
        (self.sup_norms.len() as f64).ln() / self.degree as f64 + self.defect
    }

    pub fn lagrange(&self, z: &Point) -> Result<Vec<Complex64>> {
        if z.dim() != self.basis.n() {
            return Err(Error::Dimension {
                expected: self.basis.n(),
                got: z.dim(),
            });
        }
        let l = self
            .lu
            .solve(&DVector::from_vec(self.basis.eval(z)))
            .ok_or_else(|| Error::DegenerateConfiguration("interpolation matrix is singular".into()))?;
        Ok(l.iter().copied().collect())
    }

    /// `(lower, upper)` at `z`.
    pub fn bracket(&self, z: &Point) -> Result<(f64, f64)> {
        let l = self.lagrange(z)?;
        let d = self.degree as f64;
        let lower = l
            .iter()
            .zip(&self.sup_norms)
            .map(|(c, s)| c.norm() / s)
            .fold(0.0, f64::max)
            .ln()
            / d;
        let big = self.sup_norms.iter().copied().fold(1.0, f64::max);
        let upper = (l.iter().map(|c| c.norm()).sum::<f64>() * big).ln() / d;
        assert!(lower <= upper + BRACKET_TOL, "bracket inverted at {z}: {lower} > {upper}");
        Ok((lower, upper))
    }

    pub fn lower(&self, z: &Point) -> Result<f64> {
        Ok(self.bracket(z)?.0)
    }

    pub fn upper(&self, z: &Point) -> Result<f64> {
        Ok(self.bracket(z)?.1)
    }

    pub fn midpoint(&self, z: &Point) -> Result<f64> {
        let (l, u) = self.bracket(z)?;
        Ok(0.5 * (l + u))
    }
}

/// Bracket of `L_K(z)` from a configuration and the mesh it came from.
pub fn extremal_bracket(config: &Configuration, mesh: &CandidateMesh, z: &Point) -> Result<(f64, f64)> {
    ExtremalEstimate::new(config.clone(), mesh, None)?.bracket(z)
}

#[derive(Clone, Debug, Serialize)]
pub struct ModulusSamples {
    pub anchor: Vec<f64>,
    pub r: f64,
    pub degree: usize,
    pub slack: f64,
    /// `(δ, ϖ̂(a, δ))`, δ increasing.
    pub samples: Vec<(f64, f64)>,
}

/// Unit directions of ℂⁿ used to sample spheres: `±e_k`, `(±e_k ± e_l)/√2`,
/// each rotated through `phases` angles.
fn directions(n: usize, phases: usize) -> Vec<Vec<Complex64>> {
    let mut real: Vec<Vec<f64>> = Vec::new();
    for k in 0..n {
        for s in [1.0, -1.0] {
            let mut v = vec![0.0; n];
            v[k] = s;
            real.push(v);
        }
        for l in k + 1..n {
            for (s, t) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut v = vec![0.0; n];
                v[k] = s / 2f64.sqrt();
                v[l] = t / 2f64.sqrt();
                real.push(v);
            }
        }
    }
    let mut out = Vec::new();
    for p in 0..phases {
        let rot = Complex64::from_polar(1.0, TAU * p as f64 / phases as f64);
        for v in &real {
            out.push(v.iter().map(|&x| rot * x).collect());
        }
    }
    out
}

const BALL_RADII: [f64; 4] = [0.25, 0.5, 0.75, 1.0];

/// `sup_{|z − a| ≤ δ} upper(z)` on a sphere-and-ball grid.
fn ball_sup(est: &ExtremalEstimate, anchor: &Point, delta: f64, dirs: &[Vec<Complex64>]) -> Result<f64> {
    let mut zs = vec![anchor.clone()];
    for f in BALL_RADII {
        for u in dirs {
            let z = Point::new(anchor.coords().iter().zip(u).map(|(a, c)| a + c * (f * delta)).collect());
            zs.push(z);
        }
    }
    let vals: Result<Vec<f64>> = zs.par_iter().map(|z| est.upper(z)).collect();
    Ok(vals?.into_iter().fold(f64::NEG_INFINITY, f64::max))
}

fn phases_for(n: usize) -> usize {
    if n == 1 {
        32
    } else {
        12
    }
}

/// ϖ̂(a, δ) for each δ (sorted increasing, cumulative max over the nested
/// balls) using the upper evaluator of `est`.
pub fn sample_modulus(est: &ExtremalEstimate, anchor: &Point, deltas: &[f64]) -> Result<Vec<(f64, f64)>> {
    let mut ds = deltas.to_vec();
    ds.sort_by(f64::total_cmp);
    let dirs = directions(anchor.dim(), phases_for(anchor.dim()));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(ds.len());
    let mut running = f64::NEG_INFINITY;
    for d in ds {
        running = running.max(ball_sup(est, anchor, d, &dirs)?);
        out.push((d, running));
    }
    assert!(out.windows(2).all(|w| w[0].1 <= w[1].1));
    Ok(out)
}

/// Samples `ϖ′_{K∩B(a,r)}(a, δ)` from a degree-`degree` configuration on a
/// mesh of `K ∩ B(a, r)`.
pub fn modulus_of_continuity(
    set: &CompactSetModel,
    anchor: &Point,
    r: f64,
    deltas: &[f64],
    degree: usize,
    solver: Solver,
    density: f64,
) -> Result<ModulusSamples> {
    if !(r > 0.0) {
        return input(format!("radius must be positive, got {r}"));
    }
    if deltas.is_empty() || deltas.iter().any(|&d| !(d > 0.0 && d <= 1.0)) {
        return input("δ-grid must be non-empty and inside (0, 1]");
    }
    if !set.contains(anchor)? {
        return input(format!("anchor {anchor} is not in the set"));
    }
    let local = CompactSetModel::ball_section(set.clone(), anchor, r)?;
    let thin = |e: Error| match e {
        Error::DegenerateMesh(m) | Error::DegenerateSet(m) => {
            Error::DegenerateSet(format!("K ∩ B(a, {r}) is too thin for degree {degree}: {m}"))
        }
        other => other,
    };
    let est = ExtremalEstimate::from_set(&local, degree, density, solver, SolverOptions::default()).map_err(thin)?;
    let samples = sample_modulus(&est, anchor, deltas)?;
    Ok(ModulusSamples {
        anchor: anchor.coords().iter().map(|c| c.re).collect(),
        r,
        degree,
        slack: est.slack(),
        samples,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct HcpFit {
    pub mu: f64,
    pub q: f64,
    pub c: f64,
    pub residuals: Vec<f64>,
    pub max_residual: f64,
    pub used: usize,
    pub excluded: usize,
}

/// Least-squares fit of `log ϖ̂ ≈ log C + μ·log δ − q·log r`.
pub fn hcp_fit(samples: &[ModulusSamples]) -> Result<HcpFit> {
    let mut radii: Vec<f64> = samples.iter().map(|s| s.r).collect();
    radii.sort_by(f64::total_cmp);
    radii.dedup();
    if radii.len() < 2 {
        return Err(Error::Fit("need samples at two or more radii".into()));
    }
    if samples.iter().any(|s| s.samples.len() < 4) {
        return Err(Error::Fit("need four or more δ-points per radius".into()));
    }
    let mut rows = Vec::new();
    let mut excluded = 0;
    for s in samples {
        for &(d, w) in &s.samples {
            if w > 0.0 && w.is_finite() {
                rows.push((d.ln(), s.r.ln(), w.ln()));
            } else {
                excluded += 1;
            }
        }
    }
    if excluded > 0 {
        log::warn!("hcp_fit: excluded {excluded} non-positive samples");
    }
    if rows.len() < 3 {
        return Err(Error::Fit(format!("only {} usable samples", rows.len())));
    }
    let a = DMatrix::from_fn(rows.len(), 3, |i, j| match j {
        0 => 1.0,
        1 => rows[i].0,
        _ => -rows[i].1,
    });
    let b = DVector::from_iterator(rows.len(), rows.iter().map(|r| r.2));
    let x = a
        .clone()
        .svd(true, true)
        .solve(&b, 1e-14)
        .map_err(|e| Error::Fit(e.to_string()))?;
    let residuals: Vec<f64> = (&a * &x - &b).iter().copied().collect();
    let max_residual = residuals.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(HcpFit {
        c: x[0].exp(),
        mu: x[1],
        q: x[2],
        max_residual,
        residuals,
        used: rows.len(),
        excluded,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityRow {
    pub z: Vec<Complex64>,
    pub w: Vec<Complex64>,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    /// `rhs + slack − lhs`; nonnegative means the inequality held.
    pub margin: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct InequalityReport {
    pub rows: Vec<InequalityRow>,
    pub worst_margin: f64,
    pub ok: bool,
}

impl InequalityReport {
    fn from_rows(rows: Vec<InequalityRow>) -> Self {
        let worst_margin = rows.iter().map(|r| r.margin).fold(f64::INFINITY, f64::min);
        InequalityReport {
            ok: rows.iter().all(|r| r.margin >= 0.0),
            worst_margin,
            rows,
        }
    }
}

/// Probes `L_{h(E)}(h(w)) ≤ k·L_E(w)` for a polynomial map `h` of degree
/// `k`: `lower_{h(E)}(h(w)) ≤ k·upper_E(w) + k·slack_E + defect_{h(E)}`.
pub fn check_polynomial_image_inequality(
    e_mesh: &CandidateMesh,
    h: &(dyn Fn(&Point) -> Point + Sync),
    k: usize,
    ws: &[Point],
    degree: usize,
    solver: Solver,
) -> Result<InequalityReport> {
    let mut image: Vec<Point> = e_mesh.points.iter().map(h).collect();
    image.sort_by(Point::total_cmp);
    image.dedup_by(|a, b| a.total_cmp(b).is_eq());
    if image.len() < 2 {
        return Err(Error::DegenerateSet("h(E) is a single point (pluripolar)".into()));
    }
    let spacing = image.windows(2).map(|w| w[0].dist(&w[1])).fold(0.0, f64::max);
    let image_mesh = CandidateMesh::from_points(image, spacing, e_mesh.max_valid_degree)?;

    let opts = SolverOptions::default();
    let e_problem = FeketeProblem::new(e_mesh, degree)?;
    let e_est = ExtremalEstimate::new(solver.solve(&e_problem, opts)?, e_mesh, None)?;
    let h_problem = FeketeProblem::new(&image_mesh, degree)?;
    let h_config = solver.solve(&h_problem, opts).map_err(|e| match e {
        Error::DegenerateMesh(m) => Error::DegenerateSet(format!("h(E) is not unisolvent: {m}")),
        other => other,
    })?;
    let h_est = ExtremalEstimate::new(h_config, &image_mesh, None)?;
    let slack = k as f64 * e_est.slack() + h_est.defect;

    let rows = ws
        .iter()
        .map(|w| {
            let hw = h(w);
            let lhs = h_est.lower(&hw)?;
            let rhs = k as f64 * e_est.upper(w)?;
            Ok(InequalityRow {
                z: hw.coords().to_vec(),
                w: w.coords().to_vec(),
                lhs,
                rhs,
                slack,
                margin: rhs + slack - lhs,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InequalityReport::from_rows(rows))
}

/// At most this many configuration points serve as anchors for the global
/// modulus.
pub const MAX_ANCHORS: usize = 64;

/// Probes `|L_E(z) − L_E(w)| ≤ ϖ′_E(|z − w|)` with bracket midpoints. The
/// global modulus is sampled around configuration points (which accumulate
/// at the boundary); slack is twice the estimate's slack plus the mean of the
/// two bracket widths.
pub fn check_blocki_inequality(est: &ExtremalEstimate, pairs: &[(Point, Point)]) -> Result<InequalityReport> {
    let cfg = &est.config.points;
    let stride = cfg.len().div_ceil(MAX_ANCHORS).max(1);
    let anchors: Vec<&Point> = cfg.iter().step_by(stride).collect();
    let n = cfg.first().map_or(1, |p| p.dim());
    let dirs = directions(n, phases_for(n));
    let mut rows = Vec::with_capacity(pairs.len());
    for (z, w) in pairs {
        let delta = z.dist(w);
        if delta > 1.0 {
            return input(format!("pair ({z}, {w}) is {delta:.3} apart; must be <= 1"));
        }
        let (zl, zu) = est.bracket(z)?;
        let (wl, wu) = est.bracket(w)?;
        let lhs = (0.5 * (zl + zu) - 0.5 * (wl + wu)).abs();
        let sups: Result<Vec<f64>> = anchors.iter().map(|a| ball_sup(est, a, delta, &dirs)).collect();
        let rhs = sups?.into_iter().fold(f64::NEG_INFINITY, f64::max);
        let slack = 2.0 * est.slack() + 0.5 * ((zu - zl) + (wu - wl));
        rows.push(InequalityRow {
            z: z.coords().to_vec(),
            w: w.coords().to_vec(),
            lhs,
            rhs,
            slack,
            margin: rhs + slack - lhs,
        });
    }
    Ok(InequalityReport::from_rows(rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn interval_estimate(d: usize) -> ExtremalEstimate {
        let k = CompactSetModel::interval(-1.0, 1.0).unwrap();
        ExtremalEstimate::from_set(&k, d, 2.0, Solver::GreedyRefine, SolverOptions::default()).unwrap()
    }

    #[test]
    fn green_function_values() {
        assert!((interval_green(Complex64::new(2.0, 0.0)) - (2.0 + 3f64.sqrt()).ln()).abs() < 1e-15);
        assert!(interval_green(Complex64::new(0.3, 0.0)).abs() < 1e-15);
        let z = Complex64::new(0.0, 2.0);
        assert!((interval_green(z) - interval_green(-z)).abs() < 1e-14);
        assert!((interval_green(z) - (2.0 + 5f64.sqrt()).ln()).abs() < 1e-14);
    }

    #[test]
    fn bracket_contains_interval_green_function() {
        let est = interval_estimate(8);
        for z in [
            Complex64::new(1.5, 0.0),
            Complex64::new(2.0, 0.0),
            Complex64::new(3.0, 0.0),
            Complex64::new(0.0, 2.0),
        ] {
            let (lo, up) = est.bracket(&Point::scalar(z)).unwrap();
            let g = interval_green(z);
            let s = est.slack();
            assert!(lo - s <= g && g <= up + s, "z={z}: {lo} {up} vs {g} (slack {s})");
        }
    }

    #[test]
    fn lower_is_nonnegative_at_nodes() {
        let est = interval_estimate(6);
        for x in est.config.points.clone() {
            let (lo, _) = est.bracket(&x).unwrap();
            let worst = est.sup_norms.iter().copied().fold(1.0, f64::max).ln() / 6.0;
            assert!(lo >= -worst - 1e-12);
        }
    }

    #[test]
    fn disk_bracket_contains_log_two() {
        let est = ExtremalEstimate::from_set(&CompactSetModel::unit_disk(), 6, 1.0, Solver::Greedy, SolverOptions::default())
            .unwrap();
        let z = Point::scalar(Complex64::from_polar(2.0, 0.7));
        let (lo, up) = est.bracket(&z).unwrap();
        let s = est.slack();
        assert!(lo - s <= 2f64.ln() && 2f64.ln() <= up + s);
    }

    #[test]
    fn singular_configuration_is_rejected() {
        let mesh = CandidateMesh::uniform_interval(-1.0, 1.0, 11).unwrap();
        let p = FeketeProblem::new(&mesh, 2).unwrap();
        let mut c = crate::fekete::greedy_afp(&p).unwrap();
        c.points[1] = c.points[0].clone();
        assert!(matches!(ExtremalEstimate::new(c, &mesh, None), Err(Error::DegenerateConfiguration(_))));
    }

    #[test]
    fn modulus_is_monotone_and_sqrt_like_at_the_endpoint() {
        let k = CompactSetModel::interval(-1.0, 1.0).unwrap();
        let deltas = [1e-3, 3e-3, 1e-2, 3e-2, 1e-1];
        let ms = modulus_of_continuity(&k, &Point::from(1.0), 1.0, &deltas, 32, Solver::Greedy, 1.0).unwrap();
        assert!(ms.samples.windows(2).all(|w| w[0].1 <= w[1].1));
        let ratios: Vec<f64> = ms.samples.iter().map(|(d, w)| w / d.sqrt()).collect();
        assert!(ratios.iter().all(|&q| q > 0.5 && q < 5.0), "{ratios:?}");
    }

    #[test]
    fn modulus_preconditions() {
        let k = CompactSetModel::interval(-1.0, 1.0).unwrap();
        assert!(modulus_of_continuity(&k, &Point::from(2.0), 1.0, &[0.1], 4, Solver::Greedy, 1.0).is_err());
        assert!(modulus_of_continuity(&k, &Point::from(1.0), 1.0, &[1.5], 4, Solver::Greedy, 1.0).is_err());
    }

    #[test]
    fn synthetic_fit_round_trip() {
        let (c, mu, q) = (2.0, 0.5, 2.0);
        let samples: Vec<ModulusSamples> = [0.5, 0.75, 1.0]
            .iter()
            .map(|&r| ModulusSamples {
                anchor: vec![1.0],
                r,
                degree: 0,
                slack: 0.0,
                samples: [1e-3, 1e-2, 3e-2, 1e-1]
                    .iter()
                    .map(|&d: &f64| (d, c * d.powf(mu) / r.powf(q)))
                    .collect(),
            })
            .collect();
        let fit = hcp_fit(&samples).unwrap();
        assert!((fit.c - c).abs() < 1e-6 && (fit.mu - mu).abs() < 1e-6 && (fit.q - q).abs() < 1e-6);
        assert!(hcp_fit(&samples[..1]).is_err());
    }

    #[test]
    fn image_inequality_for_squares() {
        let mesh = CandidateMesh::uniform_interval(-1.0, 1.0, 401).unwrap();
        let sq = |p: &Point| Point::scalar(p.coord(0) * p.coord(0));
        let ws: Vec<Point> = [2.0, 1.5, 0.5].iter().map(|&x| Point::from(x)).collect();
        let rep = check_polynomial_image_inequality(&mesh, &sq, 2, &ws, 8, Solver::GreedyRefine).unwrap();
        assert!(rep.ok, "{rep:?}");
        let id = |p: &Point| p.clone();
        assert!(check_polynomial_image_inequality(&mesh, &id, 1, &ws, 8, Solver::Greedy).unwrap().ok);
        let constant = |_: &Point| Point::from(0.5);
        assert!(matches!(
            check_polynomial_image_inequality(&mesh, &constant, 1, &ws, 4, Solver::Greedy),
            Err(Error::DegenerateSet(_))
        ));
    }

    #[test]
    fn blocki_pairs() {
        let est = interval_estimate(16);
        let pairs = vec![
            (Point::from(1.1), Point::from(1.05)),
            (Point::from(0.3), Point::from(0.3)),
        ];
        let rep = check_blocki_inequality(&est, &pairs).unwrap();
        assert!(rep.ok, "{rep:?}");
        assert!(check_blocki_inequality(&est, &[(Point::from(0.0), Point::from(1.5))]).is_err());
    }
}
