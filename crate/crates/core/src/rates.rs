//! Rate constants of the equidistribution bound and the end-to-end
//! experiment comparing measured distances against it.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::cli::plan::{ExperimentPlan, ReferenceSpec};
use crate::error::{input, Error, Result};
use crate::fekete::FeketeProblem;
use crate::geometry::{generate_mesh, CandidateMesh, CompactSetModel, UpcDescriptor};
use crate::measures::{dist_gamma, empirical_reference, equilibrium_closed_form, fekete_measure, MeasureDescriptor};

/// `(μ, q) = (1/(2m), n+1)`: the HCP exponent and order of a UPC set with
/// cusp exponent `m` in dimension `n`.
pub fn hcp_constants(m: u32, n: usize) -> (f64, usize) {
    assert!(m >= 1 && n >= 1, "hcp_constants needs m >= 1 and n >= 1");
    (1.0 / (2.0 * m as f64), n + 1)
}

fn tau(alpha: f64, mu: f64, q: f64) -> f64 {
    alpha.min(mu / (1.0 + q))
}

/// `τ²/(τ+2+q)` with `τ = min(α, μ/(1+q))`.
pub fn alpha_prime(alpha: f64, mu: f64, q: f64) -> Result<f64> {
    if !(alpha > 0.0 && alpha <= 1.0) {
        return input(format!("α must lie in (0,1], got {alpha}"));
    }
    if !(mu > 0.0 && mu <= 1.0) {
        return input(format!("μ must lie in (0,1], got {mu}"));
    }
    if !(q >= 1.0 && q.is_finite()) {
        return input(format!("q must be >= 1, got {q}"));
    }
    let t = tau(alpha, mu, q);
    Ok(t * t / (t + 2.0 + q))
}

/// `γα′/(24+12α′)`.
pub fn alpha_double_prime(gamma: f64, alpha_prime: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 2.0) {
        return input(format!("γ must lie in (0,2], got {gamma}"));
    }
    if !(alpha_prime > 0.0 && alpha_prime < 1.0) {
        return input(format!("α′ must lie in (0,1), got {alpha_prime}"));
    }
    Ok(gamma * alpha_prime / (24.0 + 12.0 * alpha_prime))
}

/// The generic rate `γα/(24+12α)` for regular sets with Hölder weights.
pub fn dmn_alpha_prime(gamma: f64, alpha: f64) -> Result<f64> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return input(format!("γ must lie in (0,1], got {gamma}"));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return input(format!("α must lie in (0,1], got {alpha}"));
    }
    Ok(gamma * alpha / (24.0 + 12.0 * alpha))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct RateConstants {
    pub alpha: f64,
    pub gamma: f64,
    pub m: u32,
    pub n: usize,
    pub mu: f64,
    pub q: usize,
    pub tau: f64,
    pub alpha_prime: f64,
    pub alpha_double_prime: f64,
}

impl RateConstants {
    pub fn new(alpha: f64, gamma: f64, m: u32, n: usize) -> Result<Self> {
        if m < 1 || n < 1 {
            return input(format!("need m >= 1 and n >= 1, got m = {m}, n = {n}"));
        }
        let (mu, q) = hcp_constants(m, n);
        let ap = alpha_prime(alpha, mu, q as f64)?;
        let app = alpha_double_prime(gamma, ap)?;
        let t = tau(alpha, mu, q as f64);
        assert!(
            0.0 < app && app < ap && ap < t && t <= alpha && alpha <= 1.0,
            "rate chain violated: α″={app}, α′={ap}, τ={t}, α={alpha}"
        );
        Ok(RateConstants {
            alpha,
            gamma,
            m,
            n,
            mu,
            q,
            tau: t,
            alpha_prime: ap,
            alpha_double_prime: app,
        })
    }
}

/// `(log d)^{3α″} / d^{α″}`, natural log.
fn shape(alpha2: f64, d: f64) -> f64 {
    (3.0 * alpha2 * d.ln().ln() - alpha2 * d.ln()).exp()
}

/// `c·(log d)^{3α″}/d^{α″}` at each `d`.
pub fn bound_curve(c: f64, alpha2: f64, degrees: &[f64]) -> Result<Vec<(f64, f64)>> {
    if !(c >= 0.0 && c.is_finite()) {
        return input(format!("bound constant must be finite and nonnegative, got {c}"));
    }
    if !(alpha2 >= 0.0 && alpha2.is_finite()) {
        return input(format!("α″ must be finite and nonnegative, got {alpha2}"));
    }
    if let Some(d) = degrees.iter().find(|&&d| !(d > 1.0)) {
        return input(format!("the bound holds for d > 1, got d = {d}"));
    }
    Ok(degrees.iter().map(|&d| (d, c * shape(alpha2, d))).collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RateRow {
    pub d: usize,
    pub n_d: usize,
    pub objective: f64,
    pub lower: f64,
    pub upper: f64,
    pub w1: f64,
    /// Calibrated bound at `d`; filled once every row is in.
    pub bound: f64,
    /// Bracket width above half the upper value: left out of the slope fit.
    pub loose: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Clone, Debug, Serialize)]
pub struct RateReport {
    pub constants: RateConstants,
    /// No cusp exponent was available; `m = 1` was assumed.
    pub nominal_m: bool,
    pub reference: String,
    /// Distance of a surrogate reference to its half-degree measure.
    pub reference_quality: Option<f64>,
    pub rows: Vec<RateRow>,
    pub d0: usize,
    pub c: f64,
    pub slope: f64,
    pub slope_rows: usize,
    /// Every row was too loose, so the slope uses all of them.
    pub slope_fallback: bool,
    pub bound_ok: bool,
    pub slope_ok: bool,
    pub verdict: Verdict,
    /// γ > 1: the upper distance is W1 through the norm-ball inclusion.
    pub gamma_above_one: bool,
    pub caveats: Vec<String>,
}

/// A failed run: the first error by degree and the rows that did finish.
#[derive(Debug)]
pub struct ExperimentFailure {
    pub error: Error,
    pub partial: Vec<RateRow>,
}

impl From<Error> for ExperimentFailure {
    fn from(error: Error) -> Self {
        ExperimentFailure {
            error,
            partial: Vec::new(),
        }
    }
}

/// Mesh used at degree `d`: the fixed-size override when present, the
/// density rule otherwise.
pub fn plan_mesh(plan: &ExperimentPlan, d: usize) -> Result<CandidateMesh> {
    match (plan.mesh_points, &plan.set) {
        (Some(k), CompactSetModel::Interval { a, b }) => CandidateMesh::uniform_interval(*a, *b, k),
        (Some(k), CompactSetModel::Circle { center, radius }) => {
            CandidateMesh::roots_of_unity(k, Complex64::new(center[0], center[1]), *radius)
        }
        (Some(_), other) => input(format!("mesh_points is not supported for {}", other.name())),
        (None, set) => generate_mesh(set, d, plan.mesh_density),
    }
}

/// The cusp exponent of the plan's descriptor, else of the built-in one.
fn cusp_exponent(plan: &ExperimentPlan) -> Option<u32> {
    plan.upc
        .as_ref()
        .map(|u| u.m)
        .or_else(|| UpcDescriptor::builtin(&plan.set).map(|u| u.m))
}

fn reference_of(plan: &ExperimentPlan) -> Result<MeasureDescriptor> {
    match plan.reference {
        ReferenceSpec::ClosedForm => equilibrium_closed_form(&plan.set),
        ReferenceSpec::Surrogate { degree } => empirical_reference(&plan.set, degree, plan.mesh_density),
    }
}

fn measure_row(plan: &ExperimentPlan, reference: &MeasureDescriptor, d: usize) -> Result<RateRow> {
    let mesh = plan_mesh(plan, d)?;
    let problem = FeketeProblem::new(&mesh, d)?
        .with_weight(plan.weight.to_weight(), plan.weight_scale.unwrap_or(d as f64));
    let config = plan.solver.solve(&problem, plan.solver_options())?;
    let mu = MeasureDescriptor::discrete(fekete_measure(&config));
    let dist = dist_gamma(&mu, reference, plan.gamma, plan.dictionary_size)?;
    Ok(RateRow {
        d,
        n_d: problem.n_d(),
        objective: config.objective,
        lower: dist.lower,
        upper: dist.upper,
        w1: dist.w1,
        bound: f64::NAN,
        loose: dist.upper - dist.lower > dist.upper / 2.0,
    })
}

/// Ordinary least squares slope of `ys` against `xs`.
fn ols_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}

/// Builds the rate report from finished rows (sorted by degree).
pub fn assess(constants: RateConstants, mut rows: Vec<RateRow>) -> Result<RateReport> {
    rows.sort_by_key(|r| r.d);
    let first = rows.first().ok_or_else(|| Error::Input("no degrees to assess".into()))?;
    let d0 = first.d;
    if d0 < 2 {
        return input("the bound holds for d > 1; start the degree range at 2 or above");
    }
    let a2 = constants.alpha_double_prime;
    let c = first.upper / shape(a2, d0 as f64);
    let degrees: Vec<f64> = rows.iter().map(|r| r.d as f64).collect();
    for (row, (_, b)) in rows.iter_mut().zip(bound_curve(c, a2, &degrees)?) {
        row.bound = b;
    }
    rows[0].bound = rows[0].upper;
    let bound_ok = rows.iter().skip(1).all(|r| r.upper <= r.bound);

    let usable = |r: &&RateRow| r.upper > 0.0 && r.d >= 2;
    let tight: Vec<&RateRow> = rows.iter().filter(usable).filter(|r| !r.loose).collect();
    let (fit_rows, slope_fallback) = if tight.len() >= 2 {
        (tight, false)
    } else {
        (rows.iter().filter(usable).collect(), true)
    };
    let slope = if fit_rows.len() >= 2 {
        let xs: Vec<f64> = fit_rows.iter().map(|r| (r.d as f64).ln()).collect();
        let ys: Vec<f64> = fit_rows.iter().map(|r| r.upper.ln()).collect();
        ols_slope(&xs, &ys)
    } else {
        f64::NAN
    };
    let slope_ok = slope <= -a2;
    let verdict = if bound_ok && slope_ok { Verdict::Pass } else { Verdict::Fail };
    Ok(RateReport {
        constants,
        nominal_m: false,
        reference: String::new(),
        reference_quality: None,
        slope_rows: fit_rows.len(),
        rows,
        d0,
        c,
        slope,
        slope_fallback,
        bound_ok,
        slope_ok,
        verdict,
        gamma_above_one: constants.gamma > 1.0,
        caveats: Vec::new(),
    })
}

/// Runs every degree of the plan (in parallel), measures `dist_γ` against
/// the reference, calibrates the bound at the smallest degree and grades the
/// decay.
pub fn run_experiment(plan: &ExperimentPlan) -> std::result::Result<RateReport, ExperimentFailure> {
    if plan.degrees.from < 2 {
        return Err(Error::Input("the bound holds for d > 1; start the degree range at 2 or above".into()).into());
    }
    let (m, nominal_m) = match cusp_exponent(plan) {
        Some(m) => (m, false),
        None => (1, true),
    };
    let constants = RateConstants::new(plan.alpha, plan.gamma, m, plan.set.dim())?;
    let reference = reference_of(plan)?;

    let degrees: Vec<usize> = plan.degrees.iter().collect();
    let results: Vec<Result<RateRow>> = degrees.par_iter().map(|&d| measure_row(plan, &reference, d)).collect();
    let mut rows = Vec::with_capacity(results.len());
    let mut failure = None;
    for r in results {
        match r {
            Ok(row) => rows.push(row),
            Err(e) => {
                failure.get_or_insert(e);
            }
        }
    }
    if let Some(error) = failure {
        return Err(ExperimentFailure { error, partial: rows });
    }

    let mut report = assess(constants, rows)?;
    report.nominal_m = nominal_m;
    report.reference = reference.kind().to_string();
    if let MeasureDescriptor::EmpiricalReference { quality, .. } = reference {
        report.reference_quality = Some(quality);
    }
    if nominal_m {
        report
            .caveats
            .push("no UPC descriptor for this set: rate constants use the nominal m = 1".into());
    }
    if !plan.weight.is_zero() {
        report.caveats.push(
            "no reference for the weighted equilibrium measure: distances are to the unweighted reference".into(),
        );
    }
    if report.gamma_above_one {
        report
            .caveats
            .push("γ > 1: the upper distance is W1 through the norm-ball inclusion".into());
    }
    if report.slope_fallback {
        report
            .caveats
            .push("every bracket is wider than half its upper value: slope fitted on all rows".into());
    }
    Ok(report)
}
