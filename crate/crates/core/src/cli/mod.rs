//! Experiment plans, command dispatch and artifact export.

pub mod export;
pub mod plan;

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use crate::error::{input, Error, Result};
use crate::extremal::{hcp_fit, interval_green, modulus_of_continuity, ExtremalEstimate};
use crate::fekete::{Configuration, FeketeProblem};
use crate::geometry::{check_cusp_inclusion, coefficient_bound, generate_mesh, Ambient, CompactSetModel, UpcDescriptor};
use crate::point::Point;
use crate::rates::{plan_mesh, run_experiment, RateConstants, RateRow};
use export::{point_cells, point_columns, Artifacts, Cell, Table};
use plan::{parse_plan, ExperimentPlan};

/// Exit status for a computation that failed.
pub const EXIT_FAILURE: i32 = 1;
/// Exit status for bad flags, plans or files.
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "fekete", version, about = "Fekete configurations and equidistribution-rate experiments")]
pub struct Cli {
    /// Experiment plan (JSON); required by every command except `constants`.
    #[arg(long, global = true, value_name = "PATH")]
    pub plan: Option<PathBuf>,
    /// Output directory; overrides the plan's `output_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Worker threads (default: logical cores).
    #[arg(long, global = true, value_name = "K")]
    pub workers: Option<usize>,
    #[arg(long, short, global = true)]
    pub verbose: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Solve a Fekete configuration for every degree of the plan.
    Fekete,
    /// Bracket the extremal function at the plan's probe points.
    Extremal,
    /// Sample the modulus of continuity at an anchor and fit the HCP law.
    Hcp,
    /// Run the equidistribution-rate experiment.
    Rates,
    /// Print the rate-constant chain.
    Constants(ConstantsArgs),
    /// Check the UPC descriptor of the plan (or the built-in one).
    ValidateUpc,
}

#[derive(Debug, Args)]
pub struct ConstantsArgs {
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1.0)]
    pub gamma: f64,
    #[arg(long, default_value_t = 1)]
    pub m: u32,
    #[arg(long, default_value_t = 1)]
    pub n: usize,
}

/// Failure of a command: the error and its exit status.
struct Failure {
    error: Error,
    status: i32,
}

impl From<Error> for Failure {
    fn from(error: Error) -> Self {
        let status = match error {
            Error::Plan(_) => EXIT_USAGE,
            _ => EXIT_FAILURE,
        };
        Failure { error, status }
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Error::from(e).into()
    }
}

fn error_report(e: &Error) -> serde_json::Value {
    let details = match e {
        Error::Plan(list) => json!(list),
        Error::DescriptorInvalid { witness } => json!({ "witness": witness }),
        _ => serde_json::Value::Null,
    };
    json!({ "error": { "code": e.code(), "message": e.to_string(), "details": details } })
}

/// Parses the process arguments, runs the command and returns the exit
/// status. Usage errors exit through clap with status 2.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = Cli::parse_from(args);
    let level = if cli.verbose { "info" } else { "warn" };
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).try_init();
    if let Some(k) = cli.workers {
        if k == 0 {
            eprintln!("error: --workers must be >= 1");
            return EXIT_USAGE;
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            log::warn!("worker pool already initialized: {e}");
        }
    }
    match dispatch(&cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("{}", serde_json::to_string_pretty(&error_report(&f.error)).expect("report serializes"));
            f.status
        }
    }
}

fn load_plan(path: Option<&Path>) -> std::result::Result<ExperimentPlan, Failure> {
    let path = path.ok_or_else(|| Failure {
        error: Error::Input("this command needs --plan <PATH>".into()),
        status: EXIT_USAGE,
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| Failure {
        error: Error::Io(e),
        status: EXIT_USAGE,
    })?;
    Ok(parse_plan(&text)?)
}

fn dispatch(cli: &Cli) -> std::result::Result<(), Failure> {
    if let Command::Constants(a) = &cli.command {
        print!("{}", constants_text(&RateConstants::new(a.alpha, a.gamma, a.m, a.n)?));
        return Ok(());
    }
    let plan = load_plan(cli.plan.as_deref())?;
    let dir = cli.out.clone().unwrap_or_else(|| PathBuf::from(&plan.output_dir));
    let hash = plan.hash();
    log::info!("plan {hash}");
    match cli.command {
        Command::Fekete => fekete_cmd(&plan, Artifacts::new(&dir, "fekete", &hash)?),
        Command::Extremal => extremal_cmd(&plan, Artifacts::new(&dir, "extremal", &hash)?),
        Command::Hcp => hcp_cmd(&plan, Artifacts::new(&dir, "hcp", &hash)?),
        Command::Rates => rates_cmd(&plan, Artifacts::new(&dir, "rates", &hash)?),
        Command::ValidateUpc => validate_upc_cmd(&plan, Artifacts::new(&dir, "validate-upc", &hash)?),
        Command::Constants(_) => unreachable!("handled above"),
    }
}

/// The chain `μ, q, τ, α′, α″` as `name = value` lines, shortest
/// round-trip floats.
pub fn constants_text(k: &RateConstants) -> String {
    format!(
        "α = {}\nγ = {}\nm = {}\nn = {}\nμ = {}\nq = {}\nτ = {}\nα′ = {}\nα″ = {}\n",
        k.alpha, k.gamma, k.m, k.n, k.mu, k.q, k.tau, k.alpha_prime, k.alpha_double_prime
    )
}

fn solve_degree(plan: &ExperimentPlan, d: usize) -> Result<Configuration> {
    let mesh = plan_mesh(plan, d)?;
    let problem = FeketeProblem::new(&mesh, d)?
        .with_weight(plan.weight.to_weight(), plan.weight_scale.unwrap_or(d as f64));
    plan.solver.solve(&problem, plan.solver_options())
}

fn fekete_cmd(plan: &ExperimentPlan, mut out: Artifacts) -> std::result::Result<(), Failure> {
    let degrees: Vec<usize> = plan.degrees.iter().collect();
    let results: Vec<Result<Configuration>> = degrees.par_iter().map(|&d| solve_degree(plan, d)).collect();
    let n = plan.set.dim();
    let mut summary = Table::new(["d", "n_d", "objective", "provenance", "mesh_spacing"]);
    let mut first_error = None;
    for (d, r) in degrees.iter().zip(results) {
        match r {
            Ok(c) => {
                let mut t = Table::new(["index", "mesh_index"].map(String::from).into_iter().chain(point_columns(n)));
                for (k, (p, i)) in c.points.iter().zip(&c.mesh_indices).enumerate() {
                    let mut row = vec![k.into(), (*i).into()];
                    row.extend(point_cells(p));
                    t.push(row);
                }
                out.csv(&format!("d{d}"), &t)?;
                let prov = serde_json::to_value(c.provenance)?;
                summary.push(vec![
                    (*d).into(),
                    c.points.len().into(),
                    c.objective.into(),
                    prov.as_str().unwrap_or("").into(),
                    c.mesh_spacing.into(),
                ]);
            }
            Err(e) => {
                first_error.get_or_insert(e);
            }
        }
    }
    out.csv("", &summary)?;
    out.json("plan", &serde_json::from_str::<serde_json::Value>(&plan.canonical_json())?)?;
    out.finish()?;
    match first_error {
        Some(e) => Err(e.into()),
        None => Ok(()),
    }
}

/// `L_K(z)` when the set has a classical closed form.
pub fn closed_form_green(set: &CompactSetModel, z: &Point) -> Option<f64> {
    match set {
        CompactSetModel::Interval { a, b } => {
            let (m, h) = ((a + b) / 2.0, (b - a) / 2.0);
            Some(interval_green((z.coord(0) - m) / h))
        }
        CompactSetModel::Disk { center, radius } | CompactSetModel::Circle { center, radius } => {
            Some(((z.coord(0) - Complex64::new(center[0], center[1])).norm() / radius).ln().max(0.0))
        }
        _ => None,
    }
}

/// `c + h·t·e_0` for `t ∈ {1.5, 2, 3, 2i}`, with `c` and `h` the center and
/// half-width of the bounding box.
fn default_probe_points(set: &CompactSetModel) -> Vec<Point> {
    let bb = set.bounding_box();
    let mid: Vec<f64> = bb.lo.iter().zip(&bb.hi).map(|(l, h)| 0.5 * (l + h)).collect();
    let half = 0.5 * bb.max_side();
    let center: Vec<Complex64> = match set.ambient() {
        Ambient::Real => mid.iter().map(|&x| Complex64::new(x, 0.0)).collect(),
        Ambient::Complex => vec![Complex64::new(mid[0], mid[1])],
    };
    [Complex64::new(1.5, 0.0), Complex64::new(2.0, 0.0), Complex64::new(3.0, 0.0), Complex64::new(0.0, 2.0)]
        .iter()
        .map(|t| {
            let mut c = center.clone();
            c[0] += t * half;
            Point::new(c)
        })
        .collect()
}

fn extremal_estimate(plan: &ExperimentPlan, d: usize) -> Result<ExtremalEstimate> {
    if plan.mesh_points.is_some() {
        let mesh = plan_mesh(plan, d)?;
        let problem = FeketeProblem::new(&mesh, d)?;
        ExtremalEstimate::new(plan.solver.solve(&problem, plan.solver_options())?, &mesh, None)
    } else {
        ExtremalEstimate::from_set(&plan.set, d, plan.mesh_density, plan.solver, plan.solver_options())
    }
}

#[derive(Serialize)]
struct ExtremalMeta {
    degree: usize,
    n_d: usize,
    slack: f64,
    defect: f64,
    mesh_spacing: f64,
    all_contained: Option<bool>,
}

fn extremal_cmd(plan: &ExperimentPlan, mut out: Artifacts) -> std::result::Result<(), Failure> {
    let d = plan.probe.degree.unwrap_or(plan.degrees.to);
    let est = extremal_estimate(plan, d)?;
    let points = if plan.probe.points.is_empty() {
        default_probe_points(&plan.set)
    } else {
        plan.probe.points.clone()
    };
    let slack = est.slack();
    let mut t = Table::new(
        point_columns(plan.set.dim())
            .into_iter()
            .chain(["lower", "upper", "midpoint", "slack", "closed_form", "contained"].map(String::from)),
    );
    let mut verdicts = Vec::new();
    for z in &points {
        let (lo, hi) = est.bracket(z)?;
        let g = closed_form_green(&plan.set, z);
        let inside = g.map(|g| lo - slack <= g && g <= hi + slack);
        verdicts.extend(inside);
        let mut row = point_cells(z);
        row.extend([
            lo.into(),
            hi.into(),
            (0.5 * (lo + hi)).into(),
            slack.into(),
            g.unwrap_or(f64::NAN).into(),
            inside.map_or(Cell::S(String::new()), Cell::from),
        ]);
        t.push(row);
    }
    out.csv("", &t)?;
    out.json(
        "meta",
        &ExtremalMeta {
            degree: d,
            n_d: est.sup_norms.len(),
            slack,
            defect: est.defect,
            mesh_spacing: est.mesh_spacing,
            all_contained: (!verdicts.is_empty()).then(|| verdicts.iter().all(|&v| v)),
        },
    )?;
    out.finish()?;
    Ok(())
}

/// Lower corner of the bounding box, when it lies in the set.
fn default_anchor(set: &CompactSetModel) -> Result<Point> {
    let bb = set.bounding_box();
    let p = match set.ambient() {
        Ambient::Real => Point::real(&bb.lo),
        Ambient::Complex => Point::scalar(Complex64::new(bb.lo[0], bb.lo[1])),
    };
    if set.contains(&p)? {
        Ok(p)
    } else {
        input(format!("the bounding-box corner {p} is not in the set; give probe.anchor"))
    }
}

fn hcp_cmd(plan: &ExperimentPlan, mut out: Artifacts) -> std::result::Result<(), Failure> {
    let d = plan.probe.degree.unwrap_or(plan.degrees.to);
    let anchor = match &plan.probe.anchor {
        Some(a) => a.clone(),
        None => default_anchor(&plan.set)?,
    };
    let samples = plan
        .probe
        .radii
        .iter()
        .map(|&r| {
            modulus_of_continuity(&plan.set, &anchor, r, &plan.probe.deltas, d, plan.solver, plan.mesh_density)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut t = Table::new(["r", "delta", "modulus", "slack"]);
    for s in &samples {
        for &(delta, w) in &s.samples {
            t.push(vec![s.r.into(), delta.into(), w.into(), s.slack.into()]);
        }
    }
    out.csv("", &t)?;
    let fit = hcp_fit(&samples);
    out.json(
        "fit",
        &json!({
            "anchor": anchor,
            "degree": d,
            "fit": fit.as_ref().ok(),
            "fit_error": fit.as_ref().err().map(|e| e.to_string()),
        }),
    )?;
    out.finish()?;
    fit.map(|_| ()).map_err(Failure::from)
}

fn rates_cmd(plan: &ExperimentPlan, mut out: Artifacts) -> std::result::Result<(), Failure> {
    let table = |rows: &[RateRow]| {
        let mut t = Table::new(["d", "n_d", "objective", "lower", "upper", "w1", "bound", "loose"]);
        for r in rows {
            t.push(vec![
                r.d.into(),
                r.n_d.into(),
                r.objective.into(),
                r.lower.into(),
                r.upper.into(),
                r.w1.into(),
                r.bound.into(),
                r.loose.into(),
            ]);
        }
        t
    };
    match run_experiment(plan) {
        Ok(report) => {
            out.csv("", &table(&report.rows))?;
            out.json("report", &report)?;
            out.finish()?;
            Ok(())
        }
        Err(f) => {
            out.csv("partial", &table(&f.partial))?;
            out.json("error", &error_report(&f.error))?;
            out.finish()?;
            Err(f.error.into())
        }
    }
}

fn upc_descriptor(plan: &ExperimentPlan) -> Result<UpcDescriptor> {
    plan.upc
        .clone()
        .or_else(|| UpcDescriptor::builtin(&plan.set))
        .ok_or_else(|| Error::Input(format!("no UPC descriptor given and none built in for {}", plan.set.name())))
}

/// At most five evenly spread entries of `xs`.
fn spread<T: Clone>(xs: &[T]) -> Vec<T> {
    let k = xs.len().min(5);
    (0..k).map(|i| xs[i * (xs.len() - 1) / (k - 1).max(1)].clone()).collect()
}

fn validate_upc_cmd(plan: &ExperimentPlan, mut out: Artifacts) -> std::result::Result<(), Failure> {
    let desc = upc_descriptor(plan)?;
    let anchors = generate_mesh(&plan.set, 4, 1.0)?.points;
    let grid = plan.probe.grid;
    let validation = desc.validate(&plan.set, &anchors, grid)?;
    let bounds = coefficient_bound(&desc, &anchors)?;
    let mut t = Table::new(
        point_columns(plan.set.dim())
            .into_iter()
            .chain(["r", "r_prime", "checked", "witnesses", "ok"].map(String::from)),
    );
    let mut inclusions = Vec::new();
    for a in spread(&anchors) {
        for &r in &plan.probe.radii {
            let rep = check_cusp_inclusion(&desc, Some(&plan.set), &a, r.min(1.0), &anchors, grid)?;
            let mut row = point_cells(&a);
            row.extend([
                r.into(),
                rep.r_prime.into(),
                rep.checked.into(),
                rep.witnesses.len().into(),
                rep.ok.into(),
            ]);
            t.push(row);
            inclusions.push(json!({ "anchor": a, "report": rep }));
        }
    }
    let ok = validation.ok && inclusions.iter().all(|i| i["report"]["ok"] == json!(true));
    out.csv("", &t)?;
    out.json(
        "report",
        &json!({
            "ok": ok,
            "descriptor": desc,
            "validation": validation,
            "coefficient_bounds": bounds,
            "inclusions": inclusions,
        }),
    )?;
    out.finish()?;
    println!("ok={ok}");
    if ok {
        return Ok(());
    }
    let witness = validation
        .witnesses
        .first()
        .map(|w| format!("anchor {}, t = {}: {}", w.anchor, w.t, w.reason))
        .or_else(|| {
            inclusions
                .iter()
                .find_map(|i| i["report"]["witnesses"].get(0).map(|w| w.to_string()))
        })
        .unwrap_or_default();
    Err(Error::DescriptorInvalid { witness }.into())
}
