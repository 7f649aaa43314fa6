//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use fekete_core::cli::plan::{DegreeRange, ExperimentPlan};
use fekete_core::extremal::{
    check_blocki_inequality, check_polynomial_image_inequality, hcp_fit, interval_green, modulus_of_continuity,
    ExtremalEstimate, ModulusSamples,
};
use fekete_core::fekete::{brute_force_fekete, greedy_afp, Configuration, FeketeProblem, Solver, SolverOptions};
use fekete_core::geometry::{
    check_cusp_inclusion, coefficient_bound, generate_mesh, pyramid_image, CandidateMesh, CompactSetModel,
    SampleGrid, UpcDescriptor,
};
use fekete_core::measures::{
    dist_gamma, equilibrium_closed_form, fekete_measure, wasserstein1, DiscreteMeasure, MeasureDescriptor,
};
use fekete_core::polyspace::{change_basis_logdet_shift, log_abs_det, vandermonde, MultiIndexBasis, Weight};
use fekete_core::rates::{run_experiment, RateConstants, Verdict};
use fekete_core::Point;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// tolerances and budgets
const CONSTANTS_TOL: f64 = 1e-12;
const OBJECTIVE_TOL: f64 = 1e-9;
const SHIFT_TOL: f64 = 1e-9;
const ROUNDTRIP_TOL: f64 = 1e-8;
const SYNTHETIC_FIT_TOL: f64 = 1e-6;
const TRIANGLE_TOL: f64 = 1e-10;
const HCP_MU_RANGE: (f64, f64) = (0.4, 0.6);
const C2_BRUTE_BUDGET: u64 = 70_000_000;

type Check = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

fn xs(c: &Configuration) -> Vec<f64> {
    c.sorted_points().iter().map(|p| p.coord(0).re).collect()
}

// 1 ------------------------------------------------------------------------

fn rate_constants() -> Check {
    let k = RateConstants::new(1.0, 1.0, 1, 1).map_err(e2s)?;
    // exact fractions: μ = 1/2, τ = 1/6, α′ = (1/36)/(25/6) = 1/150,
    // α″ = (1/150)/(24 + 12/150) = (1/150)/(3612/150) = 1/3612
    let expect = [
        ("μ", k.mu, 1.0 / 2.0),
        ("q", k.q as f64, 2.0),
        ("τ", k.tau, 1.0 / 6.0),
        ("α′", k.alpha_prime, 1.0 / 150.0),
        ("α″", k.alpha_double_prime, 1.0 / 3612.0),
    ];
    for (name, got, want) in expect {
        ensure((got - want).abs() <= CONSTANTS_TOL, || format!("{name} = {got}, expected {want}"))?;
    }
    let text = fekete_core::cli::constants_text(&k);
    ensure(text.contains("μ = 0.5") && text.contains("q = 2"), || format!("printed chain:\n{text}"))?;
    Ok(format!("α″ = {:.6e}", k.alpha_double_prime))
}

// 2 ------------------------------------------------------------------------

fn brute_vs_greedy(mesh: &CandidateMesh, d: usize) -> Result<(f64, f64), String> {
    let p = FeketeProblem::new(mesh, d).map_err(e2s)?;
    let b = brute_force_fekete(&p, Some(C2_BRUTE_BUDGET)).map_err(e2s)?;
    let g = Solver::GreedyRefine.solve(&p, SolverOptions::default()).map_err(e2s)?;
    Ok((b.objective, g.objective))
}

fn grid_2d(k: usize) -> CandidateMesh {
    let h = 1.0 / (k - 1) as f64;
    let pts = (0..k)
        .flat_map(|i| (0..k).map(move |j| Point::real(&[i as f64 * h, j as f64 * h])))
        .collect();
    CandidateMesh::from_points(pts, h, k - 1).unwrap()
}

// centre plus rings of 8 and 16 points
fn polar_disk() -> CandidateMesh {
    let mut pts = vec![Point::from(0.0)];
    for (r, k) in [(0.5, 8), (1.0, 16)] {
        pts.extend((0..k).map(|j| Point::scalar(Complex64::from_polar(r, TAU * j as f64 / k as f64))));
    }
    CandidateMesh::from_points(pts, 0.5, 5).unwrap()
}

fn fekete_oracle() -> Check {
    let mesh = CandidateMesh::uniform_interval(-1.0, 1.0, 201).map_err(e2s)?;
    let s5 = 1.0 / 5f64.sqrt();
    let near = |x: f64| mesh.points[mesh.nearest(&Point::from(x))].coord(0).re;
    let expected: [Vec<f64>; 3] = [
        vec![-1.0, 1.0],
        vec![-1.0, 0.0, 1.0],
        vec![-1.0, near(-s5), near(s5), 1.0],
    ];
    for (d, want) in (1..=3).zip(expected.iter()) {
        let p = FeketeProblem::new(&mesh, d).map_err(e2s)?;
        let b = brute_force_fekete(&p, Some(C2_BRUTE_BUDGET)).map_err(e2s)?;
        let got = xs(&b);
        let ok = got.len() == want.len() && got.iter().zip(want).all(|(a, b)| (a - b).abs() < 1e-12);
        ensure(ok, || format!("brute d={d}: {got:?}, expected {want:?}"))?;
    }

    let disk = CompactSetModel::unit_disk();
    let box2 = CompactSetModel::unit_box(2);
    let cusp = CompactSetModel::power_cusp(1.0, 2, 1.0).map_err(e2s)?;
    let mut corpus: Vec<(String, CandidateMesh, usize)> = Vec::new();
    for d in 1..=3 {
        corpus.push(("interval/201".into(), mesh.clone(), d));
    }
    corpus.push(("interval/41".into(), CandidateMesh::uniform_interval(-1.0, 1.0, 41).unwrap(), 4));
    corpus.push(("interval/31".into(), CandidateMesh::uniform_interval(-1.0, 1.0, 31).unwrap(), 5));
    for d in 1..=5 {
        let ring = CandidateMesh::roots_of_unity(24, Complex64::new(0.0, 0.0), 1.0).unwrap();
        corpus.push(("circle/24".into(), ring, d));
    }
    corpus.push(("disk".into(), generate_mesh(&disk, 2, 1.0).map_err(e2s)?, 1));
    for d in 2..=5 {
        corpus.push(("disk/polar25".into(), polar_disk(), d));
    }
    corpus.push(("box".into(), generate_mesh(&box2, 1, 1.0).map_err(e2s)?, 1));
    corpus.push(("box/5x5".into(), grid_2d(5), 2));
    corpus.push(("cusp".into(), generate_mesh(&cusp, 1, 1.0).map_err(e2s)?, 1));
    corpus.push(("cusp".into(), generate_mesh(&cusp, 2, 1.0).map_err(e2s)?, 2));

    let mut worst = 0.0f64;
    for (name, m, d) in &corpus {
        let (b, g) = brute_vs_greedy(m, *d)?;
        ensure(g <= b + OBJECTIVE_TOL, || format!("{name} d={d}: greedy {g} beats brute {b}"))?;
        ensure(b - g <= OBJECTIVE_TOL, || format!("{name} d={d}: brute {b}, greedy+exchange {g}"))?;
        worst = worst.max(b - g);
    }
    Ok(format!("{} corpus cases, worst gap {worst:.1e}", corpus.len()))
}

// 3 ------------------------------------------------------------------------

fn basis_invariance() -> Check {
    let sets = [CompactSetModel::interval(-1.0, 1.0).unwrap(), CompactSetModel::unit_box(2)];
    let mut worst = 0.0f64;
    let mut cases = 0;
    for set in &sets {
        let n = set.dim();
        let bb = set.bounding_box();
        for d in 1..=6 {
            let mesh = generate_mesh(set, d, 1.0).map_err(e2s)?;
            let mono = MultiIndexBasis::monomial(n, d).map_err(e2s)?;
            let cheb = MultiIndexBasis::chebyshev(n, d, bb.lo.clone(), bb.hi.clone()).map_err(e2s)?;
            let pm = FeketeProblem::new(&mesh, d).map_err(e2s)?.with_basis(mono.clone()).map_err(e2s)?;
            let pc = FeketeProblem::new(&mesh, d).map_err(e2s)?.with_basis(cheb.clone()).map_err(e2s)?;
            let (a, b) = (greedy_afp(&pm).map_err(e2s)?, greedy_afp(&pc).map_err(e2s)?);
            ensure(a.same_points(&b), || format!("{} d={d}: point sets differ", set.name()))?;
            let ld = |basis: &MultiIndexBasis| -> Result<f64, String> {
                log_abs_det(&vandermonde(basis, &a.points, &Weight::Zero, 0.0, true).map_err(e2s)?).map_err(e2s)
            };
            let shift = change_basis_logdet_shift(&mono, &cheb).map_err(e2s)?;
            let err = (ld(&cheb)? - ld(&mono)? - shift).abs();
            ensure(err <= SHIFT_TOL, || format!("{} d={d}: shift error {err:.3e}", set.name()))?;
            worst = worst.max(err);
            cases += 1;
        }
    }
    Ok(format!("{cases} cases, worst shift error {worst:.1e}"))
}

// 4 ------------------------------------------------------------------------

fn extremal_oracle() -> Check {
    let interval = CompactSetModel::interval(-1.0, 1.0).unwrap();
    let est = ExtremalEstimate::from_set(&interval, 8, 1.0, Solver::GreedyRefine, SolverOptions::default())
        .map_err(e2s)?;
    let s = est.slack();
    let n_d_part = (9f64).ln() / 8.0;
    ensure((s - n_d_part - est.defect).abs() < 1e-15, || "slack is not log N_d / d + defect".into())?;
    let zs = [
        Complex64::new(1.5, 0.0),
        Complex64::new(2.0, 0.0),
        Complex64::new(3.0, 0.0),
        Complex64::new(0.0, 2.0),
    ];
    for z in zs {
        let (lo, up) = est.bracket(&Point::scalar(z)).map_err(e2s)?;
        let g = interval_green(z);
        ensure(lo - s <= g && g <= up + s, || format!("z = {z}: [{lo}, {up}] ± {s} misses {g}"))?;
    }
    let disk = CompactSetModel::unit_disk();
    let de = ExtremalEstimate::from_set(&disk, 8, 1.0, Solver::GreedyRefine, SolverOptions::default()).map_err(e2s)?;
    let ds = de.slack();
    for k in 0..8 {
        let z = Complex64::from_polar(2.0, TAU * k as f64 / 8.0 + 0.1);
        let (lo, up) = de.bracket(&Point::scalar(z)).map_err(e2s)?;
        ensure(lo - ds <= 2f64.ln() && 2f64.ln() <= up + ds, || {
            format!("disk z = {z}: [{lo}, {up}] ± {ds} misses log 2")
        })?;
    }
    Ok(format!("interval slack {s:.4}, disk slack {ds:.4}"))
}

// 5 ------------------------------------------------------------------------

fn interval_experiment() -> Check {
    let plan = ExperimentPlan::new(CompactSetModel::interval(-1.0, 1.0).unwrap(), DegreeRange { from: 2, to: 24 });
    let r = run_experiment(&plan).map_err(|f| f.error.to_string())?;
    let w = |d: usize| r.rows.iter().find(|row| row.d == d).map(|row| row.w1).unwrap();
    let (w4, w24) = (w(4), w(24));
    ensure(w24 * 2.0 <= w4, || format!("W1(24) = {w24}, W1(4) = {w4}"))?;
    ensure(r.verdict == Verdict::Pass, || {
        format!("verdict FAIL (bound_ok {}, slope {} vs −α″ {})", r.bound_ok, r.slope, -r.constants.alpha_double_prime)
    })?;
    Ok(format!("W1(4)/W1(24) = {:.2}, slope {:.3}", w4 / w24, r.slope))
}

// 6 ------------------------------------------------------------------------

fn circle_experiment() -> Check {
    const MESH: usize = 256;
    let circle = CompactSetModel::unit_circle();
    let ring = CandidateMesh::roots_of_unity(MESH, Complex64::new(0.0, 0.0), 1.0).map_err(e2s)?;
    let step = TAU / MESH as f64;
    for d in 1..=24 {
        let p = FeketeProblem::new(&ring, d).map_err(e2s)?;
        let c = greedy_afp(&p).map_err(e2s)?;
        let mut ang: Vec<f64> = c.points.iter().map(|z| z.coord(0).arg().rem_euclid(TAU)).collect();
        ang.sort_by(f64::total_cmp);
        let n = ang.len();
        let ideal = TAU / n as f64;
        for k in 0..n {
            let gap = (ang[(k + 1) % n] - ang[k]).rem_euclid(TAU);
            ensure((gap - ideal).abs() <= step + 1e-12, || {
                format!("d={d}: gap {gap:.5} vs {ideal:.5} (mesh step {step:.5})")
            })?;
        }
    }
    let mut plan = ExperimentPlan::new(circle, DegreeRange { from: 2, to: 24 });
    plan.mesh_points = Some(MESH);
    let r = run_experiment(&plan).map_err(|f| f.error.to_string())?;
    for w in r.rows.windows(2) {
        ensure(w[1].w1 < w[0].w1, || format!("W1 rises from d={} to d={}", w[0].d, w[1].d))?;
    }
    ensure(r.verdict == Verdict::Pass, || format!("verdict FAIL (bound_ok {}, slope {})", r.bound_ok, r.slope))?;
    Ok(format!("slope {:.3}", r.slope))
}

// 7 ------------------------------------------------------------------------

fn upc_machinery() -> Check {
    let grid = SampleGrid { t_count: 64, u_count: 16 };
    let unit = CompactSetModel::interval(0.0, 1.0).unwrap();
    let cusp = CompactSetModel::power_cusp(1.0, 2, 1.0).map_err(e2s)?;
    let mut checked = 0;
    for set in [&unit, &cusp] {
        let desc = UpcDescriptor::builtin(set).ok_or("no built-in descriptor")?;
        let anchors = generate_mesh(set, 3, 1.0).map_err(e2s)?.points;
        let b = coefficient_bound(&desc, &anchors).map_err(e2s)?;
        ensure(b.max_roundtrip_error <= ROUNDTRIP_TOL, || {
            format!("{}: coefficient round-trip error {}", set.name(), b.max_roundtrip_error)
        })?;
        for a in anchors.iter().step_by(anchors.len().div_ceil(8)) {
            for r in [0.5, 1.0] {
                let rep = check_cusp_inclusion(&desc, Some(set), a, r, &anchors, grid).map_err(e2s)?;
                ensure(rep.ok && rep.witnesses.is_empty(), || {
                    format!("{} anchor {a} r={r}: {:?}", set.name(), rep.witnesses.first())
                })?;
                checked += rep.checked;
            }
        }
    }
    let desc = UpcDescriptor::builtin(&unit).unwrap();
    let anchors = generate_mesh(&unit, 3, 1.0).map_err(e2s)?.points;
    let img = pyramid_image(&desc, &Point::from(0.5), 1.0, &anchors, grid).map_err(e2s)?;
    ensure(img.r_prime == 1.0 / 3.0, || format!("r′ = {}, expected 1/3", img.r_prime))?;
    Ok(format!("{checked} pyramid samples, r′ = 1/3"))
}

// 8 ------------------------------------------------------------------------

fn hcp_probe() -> Check {
    let interval = CompactSetModel::interval(-1.0, 1.0).unwrap();
    let deltas: Vec<f64> = (0..8).map(|k| 10f64.powf(-3.0 + 2.0 * k as f64 / 7.0)).collect();
    let samples = [0.5, 1.0]
        .iter()
        .map(|&r| modulus_of_continuity(&interval, &Point::from(-1.0), r, &deltas, 64, Solver::Greedy, 1.0))
        .collect::<Result<Vec<_>, _>>()
        .map_err(e2s)?;
    let fit = hcp_fit(&samples).map_err(e2s)?;
    ensure(fit.mu >= HCP_MU_RANGE.0 && fit.mu <= HCP_MU_RANGE.1, || format!("μ_est = {}", fit.mu))?;

    let (c, mu, q) = (1.7, 0.35, 2.5);
    let synthetic: Vec<ModulusSamples> = [0.25, 0.5, 1.0]
        .iter()
        .map(|&r| ModulusSamples {
            anchor: vec![0.0],
            r,
            degree: 0,
            slack: 0.0,
            samples: deltas.iter().map(|&d| (d, c * d.powf(mu) / r.powf(q))).collect(),
        })
        .collect();
    let s = hcp_fit(&synthetic).map_err(e2s)?;
    ensure(
        (s.c - c).abs() <= SYNTHETIC_FIT_TOL && (s.mu - mu).abs() <= SYNTHETIC_FIT_TOL && (s.q - q).abs() <= SYNTHETIC_FIT_TOL,
        || format!("synthetic fit ({}, {}, {})", s.c, s.mu, s.q),
    )?;
    Ok(format!("μ_est = {:.3}", fit.mu))
}

// 9 ------------------------------------------------------------------------

fn random_line_measure(rng: &mut ChaCha8Rng) -> MeasureDescriptor {
    let k = rng.gen_range(1..=8);
    let mut atoms: Vec<f64> = Vec::new();
    while atoms.len() < k {
        let x = (rng.gen_range(-1.0..1.0f64) * 1e6).round() / 1e6;
        if !atoms.contains(&x) {
            atoms.push(x);
        }
    }
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let weights = raw.iter().map(|w| w / total).collect();
    MeasureDescriptor::discrete(DiscreteMeasure::new(atoms.into_iter().map(Point::from).collect(), weights).unwrap())
}

fn uniform(points: Vec<Point>) -> MeasureDescriptor {
    MeasureDescriptor::discrete(DiscreteMeasure::uniform(points).unwrap())
}

fn inequality_suites() -> Check {
    // polynomial image inequality, h(z) = z² on [-1, 1]
    let mesh = CandidateMesh::uniform_interval(-1.0, 1.0, 401).map_err(e2s)?;
    let sq = |p: &Point| Point::scalar(p.coord(0) * p.coord(0));
    let ws: Vec<Point> = [2.0, 1.5, 1.1, 0.5, -0.3]
        .iter()
        .map(|&x| Point::from(x))
        .chain([Point::scalar(Complex64::new(0.0, 1.0)), Point::scalar(Complex64::new(0.7, 0.4))])
        .collect();
    let img = check_polynomial_image_inequality(&mesh, &sq, 2, &ws, 8, Solver::GreedyRefine).map_err(e2s)?;
    ensure(img.ok, || format!("image inequality worst margin {}", img.worst_margin))?;

    // Błocki modulus inequality on [-1, 1] and the unit disk
    let interval = CompactSetModel::interval(-1.0, 1.0).unwrap();
    let est = ExtremalEstimate::from_set(&interval, 16, 1.0, Solver::GreedyRefine, SolverOptions::default())
        .map_err(e2s)?;
    let pairs: Vec<(Point, Point)> = [(1.1, 1.05), (0.3, 0.3), (-1.0, -0.9), (0.9, 1.2), (-1.5, -1.45), (0.0, 0.5)]
        .iter()
        .map(|&(a, b)| (Point::from(a), Point::from(b)))
        .chain([(Point::scalar(Complex64::new(0.2, 0.3)), Point::scalar(Complex64::new(0.2, 0.0)))])
        .collect();
    let bl = check_blocki_inequality(&est, &pairs).map_err(e2s)?;
    ensure(bl.ok, || format!("Błocki interval worst margin {}", bl.worst_margin))?;
    let disk = CompactSetModel::unit_disk();
    let de = ExtremalEstimate::from_set(&disk, 8, 1.0, Solver::GreedyRefine, SolverOptions::default()).map_err(e2s)?;
    let dpairs: Vec<(Point, Point)> = [(1.2, 1.1), (0.5, 0.9), (1.0, 1.3)]
        .iter()
        .map(|&(a, b)| (Point::scalar(Complex64::new(a, 0.0)), Point::scalar(Complex64::from_polar(b, 0.4))))
        .collect();
    let dbl = check_blocki_inequality(&de, &dpairs).map_err(e2s)?;
    ensure(dbl.ok, || format!("Błocki disk worst margin {}", dbl.worst_margin))?;

    // dist_γ brackets on the corpus
    let mut corpus: Vec<(String, MeasureDescriptor, MeasureDescriptor)> = Vec::new();
    let arcsine = equilibrium_closed_form(&interval).map_err(e2s)?;
    let circle_eq = equilibrium_closed_form(&CompactSetModel::unit_circle()).map_err(e2s)?;
    for d in [2, 4, 8, 12] {
        let m = generate_mesh(&interval, d, 1.0).map_err(e2s)?;
        let c = Solver::GreedyRefine.solve(&FeketeProblem::new(&m, d).map_err(e2s)?, SolverOptions::default()).map_err(e2s)?;
        corpus.push((format!("interval d={d}"), MeasureDescriptor::discrete(fekete_measure(&c)), arcsine.clone()));
        let ring = CandidateMesh::roots_of_unity(128, Complex64::new(0.0, 0.0), 1.0).unwrap();
        let c = greedy_afp(&FeketeProblem::new(&ring, d).map_err(e2s)?).map_err(e2s)?;
        corpus.push((format!("circle d={d}"), MeasureDescriptor::discrete(fekete_measure(&c)), circle_eq.clone()));
    }
    corpus.push(("δ₀ vs δ₁".into(), uniform(vec![Point::from(0.0)]), uniform(vec![Point::from(1.0)])));
    corpus.push((
        "planar".into(),
        uniform(vec![Point::real(&[0.0, 0.0]), Point::real(&[1.0, 0.5])]),
        uniform(vec![Point::real(&[0.2, 0.1]), Point::real(&[0.3, 0.9]), Point::real(&[1.0, 1.0])]),
    ));
    let mut pairs_checked = 0;
    for (name, mu, nu) in &corpus {
        for gamma in [0.25, 0.5, 1.0, 1.5, 2.0] {
            let g = dist_gamma(mu, nu, gamma, 64).map_err(e2s)?;
            ensure(g.lower <= g.upper, || format!("{name} γ={gamma}: {} > {}", g.lower, g.upper))?;
            pairs_checked += 1;
        }
    }

    // W1 triangle inequality on deterministic triples
    let mut rng = ChaCha8Rng::seed_from_u64(20240601);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..100 {
        let (a, b, c) = (random_line_measure(&mut rng), random_line_measure(&mut rng), random_line_measure(&mut rng));
        let ab = wasserstein1(&a, &b).map_err(e2s)?;
        let bc = wasserstein1(&b, &c).map_err(e2s)?;
        let ac = wasserstein1(&a, &c).map_err(e2s)?;
        worst = worst.max(ac - ab - bc);
        ensure(ac <= ab + bc + TRIANGLE_TOL, || format!("W1 triangle: {ac} > {ab} + {bc}"))?;
    }
    Ok(format!(
        "image margin {:.3}, Błocki margins {:.3}/{:.3}, {pairs_checked} dist_γ pairs, triangle excess {worst:.1e}",
        img.worst_margin, bl.worst_margin, dbl.worst_margin
    ))
}

// 10 -----------------------------------------------------------------------

const PLANS: &[(&str, &str)] = &[
    ("fekete", r#"{"set": {"kind": "interval", "a": -1, "b": 1}, "degrees": "1..8"}"#),
    ("fekete", r#"{"set": {"kind": "box", "lo": [0, 0], "hi": [1, 1]}, "degrees": "1..4"}"#),
    ("rates", r#"{"set": {"kind": "interval", "a": -1, "b": 1}, "degrees": "2..10"}"#),
    ("rates", r#"{"set": {"kind": "circle", "center": [0, 0], "radius": 1}, "degrees": "2..10", "mesh_points": 256}"#),
    ("extremal", r#"{"set": {"kind": "interval", "a": -1, "b": 1}, "degrees": "8..8"}"#),
    ("hcp", r#"{"set": {"kind": "interval", "a": -1, "b": 1}, "degrees": "16..16"}"#),
    ("validate-upc", r#"{"set": {"kind": "power-cusp", "M": 1, "m": 2, "extent": 1}, "degrees": "2..2"}"#),
];

fn csv_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .filter_map(|e| {
            let p = e.unwrap().path();
            (p.extension()? == "csv").then(|| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        })
        .collect();
    out.sort();
    out
}

fn determinism() -> Check {
    let exe = env!("CARGO_BIN_EXE_fekete");
    let tmp = tempfile::tempdir().map_err(e2s)?;
    let mut files = 0;
    for (i, (cmd, plan)) in PLANS.iter().enumerate() {
        let plan_path = tmp.path().join(format!("plan{i}.json"));
        std::fs::write(&plan_path, plan).map_err(e2s)?;
        let mut runs = Vec::new();
        for (run, workers) in [(0, None), (1, None), (2, Some("1"))] {
            let out = tmp.path().join(format!("out{i}-{run}"));
            let mut c = Command::new(exe);
            c.arg(cmd).arg("--plan").arg(&plan_path).arg("--out").arg(&out);
            if let Some(w) = workers {
                c.args(["--workers", w]);
            }
            let status = c.output().map_err(e2s)?;
            ensure(status.status.success(), || {
                format!("{cmd} plan {i} exited {:?}: {}", status.status.code(), String::from_utf8_lossy(&status.stderr))
            })?;
            runs.push(csv_files(&out));
        }
        ensure(!runs[0].is_empty(), || format!("{cmd} plan {i} wrote no CSV"))?;
        ensure(runs[0] == runs[1], || format!("{cmd} plan {i}: re-run differs"))?;
        ensure(runs[0] == runs[2], || format!("{cmd} plan {i}: --workers 1 differs"))?;
        files += runs[0].len();
    }
    Ok(format!("{} plans, {files} CSV files identical across 3 runs", PLANS.len()))
}

// ---------------------------------------------------------------------------

struct Criterion {
    id: u32,
    name: &'static str,
    budget: Duration,
    run: fn() -> Check,
}

fn main() {
    let criteria = [
        Criterion { id: 1, name: "rate-constant chain", budget: Duration::from_secs(1), run: rate_constants },
        Criterion { id: 2, name: "Fekete oracle agreement", budget: Duration::from_secs(60), run: fekete_oracle },
        Criterion { id: 3, name: "basis invariance", budget: Duration::from_secs(600), run: basis_invariance },
        Criterion { id: 4, name: "extremal oracle", budget: Duration::from_secs(60), run: extremal_oracle },
        Criterion { id: 5, name: "interval equidistribution", budget: Duration::from_secs(600), run: interval_experiment },
        Criterion { id: 6, name: "circle experiment", budget: Duration::from_secs(600), run: circle_experiment },
        Criterion { id: 7, name: "UPC machinery", budget: Duration::from_secs(600), run: upc_machinery },
        Criterion { id: 8, name: "HCP probe", budget: Duration::from_secs(600), run: hcp_probe },
        Criterion { id: 9, name: "inequality suites", budget: Duration::from_secs(600), run: inequality_suites },
        Criterion { id: 10, name: "determinism", budget: Duration::from_secs(600), run: determinism },
    ];
    let only: Option<u32> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    std::panic::set_hook(Box::new(|_| {}));
    let mut failed = 0;
    for c in criteria.iter().filter(|c| only.map_or(true, |k| k == c.id)) {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(c.run)).unwrap_or_else(|p| {
            let msg = p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into());
            Err(format!("panicked: {msg}"))
        });
        let elapsed = start.elapsed();
        let result = match result {
            Ok(_) if elapsed > c.budget => Err(format!("over budget: {elapsed:.1?} > {:?}", c.budget)),
            r => r,
        };
        match result {
            Ok(detail) => println!("PASS  {:>2}  {:<28} {:>8.2?}  {detail}", c.id, c.name, elapsed),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {:>2}  {:<28} {:>8.2?}  {detail}", c.id, c.name, elapsed)
            }
        }
    }
    if failed > 0 {
        println!("{failed} criterion(s) failed");
        std::process::exit(1);
    }
}
