//! Fekete configurations on candidate meshes: exhaustive search for tiny
//! cases, greedy maximal-volume selection, Leja sequences and single-swap
//! refinement.

use std::cmp::Ordering;

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{input, Error, Result};
use crate::geometry::CandidateMesh;
use crate::linalg::{self, Orthonormal};
use crate::point::Point;
use crate::polyspace::{change_basis_logdet_shift, log_abs_det, vandermonde, MultiIndexBasis, Weight};

pub const DEFAULT_BRUTE_BUDGET: u64 = 2_000_000;
pub const DEFAULT_REFINE_ROUNDS: usize = 50;
/// Minimum log-improvement for a swap to count.
pub const REFINE_TOL: f64 = 1e-12;
/// Stored and recomputed objectives must agree to this absolute tolerance.
pub const OBJECTIVE_TOL: f64 = 1e-9;
/// Pair exchanges are tried only when C(N_d,2)·C(|mesh|−N_d,2) stays below this.
pub const PAIR_EXCHANGE_BUDGET: u64 = 2_000_000;
/// Near-tie tolerance (absolute, in log|VDM|) for the exhaustive search.
const BRUTE_TIE_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Brute,
    Greedy,
    LejaPrefix,
    Refined,
}

/// Which solver produces a configuration.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    Greedy,
    #[default]
    GreedyRefine,
    Leja,
    Brute,
}

#[derive(Clone, Copy, Debug)]
pub struct SolverOptions {
    pub refine_rounds: usize,
    pub brute_budget: u64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            refine_rounds: DEFAULT_REFINE_ROUNDS,
            brute_budget: DEFAULT_BRUTE_BUDGET,
        }
    }
}

impl Solver {
    pub fn solve(self, problem: &FeketeProblem, opts: SolverOptions) -> Result<Configuration> {
        match self {
            Solver::Greedy => greedy_afp(problem),
            Solver::GreedyRefine => exchange_refine(problem, &greedy_afp(problem)?, opts.refine_rounds),
            Solver::Leja => leja_configuration(problem),
            Solver::Brute => brute_force_fekete(problem, Some(opts.brute_budget)),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Configuration {
    pub points: Vec<Point>,
    pub mesh_indices: Vec<usize>,
    pub degree: usize,
    pub scale: f64,
    /// log|VDM| in the monomial basis, weight included.
    pub objective: f64,
    pub provenance: Provenance,
    pub mesh_spacing: f64,
}

impl Configuration {
    /// Points in canonical order, for comparisons up to reordering.
    pub fn sorted_points(&self) -> Vec<Point> {
        let mut p = self.points.clone();
        p.sort_by(Point::total_cmp);
        p
    }

    pub fn same_points(&self, other: &Configuration) -> bool {
        self.sorted_points() == other.sorted_points()
    }

    /// Checks size, finiteness, distinctness and the stored objective.
    pub fn validate(&self, problem: &FeketeProblem) -> Result<()> {
        let n = problem.basis.len();
        if self.points.len() != n {
            return Err(Error::Shape(format!("configuration has {} points, N_d = {n}", self.points.len())));
        }
        if !self.objective.is_finite() {
            return Err(Error::DegenerateConfiguration("objective is not finite".into()));
        }
        let s = self.sorted_points();
        if s.windows(2).any(|w| w[0].total_cmp(&w[1]) == Ordering::Equal) {
            return Err(Error::DegenerateConfiguration("repeated point".into()));
        }
        let again = problem.objective_of(&self.points)?;
        if (again - self.objective).abs() > OBJECTIVE_TOL {
            return Err(Error::Internal(format!(
                "stored objective {} differs from recomputed {again}",
                self.objective
            )));
        }
        Ok(())
    }
}

/// A mesh, a basis of `P_d` and a weight: everything the solvers need.
#[derive(Clone, Debug)]
pub struct FeketeProblem<'a> {
    pub mesh: &'a CandidateMesh,
    pub basis: MultiIndexBasis,
    pub weight: Weight,
    pub scale: f64,
}

impl<'a> FeketeProblem<'a> {
    /// Unweighted problem in a basis well conditioned on the mesh.
    pub fn new(mesh: &'a CandidateMesh, degree: usize) -> Result<Self> {
        if mesh.is_empty() {
            return Err(Error::DegenerateMesh("empty mesh".into()));
        }
        let basis = MultiIndexBasis::well_conditioned(mesh.dim(), degree, mesh)?;
        Ok(FeketeProblem {
            mesh,
            basis,
            weight: Weight::Zero,
            scale: 0.0,
        })
    }

    pub fn with_basis(mut self, basis: MultiIndexBasis) -> Result<Self> {
        if basis.n() != self.mesh.dim() {
            return Err(Error::Dimension {
                expected: self.mesh.dim(),
                got: basis.n(),
            });
        }
        self.basis = basis;
        Ok(self)
    }

    pub fn with_weight(mut self, weight: Weight, scale: f64) -> Self {
        self.weight = weight;
        self.scale = scale;
        self
    }

    pub fn degree(&self) -> usize {
        self.basis.degree()
    }

    pub fn n_d(&self) -> usize {
        self.basis.len()
    }

    /// Monomial-normalized log|VDM| of an N_d-point set.
    pub fn objective_of(&self, points: &[Point]) -> Result<f64> {
        let v = vandermonde(&self.basis, points, &self.weight, self.scale, true)?;
        let raw = log_abs_det(&v)?;
        Ok(raw - self.monomial_shift()?)
    }

    fn monomial_shift(&self) -> Result<f64> {
        let mono = MultiIndexBasis::monomial(self.basis.n(), self.basis.degree())?;
        change_basis_logdet_shift(&mono, &self.basis)
    }

    fn mesh_vandermonde(&self, basis: &MultiIndexBasis) -> Result<crate::polyspace::WeightedVandermonde> {
        vandermonde(basis, &self.mesh.points, &self.weight, self.scale, false)
    }

    fn configuration(&self, mut indices: Vec<usize>, provenance: Provenance) -> Result<Configuration> {
        indices.sort_unstable();
        let points: Vec<Point> = indices.iter().map(|&i| self.mesh.points[i].clone()).collect();
        let objective = self.objective_of(&points)?;
        if !objective.is_finite() {
            return Err(Error::DegenerateMesh(format!(
                "selected points are not unisolvent for degree {}",
                self.degree()
            )));
        }
        Ok(Configuration {
            points,
            mesh_indices: indices,
            degree: self.degree(),
            scale: self.scale,
            objective,
            provenance,
            mesh_spacing: self.mesh.spacing,
        })
    }

    fn check_size(&self) -> Result<()> {
        if self.mesh.len() < self.n_d() {
            return Err(Error::DegenerateMesh(format!(
                "mesh has {} points, need N_d = {}",
                self.mesh.len(),
                self.n_d()
            )));
        }
        Ok(())
    }
}

fn binomial_saturating(m: usize, k: usize) -> u128 {
    if k > m {
        return 0;
    }
    let k = k.min(m - k);
    let mut acc: u128 = 1;
    for i in 0..k as u128 {
        acc = acc.saturating_mul(m as u128 - i) / (i + 1);
        if acc == u128::MAX {
            break;
        }
    }
    acc
}

/// Exhaustive maximization of |VDM| over all N_d-subsets of the mesh. Near
/// ties (within 1e-12 in log scale) go to the lexicographically smallest
/// index tuple.
pub fn brute_force_fekete(problem: &FeketeProblem, budget: Option<u64>) -> Result<Configuration> {
    problem.check_size()?;
    let budget = budget.unwrap_or(DEFAULT_BRUTE_BUDGET);
    let n = problem.n_d();
    let m = problem.mesh.len();
    let subsets = binomial_saturating(m, n);
    if subsets > budget as u128 {
        return Err(Error::Capacity(format!(
            "exhaustive search over C({m}, {n}) = {subsets} subsets exceeds the budget {budget}; \
             a budget of at least {subsets} is required"
        )));
    }
    let v = problem.mesh_vandermonde(&problem.basis)?;
    let cols: Vec<&[Complex64]> = (0..m).map(|j| v.column(j)).collect();

    // Parallel over the first index; merged in index order so the result
    // matches a sequential lexicographic scan.
    let partial: Vec<Option<(f64, Vec<usize>)>> = (0..=m - n)
        .into_par_iter()
        .map(|first| {
            let mut search = Subsets::new(&cols, n);
            search.descend(first, 0, 0.0);
            search.best
        })
        .collect();
    let mut best: Option<(f64, Vec<usize>)> = None;
    for cand in partial.into_iter().flatten() {
        if best.as_ref().map_or(true, |b| cand.0 > b.0 + BRUTE_TIE_TOL) {
            best = Some(cand);
        }
    }
    let (_, idx) = best.ok_or_else(|| Error::DegenerateMesh("no unisolvent N_d-subset of the mesh".into()))?;
    problem.configuration(idx, Provenance::Brute)
}

struct Subsets<'c> {
    cols: &'c [&'c [Complex64]],
    n: usize,
    // orthonormal vectors for each depth, row-major n × n
    q: Vec<Complex64>,
    scratch: Vec<Complex64>,
    chosen: Vec<usize>,
    best: Option<(f64, Vec<usize>)>,
}

impl<'c> Subsets<'c> {
    fn new(cols: &'c [&'c [Complex64]], n: usize) -> Self {
        Subsets {
            cols,
            n,
            q: vec![Complex64::new(0.0, 0.0); n * n],
            scratch: vec![Complex64::new(0.0, 0.0); n],
            chosen: Vec::with_capacity(n),
            best: None,
        }
    }

    /// Residual of column `j` against the first `depth` stored vectors, in
    /// `scratch`; returns its norm and the column norm.
    fn residual(&mut self, j: usize, depth: usize) -> (f64, f64) {
        let n = self.n;
        self.scratch.copy_from_slice(self.cols[j]);
        let cn = linalg::norm(&self.scratch);
        for _ in 0..2 {
            for k in 0..depth {
                let qk = &self.q[k * n..(k + 1) * n];
                let c = linalg::dot(qk, &self.scratch);
                for (r, y) in self.scratch.iter_mut().zip(qk) {
                    *r -= c * y;
                }
            }
        }
        (linalg::norm(&self.scratch), cn)
    }

    fn descend(&mut self, j: usize, depth: usize, acc: f64) {
        let (nr, cn) = self.residual(j, depth);
        if linalg::is_singular(nr, cn) {
            return;
        }
        let acc = acc + nr.ln();
        self.chosen.push(j);
        if depth + 1 == self.n {
            if self.best.as_ref().map_or(true, |b| acc > b.0 + BRUTE_TIE_TOL) {
                self.best = Some((acc, self.chosen.clone()));
            }
        } else {
            let n = self.n;
            for (dst, src) in self.q[depth * n..(depth + 1) * n].iter_mut().zip(&self.scratch) {
                *dst = src / nr;
            }
            let remaining = self.n - depth - 1;
            for next in j + 1..=self.cols.len() - remaining {
                self.descend(next, depth + 1, acc);
            }
        }
        self.chosen.pop();
    }
}

/// Orthonormalizes the rows of the mesh Vandermonde (rows = basis elements).
/// The column geometry of the result is independent of the basis chosen for
/// `P_d`, which makes column-pivoted selection basis invariant.
fn mesh_orthonormal_columns(problem: &FeketeProblem, basis: &MultiIndexBasis) -> Result<Vec<Vec<Complex64>>> {
    let v = problem.mesh_vandermonde(basis)?;
    let (n, m) = (v.rows, v.cols);
    let mut rows = Orthonormal::with_capacity(n);
    for k in 0..n {
        let row: Vec<Complex64> = (0..m).map(|j| v.entry(k, j)).collect();
        let r = rows.residual(&row);
        if linalg::is_singular(linalg::norm(&r), linalg::norm(&row)) {
            return Err(Error::DegenerateMesh(format!(
                "mesh of {m} points is not unisolvent for degree {}",
                basis.degree()
            )));
        }
        rows.push_residual(r);
    }
    let q = rows.vectors();
    Ok((0..m).map(|j| (0..n).map(|k| q[k][j]).collect()).collect())
}

/// Greedy column-pivoted selection of `count` columns; ties go to the lowest
/// index. `start` forces the first pick.
fn pivoted_selection(mut cols: Vec<Vec<Complex64>>, count: usize, start: Option<usize>) -> Result<Vec<usize>> {
    let m = cols.len();
    let floor = cols.iter().map(|c| linalg::norm(c)).fold(0.0, f64::max);
    let mut taken = vec![false; m];
    let mut basis = Orthonormal::with_capacity(count);
    let mut picked = Vec::with_capacity(count);
    for step in 0..count {
        let p = match (step, start) {
            (0, Some(s)) => s,
            _ => {
                let scores: Vec<f64> = cols
                    .par_iter()
                    .zip(taken.par_iter())
                    .map(|(c, &t)| if t { f64::NAN } else { linalg::norm(c) })
                    .collect();
                linalg::argmax_lowest(scores)
                    .ok_or_else(|| Error::DegenerateMesh("ran out of mesh points".into()))?
            }
        };
        let r = basis.residual(&cols[p]);
        if linalg::is_singular(linalg::norm(&r), floor) {
            return Err(Error::DegenerateMesh(format!(
                "rank deficiency after {step} of {count} points"
            )));
        }
        taken[p] = true;
        picked.push(p);
        basis.push_residual(r);
        let u = basis.vectors().last().expect("pushed").clone();
        cols.par_iter_mut().zip(taken.par_iter()).for_each(|(c, &t)| {
            if !t {
                let k = linalg::dot(&u, c);
                for (x, y) in c.iter_mut().zip(&u) {
                    *x -= k * y;
                }
            }
        });
    }
    Ok(picked)
}

fn check_degree(problem: &FeketeProblem) -> Result<()> {
    if problem.mesh.max_valid_degree < problem.degree() {
        return input(format!(
            "mesh is valid up to degree {}, requested {}",
            problem.mesh.max_valid_degree,
            problem.degree()
        ));
    }
    Ok(())
}

/// Approximate Fekete points: greedy maximal-volume column selection on the
/// mesh Vandermonde.
pub fn greedy_afp(problem: &FeketeProblem) -> Result<Configuration> {
    problem.check_size()?;
    check_degree(problem)?;
    let cols = mesh_orthonormal_columns(problem, &problem.basis)?;
    let idx = pivoted_selection(cols, problem.n_d(), None)?;
    problem.configuration(idx, Provenance::Greedy)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LejaSequence {
    pub indices: Vec<usize>,
    pub points: Vec<Point>,
}

/// Leja sequence of `count` mesh points: each new point maximizes the next
/// orthogonalized basis column (Gaussian elimination with row pivoting in
/// graded basis order). `start` forces the first point.
pub fn leja_sequence(problem: &FeketeProblem, count: usize, start: Option<usize>) -> Result<LejaSequence> {
    let m = problem.mesh.len();
    if count > m {
        return input(format!("count {count} exceeds mesh size {m}"));
    }
    if let Some(s) = start {
        if s >= m {
            return input(format!("start index {s} outside mesh of {m} points"));
        }
    }
    let mut degree = 0;
    while crate::polyspace::basis_dimension(problem.basis.n(), degree)? < count {
        degree += 1;
    }
    let basis = problem.basis.with_degree(degree)?;
    let v = problem.mesh_vandermonde(&basis)?;
    // a[j] is row j (mesh point j) of the eliminated matrix
    let mut a: Vec<Vec<Complex64>> = (0..m).map(|j| v.column(j)[..count].to_vec()).collect();
    let col_scale: Vec<f64> = (0..count)
        .map(|k| a.iter().map(|r| r[k].norm()).fold(0.0, f64::max))
        .collect();
    let mut taken = vec![false; m];
    let mut indices = Vec::with_capacity(count);
    for k in 0..count {
        let p = match (k, start) {
            (0, Some(s)) => s,
            _ => linalg::argmax_lowest(
                a.iter().zip(&taken).map(|(r, &t)| if t { f64::NAN } else { r[k].norm() }),
            )
            .expect("count <= mesh size"),
        };
        let pivot = a[p][k];
        if !(pivot.norm() > linalg::REL_SINGULAR * col_scale[k]) || pivot.norm() <= linalg::ABS_SINGULAR {
            return Err(Error::DegenerateMesh(format!("rank deficiency after {k} of {count} Leja points")));
        }
        taken[p] = true;
        indices.push(p);
        let prow = a[p].clone();
        a.par_iter_mut().zip(taken.par_iter()).for_each(|(r, &t)| {
            if !t {
                let f = r[k] / pivot;
                for (x, y) in r[k..].iter_mut().zip(&prow[k..]) {
                    *x -= f * y;
                }
            }
        });
    }
    let points = indices.iter().map(|&i| problem.mesh.points[i].clone()).collect();
    Ok(LejaSequence { indices, points })
}

/// The first N_d Leja points as a configuration.
pub fn leja_configuration(problem: &FeketeProblem) -> Result<Configuration> {
    problem.check_size()?;
    check_degree(problem)?;
    let seq = leja_sequence(problem, problem.n_d(), None)?;
    problem.configuration(seq.indices, Provenance::LejaPrefix)
}

/// Single-point exchange: applies the best improving (slot, candidate) swap
/// until none improves log|VDM| by more than [`REFINE_TOL`] or `max_rounds`
/// swaps were made. When no single swap helps and the problem is small
/// (see [`PAIR_EXCHANGE_BUDGET`]), two-for-two swaps are tried before giving up.
pub fn exchange_refine(problem: &FeketeProblem, config: &Configuration, max_rounds: usize) -> Result<Configuration> {
    let n = problem.n_d();
    if config.mesh_indices.len() != n {
        return Err(Error::Shape(format!(
            "configuration has {} points, N_d = {n}",
            config.mesh_indices.len()
        )));
    }
    if config.mesh_indices.iter().any(|&i| i >= problem.mesh.len()) {
        return input("configuration index outside the mesh");
    }
    let v = problem.mesh_vandermonde(&problem.basis)?;
    let m = v.cols;
    let vm = DMatrix::from_fn(n, m, |i, j| v.entry(i, j));
    let solve = |slots: &[usize]| -> Result<DMatrix<Complex64>> {
        let vs = DMatrix::from_fn(n, n, |i, k| vm[(i, slots[k])]);
        vs.lu()
            .solve(&vm)
            .ok_or_else(|| Error::DegenerateConfiguration("configuration matrix is singular".into()))
    };

    let mut slots = config.mesh_indices.clone();
    let mut current = problem.objective_of(&slots.iter().map(|&i| problem.mesh.points[i].clone()).collect::<Vec<_>>())?;
    if !current.is_finite() {
        return Err(Error::DegenerateConfiguration("input configuration is singular".into()));
    }
    let mut w = solve(&slots)?;
    let mut swaps = 0;
    while swaps < max_rounds {
        let in_config: Vec<bool> = {
            let mut b = vec![false; m];
            slots.iter().for_each(|&i| b[i] = true);
            b
        };
        // best slot per candidate, lowest slot on ties
        let per_cand: Vec<(f64, usize)> = (0..m)
            .into_par_iter()
            .map(|c| {
                if in_config[c] {
                    return (f64::NAN, 0);
                }
                let col = (0..n).map(|i| w[(i, c)].norm());
                let i = linalg::argmax_lowest(col).unwrap_or(0);
                (w[(i, c)].norm(), i)
            })
            .collect();
        let single = linalg::argmax_lowest(per_cand.iter().map(|x| x.0))
            .map(|c| (c, per_cand[c]))
            .filter(|(_, (gain, _))| gain.ln() > REFINE_TOL);
        let Some((c, (_, i))) = single else {
            match best_pair_swap(&w, &in_config, &slots) {
                Some([(i1, c1), (i2, c2)]) => {
                    slots[i1] = c1;
                    slots[i2] = c2;
                    swaps += 1;
                    let next = problem.objective_of(&slots.iter().map(|&k| problem.mesh.points[k].clone()).collect::<Vec<_>>())?;
                    if !(next >= current - OBJECTIVE_TOL) {
                        return Err(Error::Internal(format!(
                            "pair exchange decreased the objective from {current} to {next}"
                        )));
                    }
                    current = next;
                    w = solve(&slots)?;
                    continue;
                }
                None => break,
            }
        };
        slots[i] = c;
        swaps += 1;
        let next = problem.objective_of(&slots.iter().map(|&k| problem.mesh.points[k].clone()).collect::<Vec<_>>())?;
        if !(next >= current - OBJECTIVE_TOL) {
            return Err(Error::Internal(format!(
                "exchange decreased the objective from {current} to {next}"
            )));
        }
        current = next;
        if swaps % 8 == 0 {
            w = solve(&slots)?;
        } else {
            let pivot = w[(i, c)];
            let wi: Vec<Complex64> = (0..m).map(|j| w[(i, j)] / pivot).collect();
            let wc: Vec<Complex64> = (0..n).map(|r| w[(r, c)]).collect();
            for j in 0..m {
                for r in 0..n {
                    if r == i {
                        w[(r, j)] = wi[j];
                    } else {
                        w[(r, j)] -= wc[r] * wi[j];
                    }
                }
            }
        }
    }
    log::debug!("exchange_refine: {swaps} swaps, objective {current}");
    let mut out = problem.configuration(slots, Provenance::Refined)?;
    if swaps == 0 {
        out.provenance = config.provenance;
    }
    Ok(out)
}

/// Best improving two-for-two swap, or `None` when none beats [`REFINE_TOL`]
/// or the scan would exceed [`PAIR_EXCHANGE_BUDGET`]. `w = V_S⁻¹ V` so the
/// determinant ratio of a double swap is the 2×2 minor of `w`.
fn best_pair_swap(w: &DMatrix<Complex64>, in_config: &[bool], slots: &[usize]) -> Option<[(usize, usize); 2]> {
    let n = slots.len();
    let free: Vec<usize> = (0..in_config.len()).filter(|&c| !in_config[c]).collect();
    let pairs = |k: usize| (k * k.saturating_sub(1) / 2) as u64;
    if n < 2 || free.len() < 2 || pairs(n).saturating_mul(pairs(free.len())) > PAIR_EXCHANGE_BUDGET {
        return None;
    }
    // scan order (i1, i2, c1, c2) ascending; first strict maximum wins
    let mut best: Option<(f64, [(usize, usize); 2])> = None;
    for i1 in 0..n {
        for i2 in i1 + 1..n {
            for (a, &c1) in free.iter().enumerate() {
                for &c2 in &free[a + 1..] {
                    let g = (w[(i1, c1)] * w[(i2, c2)] - w[(i1, c2)] * w[(i2, c1)]).norm();
                    if best.map_or(true, |(b, _)| g > b) {
                        best = Some((g, [(i1, c1), (i2, c2)]));
                    }
                }
            }
        }
    }
    best.filter(|(g, _)| g.ln() > REFINE_TOL).map(|(_, s)| s)
}
