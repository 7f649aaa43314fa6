//! Polynomial bases on 𝕂ⁿ, weighted Vandermonde matrices and overflow-safe
//! log-determinants.

use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Ambient, CandidateMesh, CompactSetModel};
use crate::linalg::{self, Orthonormal};
use crate::point::Point;

pub type MultiIndex = Vec<u32>;

/// `N_d = C(n + d, n)`, the dimension of polynomials of degree ≤ d on 𝕂ⁿ.
pub fn basis_dimension(n: usize, d: usize) -> Result<usize> {
    let mut acc: u128 = 1;
    for i in 1..=n as u128 {
        acc = acc * (d as u128 + i) / i;
        if acc > (1u128 << 40) {
            return Err(Error::Capacity(format!("N_d for n = {n}, d = {d} exceeds 2^40")));
        }
    }
    usize::try_from(acc).map_err(|_| Error::Capacity(format!("N_d for n = {n}, d = {d} overflows usize")))
}

/// All `α ∈ ℕⁿ` with `|α| ≤ d` in graded-lexicographic order.
pub fn multi_indices(n: usize, d: usize) -> Result<Vec<MultiIndex>> {
    if n == 0 {
        return Err(Error::Input("dimension n must be >= 1".into()));
    }
    let total = basis_dimension(n, d)?;
    let mut out = Vec::with_capacity(total);
    for k in 0..=d as u32 {
        let mut level = Vec::new();
        compositions(n, k, &mut Vec::with_capacity(n), &mut level);
        out.extend(level);
    }
    debug_assert_eq!(out.len(), total);
    Ok(out)
}

/// Tuples of length `n` summing to `k`, lexicographically increasing.
fn compositions(n: usize, k: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() + 1 == n {
        let mut a = prefix.clone();
        a.push(k);
        out.push(a);
        return;
    }
    for first in 0..=k {
        prefix.push(first);
        compositions(n, k - first, prefix, out);
        prefix.pop();
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "flavor", rename_all = "kebab-case")]
pub enum BasisFlavor {
    Monomial,
    /// `(z - c)^α`.
    ShiftedMonomial { center: Vec<Complex64> },
    /// `∏ T_{α_i}(ξ_i(z))` with the affine chart `ξ_i` mapping `[lo_i, hi_i]`
    /// onto `[-1, 1]`.
    ChebyshevTensor { lo: Vec<f64>, hi: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct MultiIndexBasis {
    n: usize,
    degree: usize,
    indices: Vec<MultiIndex>,
    flavor: BasisFlavor,
}

impl MultiIndexBasis {
    pub fn new(n: usize, degree: usize, flavor: BasisFlavor) -> Result<Self> {
        match &flavor {
            BasisFlavor::Monomial => {}
            BasisFlavor::ShiftedMonomial { center } => {
                if center.len() != n {
                    return Err(Error::Shape(format!("shift center has length {}, expected {n}", center.len())));
                }
            }
            BasisFlavor::ChebyshevTensor { lo, hi } => {
                if lo.len() != n || hi.len() != n {
                    return Err(Error::Shape("Chebyshev chart dimension mismatch".into()));
                }
                if lo.iter().zip(hi).any(|(l, h)| !(l < h)) {
                    return Err(Error::Input("Chebyshev chart needs lo < hi".into()));
                }
            }
        }
        Ok(MultiIndexBasis {
            n,
            degree,
            indices: multi_indices(n, degree)?,
            flavor,
        })
    }

    pub fn monomial(n: usize, degree: usize) -> Result<Self> {
        Self::new(n, degree, BasisFlavor::Monomial)
    }

    pub fn chebyshev(n: usize, degree: usize, lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        Self::new(n, degree, BasisFlavor::ChebyshevTensor { lo, hi })
    }

    /// Chebyshev tensor basis charted on the real bounding box of the mesh;
    /// monomials for complex meshes or meshes flat along an axis.
    pub fn well_conditioned(n: usize, degree: usize, mesh: &CandidateMesh) -> Result<Self> {
        if mesh.points.iter().all(|p| p.is_real(0.0)) {
            let mut lo = vec![f64::INFINITY; n];
            let mut hi = vec![f64::NEG_INFINITY; n];
            for p in &mesh.points {
                for (i, z) in p.coords().iter().enumerate() {
                    lo[i] = lo[i].min(z.re);
                    hi[i] = hi[i].max(z.re);
                }
            }
            if lo.iter().zip(&hi).all(|(l, h)| l < h) {
                return Self::chebyshev(n, degree, lo, hi);
            }
        }
        Self::monomial(n, degree)
    }

    /// Same as [`Self::well_conditioned`] but charted on a set model.
    pub fn for_set(set: &CompactSetModel, degree: usize) -> Result<Self> {
        let n = set.dim();
        match set.ambient() {
            Ambient::Real => {
                let bb = set.bounding_box();
                Self::chebyshev(n, degree, bb.lo, bb.hi)
            }
            Ambient::Complex => Self::monomial(n, degree),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn indices(&self) -> &[MultiIndex] {
        &self.indices
    }

    pub fn flavor(&self) -> &BasisFlavor {
        &self.flavor
    }

    /// The same flavor at another degree. Graded order makes the lower-degree
    /// basis a prefix of the higher one.
    pub fn with_degree(&self, degree: usize) -> Result<Self> {
        Self::new(self.n, degree, self.flavor.clone())
    }

    fn univariate(&self, coord: usize, z: Complex64, out: &mut [Complex64]) {
        let one = Complex64::new(1.0, 0.0);
        match &self.flavor {
            BasisFlavor::Monomial | BasisFlavor::ShiftedMonomial { .. } => {
                let x = match &self.flavor {
                    BasisFlavor::ShiftedMonomial { center } => z - center[coord],
                    _ => z,
                };
                let mut p = one;
                for o in out.iter_mut() {
                    *o = p;
                    p *= x;
                }
            }
            BasisFlavor::ChebyshevTensor { lo, hi } => {
                let (l, h) = (lo[coord], hi[coord]);
                let xi = (z * 2.0 - (l + h)) / (h - l);
                let (mut prev, mut cur) = (one, xi);
                for (k, o) in out.iter_mut().enumerate() {
                    *o = match k {
                        0 => one,
                        1 => xi,
                        _ => {
                            let next = xi * 2.0 * cur - prev;
                            prev = cur;
                            cur = next;
                            next
                        }
                    };
                }
            }
        }
    }

    /// Values of every basis element at `z`, in basis order.
    pub fn eval(&self, z: &Point) -> Vec<Complex64> {
        let mut out = vec![Complex64::new(0.0, 0.0); self.len()];
        self.eval_into(z, &mut out);
        out
    }

    pub fn eval_into(&self, z: &Point, out: &mut [Complex64]) {
        let d1 = self.degree + 1;
        let mut table = vec![Complex64::new(0.0, 0.0); self.n * d1];
        for i in 0..self.n {
            self.univariate(i, z.coord(i), &mut table[i * d1..(i + 1) * d1]);
        }
        for (o, alpha) in out.iter_mut().zip(&self.indices) {
            *o = alpha
                .iter()
                .enumerate()
                .map(|(i, &a)| table[i * d1 + a as usize])
                .product();
        }
    }

    /// `Σ_α log|c_α|` where `c_α` is the coefficient of `z^α` in the basis
    /// element indexed by `α`. Each flavor is triangular over monomials in
    /// graded order, so this is `log|det|` of the map from monomials.
    fn log_leading(&self) -> f64 {
        match &self.flavor {
            BasisFlavor::Monomial | BasisFlavor::ShiftedMonomial { .. } => 0.0,
            BasisFlavor::ChebyshevTensor { lo, hi } => self
                .indices
                .iter()
                .map(|alpha| {
                    alpha
                        .iter()
                        .enumerate()
                        .filter(|(_, &a)| a > 0)
                        .map(|(i, &a)| {
                            let chart = (2.0 / (hi[i] - lo[i])).ln();
                            (a as f64 - 1.0) * std::f64::consts::LN_2 + a as f64 * chart
                        })
                        .sum::<f64>()
                })
                .sum(),
        }
    }
}

/// `log|det T|` for the change of basis `B = T·A`; for any point set,
/// `log|VDM_B| = log|VDM_A| + shift`.
pub fn change_basis_logdet_shift(a: &MultiIndexBasis, b: &MultiIndexBasis) -> Result<f64> {
    if a.n != b.n || a.degree != b.degree {
        return Err(Error::Shape(format!(
            "bases span different spaces: (n, d) = ({}, {}) vs ({}, {})",
            a.n, a.degree, b.n, b.degree
        )));
    }
    Ok(b.log_leading() - a.log_leading())
}

/// Weight `φ` of the Vandermonde-type determinant.
#[derive(Clone, Default)]
pub enum Weight {
    #[default]
    Zero,
    Constant(f64),
    /// `φ(x) = Σ c_i Re x_i`.
    Linear(Vec<f64>),
    Custom(Arc<dyn Fn(&Point) -> f64 + Send + Sync>),
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Weight::Zero => write!(f, "Zero"),
            Weight::Constant(c) => write!(f, "Constant({c})"),
            Weight::Linear(c) => write!(f, "Linear({c:?})"),
            Weight::Custom(_) => write!(f, "Custom(..)"),
        }
    }
}

impl Weight {
    pub fn eval(&self, x: &Point) -> f64 {
        match self {
            Weight::Zero => 0.0,
            Weight::Constant(c) => *c,
            Weight::Linear(c) => c.iter().zip(x.coords()).map(|(a, z)| a * z.re).sum(),
            Weight::Custom(f) => f(x),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Weight::Zero)
    }

    /// `φ + c`.
    pub fn shifted(&self, c: f64) -> Weight {
        let base = self.clone();
        Weight::Custom(Arc::new(move |x| base.eval(x) + c))
    }

    /// Column factor `exp(-s·φ(x))`.
    pub fn factor(&self, x: &Point, scale: f64) -> f64 {
        if scale == 0.0 || self.is_zero() {
            1.0
        } else {
            (-scale * self.eval(x)).exp()
        }
    }
}

/// Matrix with entries `e_i(x_j)·exp(-s·φ(x_j))`, stored column-major: one
/// column per point.
#[derive(Clone, Debug)]
pub struct WeightedVandermonde {
    pub rows: usize,
    pub cols: usize,
    pub degree: usize,
    pub scale: f64,
    pub points: Vec<Point>,
    data: Vec<Complex64>,
}

impl WeightedVandermonde {
    pub fn column(&self, j: usize) -> &[Complex64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.data[j * self.rows + i]
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }
}

/// Builds the weighted Vandermonde matrix of `basis` at `points`. With
/// `square` the point count must equal `N_d`.
pub fn vandermonde(
    basis: &MultiIndexBasis,
    points: &[Point],
    weight: &Weight,
    scale: f64,
    square: bool,
) -> Result<WeightedVandermonde> {
    if square && points.len() != basis.len() {
        return Err(Error::Shape(format!(
            "square Vandermonde needs {} points, got {}",
            basis.len(),
            points.len()
        )));
    }
    if let Some(p) = points.iter().find(|p| p.dim() != basis.n) {
        return Err(Error::Dimension {
            expected: basis.n,
            got: p.dim(),
        });
    }
    let rows = basis.len();
    let mut data = vec![Complex64::new(0.0, 0.0); rows * points.len()];
    if rows > 0 {
        data.par_chunks_mut(rows).zip(points.par_iter()).for_each(|(col, x)| {
            basis.eval_into(x, col);
            let w = weight.factor(x, scale);
            if w != 1.0 {
                for c in col.iter_mut() {
                    *c *= w;
                }
            }
        });
    }
    Ok(WeightedVandermonde {
        rows,
        cols: points.len(),
        degree: basis.degree,
        scale,
        points: points.to_vec(),
        data,
    })
}

/// `log|det|` as the sum of log residual norms of a column-pivoted
/// Gram–Schmidt factorization (the diagonal of R in `V P = Q R`). Columns are
/// taken largest-residual first, ties broken by a canonical point order, so
/// the result is bitwise invariant under permutations of the points. Returns
/// `-∞` when some column is dependent on the others.
pub fn log_abs_det(v: &WeightedVandermonde) -> Result<f64> {
    if !v.is_square() {
        return Err(Error::Shape(format!("log_abs_det needs a square matrix, got {}x{}", v.rows, v.cols)));
    }
    let mut order: Vec<usize> = (0..v.cols).collect();
    order.sort_by(|&a, &b| v.points[a].total_cmp(&v.points[b]).then(a.cmp(&b)));
    let norms: Vec<f64> = order.iter().map(|&j| linalg::norm(v.column(j))).collect();
    let mut res: Vec<Vec<Complex64>> = order.iter().map(|&j| v.column(j).to_vec()).collect();
    let mut alive: Vec<bool> = vec![true; v.cols];
    let mut q = Orthonormal::with_capacity(v.cols);
    let mut total = 0.0;
    for _ in 0..v.cols {
        let scores = res
            .iter()
            .zip(&alive)
            .map(|(r, &a)| if a { linalg::norm(r) } else { f64::NAN });
        let k = linalg::argmax_lowest(scores).expect("a live column remains");
        alive[k] = false;
        // the running residual drifts; re-orthogonalize the pivot from scratch
        let r = q.residual(&res[k]);
        let nr = linalg::norm(&r);
        if linalg::is_singular(nr, norms[k]) {
            return Ok(f64::NEG_INFINITY);
        }
        total += nr.ln();
        q.push_residual(r);
        let qk = q.vectors().last().expect("just pushed");
        for (rj, _) in res.iter_mut().zip(&alive).filter(|(_, &a)| a) {
            let c = linalg::dot(qk, rj);
            for (x, y) in rj.iter_mut().zip(qk) {
                *x -= c * y;
            }
        }
    }
    Ok(total)
}
