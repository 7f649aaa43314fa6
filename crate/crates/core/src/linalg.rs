//! Small dense helpers shared by the determinant solvers.

use num_complex::Complex64;

/// Relative tie tolerance for argmax scans: candidates within this factor of
/// the best score count as tied and the lowest index wins.
pub(crate) const TIE_REL_TOL: f64 = 1e-9;

/// Columns whose residual after orthogonalization falls below this fraction
/// of their norm are treated as linearly dependent.
pub(crate) const REL_SINGULAR: f64 = 1e-13;

/// Absolute floor below which a residual is treated as zero.
pub(crate) const ABS_SINGULAR: f64 = 1e-300;

pub(crate) fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    // conj(a)·b
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn norm(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

/// Incrementally built orthonormal family in ℂ^dim.
#[derive(Clone, Debug, Default)]
pub(crate) struct Orthonormal {
    vecs: Vec<Vec<Complex64>>,
}

impl Orthonormal {
    pub fn with_capacity(k: usize) -> Self {
        Orthonormal {
            vecs: Vec::with_capacity(k),
        }
    }

    /// Residual of `v` against the family, classical Gram–Schmidt applied twice.
    pub fn residual(&self, v: &[Complex64]) -> Vec<Complex64> {
        let mut r = v.to_vec();
        for _ in 0..2 {
            for q in &self.vecs {
                let c = dot(q, &r);
                for (ri, qi) in r.iter_mut().zip(q) {
                    *ri -= c * qi;
                }
            }
        }
        r
    }

    /// Pushes the normalized residual; returns its norm.
    pub fn push_residual(&mut self, mut r: Vec<Complex64>) -> f64 {
        let nr = norm(&r);
        if nr > 0.0 {
            for x in r.iter_mut() {
                *x /= nr;
            }
        }
        self.vecs.push(r);
        nr
    }

    pub fn vectors(&self) -> &[Vec<Complex64>] {
        &self.vecs
    }
}

/// Whether a residual norm signals a dependent column.
pub(crate) fn is_singular(residual: f64, column_norm: f64) -> bool {
    !(residual > ABS_SINGULAR) || residual <= REL_SINGULAR * column_norm
}

/// Index of the largest score, treating relative near-ties as ties resolved
/// toward the lowest index. `None` for an empty or all-NaN input.
pub(crate) fn argmax_lowest(scores: impl IntoIterator<Item = f64>) -> Option<usize> {
    let scores: Vec<f64> = scores.into_iter().collect();
    let max = scores.iter().copied().filter(|s| !s.is_nan()).fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return None;
    }
    let cut = if max > 0.0 { max * (1.0 - TIE_REL_TOL) } else { max };
    scores.iter().position(|&s| s >= cut)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn argmax_prefers_lowest_among_near_ties() {
        assert_eq!(argmax_lowest([1.0, 3.0, 3.0 * (1.0 + 1e-12), 2.0]), Some(1));
        assert_eq!(argmax_lowest([1.0, 3.0, 3.1]), Some(2));
        assert_eq!(argmax_lowest(Vec::<f64>::new()), None);
    }

    #[test]
    fn residual_is_orthogonal() {
        let mut o = Orthonormal::default();
        let v1 = vec![Complex64::new(1.0, 0.0), Complex64::new(1.0, 1.0)];
        let r1 = o.residual(&v1);
        o.push_residual(r1);
        let v2 = vec![Complex64::new(0.0, 2.0), Complex64::new(1.0, 0.0)];
        let r2 = o.residual(&v2);
        assert!(dot(&o.vectors()[0], &r2).norm() < 1e-14);
    }
}
