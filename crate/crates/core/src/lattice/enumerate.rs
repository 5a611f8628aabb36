use nalgebra::DMatrix;

use super::basis::{int_rank, LatticeBasis};
use super::reduce::lll_reduce_default;
use crate::error::{domain_err, Error, Result};

/// Default cap on visited enumeration-tree nodes.
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// Relative slack applied to the search radius so boundary points survive
/// floating-point rounding.
const RADIUS_SLACK: f64 = 1e-10;

/// A nonzero lattice vector: integer coefficients in the input basis and the
/// squared Euclidean norm of `vector * generator`.
#[derive(Debug, Clone, PartialEq)]
pub struct ShortVectorReport {
    pub vector: Vec<i64>,
    pub norm_sq: f64,
}

pub fn enumerate_short_vectors(basis: &LatticeBasis, radius: f64) -> Result<Vec<ShortVectorReport>> {
    enumerate_short_vectors_with_budget(basis, radius, DEFAULT_NODE_BUDGET)
}

/// All nonzero lattice vectors of norm at most `radius`, one per `±v` pair
/// (first nonzero coefficient positive), sorted by norm then coefficients.
pub fn enumerate_short_vectors_with_budget(
    basis: &LatticeBasis,
    radius: f64,
    budget: u64,
) -> Result<Vec<ShortVectorReport>> {
    if !(radius.is_finite() && radius >= 0.0) {
        return Err(domain_err(format!("enumeration radius must be finite and nonnegative, got {radius}")));
    }
    let reduced = lll_reduce_default(basis)?;
    let radius_sq = radius * radius;
    let limit = radius_sq * (1.0 + RADIUS_SLACK);
    let d = basis.dim();
    let transform = &reduced.transform;

    let mut out = Vec::new();
    let mut orig = vec![0i64; d];
    enumerate_ball(reduced.basis.generator(), limit, budget, |coeffs| {
        for j in 0..d {
            orig[j] = (0..d).map(|i| coeffs[i] * transform[(i, j)]).sum();
        }
        if !is_canonical(&orig) {
            return;
        }
        let norm_sq = basis.norm_sq(&orig);
        if norm_sq <= limit {
            out.push(ShortVectorReport { vector: orig.clone(), norm_sq });
        }
    })?;
    out.sort_by(|a, b| a.norm_sq.total_cmp(&b.norm_sq).then_with(|| a.vector.cmp(&b.vector)));
    Ok(out)
}

fn is_canonical(v: &[i64]) -> bool {
    v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0)
}

/// Fincke-Pohst enumeration of every nonzero integer `v` with
/// `|v * g|^2 <= limit`; `visit` receives the coefficient vector.
pub(crate) fn enumerate_ball(
    g: &DMatrix<f64>,
    limit: f64,
    budget: u64,
    mut visit: impl FnMut(&[i64]),
) -> Result<()> {
    let d = g.nrows();
    let gram = g * g.transpose();
    let chol = gram
        .cholesky()
        .ok_or_else(|| Error::Degenerate("Gram matrix is not positive definite".into()))?;
    // gram = L L^T, R = L^T upper triangular: |v g|^2 = |R v^T|^2.
    let r = chol.l().transpose();
    let diag: Vec<f64> = (0..d).map(|i| r[(i, i)]).collect();
    let coef: Vec<Vec<f64>> = (0..d)
        .map(|i| (0..d).map(|j| if j > i { r[(i, j)] / diag[i] } else { 0.0 }).collect())
        .collect();

    let mut state = Walk { d, diag, coef, v: vec![0; d], nodes: 0, budget };
    state.level(d - 1, limit, &mut visit)
}

struct Walk {
    d: usize,
    diag: Vec<f64>,
    coef: Vec<Vec<f64>>,
    v: Vec<i64>,
    nodes: u64,
    budget: u64,
}

impl Walk {
    fn level(&mut self, i: usize, remaining: f64, visit: &mut impl FnMut(&[i64])) -> Result<()> {
        let center = -(i + 1..self.d).map(|j| self.coef[i][j] * self.v[j] as f64).sum::<f64>();
        let half = (remaining.max(0.0)).sqrt() / self.diag[i];
        let lo = (center - half).ceil() as i64;
        let hi = (center + half).floor() as i64;
        for x in lo..=hi {
            self.nodes += 1;
            if self.nodes > self.budget {
                return Err(Error::Budget { budget: self.budget });
            }
            self.v[i] = x;
            let t = self.diag[i] * (x as f64 - center);
            let rest = remaining - t * t;
            if rest < 0.0 {
                continue;
            }
            if i == 0 {
                if self.v.iter().any(|&c| c != 0) {
                    visit(&self.v);
                }
            } else {
                self.level(i - 1, rest, visit)?;
            }
        }
        self.v[i] = 0;
        Ok(())
    }
}

pub fn successive_minima(basis: &LatticeBasis, m: usize) -> Result<f64> {
    successive_minima_with_budget(basis, m, DEFAULT_NODE_BUDGET)
}

/// The m-th successive minimum (1-based): the smallest radius holding `m`
/// linearly independent lattice vectors.
pub fn successive_minima_with_budget(basis: &LatticeBasis, m: usize, budget: u64) -> Result<f64> {
    let d = basis.dim();
    if m == 0 || m > d {
        return Err(domain_err(format!("successive minimum index {m} outside 1..={d}")));
    }
    let reduced = lll_reduce_default(basis)?;
    let mut row_norms: Vec<f64> = reduced.basis.row_norms_sq().into_iter().map(f64::sqrt).collect();
    row_norms.sort_by(f64::total_cmp);
    // The m shortest rows of any basis are independent, so they cap the answer.
    let cap = row_norms[m - 1];
    let mut radius = row_norms[0];
    loop {
        let found = enumerate_short_vectors_with_budget(basis, radius, budget)?;
        let mut picked: Vec<Vec<i64>> = Vec::with_capacity(m);
        for report in &found {
            picked.push(report.vector.clone());
            if int_rank(&picked) < picked.len() {
                picked.pop();
                continue;
            }
            if picked.len() == m {
                return Ok(report.norm_sq.sqrt());
            }
        }
        if radius >= cap {
            return Err(Error::Internal("successive minima search exhausted its cap".into()));
        }
        radius = (radius * 1.25).min(cap);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_lattice_unit_vectors() {
        let got = enumerate_short_vectors(&LatticeBasis::identity(2), 1.1).unwrap();
        let vecs: Vec<_> = got.iter().map(|r| r.vector.clone()).collect();
        assert_eq!(vecs, vec![vec![0, 1], vec![1, 0]]);
        assert!(got.iter().all(|r| r.norm_sq == 1.0));
    }

    #[test]
    fn hexagonal_kissing_pairs() {
        let h = LatticeBasis::from_rows(&[&[1.0, 0.0], &[0.5, 3f64.sqrt() / 2.0]]).unwrap();
        let got = enumerate_short_vectors(&h, 1.05).unwrap();
        assert_eq!(got.len(), 3);
        assert!(got.iter().all(|r| (r.norm_sq - 1.0).abs() < 1e-12));
    }

    #[test]
    fn budget_is_enforced() {
        let err = enumerate_short_vectors_with_budget(&LatticeBasis::identity(6), 3.0, 100).unwrap_err();
        assert!(matches!(err, Error::Budget { budget: 100 }));
    }

    #[test]
    fn minima_of_orthogonal_bases() {
        assert_eq!(successive_minima(&LatticeBasis::identity(3), 3).unwrap(), 1.0);
        let b = LatticeBasis::from_rows(&[&[1.0, 0.0], &[0.0, 10.0]]).unwrap();
        assert!((successive_minima(&b, 2).unwrap() - 10.0).abs() < 1e-12);
        assert!(successive_minima(&b, 0).is_err());
        assert!(successive_minima(&b, 3).is_err());
    }
}
