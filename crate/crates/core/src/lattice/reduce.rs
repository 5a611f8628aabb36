use nalgebra::DMatrix;

use super::basis::LatticeBasis;
use crate::error::{dim_err, domain_err, Error, Result};

pub const DEFAULT_LLL_DELTA: f64 = 0.75;

/// A reduced basis together with the unimodular change of basis.
///
/// `basis.generator() == transform * input.generator()` (up to rounding).
#[derive(Debug, Clone)]
pub struct Reduced {
    pub basis: LatticeBasis,
    pub transform: DMatrix<i64>,
}

/// Lagrange-Gauss reduction of a two-dimensional lattice.
///
/// The first output row is a shortest nonzero vector, the second a shortest
/// vector independent of it.
pub fn gauss_reduce(basis: &LatticeBasis) -> Result<Reduced> {
    if basis.dim() != 2 {
        return Err(dim_err(format!("gauss_reduce needs a 2-dimensional basis, got {}", basis.dim())));
    }
    let g = basis.generator();
    let mut b = [[g[(0, 0)], g[(0, 1)]], [g[(1, 0)], g[(1, 1)]]];
    let mut u = [[1i64, 0], [0, 1]];
    let dot = |x: &[f64; 2], y: &[f64; 2]| x[0] * y[0] + x[1] * y[1];

    if dot(&b[0], &b[0]) > dot(&b[1], &b[1]) {
        b.swap(0, 1);
        u.swap(0, 1);
    }
    for _ in 0..10_000 {
        let n0 = dot(&b[0], &b[0]);
        let q = (dot(&b[0], &b[1]) / n0).round();
        if q != 0.0 {
            let qi = q as i64;
            b[1] = [b[1][0] - q * b[0][0], b[1][1] - q * b[0][1]];
            u[1] = [u[1][0] - qi * u[0][0], u[1][1] - qi * u[0][1]];
        }
        if dot(&b[1], &b[1]) >= n0 {
            let basis = LatticeBasis::new(DMatrix::from_row_slice(2, 2, &[b[0][0], b[0][1], b[1][0], b[1][1]]))?;
            let transform = DMatrix::from_row_slice(2, 2, &[u[0][0], u[0][1], u[1][0], u[1][1]]);
            return Ok(Reduced { basis, transform });
        }
        b.swap(0, 1);
        u.swap(0, 1);
    }
    Err(Error::Internal("Gauss reduction did not terminate".into()))
}

pub fn lll_reduce_default(basis: &LatticeBasis) -> Result<Reduced> {
    lll_reduce(basis, DEFAULT_LLL_DELTA)
}

/// LLL reduction with Lovász parameter `delta` in (1/4, 1].
pub fn lll_reduce(basis: &LatticeBasis, delta: f64) -> Result<Reduced> {
    if !(delta > 0.25 && delta <= 1.0) {
        return Err(domain_err(format!("LLL delta must lie in (1/4, 1], got {delta}")));
    }
    let d = basis.dim();
    let mut b: Vec<Vec<f64>> = basis.generator().row_iter().map(|r| r.iter().copied().collect()).collect();
    let mut u: Vec<Vec<i64>> = (0..d).map(|i| (0..d).map(|j| i64::from(i == j)).collect()).collect();

    let mut gs = GramSchmidt::new(&b)?;
    let mut k = 1;
    let mut iterations = 0usize;
    while k < d {
        iterations += 1;
        if iterations > 100_000 {
            return Err(Error::Internal("LLL did not converge".into()));
        }
        size_reduce(&mut b, &mut u, &mut gs.mu, k, k - 1);
        let mu = gs.mu[k][k - 1];
        if gs.bstar[k] < (delta - mu * mu) * gs.bstar[k - 1] {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            gs = GramSchmidt::new(&b)?;
            k = (k - 1).max(1);
        } else {
            for l in (0..k - 1).rev() {
                size_reduce(&mut b, &mut u, &mut gs.mu, k, l);
            }
            k += 1;
        }
    }
    let generator = DMatrix::from_fn(d, d, |i, j| b[i][j]);
    let transform = DMatrix::from_fn(d, d, |i, j| u[i][j]);
    Ok(Reduced { basis: LatticeBasis::new(generator)?, transform })
}

fn size_reduce(b: &mut [Vec<f64>], u: &mut [Vec<i64>], mu: &mut [Vec<f64>], k: usize, l: usize) {
    let q = mu[k][l].round();
    if q == 0.0 {
        return;
    }
    let qi = q as i64;
    let (bl, ul) = (b[l].clone(), u[l].clone());
    for (x, y) in b[k].iter_mut().zip(&bl) {
        *x -= q * y;
    }
    for (x, y) in u[k].iter_mut().zip(&ul) {
        *x -= qi * y;
    }
    for j in 0..l {
        mu[k][j] -= q * mu[l][j];
    }
    mu[k][l] -= q;
}

struct GramSchmidt {
    mu: Vec<Vec<f64>>,
    bstar: Vec<f64>,
}

impl GramSchmidt {
    fn new(b: &[Vec<f64>]) -> Result<Self> {
        let d = b.len();
        let mut star: Vec<Vec<f64>> = Vec::with_capacity(d);
        let mut mu = vec![vec![0.0; d]; d];
        let mut bstar = vec![0.0; d];
        let scale: f64 = b.iter().map(|r| r.iter().map(|x| x * x).sum::<f64>()).fold(0.0, f64::max);
        for i in 0..d {
            let mut v = b[i].clone();
            for j in 0..i {
                let m = dot(&b[i], &star[j]) / bstar[j];
                mu[i][j] = m;
                for (x, y) in v.iter_mut().zip(&star[j]) {
                    *x -= m * y;
                }
            }
            bstar[i] = dot(&v, &v);
            if bstar[i] <= 1e-24 * scale {
                return Err(Error::Degenerate("basis is rank deficient".into()));
            }
            star.push(v);
        }
        Ok(Self { mu, bstar })
    }
}

fn dot(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

/// Returns `(mu, |b*_i|^2)` of the Gram-Schmidt orthogonalization of the rows.
#[cfg(test)]
pub(crate) fn gram_schmidt(basis: &LatticeBasis) -> Result<(Vec<Vec<f64>>, Vec<f64>)> {
    let b: Vec<Vec<f64>> = basis.generator().row_iter().map(|r| r.iter().copied().collect()).collect();
    let gs = GramSchmidt::new(&b)?;
    Ok((gs.mu, gs.bstar))
}
