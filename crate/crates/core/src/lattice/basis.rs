use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{dim_err, Error, Result};

/// Smallest-to-largest singular value ratio below which a generator is
/// treated as rank deficient.
pub(crate) const RANK_TOL: f64 = 1e-12;

/// Full-rank square generator of a real lattice, rows are basis vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeBasis {
    generator: DMatrix<f64>,
}

impl LatticeBasis {
    pub fn new(generator: DMatrix<f64>) -> Result<Self> {
        if generator.nrows() != generator.ncols() {
            return Err(dim_err(format!(
                "lattice generator must be square, got {}x{}",
                generator.nrows(),
                generator.ncols()
            )));
        }
        if generator.nrows() == 0 {
            return Err(dim_err("lattice dimension must be positive"));
        }
        if generator.iter().any(|x| !x.is_finite()) {
            return Err(Error::Domain("lattice generator has non-finite entries".into()));
        }
        if inverse_condition(&generator) <= RANK_TOL {
            return Err(Error::Degenerate("lattice generator is rank deficient".into()));
        }
        Ok(Self { generator })
    }

    /// Builds a basis from row slices.
    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        if rows.iter().any(|r| r.len() != d) {
            return Err(dim_err("all rows must have length equal to the row count"));
        }
        Self::new(DMatrix::from_fn(d, d, |i, j| rows[i][j]))
    }

    pub fn identity(dim: usize) -> Self {
        Self { generator: DMatrix::identity(dim, dim) }
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn into_generator(self) -> DMatrix<f64> {
        self.generator
    }

    /// Lattice point `v * G`.
    pub fn point(&self, coeffs: &[i64]) -> Vec<f64> {
        let d = self.dim();
        assert_eq!(coeffs.len(), d, "coefficient vector length must equal lattice dimension");
        (0..d)
            .map(|j| (0..d).map(|i| coeffs[i] as f64 * self.generator[(i, j)]).sum())
            .collect()
    }

    pub fn norm_sq(&self, coeffs: &[i64]) -> f64 {
        self.point(coeffs).iter().map(|x| x * x).sum()
    }

    pub fn abs_det(&self) -> f64 {
        self.generator.determinant().abs()
    }

    pub(crate) fn row_norms_sq(&self) -> Vec<f64> {
        self.generator.row_iter().map(|r| r.norm_squared()).collect()
    }
}

fn inverse_condition(m: &DMatrix<f64>) -> f64 {
    let sv = m.clone().svd(false, false).singular_values;
    let max = sv.max();
    if max == 0.0 {
        return 0.0;
    }
    sv.min() / max
}

/// Real embedding of a complex matrix in the block layout
/// `[[Re M, Im M], [-Im M, Re M]]`.
///
/// The map is a ring homomorphism: `complex_to_real(A * B) ==
/// complex_to_real(A) * complex_to_real(B)`.
pub fn complex_to_real(m: &DMatrix<Complex64>) -> Result<DMatrix<f64>> {
    let n = m.nrows();
    if m.ncols() != n {
        return Err(dim_err(format!("complex_to_real needs a square matrix, got {}x{}", n, m.ncols())));
    }
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m[(i, j)];
            out[(i, j)] = z.re;
            out[(i, j + n)] = z.im;
            out[(i + n, j)] = -z.im;
            out[(i + n, j + n)] = z.re;
        }
    }
    Ok(out)
}

/// Exact determinant of a small integer matrix (Bareiss elimination in i128).
pub(crate) fn int_det(m: &DMatrix<i64>) -> i128 {
    let n = m.nrows();
    let mut a: Vec<Vec<i128>> = (0..n).map(|i| (0..n).map(|j| m[(i, j)] as i128).collect()).collect();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            match (k + 1..n).find(|&r| a[r][k] != 0) {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return 0,
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) / prev;
            }
        }
        prev = a[k][k];
    }
    sign * a[n - 1][n - 1]
}

/// Rank of a set of integer vectors (exact).
pub(crate) fn int_rank(rows: &[Vec<i64>]) -> usize {
    if rows.is_empty() {
        return 0;
    }
    let cols = rows[0].len();
    let mut a: Vec<Vec<i128>> = rows.iter().map(|r| r.iter().map(|&x| x as i128).collect()).collect();
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..a.len()).find(|&r| a[r][c] != 0) else {
            continue;
        };
        a.swap(rank, p);
        for r in rank + 1..a.len() {
            if a[r][c] != 0 {
                let (f, g) = (a[rank][c], a[r][c]);
                for k in c..cols {
                    a[r][k] = a[r][k] * f - a[rank][k] * g;
                }
                let gcd = a[r].iter().fold(0i128, |acc, &x| gcd_i128(acc, x));
                if gcd > 1 {
                    a[r].iter_mut().for_each(|x| *x /= gcd);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd_i128(a: i128, b: i128) -> i128 {
    let (mut a, mut b) = (a.abs(), b.abs());
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}
