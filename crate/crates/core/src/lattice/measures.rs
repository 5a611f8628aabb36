use super::basis::LatticeBasis;
use super::enumerate::successive_minima;
use crate::error::{Error, Result};

/// Generator of the dual lattice: the inverse transpose of the generator.
pub fn dual_basis(basis: &LatticeBasis) -> Result<LatticeBasis> {
    let inv = basis
        .generator()
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::Degenerate("generator is singular".into()))?;
    LatticeBasis::new(inv.transpose())
}

/// Packing density relative to the cubic lattice: `eps_1^2 / |det G|^(2/d)`.
pub fn coding_gain(basis: &LatticeBasis) -> Result<f64> {
    let eps1 = successive_minima(basis, 1)?;
    let d = basis.dim() as f64;
    Ok(eps1 * eps1 / basis.abs_det().powf(2.0 / d))
}

/// Result of a truncated minimum-product-distance search.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductDistance {
    /// Smallest `prod_m |x_m|` over the searched nonzero points.
    pub value: f64,
    /// Coefficients of a minimizing point.
    pub witness: Vec<i64>,
    /// Coefficient sup-norm bound used for the search.
    pub bound: u32,
}

/// Truncated minimum product distance over coefficient vectors with
/// `|v|_inf <= search_bound`. This is an upper estimate of the true value.
pub fn min_product_distance(basis: &LatticeBasis, search_bound: u32) -> f64 {
    product_distance_search(basis, search_bound).value
}

/// Same as [`min_product_distance`] but also returns the minimizer.
///
/// Coordinates smaller than `1e-12` times the largest row norm count as
/// exactly zero, so a lattice that is not full-diversity reports `0.0`.
pub fn product_distance_search(basis: &LatticeBasis, search_bound: u32) -> ProductDistance {
    let d = basis.dim();
    let g = basis.generator();
    let b = i64::from(search_bound);
    let zero_tol = 1e-12 * basis.row_norms_sq().into_iter().fold(0.0, f64::max).sqrt();

    let mut best = ProductDistance { value: f64::INFINITY, witness: vec![0; d], bound: search_bound };
    if search_bound == 0 {
        return best;
    }
    // Odometer over [-b, b]^d with the point maintained incrementally.
    let mut v = vec![-b; d];
    let mut x: Vec<f64> = (0..d).map(|j| (0..d).map(|i| -(b as f64) * g[(i, j)]).sum()).collect();
    loop {
        if v.iter().find(|&&c| c != 0).is_some_and(|&c| c > 0) {
            // Screen with the incremental point, then score candidates from
            // the exact point so the result does not depend on the path.
            if product(&x, zero_tol) < best.value * (1.0 + 1e-9) {
                let exact: Vec<f64> = (0..d).map(|j| (0..d).map(|k| v[k] as f64 * g[(k, j)]).sum()).collect();
                let prod = product(&exact, zero_tol);
                if prod < best.value {
                    best.value = prod;
                    best.witness.copy_from_slice(&v);
                }
            }
        }
        let mut i = d - 1;
        loop {
            if v[i] < b {
                v[i] += 1;
                break;
            }
            v[i] = -b;
            if i == 0 {
                return best;
            }
            i -= 1;
        }
        if i == d - 1 {
            for (j, xj) in x.iter_mut().enumerate() {
                *xj += g[(d - 1, j)];
            }
        } else {
            // Recompute after a carry so incremental drift stays bounded.
            for (j, xj) in x.iter_mut().enumerate() {
                *xj = (0..d).map(|k| v[k] as f64 * g[(k, j)]).sum();
            }
        }
    }
}

fn product(x: &[f64], zero_tol: f64) -> f64 {
    let mut prod = 1.0;
    for &xi in x {
        let a = xi.abs();
        if a <= zero_tol {
            return 0.0;
        }
        prod *= a;
    }
    prod
}
