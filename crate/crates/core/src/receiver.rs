//! Integer-forcing receiver for the precoded channel `Sigma_r P`.
//!
//! The receiver filters `Y'` with `B` so that `B Sigma_r P ~ A` for a
//! unimodular integer `A`, rounds to estimate `A X`, and inverts `A`.
//! With the MMSE filter the effective noise energy of layer `m` is
//! `rho * |a_m L_p|^2` where `L L^T = (I + rho Sigma_r^T Sigma_r)^{-1}` and
//! `L_p = P^T L`.

use nalgebra::DMatrix;

use crate::channel::{effective_matrix, real_sigma};
use crate::codebook::Codebook;
use crate::error::{dim_err, domain_err, Error, Result};
use crate::lattice::{dual_basis, int_det, lll_reduce_default, successive_minima, LatticeBasis};
use crate::precoder::Precoder;

#[derive(Debug, Clone)]
pub struct EffectiveChannel {
    sigma: Vec<f64>,
    precoder: Precoder,
    rho: f64,
    l: DMatrix<f64>,
    l_p: DMatrix<f64>,
    h_eff: DMatrix<f64>,
}

impl EffectiveChannel {
    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn precoder(&self) -> &Precoder {
        &self.precoder
    }

    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// Cholesky factor of `(I + rho Sigma_r^T Sigma_r)^{-1}` (diagonal).
    pub fn l(&self) -> &DMatrix<f64> {
        &self.l
    }

    /// `P^T L`.
    pub fn l_p(&self) -> &DMatrix<f64> {
        &self.l_p
    }

    /// `Sigma_r P`.
    pub fn h_eff(&self) -> &DMatrix<f64> {
        &self.h_eff
    }

    pub fn dim(&self) -> usize {
        self.l.nrows()
    }
}

pub fn build_effective_channel(sigma: &[f64], p: &Precoder, rho: f64) -> Result<EffectiveChannel> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(domain_err(format!("rho must be finite and nonnegative, got {rho}")));
    }
    if sigma.iter().any(|s| !(s.is_finite() && *s >= 0.0)) {
        return Err(domain_err("singular values must be finite and nonnegative"));
    }
    let h_eff = effective_matrix(sigma, p)?;
    let s = real_sigma(sigma);
    let l = DMatrix::from_diagonal(&s.map(|x| 1.0 / (1.0 + rho * x * x).sqrt()));
    let l_p = p.matrix().transpose() * &l;
    Ok(EffectiveChannel { sigma: sigma.to_vec(), precoder: p.clone(), rho, l, l_p, h_eff })
}

/// Integer matrix, MMSE filter and per-layer figures of merit.
#[derive(Debug, Clone)]
pub struct IfSolution {
    a: DMatrix<i64>,
    a_inv: DMatrix<i64>,
    b: DMatrix<f64>,
    g_per_layer: Vec<f64>,
    snr_eff: Vec<f64>,
}

impl IfSolution {
    /// Assembles a solution; fails unless `a` is unimodular.
    pub fn new(a: DMatrix<i64>, ec: &EffectiveChannel) -> Result<Self> {
        let a_inv = unimodular_inverse(&a)?;
        let b = compute_filter(&a, ec)?;
        let g_per_layer: Vec<f64> = a.row_iter().map(|row| layer_energy(&row_f64(row.iter()), ec)).collect();
        let snr_eff = g_per_layer.iter().map(|g| ec.rho / g).collect();
        Ok(Self { a, a_inv, b, g_per_layer, snr_eff })
    }

    pub fn a(&self) -> &DMatrix<i64> {
        &self.a
    }

    pub fn a_inv(&self) -> &DMatrix<i64> {
        &self.a_inv
    }

    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }

    pub fn g_per_layer(&self) -> &[f64] {
        &self.g_per_layer
    }

    pub fn snr_eff(&self) -> &[f64] {
        &self.snr_eff
    }

    /// Same `A`, different filter (used to check filter equivalences).
    pub fn with_filter(&self, b: DMatrix<f64>) -> Result<Self> {
        if b.shape() != self.b.shape() {
            return Err(dim_err("replacement filter has the wrong shape"));
        }
        Ok(Self { b, ..self.clone() })
    }
}

fn row_f64<'a>(it: impl Iterator<Item = &'a i64>) -> Vec<f64> {
    it.map(|&x| x as f64).collect()
}

/// `rho * a L_p L_p^T a^T`.
fn layer_energy(a: &[f64], ec: &EffectiveChannel) -> f64 {
    let d = ec.dim();
    let v: f64 = (0..d)
        .map(|j| {
            let t: f64 = (0..d).map(|i| a[i] * ec.l_p[(i, j)]).sum();
            t * t
        })
        .sum();
    ec.rho * v
}

/// LLL transform of the lattice whose basis rows are the rows of `L_p`,
/// rows ordered by increasing noise energy.
pub fn select_integer_matrix(ec: &EffectiveChannel) -> Result<DMatrix<i64>> {
    let d = ec.dim();
    // Sorting the input rows first means the best output layer is never
    // worse than the best unit vector.
    let norms: Vec<f64> = ec.l_p.row_iter().map(|r| r.norm_squared()).collect();
    let mut perm: Vec<usize> = (0..d).collect();
    perm.sort_by(|&i, &j| norms[i].total_cmp(&norms[j]).then(i.cmp(&j)));
    let sorted = DMatrix::from_fn(d, d, |i, j| ec.l_p[(perm[i], j)]);
    let reduced = lll_reduce_default(&LatticeBasis::new(sorted)?)?;

    let mut rows: Vec<(f64, Vec<i64>)> = (0..d)
        .map(|i| {
            let mut a = vec![0i64; d];
            for k in 0..d {
                a[perm[k]] = reduced.transform[(i, k)];
            }
            (layer_energy(&row_f64(a.iter()), ec), a)
        })
        .collect();
    rows.sort_by(|x, y| x.0.total_cmp(&y.0));
    Ok(DMatrix::from_fn(d, d, |i, j| rows[i].1[j]))
}

/// MMSE filter `B = rho A H^T (I + rho H H^T)^{-1}` with `H = Sigma_r P`.
pub fn compute_filter(a: &DMatrix<i64>, ec: &EffectiveChannel) -> Result<DMatrix<f64>> {
    let d = ec.dim();
    if a.shape() != (d, d) {
        return Err(dim_err(format!("integer matrix must be {d}x{d}")));
    }
    let h = &ec.h_eff;
    let s = DMatrix::<f64>::identity(d, d) + h * h.transpose() * ec.rho;
    let chol = s.cholesky().ok_or_else(|| Error::Internal("I + rho H H^T is not positive definite".into()))?;
    let af = a.map(|x| x as f64);
    // S is symmetric, so B^T = S^{-1} (rho H A^T).
    let bt = chol.solve(&(h * af.transpose() * ec.rho));
    Ok(bt.transpose())
}

/// `rho |b H - a|^2 + |b|^2` for one layer.
pub fn noise_energy(a: &[f64], b: &[f64], ec: &EffectiveChannel) -> Result<f64> {
    let d = ec.dim();
    if a.len() != d || b.len() != d {
        return Err(dim_err(format!("layer vectors must have length {d}")));
    }
    let h = &ec.h_eff;
    let mut quant = 0.0;
    for j in 0..d {
        let bh: f64 = (0..d).map(|i| b[i] * h[(i, j)]).sum();
        quant += (bh - a[j]).powi(2);
    }
    Ok(ec.rho * quant + b.iter().map(|x| x * x).sum::<f64>())
}

/// Selects `A`, computes `B` and the per-layer energies.
pub fn solve_if(ec: &EffectiveChannel) -> Result<IfSolution> {
    IfSolution::new(select_integer_matrix(ec)?, ec)
}

/// Exact inverse of a unimodular integer matrix.
pub fn unimodular_inverse(a: &DMatrix<i64>) -> Result<DMatrix<i64>> {
    let d = a.nrows();
    if a.ncols() != d {
        return Err(dim_err("integer matrix must be square"));
    }
    if int_det(a).abs() != 1 {
        return Err(Error::Contract("integer matrix is not unimodular".into()));
    }
    let inv = a
        .map(|x| x as f64)
        .try_inverse()
        .ok_or_else(|| Error::Internal("unimodular matrix failed to invert".into()))?;
    let rounded = inv.map(|x| x.round() as i64);
    if a * &rounded != DMatrix::<i64>::identity(d, d) {
        return Err(Error::Internal("inverse of a unimodular matrix lost precision".into()));
    }
    Ok(rounded)
}

/// Integer-forcing decode of a received block. Returns symbols in `0..g`.
pub fn if_decode(y_prime: &DMatrix<f64>, sol: &IfSolution, rho: f64, codebook: &Codebook) -> Result<DMatrix<i64>> {
    let d = sol.a.nrows();
    if y_prime.nrows() != d {
        return Err(dim_err(format!("received block has {} rows, expected {d}", y_prime.nrows())));
    }
    if !(rho > 0.0) {
        return Err(domain_err("decoding needs rho > 0"));
    }
    let scale = 1.0 / (rho.sqrt() * codebook.delta());
    let off = codebook.offset();
    let a_shift: Vec<f64> = sol.a.row_iter().map(|r| r.iter().sum::<i64>() as f64 * off).collect();
    let y2 = &sol.b * y_prime;
    let r = DMatrix::from_fn(d, y_prime.ncols(), |i, j| (y2[(i, j)] * scale + a_shift[i]).round_ties_even() as i64);
    Ok(reduce_mod(&(&sol.a_inv * r), codebook.g()))
}

/// Dithered variant: `dither` holds the per-entry offsets in `[0, g)` that
/// were added (mod g) at the transmitter.
pub fn if_decode_dithered(
    y_prime: &DMatrix<f64>,
    sol: &IfSolution,
    rho: f64,
    codebook: &Codebook,
    dither: &DMatrix<f64>,
) -> Result<DMatrix<i64>> {
    let d = sol.a.nrows();
    if y_prime.nrows() != d || dither.shape() != y_prime.shape() {
        return Err(dim_err("received block and dither must both be d x T"));
    }
    if !(rho > 0.0) {
        return Err(domain_err("decoding needs rho > 0"));
    }
    let scale = 1.0 / (rho.sqrt() * codebook.dither_delta());
    let half = f64::from(codebook.g()) / 2.0;
    let af = sol.a.map(|x| x as f64);
    let a_dither = &af * dither;
    let a_shift: Vec<f64> = sol.a.row_iter().map(|r| r.iter().sum::<i64>() as f64 * half).collect();
    let y2 = &sol.b * y_prime;
    let r = DMatrix::from_fn(d, y_prime.ncols(), |i, j| {
        (y2[(i, j)] * scale + a_shift[i] - a_dither[(i, j)]).round_ties_even() as i64
    });
    Ok(reduce_mod(&(&sol.a_inv * r), codebook.g()))
}

fn reduce_mod(m: &DMatrix<i64>, g: u32) -> DMatrix<i64> {
    m.map(|x| x.rem_euclid(i64::from(g)))
}

/// Error-probability bound `exp(-c eps_{d-m+1}^2)` for layer `m` (1-based)
/// over the lattice generated by `L_p^{-1}`, with `c = 1/(4 c0)` and
/// `c0 = (2n)^3 + (3n)^2`.
pub fn theorem1_bound(ec: &EffectiveChannel, m: usize) -> Result<f64> {
    let d = ec.dim();
    if m == 0 || m > d {
        return Err(domain_err(format!("layer index {m} outside 1..={d}")));
    }
    // Points L_p^{-1} v: row generator (L_p^{-1})^T, the dual of rows(L_p).
    let lattice = dual_basis(&LatticeBasis::new(ec.l_p.clone())?)?;
    let eps = successive_minima(&lattice, d - m + 1)?;
    Ok((-bound_constant(d) * eps * eps).exp())
}

/// `c0 = (2n)^3 + (3n)^2` for real dimension `2n`.
pub fn dual_minima_constant(real_dim: usize) -> f64 {
    let two_n = real_dim as f64;
    let three_n = 1.5 * two_n;
    two_n.powi(3) + three_n.powi(2)
}

/// `c = 1 / (4 c0)`.
pub fn bound_constant(real_dim: usize) -> f64 {
    1.0 / (4.0 * dual_minima_constant(real_dim))
}
