//! Rayleigh channel sampling, sorted SVD and the real forward model
//! `Y' = sqrt(rho) * Sigma_r * P * X + Z'`.
//!
//! The receiver rotation `W^H` is folded into the model: noise stays i.i.d.
//! under a unitary map, so `Y'` is generated directly.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{dim_err, domain_err, Result};
use crate::precoder::Precoder;

/// A complex `n x n` channel draw.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelRealization {
    pub h: DMatrix<Complex64>,
    pub seed_tag: u64,
}

impl ChannelRealization {
    pub fn n(&self) -> usize {
        self.h.nrows()
    }
}

/// `H = W diag(sigma) V^H` with `sigma` sorted descending.
#[derive(Debug, Clone)]
pub struct SvdTriple {
    pub w: DMatrix<Complex64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<Complex64>,
}

impl SvdTriple {
    pub fn reconstruct(&self) -> DMatrix<Complex64> {
        let n = self.sigma.len();
        let s = DMatrix::from_fn(n, n, |i, j| if i == j { Complex64::new(self.sigma[i], 0.0) } else { Complex64::new(0.0, 0.0) });
        &self.w * s * self.v.adjoint()
    }
}

fn cn01<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(s * re, s * im)
}

/// I.i.d. `CN(0, 1)` entries: real and imaginary parts each `N(0, 1/2)`.
pub fn sample_channel<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Result<ChannelRealization> {
    sample_channel_tagged(n, rng, 0)
}

pub fn sample_channel_tagged<R: Rng + ?Sized>(n: usize, rng: &mut R, seed_tag: u64) -> Result<ChannelRealization> {
    if n == 0 {
        return Err(domain_err("channel dimension must be at least 1"));
    }
    let mut h = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
    // Row-major fill so the draw order is independent of storage layout.
    for i in 0..n {
        for j in 0..n {
            h[(i, j)] = cn01(rng);
        }
    }
    Ok(ChannelRealization { h, seed_tag })
}

pub fn svd_sorted(ch: &ChannelRealization) -> Result<SvdTriple> {
    let n = ch.n();
    if ch.h.ncols() != n {
        return Err(dim_err("channel matrix must be square"));
    }
    if ch.h.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(domain_err("channel has non-finite entries"));
    }
    let svd = ch.h.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^H");
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]).then(a.cmp(&b)));

    let sigma = order.iter().map(|&k| svd.singular_values[k]).collect();
    let w = DMatrix::from_fn(n, n, |i, j| u[(i, order[j])]);
    let v = DMatrix::from_fn(n, n, |i, j| v_t[(order[j], i)].conj());
    Ok(SvdTriple { w, sigma, v })
}

/// `Sigma_r = complex_to_real(diag(sigma))`: each singular value appears on
/// both the real and the imaginary coordinate.
pub fn real_sigma(sigma: &[f64]) -> DVector<f64> {
    DVector::from_iterator(2 * sigma.len(), sigma.iter().chain(sigma.iter()).copied())
}

/// Effective real channel `Sigma_r * P`.
pub fn effective_matrix(sigma: &[f64], p: &Precoder) -> Result<DMatrix<f64>> {
    let d = 2 * sigma.len();
    if p.dim() != d {
        return Err(dim_err(format!("precoder is {}x{} but the real model has dimension {d}", p.dim(), p.dim())));
    }
    let s = real_sigma(sigma);
    let mut m = p.matrix().clone();
    for (i, mut row) in m.row_iter_mut().enumerate() {
        row *= s[i];
    }
    Ok(m)
}

/// Transmits the real block `x` (columns are channel uses). Pass `None` as
/// the noise source for a noiseless pass.
pub fn apply_channel<R: Rng + ?Sized>(
    x: &DMatrix<f64>,
    sigma: &[f64],
    p: &Precoder,
    rho: f64,
    noise: Option<&mut R>,
) -> Result<DMatrix<f64>> {
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(domain_err(format!("rho must be finite and nonnegative, got {rho}")));
    }
    let m = effective_matrix(sigma, p)?;
    if x.nrows() != m.ncols() {
        return Err(dim_err(format!("codeword has {} rows, channel expects {}", x.nrows(), m.ncols())));
    }
    let mut y = (m * x) * rho.sqrt();
    if let Some(rng) = noise {
        add_real_noise(&mut y, rng);
    }
    Ok(y)
}

/// Adds i.i.d. `N(0, 1/2)` entries, filled row-major.
pub fn add_real_noise<R: Rng + ?Sized>(y: &mut DMatrix<f64>, rng: &mut R) {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..y.nrows() {
        for j in 0..y.ncols() {
            let z: f64 = rng.sample(StandardNormal);
            y[(i, j)] += s * z;
        }
    }
}
