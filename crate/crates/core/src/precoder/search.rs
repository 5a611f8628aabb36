use std::f64::consts::FRAC_PI_4;

use nalgebra::DMatrix;

use super::{paired_rotation, rotation_matrix, xcode_pairs, Precoder, PrecoderKind};
use crate::error::{domain_err, Error, Result};
use crate::lattice::LatticeBasis;

/// Angular resolution of the Type I and X-precoder grids (radians).
pub const TYPE1_GRID_STEP: f64 = 0.001;

/// `|[P v]_1|` at or below this counts as zero.
const CONSTRAINT_TOL: f64 = 1e-9;

/// Relative tolerance within which two grid objectives count as tied.
const TIE_TOL: f64 = 1e-12;

/// Outcome of the 2x2 real Type I search.
#[derive(Debug, Clone)]
pub struct Type1Outcome {
    pub theta: f64,
    /// Best angle on the grid itself, before local refinement.
    pub grid_theta: f64,
    pub grid_objective: f64,
    /// Squared minimum distance of `L^{-1} P(theta)`.
    pub objective: f64,
    /// Integer vector attaining it; satisfies `[P(theta) v]_1 != 0`.
    pub witness: [i64; 2],
    /// `sqrt(1 + rho s_2^2) / sqrt(1 + rho s_1^2)`.
    pub tan_eta: f64,
}

impl Type1Outcome {
    /// `L^{-1} P(theta)` in row convention, i.e. generator `P^T L^{-1}`.
    pub fn lattice(&self, sigma: &[f64], rho: f64) -> Result<LatticeBasis> {
        type1_lattice(self.theta, &inverse_cholesky_diag(sigma, rho))
    }
}

fn inverse_cholesky_diag(sigma: &[f64], rho: f64) -> [f64; 2] {
    [(1.0 + rho * sigma[0] * sigma[0]).sqrt(), (1.0 + rho * sigma[1] * sigma[1]).sqrt()]
}

fn type1_lattice(theta: f64, linv: &[f64; 2]) -> Result<LatticeBasis> {
    let p = rotation_matrix(theta);
    // Points L^{-1} P v; rows of the generator are the columns of L^{-1} P.
    LatticeBasis::new(DMatrix::from_fn(2, 2, |i, j| linv[j] * p[(j, i)]))
}

/// Squared minimum distance of `L^{-1} P(theta)` and a shortest vector, or
/// `None` when some shortest vector `v` has `[P(theta) v]_1 = 0`.
///
/// Taking the minimum only over vectors meeting the constraint would let
/// `theta = 0` discard the short axis vector of an ill-conditioned channel
/// and win every search, so an angle whose minimum violates the constraint
/// is ruled out instead.
pub fn type1_objective(theta: f64, sigma: &[f64], rho: f64) -> Result<Option<(f64, [i64; 2])>> {
    check_sigma(sigma, rho)?;
    shortest_if_feasible(theta, &inverse_cholesky_diag(sigma, rho))
}

fn shortest_if_feasible(theta: f64, linv: &[f64; 2]) -> Result<Option<(f64, [i64; 2])>> {
    let (s, c) = theta.sin_cos();
    let feasible = |v: &[i64; 2]| (c * v[0] as f64 + s * v[1] as f64).abs() > CONSTRAINT_TOL;
    // Rows of the generator: columns of L^{-1} P(theta).
    let rows = [[linv[0] * c, -linv[1] * s], [linv[0] * s, linv[1] * c]];
    let ([b1, b2], eps) = lagrange_reduce(rows)?;
    let norm = |v: &[i64; 2]| {
        let x = v[0] as f64 * rows[0][0] + v[1] as f64 * rows[1][0];
        let y = v[0] as f64 * rows[0][1] + v[1] as f64 * rows[1][1];
        x * x + y * y
    };
    // In a Gauss-reduced basis every shortest vector is one of these, up to sign.
    let candidates = [b1, b2, [b1[0] + b2[0], b1[1] + b2[1]], [b1[0] - b2[0], b1[1] - b2[1]]];
    let all_ok = candidates.iter().filter(|v| norm(v) <= eps * (1.0 + TIE_TOL)).all(feasible);
    Ok(all_ok.then_some((eps, b1)))
}

/// Gauss-Lagrange reduction of a 2D basis. Returns the integer coefficient
/// rows of the reduced basis and the squared norm of its first row.
fn lagrange_reduce(rows: [[f64; 2]; 2]) -> Result<([[i64; 2]; 2], f64)> {
    let dot = |a: [f64; 2], b: [f64; 2]| a[0] * b[0] + a[1] * b[1];
    let (mut p, mut q) = (rows[0], rows[1]);
    let (mut up, mut uq) = ([1i64, 0], [0i64, 1]);
    if dot(p, p) * dot(q, q) == 0.0 || (p[0] * q[1] - p[1] * q[0]).abs() <= 1e-12 * dot(p, p).sqrt() * dot(q, q).sqrt() {
        return Err(Error::Degenerate("Type I lattice basis is singular".into()));
    }
    if dot(p, p) > dot(q, q) {
        std::mem::swap(&mut p, &mut q);
        std::mem::swap(&mut up, &mut uq);
    }
    for _ in 0..10_000 {
        let mu = (dot(p, q) / dot(p, p)).round();
        q = [q[0] - mu * p[0], q[1] - mu * p[1]];
        let m = mu as i64;
        uq = [uq[0] - m * up[0], uq[1] - m * up[1]];
        if dot(q, q) >= dot(p, p) {
            // Recompute from the integer coefficients to avoid drift.
            let exact = |u: [i64; 2]| {
                [u[0] as f64 * rows[0][0] + u[1] as f64 * rows[1][0], u[0] as f64 * rows[0][1] + u[1] as f64 * rows[1][1]]
            };
            let (ep, eq) = (exact(up), exact(uq));
            return Ok(if dot(ep, ep) <= dot(eq, eq) { ([up, uq], dot(ep, ep)) } else { ([uq, up], dot(eq, eq)) });
        }
        std::mem::swap(&mut p, &mut q);
        std::mem::swap(&mut up, &mut uq);
    }
    Err(Error::Internal("Gauss reduction did not converge".into()))
}

fn check_sigma(sigma: &[f64], rho: f64) -> Result<()> {
    if sigma.len() != 2 {
        return Err(domain_err(format!("the Type I search covers two subchannels, got {}", sigma.len())));
    }
    if !(rho >= 0.0 && rho.is_finite()) {
        return Err(domain_err(format!("rho must be finite and nonnegative, got {rho}")));
    }
    if sigma.iter().any(|s| !s.is_finite() || *s < 0.0) {
        return Err(domain_err("singular values must be finite and nonnegative"));
    }
    Ok(())
}

fn grid(step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && step <= FRAC_PI_4) {
        return Err(domain_err(format!("grid step must lie in (0, pi/4], got {step}")));
    }
    let count = (FRAC_PI_4 / step).floor() as usize;
    Ok((0..=count).map(|k| k as f64 * step).collect())
}

/// Largest grid angle whose value is within `TIE_TOL` of the maximum.
fn argmax_toward_larger<T>(values: Vec<(f64, f64, T)>) -> (f64, f64, T) {
    let best = values.iter().map(|v| v.1).fold(f64::NEG_INFINITY, f64::max);
    values
        .into_iter()
        .rev()
        .find(|v| v.1 >= best * (1.0 - TIE_TOL))
        .expect("grid is nonempty")
}

/// Grid search over `theta in [0, pi/4]` for the 2x2 real rotation, followed
/// by a local refinement of the best grid angle.
pub fn type1_search_2d(sigma: &[f64], rho: f64, step: f64) -> Result<Type1Outcome> {
    check_sigma(sigma, rho)?;
    let linv = inverse_cholesky_diag(sigma, rho);
    let evaluated = grid(step)?
        .into_iter()
        .map(|t| shortest_if_feasible(t, &linv).map(|r| r.map(|(obj, v)| (t, obj, v))))
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect::<Vec<_>>();
    if evaluated.is_empty() {
        return Err(Error::Internal("no grid angle satisfies the Type I constraint".into()));
    }
    let (grid_theta, grid_objective, grid_witness) = argmax_toward_larger(evaluated);
    let (theta, objective, witness) = refine(&linv, grid_theta, grid_objective, grid_witness, step)?;
    Ok(Type1Outcome { theta, grid_theta, grid_objective, objective, witness, tan_eta: linv[1] / linv[0] })
}

/// Golden-section search on `[t - step, t + step]` (clipped to `[0, pi/4]`)
/// around the grid argmax. The optimum often sits on a kink where two
/// shortest vectors swap, which the grid only approaches to within its step.
/// The refined angle is kept only if it is strictly better.
fn refine(linv: &[f64; 2], t: f64, obj: f64, v: [i64; 2], step: f64) -> Result<(f64, f64, [i64; 2])> {
    const INV_PHI: f64 = 0.618_033_988_749_894_8;
    let eval = |x: f64| -> Result<f64> { Ok(shortest_if_feasible(x, linv)?.map_or(f64::NEG_INFINITY, |r| r.0)) };
    let (mut lo, mut hi) = ((t - step).max(0.0), (t + step).min(FRAC_PI_4));
    let mut x1 = hi - INV_PHI * (hi - lo);
    let mut x2 = lo + INV_PHI * (hi - lo);
    let (mut f1, mut f2) = (eval(x1)?, eval(x2)?);
    for _ in 0..60 {
        if f1 < f2 {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + INV_PHI * (hi - lo);
            f2 = eval(x2)?;
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - INV_PHI * (hi - lo);
            f1 = eval(x1)?;
        }
    }
    let mut best = (t, obj, v);
    // The upper end is tried explicitly since the optimum is often pi/4 itself.
    for x in [x1, x2, (t + step).min(FRAC_PI_4)] {
        if let Some((o, w)) = shortest_if_feasible(x, linv)? {
            if o > best.1 * (1.0 + TIE_TOL) {
                best = (x, o, w);
            }
        }
    }
    Ok(best)
}

/// Type I precoder for a 2x2 complex channel: the searched real rotation,
/// lifted to the 4x4 real model.
pub fn type1_search(sigma: &[f64], rho: f64, step: f64) -> Result<Precoder> {
    let outcome = type1_search_2d(sigma, rho, step)?;
    Precoder::new(
        rotation_matrix(outcome.theta),
        PrecoderKind::Type1,
        Some(outcome.theta),
        format!("type1-theta{:.6}", outcome.theta),
    )?
    .lift_complex()
}

/// Per-channel X-precoder: each strong/weak subchannel pair gets the grid
/// angle maximizing the minimum distance of the rotated finite `Z_g^2`
/// difference set seen through the pair's singular values.
pub fn xprecoder_search(sigma: &[f64], g: u32, step: f64) -> Result<Precoder> {
    let n = sigma.len();
    let pairs = xcode_pairs(n)?;
    if g < 2 {
        return Err(domain_err("constellation size per real dimension must be at least 2"));
    }
    let span = i64::from(g) - 1;
    let diffs: Vec<(f64, f64)> = (-span..=span)
        .flat_map(|a| (-span..=span).map(move |b| (a, b)))
        .filter(|&(a, b)| a > 0 || (a == 0 && b > 0))
        .map(|(a, b)| (a as f64, b as f64))
        .collect();
    let thetas = grid(step)?;
    let mut angles = Vec::with_capacity(pairs.len());
    for &(i, j) in &pairs {
        let (si, sj) = (sigma[i], sigma[j]);
        let evaluated: Vec<(f64, f64, ())> = thetas
            .iter()
            .map(|&t| {
                let (s, c) = t.sin_cos();
                let dmin = diffs
                    .iter()
                    .map(|&(a, b)| {
                        let x = si * (c * a + s * b);
                        let y = sj * (-s * a + c * b);
                        x * x + y * y
                    })
                    .fold(f64::INFINITY, f64::min);
                (t, dmin, ())
            })
            .collect();
        angles.push(argmax_toward_larger(evaluated).0);
    }
    let q = paired_rotation(n, &angles)?;
    Precoder::new(q, PrecoderKind::XPrecoder, Some(angles[0]), format!("xprecoder-theta{:.6}", angles[0]))?
        .lift_complex()
}
