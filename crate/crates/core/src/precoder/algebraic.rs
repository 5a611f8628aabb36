//! Full-diversity rotations of `Z^n` from totally real number fields.
//!
//! For a totally real field `K` of degree `n` with ring of integers `O_K`
//! and a totally positive `alpha` generating the inverse different, the
//! twisted embedding `x -> (sqrt(alpha_k) sigma_k(x))_k` maps `O_K` onto a
//! unimodular lattice. For `n < 8`, and for the odd lattice used at `n = 8`,
//! that lattice is a rotated `Z^n`; its orthonormal basis is the rotation.
//! Coordinate products are algebraic norms, so the minimum product distance
//! is exactly `disc(K)^(-1/2)`.
//!
//! Fields used:
//! - dim 2: `Q(sqrt 5)`, maximal real subfield of the 5th cyclotomic field;
//! - dim 4: the quartic of discriminant 725, `x^4 - x^3 - 3x^2 + x + 1`;
//! - dim 8: maximal real subfield of the 17th cyclotomic field.

use std::f64::consts::PI;
use std::sync::OnceLock;

use nalgebra::DMatrix;

use super::{Precoder, PrecoderKind};
use crate::error::{domain_err, Error, Result};
use crate::lattice::{enumerate_short_vectors, product_distance_search, LatticeBasis};

/// A constructed rotation with its exact and searched product distances.
#[derive(Debug, Clone)]
pub struct AlgebraicRotation {
    pub precoder: Precoder,
    /// Field discriminant.
    pub discriminant: f64,
    /// `disc^(-1/2)`, the exact minimum product distance.
    pub exact_dpmin: f64,
    /// Truncated-search minimum product distance.
    pub searched_dpmin: f64,
    /// Coefficient bound of the search.
    pub search_bound: u32,
}

impl AlgebraicRotation {
    /// `searched_dpmin^(1/dim)`.
    pub fn normalized(&self) -> f64 {
        self.searched_dpmin.powf(1.0 / self.precoder.dim() as f64)
    }
}

struct FieldData {
    roots: Vec<f64>,
    alpha: Vec<f64>,
    discriminant: f64,
}

fn cyclotomic_real_subfield(p: u32) -> FieldData {
    let n = (p - 1) / 2;
    let roots: Vec<f64> = (1..=n).map(|k| 2.0 * (2.0 * PI * f64::from(k) / f64::from(p)).cos()).collect();
    // (2 - theta) generates the prime above p, and D^{-1} = (2 - theta) / p.
    let alpha = roots.iter().map(|r| (2.0 - r) / f64::from(p)).collect();
    FieldData { roots, alpha, discriminant: f64::from(p).powi(n as i32 - 1) }
}

fn quartic_725() -> FieldData {
    let f = |x: f64| (((x - 1.0) * x - 3.0) * x + 1.0) * x + 1.0;
    let df = |x: f64| ((4.0 * x - 3.0) * x - 6.0) * x + 1.0;
    let roots = real_roots(f, -3.0, 3.0, 4);
    // theta, theta - 1 and theta + 1 are units; this product has the sign
    // pattern of f'(theta) across the four embeddings.
    let alpha = roots.iter().map(|&r| r * (r - 1.0) * (r + 1.0) / df(r)).collect();
    FieldData { roots, alpha, discriminant: 725.0 }
}

fn real_roots(f: impl Fn(f64) -> f64, lo: f64, hi: f64, expected: usize) -> Vec<f64> {
    let steps = 6000;
    let h = (hi - lo) / steps as f64;
    let mut roots = Vec::with_capacity(expected);
    for i in 0..steps {
        let (mut a, mut b) = (lo + i as f64 * h, lo + (i + 1) as f64 * h);
        let (fa, fb) = (f(a), f(b));
        if fa == 0.0 {
            roots.push(a);
            continue;
        }
        if fa * fb > 0.0 {
            continue;
        }
        let mut fa = fa;
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            let fm = f(m);
            if fa * fm <= 0.0 {
                b = m;
            } else {
                a = m;
                fa = fm;
            }
        }
        roots.push(0.5 * (a + b));
    }
    roots
}

fn build(real_dim: usize) -> Result<AlgebraicRotation> {
    let field = match real_dim {
        2 => cyclotomic_real_subfield(5),
        4 => quartic_725(),
        8 => cyclotomic_real_subfield(17),
        _ => return Err(domain_err(format!("no algebraic rotation for dimension {real_dim} (use 2, 4 or 8)"))),
    };
    let n = real_dim;
    if field.roots.len() != n || field.alpha.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::Internal("field data is inconsistent".into()));
    }
    // Power basis of Z[theta] under the twisted embedding.
    let twisted = DMatrix::from_fn(n, n, |i, k| field.alpha[k].sqrt() * field.roots[k].powi(i as i32));
    let lattice = LatticeBasis::new(twisted)?;
    let gram = lattice.generator() * lattice.generator().transpose();
    let off_integer = gram.iter().map(|x| (x - x.round()).abs()).fold(0.0, f64::max);
    if off_integer > 1e-6 || (lattice.abs_det() - 1.0).abs() > 1e-6 {
        return Err(Error::Internal(format!("twisted embedding is not unimodular (dim {n})")));
    }

    let units = enumerate_short_vectors(&lattice, 1.0 + 1e-6)?;
    if units.len() != n {
        return Err(Error::Internal(format!(
            "expected {n} unit vector pairs in the rotated cubic lattice, found {}",
            units.len()
        )));
    }
    let mut rows = DMatrix::zeros(n, n);
    for (i, u) in units.iter().enumerate() {
        let x = lattice.point(&u.vector);
        for (j, v) in x.into_iter().enumerate() {
            rows[(i, j)] = v;
        }
    }
    let rows = orthonormal_cleanup(rows);
    // The lattice {P v} must have basis rows = the orthonormal vectors.
    let precoder = Precoder::new(rows.transpose(), PrecoderKind::Type2, None, format!("algebraic-rotation-dim{n}"))?;

    let bound = if n <= 4 { 8 } else { 3 };
    let search = product_distance_search(&precoder.lattice(), bound);
    let exact = field.discriminant.powf(-0.5);
    let normalized = search.value.powf(1.0 / n as f64);
    Ok(AlgebraicRotation {
        precoder: precoder.with_dpmin(normalized),
        discriminant: field.discriminant,
        exact_dpmin: exact,
        searched_dpmin: search.value,
        search_bound: bound,
    })
}

/// One Gram-Schmidt pass to push rounding residue below 1e-15.
fn orthonormal_cleanup(m: DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    let mut out = m.clone();
    for i in 0..n {
        let mut row = out.row(i).clone_owned();
        for j in 0..i {
            let proj = row.dot(&out.row(j));
            row -= proj * out.row(j);
        }
        let norm = row.norm();
        out.set_row(i, &(row / norm));
    }
    out
}

/// Fixed full-diversity rotation for real dimension 2, 4 or 8. Cached after
/// the first call per dimension.
pub fn type2_rotation(real_dim: usize) -> Result<AlgebraicRotation> {
    static CACHE: [OnceLock<AlgebraicRotation>; 3] = [OnceLock::new(), OnceLock::new(), OnceLock::new()];
    let slot = match real_dim {
        2 => &CACHE[0],
        4 => &CACHE[1],
        8 => &CACHE[2],
        _ => return build(real_dim),
    };
    if let Some(r) = slot.get() {
        return Ok(r.clone());
    }
    let built = build(real_dim)?;
    Ok(slot.get_or_init(|| built).clone())
}
