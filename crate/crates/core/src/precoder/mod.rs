//! Unitary precoders: Type I (channel adapted angle search), Type II (fixed
//! algebraic rotations) and the X-code / X-precoder baselines.
//!
//! A precoder is stored in the real model as a `2n x 2n` orthogonal matrix
//! `P`; the transmitted block is `P * X`. Real `n x n` rotations acting on
//! the complex subchannels are lifted with [`complex_to_real`], which gives
//! the block-diagonal `diag(R, R)`.

mod algebraic;
mod io;
mod search;

use std::f64::consts::FRAC_PI_4;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{dim_err, domain_err, Error, Result};
use crate::lattice::{complex_to_real, LatticeBasis};

pub use algebraic::{type2_rotation, AlgebraicRotation};
pub use io::{read_precoder, write_precoder};
pub use search::{
    type1_objective, type1_search, type1_search_2d, xprecoder_search, Type1Outcome, TYPE1_GRID_STEP,
};

/// Orthogonality tolerance on `P P^T - I` (max-norm).
pub const ORTHO_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PrecoderKind {
    Identity,
    /// Plain fixed-angle 2x2 rotation outside the Type I search range.
    Rotation,
    Type1,
    Type2,
    XCode,
    XPrecoder,
}

impl PrecoderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PrecoderKind::Identity => "identity",
            PrecoderKind::Rotation => "rotation",
            PrecoderKind::Type1 => "type1",
            PrecoderKind::Type2 => "type2",
            PrecoderKind::XCode => "xcode",
            PrecoderKind::XPrecoder => "xprecoder",
        }
    }
}

impl fmt::Display for PrecoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PrecoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "identity" => PrecoderKind::Identity,
            "rotation" => PrecoderKind::Rotation,
            "type1" => PrecoderKind::Type1,
            "type2" => PrecoderKind::Type2,
            "xcode" => PrecoderKind::XCode,
            "xprecoder" => PrecoderKind::XPrecoder,
            other => return Err(Error::Parse(format!("unknown precoder kind `{other}`"))),
        })
    }
}

/// Real orthogonal precoder with provenance metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Precoder {
    p: DMatrix<f64>,
    kind: PrecoderKind,
    theta: Option<f64>,
    label: String,
    dpmin_report: Option<f64>,
}

impl Precoder {
    pub fn new(p: DMatrix<f64>, kind: PrecoderKind, theta: Option<f64>, label: impl Into<String>) -> Result<Self> {
        if p.nrows() != p.ncols() || p.nrows() == 0 {
            return Err(dim_err(format!("precoder must be square, got {}x{}", p.nrows(), p.ncols())));
        }
        let resid = (&p * p.transpose() - DMatrix::<f64>::identity(p.nrows(), p.nrows())).amax();
        if !(resid <= ORTHO_TOL) {
            return Err(Error::Contract(format!("precoder is not orthogonal (residual {resid:e})")));
        }
        if kind == PrecoderKind::Type1 {
            match theta {
                Some(t) if (-1e-12..=FRAC_PI_4 + 1e-12).contains(&t) => {}
                _ => return Err(domain_err("a Type I precoder needs an angle in [0, pi/4]")),
            }
        }
        Ok(Self { p, kind, theta, label: label.into(), dpmin_report: None })
    }

    pub fn identity(real_dim: usize) -> Self {
        Self {
            p: DMatrix::identity(real_dim, real_dim),
            kind: PrecoderKind::Identity,
            theta: None,
            label: format!("identity-{real_dim}"),
            dpmin_report: None,
        }
    }

    pub(crate) fn with_dpmin(mut self, report: f64) -> Self {
        self.dpmin_report = Some(report);
        self
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.p
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    pub fn kind(&self) -> PrecoderKind {
        self.kind
    }

    pub fn theta(&self) -> Option<f64> {
        self.theta
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Normalized minimum product distance `d_p,min^(1/dim)` from a
    /// truncated search, when the construction computed one.
    pub fn dpmin_report(&self) -> Option<f64> {
        self.dpmin_report
    }

    /// The lattice `{P v}` as a row-convention basis (generator `P^T`).
    pub fn lattice(&self) -> LatticeBasis {
        LatticeBasis::new(self.p.transpose()).expect("orthogonal matrices are full rank")
    }

    /// Lifts a real rotation acting on complex subchannels to the real model.
    pub fn lift_complex(&self) -> Result<Precoder> {
        let c = self.p.map(|x| Complex64::new(x, 0.0));
        Ok(Precoder {
            p: complex_to_real(&c)?,
            kind: self.kind,
            theta: self.theta,
            label: self.label.clone(),
            dpmin_report: self.dpmin_report,
        })
    }
}

pub(crate) fn rotation_matrix(theta: f64) -> DMatrix<f64> {
    let (s, c) = theta.sin_cos();
    DMatrix::from_row_slice(2, 2, &[c, s, -s, c])
}

/// `[[cos t, sin t], [-sin t, cos t]]`.
pub fn rotation_2d(theta: f64) -> Result<Precoder> {
    if !theta.is_finite() {
        return Err(domain_err("rotation angle must be finite"));
    }
    let kind = if (0.0..=FRAC_PI_4).contains(&theta) { PrecoderKind::Type1 } else { PrecoderKind::Rotation };
    Precoder::new(rotation_matrix(theta), kind, Some(theta), format!("rotation-{theta:.6}"))
}

/// X-code rotation angle for a QAM order. 4-QAM uses `atan(1/2)`, the exact
/// value behind the rounded 26.6 degrees.
pub fn xcode_angle(qam_order: u32) -> Result<f64> {
    match qam_order {
        4 => Ok(0.5f64.atan()),
        16 => Ok(15f64.to_radians()),
        64 => Ok(8f64.to_radians()),
        _ => Err(domain_err(format!("X-code angle is defined for 4/16/64-QAM, got {qam_order}"))),
    }
}

/// Pairs subchannel `i` with `n - 1 - i` (strongest with weakest).
pub(crate) fn xcode_pairs(n: usize) -> Result<Vec<(usize, usize)>> {
    if n == 0 || n % 2 != 0 {
        return Err(domain_err(format!("X-code pairing needs an even number of subchannels, got {n}")));
    }
    Ok((0..n / 2).map(|i| (i, n - 1 - i)).collect())
}

pub(crate) fn paired_rotation(n: usize, angles: &[f64]) -> Result<DMatrix<f64>> {
    let pairs = xcode_pairs(n)?;
    let mut q = DMatrix::zeros(n, n);
    for (&(i, j), &t) in pairs.iter().zip(angles) {
        let (s, c) = t.sin_cos();
        q[(i, i)] = c;
        q[(i, j)] = s;
        q[(j, i)] = -s;
        q[(j, j)] = c;
    }
    Ok(q)
}

/// X-code precoder for `n` complex subchannels, in the real model.
pub fn xcode_precoder(n: usize, qam_order: u32) -> Result<Precoder> {
    let theta = xcode_angle(qam_order)?;
    let q = paired_rotation(n, &vec![theta; n / 2])?;
    Precoder::new(q, PrecoderKind::XCode, Some(theta), format!("xcode-n{n}-qam{qam_order}"))?.lift_complex()
}
