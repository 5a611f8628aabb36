//! Cubic-shaped lattice codebook `Z_g` per real dimension.
//!
//! Symbols `s in {0, .., g-1}` map to the zero-centred points
//! `delta * (s - (g-1)/2)`, with `delta` chosen so each real coordinate has
//! average energy 1/2 (unit energy per complex symbol). `g = 2` gives 4-QAM.

use nalgebra::DMatrix;
use rand::Rng;

use crate::error::{domain_err, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Codebook {
    g: u32,
    delta: f64,
}

impl Codebook {
    pub fn new(g: u32) -> Result<Self> {
        if g < 2 || !g.is_power_of_two() {
            return Err(domain_err(format!("codebook size per real dimension must be a power of 2 >= 2, got {g}")));
        }
        let gf = f64::from(g);
        Ok(Self { g, delta: (6.0 / (gf * gf - 1.0)).sqrt() })
    }

    /// `qam_order` must be 4, 16 or 64 (g = 2, 4, 8).
    pub fn from_qam(qam_order: u32) -> Result<Self> {
        match qam_order {
            4 => Self::new(2),
            16 => Self::new(4),
            64 => Self::new(8),
            _ => Err(domain_err(format!("QAM order must be 4, 16 or 64, got {qam_order}"))),
        }
    }

    pub fn g(&self) -> u32 {
        self.g
    }

    /// Spacing between adjacent real constellation points.
    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// `(g - 1) / 2`, the symbol-domain offset of the centred constellation.
    pub fn offset(&self) -> f64 {
        (f64::from(self.g) - 1.0) / 2.0
    }

    pub fn to_real(&self, s: i64) -> f64 {
        self.delta * (s as f64 - self.offset())
    }

    pub fn map(&self, symbols: &DMatrix<i64>) -> DMatrix<f64> {
        symbols.map(|s| self.to_real(s))
    }

    /// Uniform symbols, filled row-major.
    pub fn sample_symbols<R: Rng + ?Sized>(&self, rows: usize, cols: usize, rng: &mut R) -> DMatrix<i64> {
        let mut s = DMatrix::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                s[(i, j)] = i64::from(rng.gen_range(0..self.g));
            }
        }
        s
    }

    /// Scale for dithered transmission, where the transmitted value is
    /// uniform on `[0, g)` in symbol units (energy 1/2 per real coordinate).
    pub fn dither_delta(&self) -> f64 {
        6f64.sqrt() / f64::from(self.g)
    }
}

/// A `2n x 2n` real codeword: `n_complex` complex layers over `n_complex`
/// complex channel uses, every real entry drawn independently.
pub fn sample_codeword<R: Rng + ?Sized>(n_complex: usize, codebook: &Codebook, rng: &mut R) -> (DMatrix<i64>, DMatrix<f64>) {
    let d = 2 * n_complex;
    let s = codebook.sample_symbols(d, d, rng);
    let x = codebook.map(&s);
    (s, x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::{substream, Role};

    #[test]
    fn four_qam_levels() {
        let c = Codebook::new(2).unwrap();
        let h = c.delta() / 2.0;
        assert_eq!((c.to_real(0), c.to_real(1)), (-h, h));
        assert!((h - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(Codebook::new(3).is_err());
        assert!(Codebook::new(1).is_err());
        assert!(Codebook::from_qam(32).is_err());
    }

    #[test]
    fn codeword_is_deterministic() {
        let c = Codebook::new(8).unwrap();
        let a = sample_codeword(2, &c, &mut substream(5, 9, Role::Codeword));
        let b = sample_codeword(2, &c, &mut substream(5, 9, Role::Codeword));
        assert_eq!(a, b);
        assert!(a.0.iter().all(|&s| (0..8).contains(&s)));
    }
}
