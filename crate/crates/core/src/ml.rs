//! Box-constrained sphere decoding for the finite codebook.
//!
//! Row convention: a symbol vector `s` maps to `s * generator`. The decoder
//! works on `y^T = generator^T s^T` via a QR factorization and a
//! Schnorr-Euchner depth-first search whose initial radius comes from the
//! box-clamped Babai point.

use nalgebra::{DMatrix, DVector};

use crate::codebook::Codebook;
use crate::error::{dim_err, domain_err, Error, Result};

#[derive(Debug, Clone)]
pub struct FiniteCodebookLattice {
    generator: DMatrix<f64>,
    lo: i64,
    hi: i64,
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl FiniteCodebookLattice {
    /// Symbols range over `lo..=hi` in every coordinate.
    pub fn new(generator: DMatrix<f64>, lo: i64, hi: i64) -> Result<Self> {
        let d = generator.nrows();
        if d == 0 || generator.ncols() != d {
            return Err(dim_err("sphere decoder generator must be square and nonempty"));
        }
        if lo > hi {
            return Err(domain_err(format!("empty symbol range {lo}..={hi}")));
        }
        if generator.iter().any(|x| !x.is_finite()) {
            return Err(domain_err("generator has non-finite entries"));
        }
        let qr = generator.transpose().qr();
        let (q, r) = qr.unpack();
        let scale = generator.row_iter().map(|row| row.norm()).fold(0.0, f64::max);
        if (0..d).any(|k| r[(k, k)].abs() <= 1e-12 * scale.max(1e-300)) {
            return Err(Error::Degenerate("sphere decoder generator is rank deficient".into()));
        }
        Ok(Self { generator, lo, hi, q, r })
    }

    pub fn generator(&self) -> &DMatrix<f64> {
        &self.generator
    }

    pub fn dim(&self) -> usize {
        self.generator.nrows()
    }

    pub fn symbol_range(&self) -> (i64, i64) {
        (self.lo, self.hi)
    }

    pub fn distance_sq(&self, y: &[f64], s: &[i64]) -> f64 {
        let d = self.dim();
        (0..d)
            .map(|j| {
                let p: f64 = (0..d).map(|i| s[i] as f64 * self.generator[(i, j)]).sum();
                (y[j] - p).powi(2)
            })
            .sum()
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SphereStats {
    /// Tree nodes expanded at any level.
    pub nodes: u64,
    /// Complete symbol vectors evaluated.
    pub leaves: u64,
}

pub fn sphere_decode(y: &[f64], lat: &FiniteCodebookLattice) -> Result<Vec<i64>> {
    sphere_decode_with_stats(y, lat).map(|(s, _)| s)
}

pub fn sphere_decode_with_stats(y: &[f64], lat: &FiniteCodebookLattice) -> Result<(Vec<i64>, SphereStats)> {
    let d = lat.dim();
    if y.len() != d {
        return Err(dim_err(format!("received vector has length {}, expected {d}", y.len())));
    }
    let z = lat.q.transpose() * DVector::from_column_slice(y);
    // Residual of y outside the span is zero for square full-rank generators.
    let mut search = Search {
        r: &lat.r,
        z: z.as_slice(),
        lo: lat.lo,
        hi: lat.hi,
        cur: vec![0; d],
        best: babai(&lat.r, z.as_slice(), lat.lo, lat.hi),
        best_dist: 0.0,
        stats: SphereStats::default(),
    };
    search.best_dist = tri_distance(&lat.r, z.as_slice(), &search.best);
    search.descend(d, 0.0);
    Ok((search.best, search.stats))
}

fn babai(r: &DMatrix<f64>, z: &[f64], lo: i64, hi: i64) -> Vec<i64> {
    let d = z.len();
    let mut s = vec![0i64; d];
    for k in (0..d).rev() {
        let c = centre(r, z, &s, k);
        s[k] = (c.round_ties_even() as i64).clamp(lo, hi);
    }
    s
}

fn centre(r: &DMatrix<f64>, z: &[f64], s: &[i64], k: usize) -> f64 {
    let acc: f64 = (k + 1..z.len()).map(|j| r[(k, j)] * s[j] as f64).sum();
    (z[k] - acc) / r[(k, k)]
}

fn tri_distance(r: &DMatrix<f64>, z: &[f64], s: &[i64]) -> f64 {
    let d = z.len();
    (0..d)
        .map(|k| {
            let p: f64 = (k..d).map(|j| r[(k, j)] * s[j] as f64).sum();
            (z[k] - p).powi(2)
        })
        .sum()
}

struct Search<'a> {
    r: &'a DMatrix<f64>,
    z: &'a [f64],
    lo: i64,
    hi: i64,
    cur: Vec<i64>,
    best: Vec<i64>,
    best_dist: f64,
    stats: SphereStats,
}

impl Search<'_> {
    fn tol(&self) -> f64 {
        1e-12 * (1.0 + self.best_dist)
    }

    /// `level` coordinates `level..d` are fixed in `cur`.
    fn descend(&mut self, level: usize, partial: f64) {
        if level == 0 {
            self.stats.leaves += 1;
            let better = partial < self.best_dist - self.tol()
                || (partial <= self.best_dist + self.tol() && self.cur < self.best);
            if better {
                self.best.clone_from(&self.cur);
                self.best_dist = partial;
            }
            return;
        }
        self.stats.nodes += 1;
        let k = level - 1;
        let c = centre(self.r, self.z, &self.cur, k);
        let rkk2 = self.r[(k, k)].powi(2);
        // Zig-zag order around the centre, clipped to the box; ties go to the
        // smaller symbol.
        let mut cands: Vec<(f64, i64)> = (self.lo..=self.hi).map(|s| (rkk2 * (s as f64 - c).powi(2), s)).collect();
        cands.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        for (inc, s) in cands {
            let next = partial + inc;
            if next > self.best_dist + self.tol() {
                break;
            }
            self.cur[k] = s;
            self.descend(k, next);
        }
        self.cur[k] = 0;
    }
}

/// Joint ML detection of `Y' = sqrt(rho) H X + Z'` with `H = Sigma_r P`.
/// The search splits into independent blocks following the sparsity of `P`
/// (for instance the 2x2 blocks of paired or lifted rotations).
#[derive(Debug, Clone)]
pub struct MlReceiver {
    blocks: Vec<Block>,
    shift: DVector<f64>,
    dim: usize,
}

#[derive(Debug, Clone)]
struct Block {
    rows: Vec<usize>,
    cols: Vec<usize>,
    lattice: FiniteCodebookLattice,
}

impl MlReceiver {
    pub fn new(h_eff: &DMatrix<f64>, pattern: &DMatrix<f64>, rho: f64, codebook: &Codebook) -> Result<Self> {
        let d = h_eff.nrows();
        if h_eff.ncols() != d || pattern.shape() != (d, d) {
            return Err(dim_err("effective channel and pattern must be square and equal sized"));
        }
        if !(rho > 0.0 && rho.is_finite()) {
            return Err(domain_err("ML detection needs finite rho > 0"));
        }
        let scaled = h_eff * (rho.sqrt() * codebook.delta());
        let shift = &scaled * DVector::from_element(d, codebook.offset());
        let hi = i64::from(codebook.g()) - 1;
        let mut blocks = Vec::new();
        for (rows, cols) in components(pattern)? {
            // Row convention: generator row i is column cols[i] of H.
            let gen = DMatrix::from_fn(cols.len(), rows.len(), |i, j| scaled[(rows[j], cols[i])]);
            blocks.push(Block { lattice: FiniteCodebookLattice::new(gen, 0, hi)?, rows, cols });
        }
        Ok(Self { blocks, shift, dim: d })
    }

    /// Sizes of the independent sub-problems.
    pub fn block_sizes(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.cols.len()).collect()
    }

    pub fn decode(&self, y_prime: &DMatrix<f64>) -> Result<DMatrix<i64>> {
        if y_prime.nrows() != self.dim {
            return Err(dim_err(format!("received block has {} rows, expected {}", y_prime.nrows(), self.dim)));
        }
        let mut out = DMatrix::zeros(self.dim, y_prime.ncols());
        for t in 0..y_prime.ncols() {
            for b in &self.blocks {
                let y: Vec<f64> = b.rows.iter().map(|&i| y_prime[(i, t)] + self.shift[i]).collect();
                let s = sphere_decode(&y, &b.lattice)?;
                for (&c, v) in b.cols.iter().zip(s) {
                    out[(c, t)] = v;
                }
            }
        }
        Ok(out)
    }
}

/// Connected components of the bipartite row/column graph of the nonzero
/// pattern. Each component must be square.
fn components(pattern: &DMatrix<f64>) -> Result<Vec<(Vec<usize>, Vec<usize>)>> {
    let d = pattern.nrows();
    let scale = pattern.amax().max(f64::MIN_POSITIVE);
    // Nodes 0..d are rows, d..2d are columns.
    let mut parent: Vec<usize> = (0..2 * d).collect();
    fn find(p: &mut [usize], mut x: usize) -> usize {
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for i in 0..d {
        for j in 0..d {
            if pattern[(i, j)].abs() > 1e-12 * scale {
                let (a, b) = (find(&mut parent, i), find(&mut parent, d + j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut out: Vec<(usize, Vec<usize>, Vec<usize>)> = Vec::new();
    for node in 0..2 * d {
        let root = find(&mut parent, node);
        let idx = match out.iter().position(|c| c.0 == root) {
            Some(k) => k,
            None => {
                out.push((root, Vec::new(), Vec::new()));
                out.len() - 1
            }
        };
        if node < d {
            out[idx].1.push(node);
        } else {
            out[idx].2.push(node - d);
        }
    }
    out.into_iter()
        .map(|(_, r, c)| {
            if r.len() == c.len() {
                Ok((r, c))
            } else {
                Err(Error::Degenerate("nonzero pattern does not split into square blocks".into()))
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_point_is_returned() {
        let g = DMatrix::from_row_slice(2, 2, &[1.0, 0.3, -0.2, 0.9]);
        let lat = FiniteCodebookLattice::new(g.clone(), 0, 3).unwrap();
        let y = DMatrix::from_row_slice(1, 2, &[2.0, 1.0]) * &g;
        assert_eq!(sphere_decode(y.as_slice(), &lat).unwrap(), vec![2, 1]);
    }

    #[test]
    fn far_point_hits_a_corner() {
        let lat = FiniteCodebookLattice::new(DMatrix::identity(3, 3), 0, 3).unwrap();
        assert_eq!(sphere_decode(&[100.0, -50.0, 100.0], &lat).unwrap(), vec![3, 0, 3]);
    }

    #[test]
    fn ties_go_lexicographic() {
        let lat = FiniteCodebookLattice::new(DMatrix::identity(2, 2), 0, 1).unwrap();
        assert_eq!(sphere_decode(&[0.5, 0.5], &lat).unwrap(), vec![0, 0]);
    }

    #[test]
    fn rejects_empty_box_and_singular() {
        assert!(FiniteCodebookLattice::new(DMatrix::identity(2, 2), 1, 0).is_err());
        assert!(FiniteCodebookLattice::new(DMatrix::zeros(2, 2), 0, 1).is_err());
    }

    #[test]
    fn block_split_follows_pattern() {
        let mut p = DMatrix::<f64>::zeros(4, 4);
        p[(0, 3)] = 1.0;
        p[(3, 0)] = 1.0;
        p[(1, 1)] = 1.0;
        p[(1, 2)] = 1.0;
        p[(2, 1)] = 1.0;
        p[(2, 2)] = -1.0;
        let comps = components(&p).unwrap();
        assert_eq!(comps, vec![(vec![0], vec![3]), (vec![1, 2], vec![1, 2]), (vec![3], vec![0])]);
    }
}
