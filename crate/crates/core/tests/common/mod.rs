//! Brute-force oracles shared by the integration tests. Nothing here calls
//! the library's own search routines.
#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use upif_core::rng::{substream, Role};

pub fn rng(seed: u64, stream: u64) -> rand_chacha::ChaCha8Rng {
    substream(seed, stream, Role::Misc)
}

/// Random basis `I + eps * U(-1, 1)` rescaled by a random factor.
pub fn random_basis<R: Rng>(d: usize, eps: f64, rng: &mut R) -> DMatrix<f64> {
    let scale = rng.gen_range(0.5..2.0);
    DMatrix::from_fn(d, d, |i, j| scale * (f64::from(u8::from(i == j)) + eps * rng.gen_range(-1.0..1.0)))
}

pub fn gaussian_matrix<R: Rng>(d: usize, rng: &mut R) -> DMatrix<f64> {
    DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(rand_distr::StandardNormal))
}

pub fn point(g: &DMatrix<f64>, v: &[i64]) -> Vec<f64> {
    (0..g.ncols()).map(|j| (0..g.nrows()).map(|i| v[i] as f64 * g[(i, j)]).sum()).collect()
}

pub fn norm_sq(g: &DMatrix<f64>, v: &[i64]) -> f64 {
    point(g, v).iter().map(|x| x * x).sum()
}

/// Every integer vector with sup-norm at most `bound`, zero included.
pub fn box_vectors(d: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (-bound..=bound).map(move |x| {
                    let mut w = v.clone();
                    w.push(x);
                    w
                })
            })
            .collect();
    }
    out
}

/// Coefficient bound guaranteeing that every lattice vector of norm at most
/// `radius` lies in the box: `|v|_inf <= |v| <= radius / s_min(G)`.
pub fn safe_bound(g: &DMatrix<f64>, radius: f64) -> i64 {
    let smin = g.clone().svd(false, false).singular_values.min();
    (radius / smin).ceil() as i64
}

/// All nonzero `v` (one per sign pair) with `|v G| <= radius`, sorted by norm.
pub fn brute_short_vectors(g: &DMatrix<f64>, radius: f64) -> Vec<(Vec<i64>, f64)> {
    let b = safe_bound(g, radius);
    let mut out: Vec<(Vec<i64>, f64)> = box_vectors(g.nrows(), b)
        .into_iter()
        .filter(|v| v.iter().find(|&&x| x != 0).is_some_and(|&x| x > 0))
        .map(|v| {
            let n = norm_sq(g, &v);
            (v, n)
        })
        .filter(|(_, n)| *n <= radius * radius * (1.0 + 1e-12))
        .collect();
    out.sort_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
    out
}

/// Rank of integer vectors by fraction-free elimination in i128.
pub fn int_rank(vs: &[Vec<i64>]) -> usize {
    let mut m: Vec<Vec<i128>> = vs.iter().map(|v| v.iter().map(|&x| i128::from(x)).collect()).collect();
    let cols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for c in 0..cols {
        let Some(p) = (rank..m.len()).find(|&r| m[r][c] != 0) else { continue };
        m.swap(rank, p);
        for r in 0..m.len() {
            if r != rank && m[r][c] != 0 {
                let (a, b) = (m[rank][c], m[r][c]);
                for k in 0..cols {
                    m[r][k] = m[r][k] * a - m[rank][k] * b;
                }
                let g = m[r].iter().fold(0i128, |acc, &x| gcd(acc, x));
                if g > 1 {
                    m[r].iter_mut().for_each(|x| *x /= g);
                }
            }
        }
        rank += 1;
    }
    rank
}

fn gcd(a: i128, b: i128) -> i128 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

/// `eps_m` by brute force: the radius of the m-th greedily chosen independent
/// vector in norm order, searched up to the largest basis-row norm.
pub fn brute_minimum(g: &DMatrix<f64>, m: usize) -> f64 {
    let radius = g.row_iter().map(|r| r.norm()).fold(0.0, f64::max) * (1.0 + 1e-9);
    let mut chosen: Vec<Vec<i64>> = Vec::new();
    for (v, n) in brute_short_vectors(g, radius) {
        chosen.push(v);
        if int_rank(&chosen) < chosen.len() {
            chosen.pop();
        } else if chosen.len() == m {
            return n.sqrt();
        }
    }
    panic!("brute_minimum did not find {m} independent vectors");
}

/// Determinant of a small integer matrix by cofactor expansion.
pub fn int_det(m: &DMatrix<i64>) -> i128 {
    let d = m.nrows();
    if d == 1 {
        return i128::from(m[(0, 0)]);
    }
    (0..d)
        .map(|j| {
            let minor = m.clone().remove_row(0).remove_column(j);
            let s = if j % 2 == 0 { 1 } else { -1 };
            s * i128::from(m[(0, j)]) * int_det(&minor)
        })
        .sum()
}

/// Exhaustive closest codebook point: symbols in `0..g`, lexicographic ties.
pub fn exhaustive_decode(y: &[f64], gen: &DMatrix<f64>, g: i64) -> Vec<i64> {
    let d = gen.nrows();
    let mut best = (f64::INFINITY, vec![]);
    let mut s = vec![0i64; d];
    loop {
        let p = point(gen, &s);
        let dist: f64 = p.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
        if dist < best.0 {
            best = (dist, s.clone());
        }
        let mut k = d;
        loop {
            if k == 0 {
                return best.1;
            }
            k -= 1;
            s[k] += 1;
            if s[k] < g {
                break;
            }
            s[k] = 0;
        }
    }
}
