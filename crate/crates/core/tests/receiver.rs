mod common;

use common::*;
use nalgebra::DMatrix;
use rand::Rng;
use upif_core::channel::{effective_matrix, sample_channel, svd_sorted};
use upif_core::codebook::{sample_codeword, Codebook};
use upif_core::lattice::{lll_reduce_default, successive_minima, LatticeBasis};
use upif_core::precoder::*;
use upif_core::receiver::*;
use upif_core::Error;

fn random_setup<R: Rng>(n: usize, r: &mut R) -> (Vec<f64>, Precoder, f64) {
    let sigma = svd_sorted(&sample_channel(n, r).unwrap()).unwrap().sigma;
    let rho = 10f64.powf(r.gen_range(0.0..4.0)) / n as f64;
    let p = match r.gen_range(0..4) {
        0 => Precoder::identity(2 * n),
        1 => type2_rotation(n).unwrap().precoder.lift_complex().unwrap(),
        2 => xcode_precoder(n, 16).unwrap(),
        _ if n == 2 => type1_search(&sigma, rho, TYPE1_GRID_STEP).unwrap(),
        _ => type2_rotation(n).unwrap().precoder.lift_complex().unwrap(),
    };
    (sigma, p, rho)
}

#[test]
fn effective_channel_invariants() {
    let mut r = rng(30, 0);
    for _ in 0..200 {
        let (sigma, p, rho) = random_setup(2, &mut r);
        let ec = build_effective_channel(&sigma, &p, rho).unwrap();
        let sr = DMatrix::from_diagonal(&upif_core::channel::real_sigma(&sigma));
        let target = (DMatrix::<f64>::identity(4, 4) + sr.transpose() * &sr * rho).try_inverse().unwrap();
        assert!((ec.l() * ec.l().transpose() - target).amax() <= 1e-12);
        assert_eq!(ec.l_p(), &(p.matrix().transpose() * ec.l()));
    }
    assert!(matches!(build_effective_channel(&[1.0], &Precoder::identity(2), -0.1), Err(Error::Domain(_))));
}

#[test]
fn filter_examples() {
    let ec = build_effective_channel(&[1.3, 0.2], &Precoder::identity(4), 1e-12).unwrap();
    assert!(compute_filter(&DMatrix::identity(4, 4), &ec).unwrap().amax() < 1e-11);
    let rho = 2.5;
    let ec = build_effective_channel(&[1.0], &Precoder::identity(2), rho).unwrap();
    let b = compute_filter(&DMatrix::identity(2, 2), &ec).unwrap();
    assert!((b - DMatrix::<f64>::identity(2, 2) * (rho / (1.0 + rho))).amax() < 1e-15);
}

#[test]
fn noise_energy_scalar_chain() {
    let rho = 7.0;
    let sigma = [1.8, 0.6];
    let ec = build_effective_channel(&sigma, &Precoder::identity(4), rho).unwrap();
    let a = DMatrix::<i64>::identity(4, 4);
    let b = compute_filter(&a, &ec).unwrap();
    for m in 0..4 {
        let am: Vec<f64> = a.row(m).iter().map(|&x| x as f64).collect();
        let bm: Vec<f64> = b.row(m).iter().copied().collect();
        let s = sigma[m % 2];
        let g = noise_energy(&am, &bm, &ec).unwrap();
        assert!((g - rho / (1.0 + rho * s * s)).abs() <= 1e-12);
    }
    assert_eq!(noise_energy(&[1.0, 0.0, 0.0, 0.0], &[0.0; 4], &ec).unwrap(), rho);
}

#[test]
fn g_identity_and_local_optimality() {
    let mut r = rng(31, 0);
    for k in 0..500 {
        let n = if k % 2 == 0 { 2 } else { 4 };
        let (sigma, p, rho) = random_setup(n, &mut r);
        let ec = build_effective_channel(&sigma, &p, rho).unwrap();
        let sol = solve_if(&ec).unwrap();
        let lp = ec.l_p();
        for m in 0..2 * n {
            let a: Vec<f64> = sol.a().row(m).iter().map(|&x| x as f64).collect();
            let b: Vec<f64> = sol.b().row(m).iter().copied().collect();
            let al = DMatrix::from_row_slice(1, 2 * n, &a) * lp;
            let chain = rho * al.norm_squared();
            let g = noise_energy(&a, &b, &ec).unwrap();
            assert!((g - chain).abs() <= 1e-9 * chain);
            assert!((sol.g_per_layer()[m] - chain).abs() <= 1e-9 * chain);
            assert!((sol.snr_eff()[m] - rho / sol.g_per_layer()[m]).abs() <= 1e-12 * sol.snr_eff()[m]);
            for _ in 0..4 {
                let delta: Vec<f64> = (0..2 * n).map(|_| r.gen_range(-1.0..1.0)).collect();
                let nd = delta.iter().map(|x| x * x).sum::<f64>().sqrt();
                for t in [1e-3, -1e-3] {
                    let bp: Vec<f64> = b.iter().zip(&delta).map(|(x, d)| x + t * d / nd).collect();
                    assert!(noise_energy(&a, &bp, &ec).unwrap() >= g * (1.0 - 1e-12));
                }
            }
        }
    }
}

#[test]
fn woodbury_identity() {
    let mut r = rng(32, 0);
    for k in 0..1000 {
        let d = 1 + k % 8;
        let m1 = random_basis(d, 0.5, &mut r);
        let m2 = random_basis(d, 0.5, &mut r);
        let id = DMatrix::<f64>::identity(d, d);
        let lhs = &id - &m1 * (&id + &m2 * &m1).try_inverse().unwrap() * &m2;
        let rhs = (&id + &m1 * &m2).try_inverse().unwrap();
        assert!((lhs - rhs).amax() <= 1e-8);
    }
}

#[test]
fn integer_matrix_selection() {
    let ec = build_effective_channel(&[1.0, 1.0], &Precoder::identity(4), 3.0).unwrap();
    let a = select_integer_matrix(&ec).unwrap();
    assert!(a.iter().all(|x| x.abs() <= 1) && a.row_iter().all(|r| r.iter().map(|x| x.abs()).sum::<i64>() == 1));

    let mut r = rng(33, 0);
    for k in 0..10_000 {
        let n = if k % 4 == 0 { 4 } else { 2 };
        let (sigma, p, rho) = random_setup(n, &mut r);
        let ec = build_effective_channel(&sigma, &p, rho).unwrap();
        let sol = solve_if(&ec).unwrap();
        assert_eq!(int_det(sol.a()).abs(), 1);
        assert!(sol.g_per_layer().windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(sol.a() * sol.a_inv(), DMatrix::<i64>::identity(2 * n, 2 * n));
        // Best layer never worse than A = I.
        let best_unit = (0..2 * n).map(|m| rho * ec.l_p().row(m).norm_squared()).fold(f64::INFINITY, f64::min);
        assert!(sol.g_per_layer()[0] <= best_unit * (1.0 + 1e-12));
        if k < 500 {
            // LLL bound against the exact first minimum of rows(L_p).
            let eps = successive_minima(&LatticeBasis::new(ec.l_p().clone()).unwrap(), 1).unwrap();
            let d = 2 * n;
            assert!(sol.g_per_layer()[0] <= 2f64.powi(d as i32 - 1) * rho * eps * eps * (1.0 + 1e-9));
        }
    }
}

#[test]
fn two_dimensional_selection_is_near_optimal() {
    // Real 2x2 model: one complex antenna.
    let mut r = rng(34, 0);
    for _ in 0..500 {
        let sigma = [r.gen_range(0.05..3.0)];
        let theta = r.gen_range(0.0..std::f64::consts::FRAC_PI_4);
        let p = rotation_2d(theta).unwrap();
        let rho = r.gen_range(1.0..1000.0);
        let ec = build_effective_channel(&sigma, &p, rho).unwrap();
        let sol = solve_if(&ec).unwrap();
        let eps = brute_minimum(ec.l_p(), 1);
        assert!(sol.g_per_layer()[0] <= 2.0 * rho * eps * eps * (1.0 + 1e-9));
    }
}

#[test]
fn non_unimodular_is_rejected() {
    let ec = build_effective_channel(&[1.0, 0.5], &Precoder::identity(4), 1.0).unwrap();
    let mut a = DMatrix::<i64>::identity(4, 4);
    a[(2, 2)] = 3;
    assert!(matches!(IfSolution::new(a, &ec), Err(Error::Contract(_))));
}

fn all_precoders(n: usize, sigma: &[f64], rho: f64, qam: u32) -> Vec<Precoder> {
    let mut v = vec![Precoder::identity(2 * n), type2_rotation(n).unwrap().precoder.lift_complex().unwrap(), xcode_precoder(n, qam).unwrap()];
    if n == 2 {
        v.push(type1_search(sigma, rho, TYPE1_GRID_STEP).unwrap());
        v.push(xprecoder_search(sigma, Codebook::from_qam(qam).unwrap().g(), TYPE1_GRID_STEP).unwrap());
    }
    v
}

#[test]
fn noiseless_round_trip_and_zero_forcing_equivalence() {
    let mut r = rng(35, 0);
    for k in 0..300 {
        let n = if k % 3 == 0 { 4 } else { 2 };
        let g = [2u32, 4, 8][k % 3];
        let cb = Codebook::new(g).unwrap();
        let qam = g * g;
        let sigma = svd_sorted(&sample_channel(n, &mut r).unwrap()).unwrap().sigma;
        let rho = 10f64.powf(r.gen_range(0.5..4.0));
        for p in all_precoders(n, &sigma, rho, qam) {
            // Without noise the MMSE filter is designed for rho -> infinity.
            let ec = build_effective_channel(&sigma, &p, 1e12).unwrap();
            let sol = solve_if(&ec).unwrap();
            let (s, x) = sample_codeword(n, &cb, &mut r);
            let h = effective_matrix(&sigma, &p).unwrap();
            let y = &h * x * rho.sqrt();
            assert_eq!(if_decode(&y, &sol, rho, &cb).unwrap(), s, "kind {}", p.kind());
            let zf = sol.a().map(|v| v as f64) * h.clone().try_inverse().unwrap();
            assert_eq!(if_decode(&y, &sol.with_filter(zf).unwrap(), rho, &cb).unwrap(), s);
        }
    }
}

#[test]
fn dithered_noiseless_round_trip() {
    let mut r = rng(36, 0);
    let cb = Codebook::new(4).unwrap();
    let sigma = [1.4, 0.5];
    let rho = 1000.0;
    let p = type2_rotation(2).unwrap().precoder.lift_complex().unwrap();
    let ec = build_effective_channel(&sigma, &p, rho).unwrap();
    let sol = solve_if(&ec).unwrap();
    let h = effective_matrix(&sigma, &p).unwrap();
    for _ in 0..100 {
        let (s, _) = sample_codeword(2, &cb, &mut r);
        let u = DMatrix::from_fn(4, 4, |_, _| r.gen_range(0.0..4.0));
        let x = DMatrix::from_fn(4, 4, |i, j| cb.dither_delta() * ((s[(i, j)] as f64 + u[(i, j)]).rem_euclid(4.0) - 2.0));
        let y = &h * x * rho.sqrt();
        let zf = sol.a().map(|v| v as f64) * h.clone().try_inverse().unwrap();
        assert_eq!(if_decode_dithered(&y, &sol.with_filter(zf).unwrap(), rho, &cb, &u).unwrap(), s);
    }
}

#[test]
fn high_noise_stays_in_range() {
    let mut r = rng(37, 0);
    let cb = Codebook::new(8).unwrap();
    let rho = 1e-6;
    let p = type2_rotation(2).unwrap().precoder.lift_complex().unwrap();
    let ec = build_effective_channel(&[1.0, 0.4], &p, rho).unwrap();
    let sol = solve_if(&ec).unwrap();
    let y = DMatrix::from_fn(4, 4, |_, _| r.gen_range(-3.0..3.0));
    let out = if_decode(&y, &sol, rho, &cb).unwrap();
    assert!(out.iter().all(|&s| (0..8).contains(&s)));
}

#[test]
fn theorem1_bound_behaviour() {
    let ec = build_effective_channel(&[1.0], &Precoder::identity(2), 1.0).unwrap();
    assert!(matches!(theorem1_bound(&ec, 0), Err(Error::Domain(_))));
    assert!(matches!(theorem1_bound(&ec, 3), Err(Error::Domain(_))));
    assert_eq!(bound_constant(2), 1.0 / 68.0);

    let p = type2_rotation(2).unwrap().precoder.lift_complex().unwrap();
    let huge = build_effective_channel(&[1.0, 0.9], &p, 1e12).unwrap();
    assert!(theorem1_bound(&huge, 4).unwrap() < 1e-100);

    let mut r = rng(38, 0);
    for _ in 0..20 {
        let sigma = svd_sorted(&sample_channel(2, &mut r).unwrap()).unwrap().sigma;
        for m in 1..=4 {
            let mut last = f64::INFINITY;
            for e in 0..8 {
                let rho = 10f64.powi(e);
                let b = theorem1_bound(&build_effective_channel(&sigma, &p, rho).unwrap(), m).unwrap();
                assert!(b >= 0.0 && b <= 1.0 && b <= last * (1.0 + 1e-12), "rho {rho} m {m}: {b} after {last}");
                if e <= 3 {
                    assert!(b > 0.0);
                }
                last = b;
            }
        }
    }
}

#[test]
fn lll_transform_is_what_selection_uses() {
    // A reduces rows(L_p): A L_p must be LLL-reduced up to row order.
    let mut r = rng(39, 0);
    let (sigma, p, rho) = random_setup(2, &mut r);
    let ec = build_effective_channel(&sigma, &p, rho).unwrap();
    let a = select_integer_matrix(&ec).unwrap();
    let reduced = a.map(|x| x as f64) * ec.l_p();
    let again = lll_reduce_default(&LatticeBasis::new(reduced.clone()).unwrap()).unwrap();
    let norms = |m: &DMatrix<f64>| {
        let mut v: Vec<f64> = m.row_iter().map(|r| r.norm()).collect();
        v.sort_by(f64::total_cmp);
        v
    };
    let (x, y) = (norms(&reduced), norms(again.basis.generator()));
    assert!(x.iter().zip(&y).all(|(a, b)| (a - b).abs() <= 1e-9 * a.max(1e-300) || b <= a));
}
