use std::io::Write;

use rayon::prelude::*;

use crate::channel::{sample_channel, svd_sorted};
use crate::error::{domain_err, Result};
use crate::lattice::coding_gain;
use crate::precoder::{type1_search_2d, TYPE1_GRID_STEP};
use crate::rng::{substream, Role};

pub const LANDSCAPE_HEADER: &str = "tan_eta,tan_theta_star,coding_gain";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LandscapeRow {
    pub tan_eta: f64,
    pub tan_theta_star: f64,
    pub coding_gain: f64,
    /// `sigma_1 / sigma_2` of the sampled channel.
    pub condition_number: f64,
    pub theta_star: f64,
}

/// Type I search over `num_channels` random 2x2 complex channels at a fixed
/// `rho`, recording the searched angle and the coding gain of `L^{-1} P`.
pub fn landscape_sweep(num_channels: usize, rho: f64, master_seed: u64) -> Result<Vec<LandscapeRow>> {
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(domain_err(format!("rho must be finite and positive, got {rho}")));
    }
    (0..num_channels as u64)
        .into_par_iter()
        .map(|i| {
            let ch = sample_channel(2, &mut substream(master_seed, i, Role::Channel))?;
            let sigma = svd_sorted(&ch)?.sigma;
            let out = type1_search_2d(&sigma, rho, TYPE1_GRID_STEP)?;
            let gamma = coding_gain(&out.lattice(&sigma, rho)?)?;
            Ok(LandscapeRow {
                tan_eta: out.tan_eta,
                tan_theta_star: out.theta.tan(),
                coding_gain: gamma,
                condition_number: sigma[0] / sigma[1],
                theta_star: out.theta,
            })
        })
        .collect()
}

pub fn write_landscape_csv<W: Write>(rows: &[LandscapeRow], mut out: W) -> Result<()> {
    writeln!(out, "{LANDSCAPE_HEADER}")?;
    for r in rows {
        writeln!(out, "{:.16e},{:.16e},{:.16e}", r.tan_eta, r.tan_theta_star, r.coding_gain)?;
    }
    Ok(())
}
