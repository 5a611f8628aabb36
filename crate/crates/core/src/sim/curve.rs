use std::io::{BufRead, Write};

use nalgebra::DMatrix;
use rand::Rng;
use rayon::prelude::*;

use super::config::{ReceiverKind, SimConfig};
use crate::channel::{add_real_noise, effective_matrix, sample_channel_tagged, svd_sorted};
use crate::codebook::{sample_codeword, Codebook};
use crate::error::{Error, Result};
use crate::ml::MlReceiver;
use crate::precoder::{type1_search, type2_rotation, xcode_precoder, xprecoder_search, Precoder, PrecoderKind, TYPE1_GRID_STEP};
use crate::receiver::{build_effective_channel, if_decode, if_decode_dithered, solve_if};
use crate::rng::{substream, Role};

pub const CURVE_HEADER: &str = "snr_db,trials,errors,cer";

#[derive(Debug, Clone, PartialEq)]
pub struct CurvePoint {
    pub snr_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub cer: f64,
    /// `errors >= min_errors`; otherwise the point stopped at `max_trials`.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorCurve {
    pub points: Vec<CurvePoint>,
    pub config: SimConfig,
    pub version: String,
}

impl ErrorCurve {
    pub fn from_points(points: Vec<CurvePoint>, config: SimConfig) -> Self {
        Self { points, config, version: version_tag() }
    }

    pub fn is_complete(&self) -> bool {
        self.points.iter().all(|p| p.complete)
    }

    /// SNR (dB) at which the curve crosses `cer`, by linear interpolation of
    /// `log10(cer)` between the bracketing points. `None` if not bracketed.
    pub fn snr_at_cer(&self, cer: f64) -> Option<f64> {
        let target = cer.log10();
        self.points.windows(2).find_map(|w| {
            let (a, b) = (&w[0], &w[1]);
            if a.errors == 0 || b.errors == 0 {
                return None;
            }
            let (la, lb) = (a.cer.log10(), b.cer.log10());
            if la >= target && target >= lb && la != lb {
                Some(a.snr_db + (target - la) / (lb - la) * (b.snr_db - a.snr_db))
            } else if la == target {
                Some(a.snr_db)
            } else {
                None
            }
        })
    }

    /// CSV with the configuration echoed as leading `#` comment lines.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "# upif {}", self.version)?;
        for line in self.config.to_text().lines() {
            writeln!(out, "# {line}")?;
        }
        writeln!(out, "{CURVE_HEADER}")?;
        for p in &self.points {
            writeln!(out, "{:.16e},{},{},{:.16e}", p.snr_db, p.trials, p.errors, p.cer)?;
        }
        Ok(())
    }

    pub fn read_csv<R: BufRead>(input: R) -> Result<Self> {
        let mut cfg_text = String::new();
        let mut version = String::new();
        let mut rows = Vec::new();
        let mut seen_header = false;
        for line in input.lines() {
            let line = line?;
            let line = line.trim();
            if let Some(c) = line.strip_prefix('#') {
                let c = c.trim();
                if let Some(v) = c.strip_prefix("upif ") {
                    version = v.to_string();
                } else {
                    cfg_text.push_str(c);
                    cfg_text.push('\n');
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            if !seen_header {
                if line != CURVE_HEADER {
                    return Err(Error::Parse(format!("expected header `{CURVE_HEADER}`, got `{line}`")));
                }
                seen_header = true;
                continue;
            }
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(Error::Parse(format!("expected 4 fields, got `{line}`")));
            }
            let bad = |s: &str| Error::Parse(format!("bad number `{s}`"));
            rows.push((
                f[0].parse::<f64>().map_err(|_| bad(f[0]))?,
                f[1].parse::<u64>().map_err(|_| bad(f[1]))?,
                f[2].parse::<u64>().map_err(|_| bad(f[2]))?,
                f[3].parse::<f64>().map_err(|_| bad(f[3]))?,
            ));
        }
        if !seen_header {
            return Err(Error::Parse("missing CSV header".into()));
        }
        // Curves written by hand or other tools may lack the config echo.
        let config = if cfg_text.trim().is_empty() {
            let mut c = SimConfig::default();
            c.snr_grid_db = rows.iter().map(|r| r.0).collect();
            c
        } else {
            SimConfig::parse(&cfg_text)?
        };
        let points = rows
            .into_iter()
            .map(|(snr_db, trials, errors, cer)| CurvePoint { snr_db, trials, errors, cer, complete: errors >= config.min_errors })
            .collect();
        Ok(Self { points, config, version })
    }
}

fn version_tag() -> String {
    format!("v{}", env!("CARGO_PKG_VERSION"))
}

/// `rho = SNR / n` with SNR given in dB.
pub fn rho_from_snr_db(snr_db: f64, n_complex: usize) -> f64 {
    10f64.powf(snr_db / 10.0) / n_complex as f64
}

/// Builds the precoder used for one channel realization.
pub fn precoder_for(config: &SimConfig, sigma: &[f64], rho: f64) -> Result<Precoder> {
    let n = config.n_complex;
    match config.precoder_kind {
        PrecoderKind::Identity => Ok(Precoder::identity(2 * n)),
        PrecoderKind::Type1 => type1_search(sigma, rho, TYPE1_GRID_STEP),
        PrecoderKind::Type2 => type2_rotation(n)?.precoder.lift_complex(),
        PrecoderKind::XCode => xcode_precoder(n, config.qam_order),
        PrecoderKind::XPrecoder => xprecoder_search(sigma, config.codebook()?.g(), TYPE1_GRID_STEP),
        PrecoderKind::Rotation => Err(Error::Domain("fixed rotation precoders are not a simulation option".into())),
    }
}

/// Codeword error indicators for the `k` codewords sent over channel
/// realization `channel_idx` at SNR `snr_db`.
pub fn simulate_channel(config: &SimConfig, codebook: &Codebook, snr_db: f64, channel_idx: u64) -> Result<Vec<bool>> {
    let n = config.n_complex;
    let d = 2 * n;
    let rho = rho_from_snr_db(snr_db, n);
    let seed = config.master_seed;
    let ch = sample_channel_tagged(n, &mut substream(seed, channel_idx, Role::Channel), channel_idx)?;
    let sigma = svd_sorted(&ch)?.sigma;
    let p = precoder_for(config, &sigma, rho)?;
    let h = effective_matrix(&sigma, &p)?;

    let k = config.codewords_per_channel;
    let mut cw_rng = substream(seed, channel_idx, Role::Codeword);
    let mut noise_rng = substream(seed, channel_idx, Role::Noise);
    let mut dither_rng = substream(seed, channel_idx, Role::Dither);
    let scale = rho.sqrt();

    let mut out = Vec::with_capacity(k as usize);
    match config.receiver_kind {
        ReceiverKind::If => {
            let ec = build_effective_channel(&sigma, &p, rho)?;
            let sol = solve_if(&ec)?;
            for _ in 0..k {
                let (s, x) = sample_codeword(n, codebook, &mut cw_rng);
                let decoded = if config.dither {
                    let g = f64::from(codebook.g());
                    let u = DMatrix::from_fn(d, d, |_, _| dither_rng.gen_range(0.0..g));
                    let xd = DMatrix::from_fn(d, d, |i, j| {
                        codebook.dither_delta() * ((s[(i, j)] as f64 + u[(i, j)]).rem_euclid(g) - g / 2.0)
                    });
                    let mut y = &h * xd * scale;
                    add_real_noise(&mut y, &mut noise_rng);
                    if_decode_dithered(&y, &sol, rho, codebook, &u)?
                } else {
                    let mut y = &h * x * scale;
                    add_real_noise(&mut y, &mut noise_rng);
                    if_decode(&y, &sol, rho, codebook)?
                };
                out.push(decoded != s);
            }
        }
        ReceiverKind::Ml => {
            let ml = MlReceiver::new(&h, p.matrix(), rho, codebook)?;
            for _ in 0..k {
                let (s, x) = sample_codeword(n, codebook, &mut cw_rng);
                let mut y = &h * x * scale;
                add_real_noise(&mut y, &mut noise_rng);
                out.push(ml.decode(&y)? != s);
            }
        }
    }
    Ok(out)
}

const FIRST_BATCH: u64 = 32;
const MAX_BATCH: u64 = 2048;

/// Runs one SNR point until `min_errors` codeword errors or `max_trials`
/// codewords. Channels are simulated in parallel batches and then scanned
/// in order, so the stopping trial does not depend on the thread count.
pub fn run_point(config: &SimConfig, snr_db: f64) -> Result<CurvePoint> {
    let codebook = config.codebook()?;
    let k = config.codewords_per_channel;
    let mut trials = 0u64;
    let mut errors = 0u64;
    let mut next_channel = 0u64;
    let mut batch = FIRST_BATCH;
    'outer: loop {
        let remaining_channels = (config.max_trials - trials).div_ceil(k);
        let count = batch.min(remaining_channels);
        let results: Vec<Vec<bool>> = (next_channel..next_channel + count)
            .into_par_iter()
            .map(|c| simulate_channel(config, &codebook, snr_db, c))
            .collect::<Result<_>>()?;
        next_channel += count;
        for flags in results {
            for e in flags {
                trials += 1;
                errors += u64::from(e);
                if errors >= config.min_errors || trials >= config.max_trials {
                    break 'outer;
                }
            }
        }
        batch = (batch * 2).min(MAX_BATCH);
    }
    Ok(CurvePoint { snr_db, trials, errors, cer: errors as f64 / trials as f64, complete: errors >= config.min_errors })
}

pub fn run_curve(config: &SimConfig) -> Result<ErrorCurve> {
    config.validate()?;
    let points = config.snr_grid_db.iter().map(|&snr| run_point(config, snr)).collect::<Result<_>>()?;
    Ok(ErrorCurve::from_points(points, config.clone()))
}
