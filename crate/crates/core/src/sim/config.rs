use std::fmt;
use std::str::FromStr;

use crate::codebook::Codebook;
use crate::error::{domain_err, Error, Result};
use crate::precoder::PrecoderKind;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReceiverKind {
    If,
    Ml,
}

impl ReceiverKind {
    pub fn as_str(self) -> &'static str {
        match self {
            ReceiverKind::If => "if",
            ReceiverKind::Ml => "ml",
        }
    }
}

impl fmt::Display for ReceiverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ReceiverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "if" => Ok(ReceiverKind::If),
            "ml" => Ok(ReceiverKind::Ml),
            other => Err(Error::Parse(format!("unknown receiver kind `{other}` (expected if or ml)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub n_complex: usize,
    pub qam_order: u32,
    pub snr_grid_db: Vec<f64>,
    pub precoder_kind: PrecoderKind,
    pub receiver_kind: ReceiverKind,
    pub min_errors: u64,
    pub max_trials: u64,
    pub codewords_per_channel: u64,
    pub master_seed: u64,
    pub dither: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            n_complex: 2,
            qam_order: 4,
            snr_grid_db: vec![0.0, 5.0, 10.0, 15.0, 20.0],
            precoder_kind: PrecoderKind::Type2,
            receiver_kind: ReceiverKind::If,
            min_errors: 100,
            max_trials: 100_000,
            codewords_per_channel: 1,
            master_seed: 1,
            dither: false,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_complex == 0 {
            return Err(domain_err("n_complex must be at least 1"));
        }
        Codebook::from_qam(self.qam_order)?;
        if self.snr_grid_db.is_empty() {
            return Err(domain_err("snr_grid_db is empty"));
        }
        if self.snr_grid_db.iter().any(|x| !x.is_finite()) {
            return Err(domain_err("snr_grid_db has non-finite entries"));
        }
        if self.snr_grid_db.windows(2).any(|w| w[1] <= w[0]) {
            return Err(domain_err("snr_grid_db must be strictly increasing"));
        }
        if self.min_errors == 0 {
            return Err(domain_err("min_errors must be at least 1"));
        }
        if self.max_trials == 0 {
            return Err(domain_err("max_trials must be at least 1"));
        }
        if self.codewords_per_channel == 0 {
            return Err(domain_err("codewords_per_channel must be at least 1"));
        }
        match self.precoder_kind {
            PrecoderKind::Type1 | PrecoderKind::XPrecoder if self.n_complex != 2 => {
                return Err(domain_err(format!("{} precoders need n_complex = 2", self.precoder_kind)));
            }
            PrecoderKind::Type2 if !matches!(self.n_complex, 2 | 4 | 8) => {
                return Err(domain_err("type2 precoders need n_complex in {2, 4, 8}"));
            }
            PrecoderKind::XCode if self.n_complex % 2 != 0 => {
                return Err(domain_err("xcode precoders need an even n_complex"));
            }
            PrecoderKind::Rotation => {
                return Err(domain_err("fixed rotation precoders are not a simulation option"));
            }
            _ => {}
        }
        if self.dither && self.receiver_kind == ReceiverKind::Ml {
            return Err(domain_err("dithered transmission is only supported with the if receiver"));
        }
        Ok(())
    }

    pub fn codebook(&self) -> Result<Codebook> {
        Codebook::from_qam(self.qam_order)
    }

    /// Parses `key = value` lines; `#` starts a comment. Unset keys keep
    /// their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = SimConfig::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("line {}: expected `key = value`", lineno + 1)))?;
            cfg.set(key.trim(), value.trim())
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Parse(format!("bad value `{v}` for {key}")))
        }
        match key {
            "n_complex" => self.n_complex = num(key, value)?,
            "qam_order" => self.qam_order = num(key, value)?,
            "snr_grid_db" => {
                self.snr_grid_db = value
                    .split(',')
                    .map(str::trim)
                    .filter(|s| !s.is_empty())
                    .map(|s| num(key, s))
                    .collect::<Result<_>>()?
            }
            "precoder_kind" => self.precoder_kind = value.parse()?,
            "receiver_kind" => self.receiver_kind = value.parse()?,
            "min_errors" => self.min_errors = num(key, value)?,
            "max_trials" => self.max_trials = num(key, value)?,
            "codewords_per_channel" => self.codewords_per_channel = num(key, value)?,
            "master_seed" => self.master_seed = num(key, value)?,
            "dither" => self.dither = num(key, value)?,
            other => return Err(Error::Parse(format!("unknown key `{other}`"))),
        }
        Ok(())
    }

    /// Inverse of [`SimConfig::parse`].
    pub fn to_text(&self) -> String {
        let grid: Vec<String> = self.snr_grid_db.iter().map(|x| x.to_string()).collect();
        format!(
            "n_complex = {}\nqam_order = {}\nsnr_grid_db = {}\nprecoder_kind = {}\nreceiver_kind = {}\nmin_errors = {}\nmax_trials = {}\ncodewords_per_channel = {}\nmaster_seed = {}\ndither = {}\n",
            self.n_complex,
            self.qam_order,
            grid.join(", "),
            self.precoder_kind,
            self.receiver_kind,
            self.min_errors,
            self.max_trials,
            self.codewords_per_channel,
            self.master_seed,
            self.dither
        )
    }
}
