//! Monte-Carlo experiments: error-rate curves, the Type I landscape sweep
//! and diversity-slope estimation.

mod config;
mod curve;
mod landscape;
mod slope;

pub use config::{ReceiverKind, SimConfig};
pub use curve::{precoder_for, rho_from_snr_db, run_curve, run_point, simulate_channel, CurvePoint, ErrorCurve, CURVE_HEADER};
pub use landscape::{landscape_sweep, write_landscape_csv, LandscapeRow, LANDSCAPE_HEADER};
pub use slope::diversity_slope;
