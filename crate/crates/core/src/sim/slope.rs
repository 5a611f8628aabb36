use super::curve::ErrorCurve;
use crate::error::{domain_err, Result};

/// Least-squares slope of `log10(cer)` against `snr_db / 10`, restricted to
/// the stretch of the curve between the levels `cer_high` and `cer_low`
/// (with interpolated endpoints). Returned as a positive decay rate in
/// decades per 10 dB. Points with zero errors are ignored.
pub fn diversity_slope(curve: &ErrorCurve, cer_low: f64, cer_high: f64) -> Result<f64> {
    if !(cer_low > 0.0 && cer_high > cer_low) {
        return Err(domain_err("need 0 < cer_low < cer_high"));
    }
    let pts: Vec<(f64, f64)> = curve
        .points
        .iter()
        .filter(|p| p.errors > 0 && p.cer > 0.0)
        .map(|p| (p.snr_db / 10.0, p.cer.log10()))
        .collect();
    let (lo, hi) = (cer_low.log10(), cer_high.log10());
    let mut sel: Vec<(f64, f64)> = Vec::new();
    for (i, &(x, y)) in pts.iter().enumerate() {
        if y <= hi && y >= lo {
            sel.push((x, y));
        }
        if let Some(&(x2, y2)) = pts.get(i + 1) {
            for level in [hi, lo] {
                let crosses = (y - level) * (y2 - level) < 0.0;
                if crosses {
                    let t = (level - y) / (y2 - y);
                    sel.push((x + t * (x2 - x), level));
                }
            }
        }
    }
    sel.sort_by(|a, b| a.0.total_cmp(&b.0));
    sel.dedup_by(|a, b| (a.0 - b.0).abs() < 1e-12);
    if sel.len() < 2 {
        return Err(domain_err("curve does not bracket the requested error-rate range"));
    }
    let m = sel.len() as f64;
    let mx = sel.iter().map(|p| p.0).sum::<f64>() / m;
    let my = sel.iter().map(|p| p.1).sum::<f64>() / m;
    let sxx: f64 = sel.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = sel.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(domain_err("selected points share one SNR value"));
    }
    Ok(-sxy / sxx)
}
