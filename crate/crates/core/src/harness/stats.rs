//! Binomial confidence intervals and BER-curve readouts.

use statrs::distribution::{ContinuousCDF, Normal};

use super::BerRecord;
use crate::{Error, Result};

/// Two-sided standard normal quantile for the given confidence level.
pub fn normal_quantile(confidence: f64) -> Result<f64> {
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(Error::invalid(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )));
    }
    let std = Normal::standard();
    Ok(std.inverse_cdf(1.0 - (1.0 - confidence) / 2.0))
}

/// Wilson score interval for `errors` successes out of `bits` trials.
pub fn wilson_interval(errors: u64, bits: u64, confidence: f64) -> Result<(f64, f64)> {
    if bits == 0 || errors > bits {
        return Err(Error::invalid(format!(
            "invalid counts: {errors} errors out of {bits} bits"
        )));
    }
    let z = normal_quantile(confidence)?;
    let n = bits as f64;
    let p = errors as f64 / n;
    let z2n = z * z / n;
    let denom = 1.0 + z2n;
    let center = (p + z2n / 2.0) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2n / (4.0 * n)).sqrt();
    let low = if errors == 0 {
        0.0
    } else {
        (center - half).clamp(0.0, p)
    };
    let high = if errors == bits {
        1.0
    } else {
        (center + half).clamp(p, 1.0)
    };
    Ok((low, high))
}

/// Least-squares slope of `-log10(BER)` against `Eb/N0 / 10`.
pub fn diversity_order_from_points(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::not_estimable("need at least two BER points"));
    }
    if let Some(&(x, _)) = points.iter().find(|(_, ber)| ber.is_nan() || *ber <= 0.0) {
        return Err(Error::not_estimable(format!("zero BER at {x} dB")));
    }
    let n = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|(e, _)| e / 10.0).collect();
    let ys: Vec<f64> = points.iter().map(|(_, b)| -b.log10()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::not_estimable("Eb/N0 values must be distinct"));
    }
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    Ok(sxy / sxx)
}

pub fn estimate_diversity_order(records: &[BerRecord]) -> Result<f64> {
    let points: Vec<(f64, f64)> = records.iter().map(|r| (r.ebn0_db, r.ber)).collect();
    diversity_order_from_points(&points)
}

/// Eb/N0 at which a BER curve crosses `target`, interpolating linearly in
/// (dB, log10 BER). Uses the first crossing in increasing Eb/N0 order.
pub fn ebn0_at_ber(curve: &[(f64, f64)], target: f64) -> Result<f64> {
    if !(target > 0.0 && target < 1.0) {
        return Err(Error::invalid(format!(
            "target BER must lie in (0, 1), got {target}"
        )));
    }
    let mut pts: Vec<(f64, f64)> = curve.iter().copied().filter(|(_, b)| *b > 0.0).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let lt = target.log10();
    for w in pts.windows(2) {
        let ((x0, y0), (x1, y1)) = (w[0], w[1]);
        if y0 >= target && target >= y1 {
            if y0 == y1 {
                return Ok(x0);
            }
            let (l0, l1) = (y0.log10(), y1.log10());
            return Ok(x0 + (lt - l0) / (l1 - l0) * (x1 - x0));
        }
    }
    Err(Error::not_estimable(format!(
        "BER {target:e} is not bracketed by the curve"
    )))
}

/// Eb/N0 of `curve_b` minus Eb/N0 of `curve_a` at the target BER.
pub fn ebn0_gain_at_ber(
    curve_a: &[BerRecord],
    curve_b: &[BerRecord],
    target_ber: f64,
) -> Result<f64> {
    let pts = |c: &[BerRecord]| c.iter().map(|r| (r.ebn0_db, r.ber)).collect::<Vec<_>>();
    Ok(ebn0_at_ber(&pts(curve_b), target_ber)? - ebn0_at_ber(&pts(curve_a), target_ber)?)
}
