//! Exhaustive maximum-likelihood joint detectors and baseline receivers.
//!
//! The joint detectors search every co-channel symbol combination and pick
//! the one with the smallest squared Euclidean distance between the despread
//! observation(s) and the noiseless reconstruction. Ties resolve to the
//! lowest hypothesis index.

use num_complex::Complex64;

use crate::sigproc::SymbolAlphabet;
use crate::{Error, Result};

/// Metric gap below which the winner is flagged as tied with the runner-up.
pub const TIE_THRESHOLD: f64 = 1e-12;

/// All `M^L` symbol tuples in lexicographic order over the alphabet order.
#[derive(Debug, Clone, PartialEq)]
pub struct HypothesisSet {
    width: usize,
    symbols: Vec<Complex64>,
}

impl HypothesisSet {
    /// Number of hypotheses `Q`.
    pub fn len(&self) -> usize {
        self.symbols.len().checked_div(self.width).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Tuple length `L`.
    pub fn width(&self) -> usize {
        self.width
    }

    pub fn get(&self, index: usize) -> &[Complex64] {
        &self.symbols[index * self.width..(index + 1) * self.width]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[Complex64]> {
        self.symbols.chunks_exact(self.width.max(1))
    }
}

pub fn enumerate_hypotheses(alphabet: &SymbolAlphabet, width: usize) -> Result<HypothesisSet> {
    if width < 1 {
        return Err(Error::invalid("hypothesis width must be at least 1"));
    }
    let points = alphabet.points();
    let m = points.len();
    let q = m
        .checked_pow(width as u32)
        .ok_or_else(|| Error::invalid(format!("{m}^{width} hypotheses overflow")))?;
    let mut symbols = Vec::with_capacity(q * width);
    for idx in 0..q {
        // most significant digit first
        let mut rem = idx;
        let mut digits = vec![0; width];
        for d in digits.iter_mut().rev() {
            *d = rem % m;
            rem /= m;
        }
        symbols.extend(digits.into_iter().map(|d| points[d]));
    }
    Ok(HypothesisSet { width, symbols })
}

/// Arg-min outcome borrowing the winning tuple from its hypothesis set.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectionResult<'h> {
    pub index: usize,
    pub decided: &'h [Complex64],
    pub metric: f64,
    pub tie: bool,
}

#[inline]
fn reconstruct(tuple: &[Complex64], gains: &[Complex64]) -> Complex64 {
    tuple.iter().zip(gains).map(|(b, g)| b * g).sum()
}

fn argmin<'h>(
    hypotheses: &'h HypothesisSet,
    mut metric: impl FnMut(&[Complex64]) -> f64,
) -> Result<DetectionResult<'h>> {
    if hypotheses.is_empty() {
        return Err(Error::invalid("empty hypothesis set"));
    }
    let mut best = (0, f64::INFINITY);
    let mut runner_up = f64::INFINITY;
    for (q, tuple) in hypotheses.iter().enumerate() {
        let m = metric(tuple);
        if m < best.1 {
            runner_up = best.1;
            best = (q, m);
        } else if m < runner_up {
            runner_up = m;
        }
    }
    Ok(DetectionResult {
        index: best.0,
        decided: hypotheses.get(best.0),
        metric: best.1,
        tie: runner_up - best.1 < TIE_THRESHOLD,
    })
}

fn check_gains(gains: &[Complex64], hypotheses: &HypothesisSet) -> Result<()> {
    if gains.len() != hypotheses.width() {
        return Err(Error::invalid(format!(
            "{} gains for hypotheses of width {}",
            gains.len(),
            hypotheses.width()
        )));
    }
    Ok(())
}

/// Single-observation joint detector:
/// `argmin_q |z - a * sum_l b_q[l] * g[l]|^2`.
pub fn ml_joint_detect<'h>(
    z: Complex64,
    gains: &[Complex64],
    amplitude: f64,
    hypotheses: &'h HypothesisSet,
) -> Result<DetectionResult<'h>> {
    check_gains(gains, hypotheses)?;
    argmin(hypotheses, |t| {
        (z - reconstruct(t, gains) * amplitude).norm_sqr()
    })
}

/// Two-observation joint detector summing the squared distances of both
/// access periods.
pub fn ml_joint_detect_combined<'h>(
    z: Complex64,
    z_prime: Complex64,
    gains: &[Complex64],
    gains_prime: &[Complex64],
    amplitude: f64,
    hypotheses: &'h HypothesisSet,
) -> Result<DetectionResult<'h>> {
    check_gains(gains, hypotheses)?;
    check_gains(gains_prime, hypotheses)?;
    argmin(hypotheses, |t| {
        (z - reconstruct(t, gains) * amplitude).norm_sqr()
            + (z_prime - reconstruct(t, gains_prime) * amplitude).norm_sqr()
    })
}

/// Matched-filter BPSK decision.
#[inline]
pub fn coherent_bpsk_detect(z: Complex64, gain: Complex64) -> Complex64 {
    if (gain.conj() * z).re >= 0.0 {
        Complex64::new(1.0, 0.0)
    } else {
        Complex64::new(-1.0, 0.0)
    }
}

/// Alamouti linear combiner for
/// `r1 = h1 s1 + h2 s2 + n1`, `r2 = -h1 conj(s2) + h2 conj(s1) + n2`.
///
/// Noiseless, each output is `(|h1|^2 + |h2|^2) * s_i`.
#[inline]
pub fn alamouti_combine(
    r1: Complex64,
    r2: Complex64,
    h1: Complex64,
    h2: Complex64,
) -> (Complex64, Complex64) {
    (
        h1.conj() * r1 + h2 * r2.conj(),
        h2.conj() * r1 - h1 * r2.conj(),
    )
}
