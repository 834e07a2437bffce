//! Spreading codes, symbol mapping and chip-rate waveform synthesis.

use num_complex::Complex64;

use crate::{Error, Result};

/// Set of `N` orthonormal real spreading codes: the rows of a Sylvester
/// Hadamard matrix scaled by `1/sqrt(N)`.
///
/// Group `k` uses row `k`; row 0 is the all-positive code.
#[derive(Debug, Clone, PartialEq)]
pub struct SpreadingCodeSet {
    order: usize,
    chips: Vec<f64>,
}

impl SpreadingCodeSet {
    /// Spreading factor `N` (chips per symbol, also the number of codes).
    pub fn order(&self) -> usize {
        self.order
    }

    pub fn code(&self, index: usize) -> Result<&[f64]> {
        if index >= self.order {
            return Err(Error::invalid(format!(
                "code index {index} out of range for order {}",
                self.order
            )));
        }
        Ok(&self.chips[index * self.order..(index + 1) * self.order])
    }

    pub fn codes(&self) -> impl Iterator<Item = &[f64]> {
        self.chips.chunks_exact(self.order)
    }
}

/// Builds the normalized Walsh-Hadamard code set of the given order by
/// Sylvester doubling.
pub fn generate_walsh_hadamard(order: usize) -> Result<SpreadingCodeSet> {
    if order == 0 || !order.is_power_of_two() {
        return Err(Error::invalid(format!(
            "Walsh-Hadamard order must be a power of two, got {order}"
        )));
    }
    let mut signs = vec![1i8];
    let mut n = 1;
    while n < order {
        let mut next = vec![0i8; 4 * n * n];
        for r in 0..n {
            for c in 0..n {
                let s = signs[r * n + c];
                next[r * 2 * n + c] = s;
                next[r * 2 * n + c + n] = s;
                next[(r + n) * 2 * n + c] = s;
                next[(r + n) * 2 * n + c + n] = -s;
            }
        }
        signs = next;
        n *= 2;
    }
    let scale = 1.0 / (order as f64).sqrt();
    Ok(SpreadingCodeSet {
        order,
        chips: signs.into_iter().map(|s| f64::from(s) * scale).collect(),
    })
}

/// One symbol period of complex chip-rate samples.
#[derive(Debug, Clone, PartialEq)]
pub struct ChipFrame {
    samples: Vec<Complex64>,
}

impl ChipFrame {
    pub fn new(samples: Vec<Complex64>) -> Self {
        ChipFrame { samples }
    }

    pub fn zeros(len: usize) -> Self {
        ChipFrame {
            samples: vec![Complex64::new(0.0, 0.0); len],
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [Complex64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }

    /// Multiplies every chip by a complex gain (flat fading).
    pub fn scaled(mut self, gain: Complex64) -> Self {
        for s in &mut self.samples {
            *s *= gain;
        }
        self
    }

    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|s| s.norm_sqr()).sum()
    }
}

/// Modulation constellation with unit average energy.
#[derive(Debug, Clone, PartialEq)]
pub struct SymbolAlphabet {
    points: Vec<Complex64>,
}

impl SymbolAlphabet {
    pub fn new(points: Vec<Complex64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::invalid("alphabet needs at least two points"));
        }
        let mean_energy = points.iter().map(|p| p.norm_sqr()).sum::<f64>() / points.len() as f64;
        if (mean_energy - 1.0).abs() > 1e-9 {
            return Err(Error::invalid(format!(
                "alphabet average energy must be 1, got {mean_energy}"
            )));
        }
        for (i, a) in points.iter().enumerate() {
            if points[i + 1..].iter().any(|b| (a - b).norm() < 1e-12) {
                return Err(Error::invalid("alphabet points must be distinct"));
            }
        }
        Ok(SymbolAlphabet { points })
    }

    /// BPSK in canonical order `(-1, +1)`.
    pub fn bpsk() -> Self {
        SymbolAlphabet {
            points: vec![Complex64::new(-1.0, 0.0), Complex64::new(1.0, 0.0)],
        }
    }

    /// QPSK on the diagonals, unit energy.
    pub fn qpsk() -> Self {
        let a = std::f64::consts::FRAC_1_SQRT_2;
        SymbolAlphabet {
            points: vec![
                Complex64::new(-a, -a),
                Complex64::new(-a, a),
                Complex64::new(a, -a),
                Complex64::new(a, a),
            ],
        }
    }

    pub fn cardinality(&self) -> usize {
        self.points.len()
    }

    pub fn points(&self) -> &[Complex64] {
        &self.points
    }

    pub fn is_bpsk(&self) -> bool {
        *self == Self::bpsk()
    }
}

/// `amplitude * symbol * c_k`, one chip per entry.
pub fn spread(
    symbol: Complex64,
    amplitude: f64,
    codes: &SpreadingCodeSet,
    code_index: usize,
) -> Result<ChipFrame> {
    let code = codes.code(code_index)?;
    let s = symbol * amplitude;
    Ok(ChipFrame::new(code.iter().map(|&c| s * c).collect()))
}

/// Correlates a frame with code `k`. Codes are real, so no conjugation.
pub fn despread(
    frame: &ChipFrame,
    codes: &SpreadingCodeSet,
    code_index: usize,
) -> Result<Complex64> {
    let code = codes.code(code_index)?;
    if frame.len() != code.len() {
        return Err(Error::invalid(format!(
            "frame length {} does not match code length {}",
            frame.len(),
            code.len()
        )));
    }
    Ok(frame
        .samples
        .iter()
        .zip(code)
        .fold(Complex64::new(0.0, 0.0), |acc, (s, &c)| acc + s * c))
}

/// Shifts a rectangular-chip waveform by `tau` chips and resamples it at the
/// chip instants.
///
/// With `tau = n + f`, `n = floor(tau)`, the output is
/// `out[j] = (1 - f) * in[j - n] + f * in[j - n - 1]`, indices outside the
/// frame contributing zero.
pub fn apply_fractional_delay(frame: &ChipFrame, tau: f64) -> Result<ChipFrame> {
    let len = frame.len();
    if !tau.is_finite() || tau.abs() >= len as f64 {
        return Err(Error::invalid(format!(
            "delay {tau} chips out of range for frame of {len} chips"
        )));
    }
    if tau == 0.0 {
        return Ok(frame.clone());
    }
    let whole = tau.floor();
    let frac = tau - whole;
    let shift = whole as isize;
    let at = |i: isize| -> Complex64 {
        if i >= 0 && (i as usize) < len {
            frame.samples[i as usize]
        } else {
            Complex64::new(0.0, 0.0)
        }
    };
    let samples = (0..len as isize)
        .map(|j| {
            let main = at(j - shift);
            if frac == 0.0 {
                main
            } else {
                main * (1.0 - frac) + at(j - shift - 1) * frac
            }
        })
        .collect();
    Ok(ChipFrame::new(samples))
}

/// Sums chip frames after delaying each by its own offset in chips.
/// Components with zero delay are added unmodified.
pub fn compose_multiuser_chip_signal(components: &[(ChipFrame, f64)]) -> Result<ChipFrame> {
    let Some((first, _)) = components.first() else {
        return Err(Error::invalid("no components to compose"));
    };
    let len = first.len();
    let mut out = ChipFrame::zeros(len);
    for (frame, tau) in components {
        if frame.len() != len {
            return Err(Error::invalid(format!(
                "component length {} does not match {len}",
                frame.len()
            )));
        }
        let delayed;
        let src = if *tau == 0.0 {
            frame
        } else {
            delayed = apply_fractional_delay(frame, *tau)?;
            &delayed
        };
        for (o, s) in out.samples.iter_mut().zip(&src.samples) {
            *o += s;
        }
    }
    Ok(out)
}
