//! Fading gains for the two-user group topology, AWGN, and Eb/N0 accounting.
//!
//! All gains are circularly-symmetric complex Gaussian (Rayleigh envelope),
//! constant over one access period and independent across periods and
//! frames.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::sigproc::ChipFrame;
use crate::{Error, Result};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Link power ratios and per-terminal transmit power of a group.
///
/// `beta_db` is the user-to-own-relay link power relative to the uplink;
/// `mu_db` is the own-user-to-relay power relative to the co-channel
/// user-to-relay power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerProfile {
    pub uplink_variance: f64,
    pub beta_db: f64,
    pub mu_db: f64,
    pub per_terminal_power: f64,
}

impl Default for PowerProfile {
    fn default() -> Self {
        PowerProfile {
            uplink_variance: 1.0,
            beta_db: 0.0,
            mu_db: 0.0,
            per_terminal_power: 0.5,
        }
    }
}

impl PowerProfile {
    /// Profile with `mu = beta`, unit uplink variance and power split by two.
    pub fn with_beta(beta_db: f64) -> Self {
        PowerProfile {
            beta_db,
            mu_db: beta_db,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !ok(self.uplink_variance) {
            return Err(Error::invalid(format!(
                "uplink variance must be positive, got {}",
                self.uplink_variance
            )));
        }
        if !ok(self.per_terminal_power) {
            return Err(Error::invalid(format!(
                "per-terminal power must be positive, got {}",
                self.per_terminal_power
            )));
        }
        if !ok(db_to_linear(self.beta_db)) || !ok(db_to_linear(self.mu_db)) {
            return Err(Error::invalid(format!(
                "beta {} dB / mu {} dB out of representable range",
                self.beta_db, self.mu_db
            )));
        }
        Ok(())
    }

    pub fn own_relay_variance(&self) -> f64 {
        db_to_linear(self.beta_db) * self.uplink_variance
    }

    pub fn cross_relay_variance(&self) -> f64 {
        db_to_linear(self.beta_db - self.mu_db) * self.uplink_variance
    }
}

/// Every fading gain of one group for one frame.
///
/// `user_to_relay[l][i]` is the gain from user `i` to relay `l`; the
/// diagonal holds the own-user links.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GroupChannelState {
    pub uplink_p1: [Complex64; 2],
    pub uplink_p2: [Complex64; 2],
    pub user_to_relay: [[Complex64; 2]; 2],
}

/// Circularly-symmetric complex Gaussian sample with `E|g|^2 = variance`.
pub fn draw_rayleigh_gain<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Result<Complex64> {
    if !(variance.is_finite() && variance >= 0.0) {
        return Err(Error::invalid(format!(
            "variance must be nonnegative, got {variance}"
        )));
    }
    Ok(complex_gaussian(rng, variance))
}

#[inline]
pub(crate) fn complex_gaussian<R: Rng + ?Sized>(rng: &mut R, variance: f64) -> Complex64 {
    let s = (0.5 * variance).sqrt();
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re * s, im * s)
}

/// Pre-validated sampler for [`GroupChannelState`].
#[derive(Debug, Clone, Copy)]
pub struct GroupChannelSampler {
    uplink: f64,
    own: f64,
    cross: f64,
}

impl GroupChannelSampler {
    pub fn new(profile: &PowerProfile) -> Result<Self> {
        profile.validate()?;
        Ok(GroupChannelSampler {
            uplink: profile.uplink_variance,
            own: profile.own_relay_variance(),
            cross: profile.cross_relay_variance(),
        })
    }

    /// Draw order: period-1 uplinks, period-2 uplinks, relay 1 row, relay 2 row.
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> GroupChannelState {
        let uplink_p1 = [
            complex_gaussian(rng, self.uplink),
            complex_gaussian(rng, self.uplink),
        ];
        let uplink_p2 = [
            complex_gaussian(rng, self.uplink),
            complex_gaussian(rng, self.uplink),
        ];
        let r1 = [
            complex_gaussian(rng, self.own),
            complex_gaussian(rng, self.cross),
        ];
        let r2 = [
            complex_gaussian(rng, self.cross),
            complex_gaussian(rng, self.own),
        ];
        GroupChannelState {
            uplink_p1,
            uplink_p2,
            user_to_relay: [r1, r2],
        }
    }
}

pub fn draw_group_channels<R: Rng + ?Sized>(
    rng: &mut R,
    profile: &PowerProfile,
) -> Result<GroupChannelState> {
    Ok(GroupChannelSampler::new(profile)?.draw(rng))
}

/// Complex AWGN with variance `n0` per sample. Codes are unit-norm, so the
/// despread output of white chip noise has the same variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseModel {
    n0: f64,
}

impl NoiseModel {
    pub fn new(n0: f64) -> Result<Self> {
        if !(n0.is_finite() && n0 >= 0.0) {
            return Err(Error::invalid(format!(
                "noise variance must be nonnegative, got {n0}"
            )));
        }
        Ok(NoiseModel { n0 })
    }

    pub fn n0(&self) -> f64 {
        self.n0
    }

    #[inline]
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        complex_gaussian(rng, self.n0)
    }
}

/// Signals that AWGN can be added to.
pub trait AwgnTarget {
    fn add_noise<R: Rng + ?Sized>(self, noise: &NoiseModel, rng: &mut R) -> Self;
}

impl AwgnTarget for Complex64 {
    fn add_noise<R: Rng + ?Sized>(self, noise: &NoiseModel, rng: &mut R) -> Self {
        self + noise.sample(rng)
    }
}

impl AwgnTarget for ChipFrame {
    fn add_noise<R: Rng + ?Sized>(mut self, noise: &NoiseModel, rng: &mut R) -> Self {
        for s in self.samples_mut() {
            *s += noise.sample(rng);
        }
        self
    }
}

pub fn add_awgn<S: AwgnTarget, R: Rng + ?Sized>(signal: S, noise: &NoiseModel, rng: &mut R) -> S {
    signal.add_noise(noise, rng)
}

/// `n0 = Eb / 10^(ebn0_db / 10)`. An infinite Eb/N0 gives a noiseless channel.
pub fn noise_variance_from_ebn0(ebn0_db: f64, energy_per_bit: f64) -> Result<NoiseModel> {
    if !(energy_per_bit.is_finite() && energy_per_bit > 0.0) {
        return Err(Error::invalid(format!(
            "energy per bit must be positive, got {energy_per_bit}"
        )));
    }
    if ebn0_db.is_nan() {
        return Err(Error::invalid("Eb/N0 is NaN"));
    }
    NoiseModel::new(energy_per_bit / db_to_linear(ebn0_db))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const DRAWS: usize = 100_000;

    fn mean_power(xs: &[Complex64]) -> f64 {
        xs.iter().map(|x| x.norm_sqr()).sum::<f64>() / xs.len() as f64
    }

    #[test]
    fn zero_variance_gain_is_zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        assert_eq!(
            draw_rayleigh_gain(&mut rng, 0.0).unwrap(),
            Complex64::new(0.0, 0.0)
        );
        assert!(draw_rayleigh_gain(&mut rng, -1.0).is_err());
        assert!(draw_rayleigh_gain(&mut rng, f64::NAN).is_err());
    }

    #[test]
    fn unit_gain_power() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let g: Vec<_> = (0..DRAWS)
            .map(|_| draw_rayleigh_gain(&mut rng, 1.0).unwrap())
            .collect();
        let p = mean_power(&g);
        assert!((0.98..=1.02).contains(&p), "{p}");
        // real and imaginary parts each carry half
        let re = g.iter().map(|x| x.re * x.re).sum::<f64>() / DRAWS as f64;
        assert!((re - 0.5).abs() < 0.015, "{re}");
    }

    #[test]
    fn gains_are_deterministic_per_seed() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..8)
                .map(|_| draw_rayleigh_gain(&mut rng, 2.0).unwrap())
                .collect::<Vec<_>>()
        };
        assert_eq!(draw(7), draw(7));
        assert_ne!(draw(7), draw(8));

        let profile = PowerProfile::with_beta(10.0);
        let a = draw_group_channels(&mut ChaCha8Rng::seed_from_u64(3), &profile).unwrap();
        let b = draw_group_channels(&mut ChaCha8Rng::seed_from_u64(3), &profile).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn group_link_variances() {
        let profile = PowerProfile::with_beta(10.0);
        let sampler = GroupChannelSampler::new(&profile).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let states: Vec<_> = (0..DRAWS).map(|_| sampler.draw(&mut rng)).collect();

        type Pick = Box<dyn Fn(&GroupChannelState) -> Complex64>;
        let classes: [(&str, Pick, f64); 8] = [
            ("g1", Box::new(|s| s.uplink_p1[0]), 1.0),
            ("g2", Box::new(|s| s.uplink_p1[1]), 1.0),
            ("g1'", Box::new(|s| s.uplink_p2[0]), 1.0),
            ("g2'", Box::new(|s| s.uplink_p2[1]), 1.0),
            ("own1", Box::new(|s| s.user_to_relay[0][0]), 10.0),
            ("own2", Box::new(|s| s.user_to_relay[1][1]), 10.0),
            ("cross12", Box::new(|s| s.user_to_relay[0][1]), 1.0),
            ("cross21", Box::new(|s| s.user_to_relay[1][0]), 1.0),
        ];
        let series: Vec<Vec<Complex64>> = classes
            .iter()
            .map(|(_, f, _)| states.iter().map(f).collect())
            .collect();
        for ((name, _, var), xs) in classes.iter().zip(&series) {
            let p = mean_power(xs);
            assert!((p / var - 1.0).abs() < 0.03, "{name}: {p} vs {var}");
        }
        // pairwise normalized cross-correlation
        let bound = 3.0 / (DRAWS as f64).sqrt();
        for i in 0..series.len() {
            for j in i + 1..series.len() {
                let (a, b) = (&series[i], &series[j]);
                let num: Complex64 = a.iter().zip(b).map(|(x, y)| x * y.conj()).sum();
                let den = (mean_power(a) * mean_power(b)).sqrt() * DRAWS as f64;
                let rho = num.norm() / den;
                assert!(rho < bound, "{} vs {}: {rho}", classes[i].0, classes[j].0);
            }
        }
    }

    #[test]
    fn equal_beta_mu_makes_cross_equal_uplink() {
        for beta in [0.0, 10.0, 30.0, 300.0] {
            let p = PowerProfile {
                uplink_variance: 2.5,
                ..PowerProfile::with_beta(beta)
            };
            assert_eq!(p.cross_relay_variance(), p.uplink_variance);
        }
    }

    #[test]
    fn profile_validation() {
        assert!(PowerProfile::default().validate().is_ok());
        let bad = [
            PowerProfile {
                uplink_variance: 0.0,
                ..Default::default()
            },
            PowerProfile {
                per_terminal_power: -1.0,
                ..Default::default()
            },
            PowerProfile {
                beta_db: f64::NAN,
                ..Default::default()
            },
            PowerProfile {
                mu_db: 4000.0,
                ..Default::default()
            },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn noiseless_awgn_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let quiet = NoiseModel::new(0.0).unwrap();
        let x = Complex64::new(0.25, -3.0);
        assert_eq!(add_awgn(x, &quiet, &mut rng), x);
        let f = ChipFrame::new(vec![x; 4]);
        assert_eq!(add_awgn(f.clone(), &quiet, &mut rng), f);
    }

    #[test]
    fn awgn_scalar_variance() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let noise = NoiseModel::new(1.0).unwrap();
        let xs: Vec<_> = (0..DRAWS)
            .map(|_| add_awgn(Complex64::new(0.0, 0.0), &noise, &mut rng))
            .collect();
        let v = mean_power(&xs);
        assert!((0.97..=1.03).contains(&v), "{v}");
    }

    #[test]
    fn despread_chip_noise_matches_scalar_noise() {
        use crate::sigproc::{despread, generate_walsh_hadamard};
        let codes = generate_walsh_hadamard(16).unwrap();
        let noise = NoiseModel::new(0.7).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let n = 20_000;
        let zs: Vec<_> = (0..n)
            .map(|_| {
                let f = add_awgn(ChipFrame::zeros(16), &noise, &mut rng);
                despread(&f, &codes, 5).unwrap()
            })
            .collect();
        let v = mean_power(&zs);
        assert!((v / 0.7 - 1.0).abs() < 0.05, "{v}");
        let pseudo: Complex64 = zs.iter().map(|z| z * z).sum::<Complex64>() / n as f64;
        assert!(pseudo.norm() < 0.05, "not circular: {pseudo}");
    }

    #[test]
    fn ebn0_calibration() {
        assert!((noise_variance_from_ebn0(0.0, 1.0).unwrap().n0() - 1.0).abs() < 1e-15);
        assert!((noise_variance_from_ebn0(10.0, 1.0).unwrap().n0() - 0.1).abs() < 1e-15);
        assert!((noise_variance_from_ebn0(3.0, 1.0).unwrap().n0() - 0.501187).abs() < 1e-6);
        assert_eq!(
            noise_variance_from_ebn0(f64::INFINITY, 1.0).unwrap().n0(),
            0.0
        );
        assert!(noise_variance_from_ebn0(0.0, 0.0).is_err());
        assert!(noise_variance_from_ebn0(f64::NAN, 1.0).is_err());
    }
}
