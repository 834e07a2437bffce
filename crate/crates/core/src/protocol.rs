//! Per-frame link simulators for the collaborative scheme and its baselines.
//!
//! A frame of the collaborative scheme covers both access periods of one
//! group (code 0):
//!
//! | period | users 1, 2 | relays 1, 2          | base station        |
//! |--------|------------|----------------------|---------------------|
//! | 1      | send b1, b2 | receive, detect     | receive b1 + b2     |
//! | 2      | idle       | forward b1', b2'     | receive b1' + b2'   |
//!
//! Despread-domain noise is drawn directly as a complex Gaussian scalar:
//! projecting white chip noise onto a unit-norm code yields exactly that
//! distribution, and it avoids `N` draws per observation.

use std::fmt;
use std::str::FromStr;

use arrayvec::ArrayVec;
use num_complex::Complex64;
use num_rational::Ratio;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::{
    complex_gaussian, noise_variance_from_ebn0, GroupChannelSampler, NoiseModel, PowerProfile,
};
use crate::detectors::{
    alamouti_combine, coherent_bpsk_detect, enumerate_hypotheses, ml_joint_detect,
    ml_joint_detect_combined, HypothesisSet,
};
use crate::sigproc::{
    compose_multiuser_chip_signal, despread, generate_walsh_hadamard, spread, ChipFrame,
    SpreadingCodeSet, SymbolAlphabet,
};
use crate::{Error, Result};

/// Code index of the group whose symbols are reported.
pub const OBSERVED_GROUP: usize = 0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Proposed,
    ProposedGenie,
    NonCoop,
    Alamouti,
}

impl Scheme {
    pub const ALL: [Scheme; 4] = [
        Scheme::Proposed,
        Scheme::ProposedGenie,
        Scheme::NonCoop,
        Scheme::Alamouti,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Scheme::Proposed => "proposed",
            Scheme::ProposedGenie => "proposed-genie",
            Scheme::NonCoop => "noncoop",
            Scheme::Alamouti => "alamouti",
        }
    }

    /// Stable numeric tag used in seed derivation.
    pub fn tag(self) -> u64 {
        match self {
            Scheme::Proposed => 1,
            Scheme::ProposedGenie => 2,
            Scheme::NonCoop => 3,
            Scheme::Alamouti => 4,
        }
    }

    pub fn is_cooperative(self) -> bool {
        matches!(self, Scheme::Proposed | Scheme::ProposedGenie)
    }

    /// Information bits delivered per simulated frame.
    pub fn bits_per_frame(self) -> u64 {
        match self {
            Scheme::NonCoop => 1,
            _ => 2,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('_', "-").as_str() {
            "proposed" => Ok(Scheme::Proposed),
            "proposed-genie" | "genie" => Ok(Scheme::ProposedGenie),
            "noncoop" | "non-coop" => Ok(Scheme::NonCoop),
            "alamouti" => Ok(Scheme::Alamouti),
            other => Err(Error::invalid(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Number of active groups sharing the code set.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupLoading {
    /// Only the observed group transmits.
    Single,
    /// Fully loaded: one group per code.
    Full,
}

impl FromStr for GroupLoading {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "1" | "single" => Ok(GroupLoading::Single),
            "full" => Ok(GroupLoading::Full),
            other => Err(Error::invalid(format!(
                "groups must be 1 or 'full', got '{other}'"
            ))),
        }
    }
}

impl fmt::Display for GroupLoading {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroupLoading::Single => f.write_str("1"),
            GroupLoading::Full => f.write_str("full"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub users_per_group: usize,
    pub spreading: usize,
    pub loading: GroupLoading,
    pub profile: PowerProfile,
    /// Std. deviation of the second-period relay timing offset, in chips.
    pub timing_sigma: f64,
    pub alphabet: SymbolAlphabet,
}

impl SchemeConfig {
    /// Two users per group, N = 16, single group, perfect sync, BPSK.
    pub fn new(scheme: Scheme) -> Self {
        SchemeConfig {
            scheme,
            users_per_group: 2,
            spreading: 16,
            loading: GroupLoading::Single,
            profile: PowerProfile::default(),
            timing_sigma: 0.0,
            alphabet: SymbolAlphabet::bpsk(),
        }
    }

    pub fn with_profile(mut self, profile: PowerProfile) -> Self {
        self.profile = profile;
        self
    }

    pub fn with_timing_sigma(mut self, sigma: f64) -> Self {
        self.timing_sigma = sigma;
        self
    }

    pub fn with_loading(mut self, loading: GroupLoading) -> Self {
        self.loading = loading;
        self
    }

    pub fn active_groups(&self) -> usize {
        match self.loading {
            GroupLoading::Single => 1,
            GroupLoading::Full => self.spreading,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.users_per_group != 2 {
            return Err(Error::invalid(format!(
                "only two users per group are supported, got {}",
                self.users_per_group
            )));
        }
        if self.spreading == 0 || !self.spreading.is_power_of_two() {
            return Err(Error::invalid(format!(
                "spreading factor must be a power of two, got {}",
                self.spreading
            )));
        }
        if !(self.timing_sigma.is_finite() && self.timing_sigma >= 0.0) {
            return Err(Error::invalid(format!(
                "timing sigma must be finite and nonnegative, got {}",
                self.timing_sigma
            )));
        }
        if !self.alphabet.is_bpsk() {
            return Err(Error::invalid(
                "only BPSK is supported by the frame simulators",
            ));
        }
        self.profile.validate()
    }
}

/// Transmit amplitude per terminal and resulting energy spent per bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyModel {
    pub energy_per_bit: f64,
    pub per_period_amplitude: f64,
}

impl EnergyModel {
    pub fn for_config(config: &SchemeConfig) -> Self {
        match config.scheme {
            Scheme::Proposed | Scheme::ProposedGenie => {
                // source in period 1 plus its relay in period 2
                let p = config.profile.per_terminal_power;
                EnergyModel {
                    energy_per_bit: 2.0 * p,
                    per_period_amplitude: p.sqrt(),
                }
            }
            Scheme::NonCoop => EnergyModel {
                energy_per_bit: 1.0,
                per_period_amplitude: 1.0,
            },
            Scheme::Alamouti => EnergyModel {
                // two antennas at 1/2 each, two periods, two symbols
                energy_per_bit: 1.0,
                per_period_amplitude: 0.5f64.sqrt(),
            },
        }
    }
}

pub type Symbols = ArrayVec<Complex64, 2>;

/// Symbols and error counts of one simulated frame.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameResult {
    pub tx: Symbols,
    /// Forwarded relay decisions; empty for non-cooperative schemes.
    pub relay: Symbols,
    pub rx: Symbols,
    pub relay_errors: u32,
    pub errors: u32,
}

fn count_mismatches(a: &[Complex64], b: &[Complex64]) -> u32 {
    a.iter().zip(b).filter(|(x, y)| x != y).count() as u32
}

/// A configured link at a fixed Eb/N0, reusable across frames.
#[derive(Debug, Clone)]
pub struct Link {
    config: SchemeConfig,
    codes: SpreadingCodeSet,
    hypotheses: HypothesisSet,
    sampler: GroupChannelSampler,
    noise: NoiseModel,
    energy: EnergyModel,
}

impl Link {
    pub fn new(config: SchemeConfig, ebn0_db: f64) -> Result<Self> {
        config.validate()?;
        let energy = EnergyModel::for_config(&config);
        Ok(Link {
            codes: generate_walsh_hadamard(config.spreading)?,
            hypotheses: enumerate_hypotheses(&config.alphabet, config.users_per_group)?,
            sampler: GroupChannelSampler::new(&config.profile)?,
            noise: noise_variance_from_ebn0(ebn0_db, energy.energy_per_bit)?,
            energy,
            config,
        })
    }

    pub fn config(&self) -> &SchemeConfig {
        &self.config
    }

    pub fn noise(&self) -> NoiseModel {
        self.noise
    }

    pub fn energy(&self) -> EnergyModel {
        self.energy
    }

    pub fn bits_per_frame(&self) -> u64 {
        self.config.scheme.bits_per_frame()
    }

    pub fn simulate_frame<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FrameResult> {
        match self.config.scheme {
            Scheme::Proposed => self.collaborative(rng, false, false),
            Scheme::ProposedGenie => self.collaborative(rng, true, false),
            Scheme::NonCoop => self.noncoop(rng),
            Scheme::Alamouti => self.alamouti(rng),
        }
    }

    fn random_symbol<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let points = self.config.alphabet.points();
        points[rng.random_range(0..points.len())]
    }

    fn emit(&self, symbol: Complex64, gain: Complex64) -> Emission {
        Emission {
            symbol,
            gain,
            code: OBSERVED_GROUP,
            delay: 0.0,
        }
    }

    /// Despread output on the observed code plus despread-domain noise.
    ///
    /// A synchronous superposition on the observed code despreads to exactly
    /// `a * sum(g * b)` because the codes are orthonormal, so that case skips
    /// chip synthesis. Anything delayed or on another code goes through the
    /// chip-level path.
    fn observe(&self, emissions: &[Emission], noise: Complex64) -> Result<Complex64> {
        let synchronous = emissions
            .iter()
            .all(|e| e.delay == 0.0 && e.code == OBSERVED_GROUP);
        if synchronous {
            let sum: Complex64 = emissions.iter().map(|e| e.symbol * e.gain).sum();
            Ok(sum * self.energy.per_period_amplitude + noise)
        } else {
            Ok(self.observe_chips(emissions)? + noise)
        }
    }

    fn observe_chips(&self, emissions: &[Emission]) -> Result<Complex64> {
        let a = self.energy.per_period_amplitude;
        let components = emissions
            .iter()
            .map(|e| {
                Ok((
                    spread(e.symbol, a, &self.codes, e.code)?.scaled(e.gain),
                    e.delay,
                ))
            })
            .collect::<Result<Vec<(ChipFrame, f64)>>>()?;
        let rx = compose_multiuser_chip_signal(&components)?;
        despread(&rx, &self.codes, OBSERVED_GROUP)
    }

    fn timing_offset<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let x: f64 = rng.sample(StandardNormal);
        (x * self.config.timing_sigma).abs()
    }

    /// `force_composite` engages the all-groups period-2 superposition even
    /// under perfect synchronization; used to check orthogonality.
    pub(crate) fn collaborative<R: Rng + ?Sized>(
        &self,
        rng: &mut R,
        genie: bool,
        force_composite: bool,
    ) -> Result<FrameResult> {
        let a = self.energy.per_period_amplitude;
        let ch = self.sampler.draw(rng);
        let tx: Symbols = (0..2).map(|_| self.random_symbol(rng)).collect();
        let relay_noise = [self.noise.sample(rng), self.noise.sample(rng)];
        let bs_noise = [self.noise.sample(rng), self.noise.sample(rng)];

        // period 1: relays
        let mut relay = Symbols::new();
        for (l, gains) in ch.user_to_relay.iter().enumerate() {
            let z = self.observe(
                &[self.emit(tx[0], gains[0]), self.emit(tx[1], gains[1])],
                relay_noise[l],
            )?;
            if genie {
                relay.push(tx[l]);
            } else {
                let d = ml_joint_detect(z, gains, a, &self.hypotheses)?;
                relay.push(d.decided[l]);
            }
        }

        // period 1: base station
        let z = self.observe(
            &[
                self.emit(tx[0], ch.uplink_p1[0]),
                self.emit(tx[1], ch.uplink_p1[1]),
            ],
            bs_noise[0],
        )?;

        // period 2: relays forward, possibly misaligned
        let timing = self.config.timing_sigma > 0.0;
        let mut forwarded = [
            self.emit(relay[0], ch.uplink_p2[0]),
            self.emit(relay[1], ch.uplink_p2[1]),
        ];
        if timing {
            for e in &mut forwarded {
                e.delay = self.timing_offset(rng);
            }
        }
        let z_prime = if self.config.loading == GroupLoading::Full && (timing || force_composite) {
            let var = self.config.profile.uplink_variance;
            let mut all = forwarded.to_vec();
            for code in (0..self.config.spreading).filter(|&u| u != OBSERVED_GROUP) {
                for _ in 0..2 {
                    let symbol = self.random_symbol(rng);
                    let gain = complex_gaussian(rng, var);
                    let delay = if timing { self.timing_offset(rng) } else { 0.0 };
                    all.push(Emission {
                        symbol,
                        gain,
                        code,
                        delay,
                    });
                }
            }
            self.observe(&all, bs_noise[1])?
        } else {
            self.observe(&forwarded, bs_noise[1])?
        };

        let d = ml_joint_detect_combined(
            z,
            z_prime,
            &ch.uplink_p1,
            &ch.uplink_p2,
            a,
            &self.hypotheses,
        )?;
        let rx: Symbols = d.decided.iter().copied().collect();
        Ok(FrameResult {
            relay_errors: count_mismatches(&relay, &tx),
            errors: count_mismatches(&rx, &tx),
            tx,
            relay,
            rx,
        })
    }

    fn noncoop<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FrameResult> {
        let g = complex_gaussian(rng, self.config.profile.uplink_variance);
        let b = self.random_symbol(rng);
        let z = self.observe(&[self.emit(b, g)], self.noise.sample(rng))?;
        let tx: Symbols = [b].into_iter().collect();
        let rx: Symbols = [coherent_bpsk_detect(z, g)].into_iter().collect();
        Ok(FrameResult {
            errors: count_mismatches(&rx, &tx),
            tx,
            relay: Symbols::new(),
            rx,
            relay_errors: 0,
        })
    }

    fn alamouti<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<FrameResult> {
        let var = self.config.profile.uplink_variance;
        let h1 = complex_gaussian(rng, var);
        let h2 = complex_gaussian(rng, var);
        let s1 = self.random_symbol(rng);
        let s2 = self.random_symbol(rng);
        let r1 = self.observe(
            &[self.emit(s1, h1), self.emit(s2, h2)],
            self.noise.sample(rng),
        )?;
        let r2 = self.observe(
            &[self.emit(-s2.conj(), h1), self.emit(s1.conj(), h2)],
            self.noise.sample(rng),
        )?;
        let (y1, y2) = alamouti_combine(r1, r2, h1, h2);
        let one = Complex64::new(1.0, 0.0);
        let tx: Symbols = [s1, s2].into_iter().collect();
        let rx: Symbols = [coherent_bpsk_detect(y1, one), coherent_bpsk_detect(y2, one)]
            .into_iter()
            .collect();
        Ok(FrameResult {
            errors: count_mismatches(&rx, &tx),
            tx,
            relay: Symbols::new(),
            rx,
            relay_errors: 0,
        })
    }
}

/// One terminal's transmission as seen by a receiver.
#[derive(Debug, Clone, Copy)]
struct Emission {
    symbol: Complex64,
    gain: Complex64,
    code: usize,
    /// Misalignment in chips.
    delay: f64,
}

fn simulate_checked<R: Rng + ?Sized>(
    config: &SchemeConfig,
    ebn0_db: f64,
    rng: &mut R,
    allowed: &[Scheme],
) -> Result<FrameResult> {
    if !allowed.contains(&config.scheme) {
        return Err(Error::invalid(format!(
            "scheme {} not handled by this simulator",
            config.scheme
        )));
    }
    Link::new(config.clone(), ebn0_db)?.simulate_frame(rng)
}

/// One two-period frame of the collaborative scheme (or its genie-relay variant).
pub fn simulate_frame_proposed<R: Rng + ?Sized>(
    config: &SchemeConfig,
    ebn0_db: f64,
    rng: &mut R,
) -> Result<FrameResult> {
    simulate_checked(
        config,
        ebn0_db,
        rng,
        &[Scheme::Proposed, Scheme::ProposedGenie],
    )
}

pub fn simulate_frame_noncoop<R: Rng + ?Sized>(
    config: &SchemeConfig,
    ebn0_db: f64,
    rng: &mut R,
) -> Result<FrameResult> {
    simulate_checked(config, ebn0_db, rng, &[Scheme::NonCoop])
}

pub fn simulate_frame_alamouti<R: Rng + ?Sized>(
    config: &SchemeConfig,
    ebn0_db: f64,
    rng: &mut R,
) -> Result<FrameResult> {
    simulate_checked(config, ebn0_db, rng, &[Scheme::Alamouti])
}

/// Rate relative to non-cooperative orthogonal CDMA: `K / (N * T_co/T_nc)`.
pub fn rate_efficiency(users: u64, spreading: u64, period_ratio: Ratio<u64>) -> Result<Ratio<u64>> {
    if users == 0 || spreading == 0 || *period_ratio.numer() == 0 {
        return Err(Error::invalid("rate efficiency inputs must be positive"));
    }
    Ok(Ratio::from_integer(users) / (period_ratio * spreading))
}
