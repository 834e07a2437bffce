//! Link-level Monte Carlo simulation of full-rate collaborative diversity
//! on the uplink of an orthogonal CDMA system.
//!
//! Two co-channel users share one spreading code and are paired with two
//! decode-and-forward relays. Relays jointly detect both users by exhaustive
//! maximum-likelihood search, forward their own user's estimate on the same
//! code in a second access period, and the base station jointly detects the
//! pair from both periods. Non-cooperative and two-antenna Alamouti
//! baselines are provided for comparison.
//!
//! Module map:
//!
//! - [`sigproc`]: Walsh-Hadamard codes, spreading, despreading, chip-level
//!   superposition and fractional-chip delay.
//! - [`channel`]: Rayleigh gains for the group topology, AWGN, Eb/N0 accounting.
//! - [`detectors`]: hypothesis enumeration, ML joint detectors, baseline receivers.
//! - [`protocol`]: per-frame simulators for every scheme and the rate formula.
//! - [`harness`]: Monte Carlo BER engine, statistics, sweeps and CSV I/O.

pub mod channel;
pub mod detectors;
mod error;
pub mod harness;
pub mod protocol;
pub mod sigproc;

pub use error::{Error, Result};
pub use num_complex::Complex64;
