//! Monte Carlo BER estimation, statistics, sweeps and result files.

mod config;
mod engine;
mod record;
mod stats;

pub use config::{parse_grid, parse_list, parse_max_bits, parse_mu, parse_sweep_config, SweepFile};
pub use engine::{
    derive_seed, run_ber_point, run_sweep, run_sweep_with_workers, MuSetting, StoppingRule,
    SweepPoint, SweepSpec, BATCH_FRAMES,
};
pub use record::{read_csv, to_csv_string, write_csv, BerRecord, CSV_HEADER};
pub use stats::{
    diversity_order_from_points, ebn0_at_ber, ebn0_gain_at_ber, estimate_diversity_order,
    normal_quantile, wilson_interval,
};
