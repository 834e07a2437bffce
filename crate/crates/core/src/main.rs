use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use coopcdma::harness::{
    ebn0_gain_at_ber, estimate_diversity_order, parse_grid, parse_max_bits, parse_mu,
    parse_sweep_config, read_csv, run_sweep, run_sweep_with_workers, write_csv, BerRecord,
    StoppingRule, SweepSpec,
};
use coopcdma::protocol::{GroupLoading, Scheme, SchemeConfig};
use coopcdma::{Error, Result};

#[derive(Parser)]
#[command(
    name = "coopcdma",
    version,
    about = "Collaborative-diversity CDMA link simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure one BER curve over an Eb/N0 grid.
    Simulate(SimulateArgs),
    /// Run a sweep described by a configuration file.
    Sweep(SweepArgs),
    /// Read values off measured curves.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    scheme: Scheme,
    /// `start:step:stop` or comma list, dB.
    #[arg(long)]
    ebn0: String,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    beta_db: f64,
    /// A value in dB, or `beta` to track beta.
    #[arg(long, default_value = "beta")]
    mu_db: String,
    #[arg(long, default_value_t = 16)]
    spreading: usize,
    /// `1` or `full`.
    #[arg(long, default_value = "1")]
    groups: GroupLoading,
    #[arg(long, default_value_t = 0.0)]
    timing_sigma: f64,
    #[arg(long, default_value_t = 200)]
    min_errors: u64,
    #[arg(long, default_value = "20000000")]
    max_bits: String,
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// CSV destination; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; all cores when absent.
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the `out` key of the configuration.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Eb/N0 of curve B minus Eb/N0 of curve A at a target BER.
    Gain {
        #[arg(long = "in")]
        input: PathBuf,
        /// Curve selector `scheme[:beta_db[:timing_sigma]]`.
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: String,
        #[arg(long, default_value_t = 1e-3)]
        target: f64,
    },
    /// Diversity order from the slope of one curve.
    Diversity {
        #[arg(long = "in")]
        input: PathBuf,
        /// Curve selector `scheme[:beta_db[:timing_sigma]]`.
        #[arg(long)]
        curve: String,
        /// Lowest Eb/N0 (dB) included in the fit.
        #[arg(long, allow_negative_numbers = true)]
        from: Option<f64>,
        /// Highest Eb/N0 (dB) included in the fit.
        #[arg(long, allow_negative_numbers = true)]
        to: Option<f64>,
    },
}

fn run_with(spec: &SweepSpec, workers: Option<usize>) -> Result<Vec<BerRecord>> {
    match workers {
        Some(n) => run_sweep_with_workers(spec, n),
        None => run_sweep(spec),
    }
}

fn emit(records: &[BerRecord], out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = BufWriter::new(File::create(path)?);
            write_csv(&mut w, records)?;
            w.flush()?;
        }
        None => write_csv(io::stdout().lock(), records)?,
    }
    Ok(())
}

fn simulate(args: SimulateArgs) -> Result<()> {
    let mut template = SchemeConfig::new(args.scheme);
    template.spreading = args.spreading;
    template.loading = args.groups;
    let spec = SweepSpec {
        schemes: vec![args.scheme],
        ebn0_db: parse_grid(&args.ebn0)?,
        beta_db: vec![args.beta_db],
        mu: parse_mu(&args.mu_db)?,
        timing_sigma: vec![args.timing_sigma],
        template,
        rule: StoppingRule {
            min_errors: args.min_errors,
            max_bits: parse_max_bits(&args.max_bits)?,
            confidence: args.confidence,
        },
        seed: args.seed,
    };
    let records = run_with(&spec, args.workers)?;
    emit(&records, args.out.as_deref())
}

fn sweep(args: SweepArgs) -> Result<()> {
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| Error::InvalidArgument(format!("{}: {e}", args.spec.display())))?;
    let file = parse_sweep_config(&text)?;
    let records = run_with(&file.spec, args.workers)?;
    emit(&records, args.out.as_deref().or(file.out.as_deref()))
}

/// Rows matching `scheme[:beta[:sigma]]`, restricted to the first matching
/// (beta, sigma) combination in file order.
fn select_curve(records: &[BerRecord], selector: &str) -> Result<Vec<BerRecord>> {
    let mut parts = selector.split(':');
    let scheme: Scheme = parts.next().unwrap_or("").parse()?;
    let num = |s: Option<&str>| -> Result<Option<f64>> {
        s.map(|v| {
            v.trim()
                .parse::<f64>()
                .map_err(|_| Error::InvalidArgument(format!("bad selector '{selector}'")))
        })
        .transpose()
    };
    let beta = num(parts.next())?;
    let sigma = num(parts.next())?;
    if parts.next().is_some() {
        return Err(Error::InvalidArgument(format!("bad selector '{selector}'")));
    }
    let close = |a: f64, b: Option<f64>| b.is_none_or(|b| (a - b).abs() < 1e-9);
    let matching: Vec<&BerRecord> = records
        .iter()
        .filter(|r| r.scheme == scheme && close(r.beta_db, beta) && close(r.timing_sigma, sigma))
        .collect();
    let Some(first) = matching.first() else {
        return Err(Error::InvalidArgument(format!(
            "no rows match '{selector}'"
        )));
    };
    let key = (first.beta_db, first.timing_sigma);
    Ok(matching
        .into_iter()
        .filter(|r| (r.beta_db, r.timing_sigma) == key)
        .cloned()
        .collect())
}

fn load(path: &Path) -> Result<Vec<BerRecord>> {
    let file =
        File::open(path).map_err(|e| Error::InvalidArgument(format!("{}: {e}", path.display())))?;
    read_csv(file)
}

fn analyze(cmd: AnalyzeCommand) -> Result<()> {
    match cmd {
        AnalyzeCommand::Gain {
            input,
            a,
            b,
            target,
        } => {
            let records = load(&input)?;
            let gain = ebn0_gain_at_ber(
                &select_curve(&records, &a)?,
                &select_curve(&records, &b)?,
                target,
            )?;
            println!("{gain:.4}");
        }
        AnalyzeCommand::Diversity {
            input,
            curve,
            from,
            to,
        } => {
            let records = load(&input)?;
            let curve: Vec<BerRecord> = select_curve(&records, &curve)?
                .into_iter()
                .filter(|r| {
                    from.is_none_or(|f| r.ebn0_db >= f) && to.is_none_or(|t| r.ebn0_db <= t)
                })
                .collect();
            println!("{:.4}", estimate_diversity_order(&curve)?);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Simulate(args) => simulate(args),
        Command::Sweep(args) => sweep(args),
        Command::Analyze(cmd) => analyze(cmd),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e.root() {
                Error::InvalidArgument(_) => ExitCode::from(2),
                Error::NotEstimable(_) => ExitCode::from(3),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
