//! BER records and their CSV representation.

use std::io::{Read, Write};

use serde::Deserialize;

use crate::protocol::Scheme;
use crate::{Error, Result};

pub const CSV_HEADER: &str =
    "scheme,ebn0_db,beta_db,mu_db,timing_sigma,bits,errors,ber,ci_low,ci_high,truncated,seed";

/// One measured point of a BER curve.
#[derive(Debug, Clone, PartialEq)]
pub struct BerRecord {
    pub scheme: Scheme,
    pub ebn0_db: f64,
    pub beta_db: f64,
    pub mu_db: f64,
    pub timing_sigma: f64,
    pub bits: u64,
    pub errors: u64,
    pub ber: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// Stopped at the bit cap before collecting the requested errors.
    pub truncated: bool,
    pub seed: u64,
}

impl BerRecord {
    /// `ci_low <= ber <= ci_high`, `errors <= bits`, `ber == errors / bits`.
    pub fn is_consistent(&self) -> bool {
        self.errors <= self.bits
            && self.bits > 0
            && self.ber == self.errors as f64 / self.bits as f64
            && self.ci_low <= self.ber
            && self.ber <= self.ci_high
    }

    /// Whether the two confidence intervals are disjoint with `self` above.
    pub fn significantly_above(&self, other: &BerRecord) -> bool {
        self.ci_low > other.ci_high
    }
}

fn float(x: f64) -> String {
    format!("{x:e}")
}

pub fn write_csv<W: Write>(mut out: W, records: &[BerRecord]) -> Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{},{},{}",
            r.scheme.id(),
            float(r.ebn0_db),
            float(r.beta_db),
            float(r.mu_db),
            float(r.timing_sigma),
            r.bits,
            r.errors,
            float(r.ber),
            float(r.ci_low),
            float(r.ci_high),
            r.truncated,
            r.seed
        )?;
    }
    Ok(())
}

pub fn to_csv_string(records: &[BerRecord]) -> String {
    let mut buf = Vec::new();
    write_csv(&mut buf, records).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("CSV output is ASCII")
}

#[derive(Deserialize)]
struct Row {
    scheme: String,
    ebn0_db: f64,
    beta_db: f64,
    mu_db: f64,
    timing_sigma: f64,
    bits: u64,
    errors: u64,
    ber: f64,
    ci_low: f64,
    ci_high: f64,
    truncated: bool,
    seed: u64,
}

pub fn read_csv<R: Read>(input: R) -> Result<Vec<BerRecord>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let header = reader.headers()?.iter().collect::<Vec<_>>().join(",");
    if header != CSV_HEADER {
        return Err(Error::invalid(format!("unexpected CSV header '{header}'")));
    }
    reader
        .deserialize::<Row>()
        .map(|row| {
            let row = row?;
            Ok(BerRecord {
                scheme: row.scheme.parse()?,
                ebn0_db: row.ebn0_db,
                beta_db: row.beta_db,
                mu_db: row.mu_db,
                timing_sigma: row.timing_sigma,
                bits: row.bits,
                errors: row.errors,
                ber: row.ber,
                ci_low: row.ci_low,
                ci_high: row.ci_high,
                truncated: row.truncated,
                seed: row.seed,
            })
        })
        .collect()
}
