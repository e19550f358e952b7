//! Option-chain CSV, fit-result JSON lines, run manifests and the synthetic
//! chain generator.

use crate::calibration::FitResult;
use crate::error::{Error, Result};
use crate::green::{DerivativeKind, DiffusionSpec};
use crate::par::ExecMode;
use crate::pricing::{DfPricer, MarketSnapshot, OptionQuote, OptionSide};
use chrono::NaiveDate;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

/// Header of a chain file, in order.
pub const CHAIN_HEADER: [&str; 8] = ["date", "side", "strike", "maturity_years", "mid_price", "spot", "rate", "div_yield"];

/// One row of a chain file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainFileRow {
    pub date: NaiveDate,
    pub side: OptionSide,
    pub strike: f64,
    pub maturity_years: f64,
    pub mid_price: f64,
    pub spot: f64,
    pub rate: f64,
    pub div_yield: f64,
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize, line: usize) -> Result<T> {
    let raw = rec.get(i).unwrap_or("").trim();
    raw.parse::<T>().map_err(|_| Error::Parse { line, msg: format!("cannot parse {} from `{raw}`", CHAIN_HEADER[i]) })
}

fn parse_row(rec: &csv::StringRecord, line: usize) -> Result<ChainFileRow> {
    if rec.len() != CHAIN_HEADER.len() {
        return Err(Error::Parse { line, msg: format!("expected {} fields, found {}", CHAIN_HEADER.len(), rec.len()) });
    }
    let date_raw = rec.get(0).unwrap_or("").trim();
    let date = NaiveDate::parse_from_str(date_raw, "%Y-%m-%d").map_err(|_| Error::Parse { line, msg: format!("cannot parse date from `{date_raw}`") })?;
    let side = match rec.get(1).unwrap_or("").trim() {
        "C" | "c" => OptionSide::Call,
        "P" | "p" => OptionSide::Put,
        other => return Err(Error::Parse { line, msg: format!("side must be C or P, found `{other}`") }),
    };
    let row = ChainFileRow {
        date,
        side,
        strike: field(rec, 2, line)?,
        maturity_years: field(rec, 3, line)?,
        mid_price: field(rec, 4, line)?,
        spot: field(rec, 5, line)?,
        rate: field(rec, 6, line)?,
        div_yield: field(rec, 7, line)?,
    };
    let positive = |v: f64, name: &str| -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::Parse { line, msg: format!("{name} must be positive, found {v}") })
        }
    };
    positive(row.strike, "strike")?;
    positive(row.maturity_years, "maturity_years")?;
    positive(row.spot, "spot")?;
    if !(row.mid_price >= 0.0 && row.mid_price.is_finite()) {
        return Err(Error::Parse { line, msg: format!("mid_price must be nonnegative, found {}", row.mid_price) });
    }
    if !row.rate.is_finite() || !row.div_yield.is_finite() {
        return Err(Error::Parse { line, msg: "rate and div_yield must be finite".into() });
    }
    Ok(row)
}

/// Parses chain CSV text into one snapshot per date, ascending; quotes keep
/// their file order within a day.
pub fn parse_chain<R: std::io::Read>(reader: R) -> Result<Vec<MarketSnapshot>> {
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(reader);
    let header = rdr.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
    let found: Vec<&str> = header.iter().collect();
    if found != CHAIN_HEADER {
        return Err(Error::Schema { expected: CHAIN_HEADER.join(","), found: found.join(",") });
    }
    let mut days: BTreeMap<NaiveDate, (usize, MarketSnapshot)> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map(|p| p.line() as usize).unwrap_or(0);
            Error::Parse { line, msg: e.to_string() }
        })?;
        let line = rec.position().map(|p| p.line() as usize).unwrap_or(0);
        let row = parse_row(&rec, line)?;
        let quote = OptionQuote::new(row.side, row.strike, row.maturity_years, row.mid_price).map_err(|e| Error::Parse { line, msg: e.to_string() })?;
        match days.get_mut(&row.date) {
            Some((_, snap)) => {
                if snap.spot != row.spot || snap.rate != row.rate || snap.div_yield != row.div_yield {
                    return Err(Error::InconsistentDay { line, date: row.date.to_string() });
                }
                snap.quotes.push(quote);
            }
            None => {
                let snap = MarketSnapshot { date: row.date, spot: row.spot, rate: row.rate, div_yield: row.div_yield, quotes: vec![quote] };
                days.insert(row.date, (line, snap));
            }
        }
    }
    if days.is_empty() {
        return Err(Error::EmptyFile);
    }
    Ok(days.into_values().map(|(_, s)| s).collect())
}

/// Reads a chain file.
pub fn load_chain(path: &Path) -> Result<Vec<MarketSnapshot>> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    parse_chain(std::io::BufReader::new(file))
}

/// Chain CSV text for the given days.
pub fn format_chain(days: &[MarketSnapshot]) -> String {
    let mut out = CHAIN_HEADER.join(",");
    out.push('\n');
    for d in days {
        for q in &d.quotes {
            let side = match q.side {
                OptionSide::Call => "C",
                OptionSide::Put => "P",
            };
            out.push_str(&format!("{},{side},{},{},{},{},{},{}\n", d.date, q.strike, q.maturity, q.mid, d.spot, d.rate, d.div_yield));
        }
    }
    out
}

pub fn write_chain(path: &Path, days: &[MarketSnapshot]) -> Result<()> {
    std::fs::write(path, format_chain(days)).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Fit results as JSON lines.
pub fn write_fits(path: &Path, fits: &[FitResult]) -> Result<()> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?);
    for fit in fits {
        let line = serde_json::to_string(fit).map_err(|e| Error::Io(e.to_string()))?;
        writeln!(f, "{line}")?;
    }
    f.flush()?;
    Ok(())
}

pub fn read_fits(path: &Path) -> Result<Vec<FitResult>> {
    let file = std::fs::File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::Parse { line: i + 1, msg: e.to_string() })?);
    }
    Ok(out)
}

/// SHA-256 of a file, hex encoded.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = std::fs::read(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputChecksum {
    pub file: String,
    pub sha256: String,
}

/// What produced a set of outputs, and their checksums.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: serde_json::Value,
    pub seed: Option<u64>,
    pub version: String,
    pub outputs: Vec<OutputChecksum>,
}

impl RunManifest {
    pub fn new(command: &str, config: serde_json::Value, seed: Option<u64>) -> Self {
        Self { command: command.into(), config, seed, version: env!("CARGO_PKG_VERSION").into(), outputs: Vec::new() }
    }

    /// Records `path` under its file name.
    pub fn add_output(&mut self, path: &Path) -> Result<()> {
        let name = path.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string());
        self.outputs.push(OutputChecksum { file: name, sha256: sha256_file(path)? });
        Ok(())
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::Io(format!("{}: {e}", path.display())))
    }

    /// Manifest path next to an output file: `<file>.manifest.json`.
    pub fn path_for(output: &Path) -> PathBuf {
        let mut s = output.as_os_str().to_owned();
        s.push(".manifest.json");
        PathBuf::from(s)
    }
}

/// Settings of the synthetic chain generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub alpha: f64,
    pub gamma: f64,
    pub sigma: f64,
    pub kind: DerivativeKind,
    pub days: usize,
    /// Relative standard deviation of the multiplicative price noise.
    pub noise: f64,
    pub seed: u64,
    pub spot: f64,
    pub rate: f64,
    pub div_yield: f64,
    pub maturities: Vec<f64>,
    /// Strikes per maturity as log-moneyness offsets in units of 0.2·√τ.
    pub moneyness: Vec<f64>,
    pub start: NaiveDate,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            alpha: 1.6,
            gamma: 1.05,
            sigma: 0.15,
            kind: DerivativeKind::Caputo,
            days: 5,
            noise: 0.01,
            seed: 1,
            spot: 1000.0,
            rate: 0.01,
            div_yield: 0.0,
            maturities: vec![1.0 / 12.0, 0.25, 0.5, 1.0, 2.0],
            moneyness: vec![-2.5, -2.0, -1.5, -1.0, -0.6, -0.25, 0.25, 0.6, 1.0, 1.5, 2.0, 2.5],
            start: NaiveDate::from_ymd_opt(2008, 11, 3).expect("valid date"),
        }
    }
}

/// Noisy chain priced under the double-fractional model: every strike is
/// quoted as both call and put, mids scaled by 1 + noise·N(0, 1), and the
/// spot drifts by 1% log-normal steps across weekdays.
pub fn synthesize(cfg: &SynthConfig) -> Result<Vec<MarketSnapshot>> {
    let spec = DiffusionSpec::new(cfg.alpha, cfg.gamma, cfg.kind, cfg.sigma)?;
    if cfg.days == 0 || cfg.maturities.is_empty() || cfg.moneyness.is_empty() {
        return Err(Error::Domain("synthetic chain needs days, maturities and strikes".into()));
    }
    if !(cfg.noise >= 0.0) || !(cfg.spot > 0.0) {
        return Err(Error::Domain("noise must be >= 0 and spot > 0".into()));
    }
    let pricer = DfPricer::with_mode(&spec, &cfg.maturities, ExecMode::Parallel)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let normal = Normal::new(0.0, 1.0).expect("unit normal");
    let mut date = cfg.start;
    let mut spot = cfg.spot;
    let mut days = Vec::with_capacity(cfg.days);
    for d in 0..cfg.days {
        if d > 0 {
            spot *= (0.01f64 * normal.sample(&mut rng)).exp();
            date = next_weekday(date);
        }
        let spot_r = (spot * 100.0).round() / 100.0;
        let mut quotes = Vec::new();
        for &tau in &cfg.maturities {
            let fwd = spot_r * ((cfg.rate - cfg.div_yield) * tau).exp();
            for &m in &cfg.moneyness {
                let strike = (fwd * (m * 0.2 * tau.sqrt()).exp() * 100.0).round() / 100.0;
                for side in [OptionSide::Call, OptionSide::Put] {
                    let p = pricer.price(spot_r, strike, tau, cfg.rate, cfg.div_yield, side)?.value;
                    let mid = (p * (1.0 + cfg.noise * normal.sample(&mut rng))).max(0.0);
                    quotes.push(OptionQuote::new(side, strike, tau, mid)?);
                }
            }
        }
        days.push(MarketSnapshot { date, spot: spot_r, rate: cfg.rate, div_yield: cfg.div_yield, quotes });
    }
    Ok(days)
}

fn next_weekday(d: NaiveDate) -> NaiveDate {
    use chrono::{Datelike, Weekday};
    let mut n = d.succ_opt().expect("date in range");
    while matches!(n.weekday(), Weekday::Sat | Weekday::Sun) {
        n = n.succ_opt().expect("date in range");
    }
    n
}
