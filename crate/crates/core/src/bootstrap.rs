//! Historical jump extraction and bootstrap path generation.
//!
//! Daily closes are turned into jumps `close_i / close_{i-1}` and split by the
//! calendar gap between the two observations: a one-day gap is a next-day
//! jump, anything longer (weekends, holidays) goes to the weekend/holiday
//! group. Bootstrap paths draw with replacement in a weekly pattern of four
//! next-day jumps followed by one weekend jump.

use std::io::Read;
use std::path::Path;

use chrono::NaiveDate;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::hedging::{PricePath, SanityRange};
use crate::par::Execution;

pub const DEFAULT_NUM_PATHS: usize = 1000;
/// Length of the weekly draw pattern; the last slot is the weekend draw.
pub const WEEK_PATTERN: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceRecord {
    pub date: NaiveDate,
    pub close: f64,
}

#[derive(Debug, Deserialize)]
struct RawRecord {
    date: String,
    close: String,
}

/// Parses a `date,close` CSV (ISO dates, ascending, one row per trading day).
pub fn parse_price_csv<R: Read>(reader: R) -> std::result::Result<Vec<PriceRecord>, Error> {
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::InvalidRecord {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["date", "close"] {
        return Err(Error::InvalidRecord {
            line: 1,
            reason: format!(
                "expected header `date,close`, got `{}`",
                headers.iter().collect::<Vec<_>>().join(",")
            ),
        });
    }
    let mut records: Vec<PriceRecord> = Vec::new();
    for (i, row) in rdr.deserialize::<RawRecord>().enumerate() {
        let line = i + 2;
        let raw = row.map_err(|e| Error::InvalidRecord {
            line,
            reason: e.to_string(),
        })?;
        let date =
            NaiveDate::parse_from_str(&raw.date, "%Y-%m-%d").map_err(|e| Error::InvalidRecord {
                line,
                reason: format!("bad date `{}`: {e}", raw.date),
            })?;
        let close: f64 = raw.close.parse().map_err(|_| Error::InvalidRecord {
            line,
            reason: format!("bad close `{}`", raw.close),
        })?;
        if !(close.is_finite() && close > 0.0) {
            return Err(Error::InvalidRecord {
                line,
                reason: format!("close must be > 0, got {close}"),
            });
        }
        if let Some(prev) = records.last() {
            if date <= prev.date {
                return Err(Error::InvalidRecord {
                    line,
                    reason: format!("date {date} does not follow {}", prev.date),
                });
            }
        }
        records.push(PriceRecord { date, close });
    }
    Ok(records)
}

pub fn read_price_csv(path: &Path) -> Result<Vec<PriceRecord>> {
    let file = std::fs::File::open(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    parse_price_csv(std::io::BufReader::new(file))
}

/// Historical jumps split by calendar gap. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct JumpPool {
    next_day: Vec<f64>,
    weekend_holiday: Vec<f64>,
}

impl JumpPool {
    pub fn new(next_day: Vec<f64>, weekend_holiday: Vec<f64>) -> Result<Self> {
        if next_day.is_empty() {
            return Err(Error::EmptyJumpGroup("next-day"));
        }
        if weekend_holiday.is_empty() {
            return Err(Error::EmptyJumpGroup("weekend/holiday"));
        }
        if let Some(x) = next_day
            .iter()
            .chain(&weekend_holiday)
            .find(|x| !(x.is_finite() && **x > 0.0))
        {
            return Err(Error::domain(format!(
                "jumps must be finite and > 0, got {x}"
            )));
        }
        Ok(Self {
            next_day,
            weekend_holiday,
        })
    }

    pub fn next_day(&self) -> &[f64] {
        &self.next_day
    }

    pub fn weekend_holiday(&self) -> &[f64] {
        &self.weekend_holiday
    }

    pub fn len(&self) -> usize {
        self.next_day.len() + self.weekend_holiday.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Number of pooled jumps outside `range`.
    pub fn count_outside(&self, range: SanityRange) -> usize {
        self.next_day
            .iter()
            .chain(&self.weekend_holiday)
            .filter(|x| !range.contains(**x))
            .count()
    }
}

pub fn extract_jumps(records: &[PriceRecord]) -> Result<JumpPool> {
    if records.len() < 2 {
        return Err(Error::TooFewRecords(records.len()));
    }
    let mut next_day = Vec::new();
    let mut weekend_holiday = Vec::new();
    for pair in records.windows(2) {
        let xi = pair[1].close / pair[0].close;
        if (pair[1].date - pair[0].date).num_days() == 1 {
            next_day.push(xi);
        } else {
            weekend_holiday.push(xi);
        }
    }
    let pool = JumpPool::new(next_day, weekend_holiday)?;
    let outliers = pool.count_outside(SanityRange::default());
    if outliers > 0 {
        log::warn!("{outliers} historical jump(s) outside the daily sanity range (0.5, 2.0)");
    }
    Ok(pool)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BootstrapConfig {
    pub num_paths: usize,
    /// Trading days `n` per path.
    pub horizon: usize,
    pub seed: u64,
    pub start_price: f64,
    /// Position in the weekly pattern of the first draw; 0 starts with the
    /// four next-day draws.
    pub phase_offset: usize,
}

impl BootstrapConfig {
    pub fn new(num_paths: usize, horizon: usize, seed: u64, start_price: f64) -> Result<Self> {
        let config = Self {
            num_paths,
            horizon,
            seed,
            start_price,
            phase_offset: 0,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_phase_offset(mut self, phase_offset: usize) -> Self {
        self.phase_offset = phase_offset % WEEK_PATTERN;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.num_paths == 0 {
            return Err(Error::domain("need at least one bootstrap path"));
        }
        if self.horizon == 0 {
            return Err(Error::domain("bootstrap horizon must be at least 1"));
        }
        if !(self.start_price.is_finite() && self.start_price > 0.0) {
            return Err(Error::domain(format!(
                "start price must be > 0, got {}",
                self.start_price
            )));
        }
        Ok(())
    }

    /// Whether draw `k` (1-based) comes from the weekend/holiday group.
    pub fn is_weekend_draw(&self, k: usize) -> bool {
        (self.phase_offset + k - 1) % WEEK_PATTERN == WEEK_PATTERN - 1
    }
}

/// Independent RNG stream for one path: the ChaCha stream id is the path
/// index, so paths do not depend on generation order.
fn path_rng(seed: u64, path_index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path_index as u64);
    rng
}

pub fn generate_path(
    pool: &JumpPool,
    config: &BootstrapConfig,
    path_index: usize,
) -> Result<PricePath> {
    config.validate()?;
    if path_index >= config.num_paths {
        return Err(Error::domain(format!(
            "path index {path_index} outside 0..{}",
            config.num_paths
        )));
    }
    let mut rng = path_rng(config.seed, path_index);
    let jumps = (1..=config.horizon)
        .map(|k| {
            let group = if config.is_weekend_draw(k) {
                pool.weekend_holiday()
            } else {
                pool.next_day()
            };
            group[rng.random_range(0..group.len())]
        })
        .collect();
    PricePath::from_jumps(config.start_price, jumps)
}

pub fn generate_ensemble(pool: &JumpPool, config: &BootstrapConfig) -> Result<Vec<PricePath>> {
    generate_ensemble_with(pool, config, Execution::default())
}

pub fn generate_ensemble_with(
    pool: &JumpPool,
    config: &BootstrapConfig,
    exec: Execution,
) -> Result<Vec<PricePath>> {
    config.validate()?;
    exec.try_map_indexed(config.num_paths, |i| generate_path(pool, config, i))
}
