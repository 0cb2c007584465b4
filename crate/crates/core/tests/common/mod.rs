#![allow(dead_code)]

use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Closing prices on weekdays starting from a Monday, with a holiday every
/// `holiday_every` business days. Each day's relative move comes from `jump`.
pub fn synthetic_closes(
    days: usize,
    holiday_every: usize,
    mut jump: impl FnMut(&mut ChaCha8Rng) -> f64,
    seed: u64,
) -> Vec<(NaiveDate, f64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut date = NaiveDate::from_ymd_opt(2024, 1, 1).unwrap();
    let mut close = 100.0;
    let mut out = Vec::with_capacity(days);
    let mut business = 0usize;
    while out.len() < days {
        let weekend = matches!(date.weekday(), Weekday::Sat | Weekday::Sun);
        if !weekend {
            business += 1;
            let holiday = holiday_every > 0 && business.is_multiple_of(holiday_every);
            if !holiday {
                if !out.is_empty() {
                    close *= jump(&mut rng);
                }
                out.push((date, close));
            }
        }
        date += Duration::days(1);
    }
    out
}

pub fn write_csv(dir: &Path, name: &str, rows: &[(NaiveDate, f64)]) -> PathBuf {
    let path = dir.join(name);
    let mut f = std::fs::File::create(&path).unwrap();
    writeln!(f, "date,close").unwrap();
    for (date, close) in rows {
        writeln!(f, "{},{close}", date.format("%Y-%m-%d")).unwrap();
    }
    path
}

/// Year of moderate daily moves.
pub fn calm_fixture(dir: &Path) -> PathBuf {
    let rows = synthetic_closes(260, 37, |r| r.random_range(0.985..1.015), 11);
    write_csv(dir, "calm.csv", &rows)
}

/// Jumps all within [0.98, 1.02].
pub fn narrow_fixture(dir: &Path) -> PathBuf {
    let rows = synthetic_closes(260, 37, |r| r.random_range(0.98..=1.02), 7);
    write_csv(dir, "narrow.csv", &rows)
}

/// Mostly small moves with occasional large ones.
pub fn heavy_tail_jump(rng: &mut ChaCha8Rng) -> f64 {
    let z: f64 = rng.random_range(-1.0..1.0);
    if rng.random::<f64>() < 0.08 {
        1.0 + 0.08 * z
    } else {
        1.0 + 0.008 * z
    }
}
