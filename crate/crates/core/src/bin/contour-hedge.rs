use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use contour_hedge::report::{format_report_table, run_pipeline, RunConfig};

/// Choose a market-calibrated hedging pair (u, d) for a European call by
/// bootstrap risk criteria.
#[derive(Debug, Parser)]
#[command(author, version, about)]
struct Cli {
    /// Historical daily closes, CSV with header `date,close`.
    #[arg(long)]
    prices: PathBuf,
    #[arg(long)]
    strike: f64,
    /// Quoted market price of the option.
    #[arg(long = "option-price")]
    option_price: f64,
    /// Stock price on the quote date.
    #[arg(long)]
    spot: f64,
    /// Trading days to expiration.
    #[arg(long)]
    days: usize,
    /// Per-day risk-free rate.
    #[arg(long, default_value_t = 0.0)]
    rate: f64,
    /// Number of u values on the contour search grid.
    #[arg(long = "grid-size", default_value_t = contour_hedge::contour::DEFAULT_GRID_SIZE)]
    grid_size: usize,
    #[arg(long = "u-max", default_value_t = contour_hedge::contour::DEFAULT_U_MAX)]
    u_max: f64,
    #[arg(long = "d-min", default_value_t = contour_hedge::contour::DEFAULT_D_MIN)]
    d_min: f64,
    /// Bootstrap paths per contour point.
    #[arg(long, default_value_t = contour_hedge::bootstrap::DEFAULT_NUM_PATHS)]
    paths: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Output directory for report and data files.
    #[arg(long, default_value = "hedge-report")]
    out: PathBuf,
    /// Label for the report; defaults to the price file's stem.
    #[arg(long = "option-id")]
    option_id: Option<String>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();

    let mut config = RunConfig::new(
        cli.prices,
        cli.strike,
        cli.option_price,
        cli.spot,
        cli.days,
        cli.out,
    );
    if let Some(id) = cli.option_id {
        config.option_id = id;
    }
    config.rate = cli.rate;
    config.grid_size = cli.grid_size;
    config.u_max = cli.u_max;
    config.d_min = cli.d_min;
    config.num_paths = cli.paths;
    config.seed = cli.seed;

    match run_pipeline(&config) {
        Ok(artifacts) => {
            print!("{}", format_report_table(&artifacts.report));
            for file in &artifacts.files {
                eprintln!("wrote {}", file.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
