//! End-to-end run: price history in, calibrated contour, bootstrap scan and
//! report files out.
//!
//! Output files in the run directory:
//!
//! | file                | content                                             |
//! |---------------------|-----------------------------------------------------|
//! | `report.txt`        | aligned table: criterion, optimal `(u,d)`, objective |
//! | `report.kv`         | TOML document: config echo, metadata, rows           |
//! | `contour.tsv`       | `u<TAB>d`                                            |
//! | `surface.tsv`       | `u<TAB>d<TAB>c0`                                     |
//! | `delta_samples.tsv` | `criterion<TAB>pathIndex<TAB>Δ_n` at each optimum    |
//!
//! Every file is written to a temporary sibling and renamed into place.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::bootstrap::{
    extract_jumps, generate_ensemble_with, read_price_csv, BootstrapConfig, DEFAULT_NUM_PATHS,
};
use crate::contour::{
    extract_contour_with, surface_samples_tsv, Contour, SurfaceSpec, DEFAULT_D_MIN,
    DEFAULT_GRID_SIZE, DEFAULT_U_MAX,
};
use crate::criteria::{
    build_report, criterion_spread, scan_contour, CriterionKind, PointEvaluation, ReportMetadata,
    ReportRow, RiskReport, RunTag,
};
use crate::error::{Error, Result};
use crate::hedging::simulate_with_lattice;
use crate::par::Execution;
use crate::pricing::{ContractTerms, Lattice};

pub const REPORT_TXT: &str = "report.txt";
pub const REPORT_KV: &str = "report.kv";
pub const CONTOUR_TSV: &str = "contour.tsv";
pub const SURFACE_TSV: &str = "surface.tsv";
pub const DELTA_SAMPLES_TSV: &str = "delta_samples.tsv";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub option_id: String,
    pub prices_path: PathBuf,
    pub strike: f64,
    /// Quoted option price `x_0`.
    pub option_price: f64,
    /// Spot `s_0` on the quote date.
    pub spot: f64,
    /// Trading days to expiry `n`.
    pub days: usize,
    /// Per-day risk-free rate.
    pub rate: f64,
    pub grid_size: usize,
    pub u_max: f64,
    pub d_min: f64,
    pub num_paths: usize,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl RunConfig {
    /// Config with module defaults for everything but the option inputs.
    pub fn new(
        prices_path: impl Into<PathBuf>,
        strike: f64,
        option_price: f64,
        spot: f64,
        days: usize,
        output_dir: impl Into<PathBuf>,
    ) -> Self {
        let prices_path = prices_path.into();
        let option_id = prices_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_default();
        Self {
            option_id,
            prices_path,
            strike,
            option_price,
            spot,
            days,
            rate: 0.0,
            grid_size: DEFAULT_GRID_SIZE,
            u_max: DEFAULT_U_MAX,
            d_min: DEFAULT_D_MIN,
            num_paths: DEFAULT_NUM_PATHS,
            seed: 1,
            output_dir: output_dir.into(),
        }
    }

    fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("strike", self.strike),
            ("option price", self.option_price),
            ("spot", self.spot),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!("{name} must be > 0, got {v}")));
            }
        }
        if self.days == 0 {
            return Err(Error::domain("days to expiry must be at least 1"));
        }
        if self.grid_size < 2 {
            return Err(Error::domain("grid size must be at least 2"));
        }
        if self.num_paths == 0 {
            return Err(Error::domain("need at least one bootstrap path"));
        }
        Ok(())
    }

    pub fn c_star(&self) -> f64 {
        self.option_price / self.spot
    }

    pub fn terms(&self) -> ContractTerms {
        ContractTerms::new(self.days, self.spot, self.strike, self.rate)
    }

    pub fn surface_spec(&self) -> Result<SurfaceSpec> {
        SurfaceSpec::new(self.days, self.strike / self.spot, self.rate)?
            .with_u_max(self.u_max)?
            .with_d_min(self.d_min)
    }
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub report: RiskReport,
    pub contour: Contour,
    pub evaluations: Vec<PointEvaluation>,
    /// `Δ_n` per bootstrap path at each reported optimum, in row order.
    pub delta_samples: Vec<(CriterionKind, Vec<f64>)>,
    /// Largest closed-form vs portfolio-arithmetic residual gap seen.
    pub max_dual_gap: f64,
    pub files: Vec<PathBuf>,
}

pub fn run_pipeline(config: &RunConfig) -> Result<RunArtifacts> {
    run_pipeline_with(config, Execution::default())
}

pub fn run_pipeline_with(config: &RunConfig, exec: Execution) -> Result<RunArtifacts> {
    config.validate()?;
    let records = read_price_csv(&config.prices_path)?;
    let pool = extract_jumps(&records)?;
    log::info!(
        "{} next-day and {} weekend/holiday jumps from {} records",
        pool.next_day().len(),
        pool.weekend_holiday().len(),
        records.len()
    );

    let spec = config.surface_spec()?;
    let contour = extract_contour_with(&spec, config.c_star(), config.grid_size, exec)?;
    log::info!(
        "contour at c* = {} has {} points",
        contour.target_level,
        contour.len()
    );

    let boot = BootstrapConfig::new(config.num_paths, config.days, config.seed, config.spot)?;
    let ensemble = generate_ensemble_with(&pool, &boot, exec)?;

    let terms = config.terms();
    let evaluations = scan_contour(&contour, &ensemble, &terms, exec)?;
    let tag = RunTag {
        option_id: config.option_id.clone(),
        seed: config.seed,
    };
    let report = build_report(
        &contour,
        ensemble.len(),
        &terms,
        &evaluations,
        &CriterionKind::ALL,
        &tag,
    );
    let max_dual_gap = evaluations
        .iter()
        .map(|e| e.max_dual_gap)
        .fold(0.0, f64::max);
    let profit_spread = criterion_spread(&evaluations, CriterionKind::ExpectedAccumulatedProfit);
    log::info!("E(Δ_n) spread over the contour: {profit_spread}");

    let mut delta_samples = Vec::with_capacity(report.rows.len());
    for row in &report.rows {
        let lattice = Lattice::new(&terms.with_jumps(row.u, row.d)?)?;
        let deltas = exec.try_map_indexed(ensemble.len(), |i| {
            simulate_with_lattice(&lattice, &ensemble[i]).map(|l| l.accumulated)
        })?;
        delta_samples.push((row.criterion, deltas));
    }

    let diagnostics = Diagnostics {
        expected_profit_spread: profit_spread,
        max_dual_gap,
        historical_jumps: pool.len(),
    };
    let out = &config.output_dir;
    std::fs::create_dir_all(out).map_err(|source| Error::Io {
        path: out.clone(),
        source,
    })?;
    let files = vec![
        write_atomic(&out.join(REPORT_TXT), &format_report_text(&report))?,
        write_atomic(
            &out.join(REPORT_KV),
            &format_report_kv(&report, Some(config), Some(&diagnostics))?,
        )?,
        write_atomic(&out.join(CONTOUR_TSV), &contour.to_tsv())?,
        write_atomic(
            &out.join(SURFACE_TSV),
            &surface_samples_tsv(&spec, config.grid_size, exec),
        )?,
        write_atomic(
            &out.join(DELTA_SAMPLES_TSV),
            &delta_samples_tsv(&delta_samples),
        )?,
    ];

    Ok(RunArtifacts {
        report,
        contour,
        evaluations,
        delta_samples,
        max_dual_gap,
        files,
    })
}

/// Run-level numbers that are not part of the report proper.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub expected_profit_spread: f64,
    pub max_dual_gap: f64,
    pub historical_jumps: usize,
}

fn write_atomic(path: &Path, contents: &str) -> Result<PathBuf> {
    let io_err = |source| Error::Io {
        path: path.to_path_buf(),
        source,
    };
    let dir = path.parent().unwrap_or(Path::new("."));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io_err)?;
    tmp.write_all(contents.as_bytes()).map_err(io_err)?;
    tmp.persist(path).map_err(|e| io_err(e.error))?;
    Ok(path.to_path_buf())
}

pub fn delta_samples_tsv(samples: &[(CriterionKind, Vec<f64>)]) -> String {
    let mut out = String::from("# criterion\tpathIndex\tdelta_n\n");
    for (kind, deltas) in samples {
        for (i, delta) in deltas.iter().enumerate() {
            let _ = writeln!(out, "{}\t{i}\t{delta}", kind.key());
        }
    }
    out
}

pub const TABLE_HEADER: [&str; 3] = ["Risk criterion", "Optimal (u,d)", "Objective value"];

fn table_cells(row: &ReportRow) -> [String; 3] {
    [
        row.criterion.label().to_string(),
        format!("({:.4}, {:.4})", row.u, row.d),
        format!("{:.4}", row.value),
    ]
}

/// Aligned three-column table, one row per criterion, numbers to 4 decimals.
pub fn format_report_table(report: &RiskReport) -> String {
    let rows: Vec<[String; 3]> = report.rows.iter().map(table_cells).collect();
    let width = |col: usize| {
        rows.iter()
            .map(|r| r[col].chars().count())
            .chain(std::iter::once(TABLE_HEADER[col].chars().count()))
            .max()
            .unwrap_or(0)
    };
    let widths = [width(0), width(1), width(2)];
    let line = |cells: [&str; 3]| {
        let padded: Vec<String> = cells
            .iter()
            .zip(widths)
            .map(|(c, w)| format!("{c}{}", " ".repeat(w - c.chars().count())))
            .collect();
        padded.join(" | ").trim_end().to_string()
    };
    let mut out = String::new();
    out.push_str(&line(TABLE_HEADER));
    out.push('\n');
    out.push_str(
        &widths
            .iter()
            .map(|w| "-".repeat(*w))
            .collect::<Vec<_>>()
            .join("-+-"),
    );
    out.push('\n');
    for r in &rows {
        out.push_str(&line([&r[0], &r[1], &r[2]]));
        out.push('\n');
    }
    out
}

/// Caption plus table, as written to `report.txt`.
pub fn format_report_text(report: &RiskReport) -> String {
    let m = &report.metadata;
    format!(
        "{} optimal results with n = {} days to expiration (c* = {:.6}, {} paths, {} contour points, seed {})\n\n{}",
        m.option_id,
        m.n,
        m.c_star,
        m.num_paths,
        m.contour_points,
        m.seed,
        format_report_table(report)
    )
}

#[derive(Serialize, Deserialize)]
struct KvDocument {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    config: Option<RunConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    diagnostics: Option<Diagnostics>,
    metadata: ReportMetadata,
    #[serde(default)]
    rows: Vec<ReportRow>,
}

/// Machine-readable report (TOML). Floats are written at full precision.
pub fn format_report_kv(
    report: &RiskReport,
    config: Option<&RunConfig>,
    diagnostics: Option<&Diagnostics>,
) -> Result<String> {
    let doc = KvDocument {
        config: config.cloned(),
        diagnostics: diagnostics.cloned(),
        metadata: report.metadata.clone(),
        rows: report.rows.clone(),
    };
    toml::to_string(&doc).map_err(|e| Error::ReportFormat(e.to_string()))
}

pub fn parse_report_kv(text: &str) -> Result<RiskReport> {
    let doc: KvDocument = toml::from_str(text).map_err(|e| Error::ReportFormat(e.to_string()))?;
    Ok(RiskReport {
        metadata: doc.metadata,
        rows: doc.rows,
    })
}
