//! Investor risk criteria over a bootstrap ensemble and the per-criterion
//! choice of `(u, d)` on the calibrated contour.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::contour::Contour;
use crate::error::{Error, Result};
use crate::hedging::{simulate_with_lattice, PricePath, ResidualLedger};
use crate::par::Execution;
use crate::pricing::{ContractTerms, Lattice};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CriterionKind {
    /// `P(Δ_n > 0)`, maximized.
    ProbPositiveProfit,
    /// `E[max_k(-δ_k)]`, minimized.
    ExpectedShortfall,
    /// `E[Σ_k δ_k²]`, minimized.
    ExpectedSquaredResiduals,
    /// `E[Δ_n]`, maximized.
    ExpectedAccumulatedProfit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    Maximize,
    Minimize,
}

impl Direction {
    /// Whether `candidate` is strictly better than `incumbent`.
    pub fn improves(self, candidate: f64, incumbent: f64) -> bool {
        match self {
            Direction::Maximize => candidate > incumbent,
            Direction::Minimize => candidate < incumbent,
        }
    }
}

impl CriterionKind {
    pub const ALL: [CriterionKind; 4] = [
        CriterionKind::ProbPositiveProfit,
        CriterionKind::ExpectedShortfall,
        CriterionKind::ExpectedSquaredResiduals,
        CriterionKind::ExpectedAccumulatedProfit,
    ];

    pub fn direction(self) -> Direction {
        match self {
            CriterionKind::ProbPositiveProfit | CriterionKind::ExpectedAccumulatedProfit => {
                Direction::Maximize
            }
            CriterionKind::ExpectedShortfall | CriterionKind::ExpectedSquaredResiduals => {
                Direction::Minimize
            }
        }
    }

    /// Row label used in the human-readable report.
    pub fn label(self) -> &'static str {
        match self {
            CriterionKind::ProbPositiveProfit => "P(Δ_n)>0",
            CriterionKind::ExpectedShortfall => "E(shortfall)",
            CriterionKind::ExpectedSquaredResiduals => "E(Σδ_k²)",
            CriterionKind::ExpectedAccumulatedProfit => "E(Δ_n)",
        }
    }

    /// Stable machine identifier.
    pub fn key(self) -> &'static str {
        match self {
            CriterionKind::ProbPositiveProfit => "prob_positive_profit",
            CriterionKind::ExpectedShortfall => "expected_shortfall",
            CriterionKind::ExpectedSquaredResiduals => "expected_squared_residuals",
            CriterionKind::ExpectedAccumulatedProfit => "expected_accumulated_profit",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for CriterionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.key())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CriterionValue {
    pub kind: CriterionKind,
    pub value: f64,
    pub direction: Direction,
}

/// Running sums for all four criteria; ledgers can be dropped after `push`.
///
/// Sums are accumulated in push order, so pushing paths in index order gives
/// bit-identical results however the work was scheduled.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CriterionAccumulator {
    count: usize,
    positive: usize,
    shortfall_sum: f64,
    squared_sum: f64,
    accumulated_sum: f64,
    max_dual_gap: f64,
}

impl CriterionAccumulator {
    pub fn push(&mut self, ledger: &ResidualLedger) {
        self.count += 1;
        if ledger.accumulated > 0.0 {
            self.positive += 1;
        }
        self.shortfall_sum += ledger.worst_shortfall();
        self.squared_sum += ledger.sum_squared();
        self.accumulated_sum += ledger.accumulated;
        self.max_dual_gap = self.max_dual_gap.max(ledger.max_dual_gap);
    }

    pub fn count(&self) -> usize {
        self.count
    }

    pub fn max_dual_gap(&self) -> f64 {
        self.max_dual_gap
    }

    pub fn value(&self, kind: CriterionKind) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::EmptySample);
        }
        let n = self.count as f64;
        Ok(match kind {
            CriterionKind::ProbPositiveProfit => self.positive as f64 / n,
            CriterionKind::ExpectedShortfall => self.shortfall_sum / n,
            CriterionKind::ExpectedSquaredResiduals => self.squared_sum / n,
            CriterionKind::ExpectedAccumulatedProfit => self.accumulated_sum / n,
        })
    }
}

/// Sample estimate of one criterion from ledgers sharing the same `(u, d, r)`.
pub fn evaluate_criterion(
    kind: CriterionKind,
    ledgers: &[ResidualLedger],
    r: f64,
) -> Result<CriterionValue> {
    let first = ledgers.first().ok_or(Error::EmptySample)?;
    let mut acc = CriterionAccumulator::default();
    for (i, ledger) in ledgers.iter().enumerate() {
        if (ledger.u, ledger.d) != (first.u, first.d) || ledger.r != r {
            return Err(Error::MixedLedgers(format!(
                "ledger {i} has (u, d, r) = ({}, {}, {}), expected ({}, {}, {r})",
                ledger.u, ledger.d, ledger.r, first.u, first.d
            )));
        }
        acc.push(ledger);
    }
    Ok(CriterionValue {
        kind,
        value: acc.value(kind)?,
        direction: kind.direction(),
    })
}

/// All four criterion estimates at one contour point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointEvaluation {
    pub u: f64,
    pub d: f64,
    values: [f64; 4],
    pub max_dual_gap: f64,
}

impl PointEvaluation {
    pub fn value(&self, kind: CriterionKind) -> f64 {
        self.values[kind.index()]
    }
}

/// Hedges every ensemble path with every contour point. The same ensemble is
/// used for all points, so differences between points come from `(u, d)` only.
pub fn scan_contour(
    contour: &Contour,
    ensemble: &[PricePath],
    terms: &ContractTerms,
    exec: Execution,
) -> Result<Vec<PointEvaluation>> {
    if contour.is_empty() {
        return Err(Error::EmptyContour {
            c_star: contour.target_level,
        });
    }
    if ensemble.is_empty() {
        return Err(Error::EmptySample);
    }
    exec.try_map_indexed(contour.len(), |i| {
        let (u, d) = contour.points[i];
        evaluate_point(u, d, ensemble, terms)
    })
}

fn evaluate_point(
    u: f64,
    d: f64,
    ensemble: &[PricePath],
    terms: &ContractTerms,
) -> Result<PointEvaluation> {
    let to_sim = |period: usize, e: Error| match e {
        e @ Error::Simulation { .. } => e,
        other => Error::Simulation {
            period,
            u,
            d,
            reason: other.to_string(),
        },
    };
    let params = terms.with_jumps(u, d).map_err(|e| to_sim(0, e))?;
    let lattice = Lattice::new(&params).map_err(|e| to_sim(0, e))?;
    let mut acc = CriterionAccumulator::default();
    for (i, path) in ensemble.iter().enumerate() {
        let ledger = simulate_with_lattice(&lattice, path).map_err(|e| match e {
            e @ Error::Simulation { .. } => e,
            other => Error::Simulation {
                period: 0,
                u,
                d,
                reason: format!("path {i}: {other}"),
            },
        })?;
        acc.push(&ledger);
    }
    let mut values = [0.0; 4];
    for kind in CriterionKind::ALL {
        values[kind.index()] = acc.value(kind)?;
    }
    Ok(PointEvaluation {
        u,
        d,
        values,
        max_dual_gap: acc.max_dual_gap(),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub criterion: CriterionKind,
    pub u: f64,
    pub d: f64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub option_id: String,
    pub n: usize,
    pub c_star: f64,
    pub seed: u64,
    pub num_paths: usize,
    pub contour_points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiskReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<ReportRow>,
}

/// Best point per criterion over `evaluations`, scanned in contour order.
/// Only strict improvements replace the incumbent, so ties go to the
/// smallest `u`.
pub fn select_optima(evaluations: &[PointEvaluation], kinds: &[CriterionKind]) -> Vec<ReportRow> {
    let mut kinds = kinds.to_vec();
    kinds.sort();
    kinds.dedup();
    kinds
        .into_iter()
        .filter_map(|kind| {
            let dir = kind.direction();
            let mut best: Option<&PointEvaluation> = None;
            for eval in evaluations {
                // Evaluations come in contour order; guard anyway.
                let better = match best {
                    None => true,
                    Some(b) => {
                        dir.improves(eval.value(kind), b.value(kind))
                            || (eval.value(kind) == b.value(kind) && eval.u < b.u)
                    }
                };
                if better {
                    best = Some(eval);
                }
            }
            best.map(|b| ReportRow {
                criterion: kind,
                u: b.u,
                d: b.d,
                value: b.value(kind),
            })
        })
        .collect()
}

/// Identification echoed into the report metadata.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunTag {
    pub option_id: String,
    pub seed: u64,
}

/// Scans `contour` against `ensemble` and reports the optimal `(u, d)` for
/// each requested criterion.
pub fn optimize_over_contour(
    contour: &Contour,
    ensemble: &[PricePath],
    terms: &ContractTerms,
    kinds: &[CriterionKind],
    tag: &RunTag,
) -> Result<RiskReport> {
    let evaluations = scan_contour(contour, ensemble, terms, Execution::default())?;
    Ok(build_report(
        contour,
        ensemble.len(),
        terms,
        &evaluations,
        kinds,
        tag,
    ))
}

pub fn build_report(
    contour: &Contour,
    num_paths: usize,
    terms: &ContractTerms,
    evaluations: &[PointEvaluation],
    kinds: &[CriterionKind],
    tag: &RunTag,
) -> RiskReport {
    RiskReport {
        metadata: ReportMetadata {
            option_id: tag.option_id.clone(),
            n: terms.n,
            c_star: contour.target_level,
            seed: tag.seed,
            num_paths,
            contour_points: contour.len(),
        },
        rows: select_optima(evaluations, kinds),
    }
}

/// `max - min` of a criterion over the scanned points.
pub fn criterion_spread(evaluations: &[PointEvaluation], kind: CriterionKind) -> f64 {
    let (lo, hi) = evaluations
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), e| {
            (lo.min(e.value(kind)), hi.max(e.value(kind)))
        });
    hi - lo
}

/// Median of a criterion over the scanned points (mean of the middle two for
/// even counts).
pub fn criterion_median(evaluations: &[PointEvaluation], kind: CriterionKind) -> f64 {
    let mut v: Vec<f64> = evaluations.iter().map(|e| e.value(kind)).collect();
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m == 0 {
        return f64::NAN;
    }
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hedging::PricePath;

    fn ledger(residuals: Vec<f64>) -> ResidualLedger {
        let accumulated = residuals.iter().sum();
        ResidualLedger {
            u: 1.1,
            d: 0.9,
            r: 0.0,
            setup_costs: vec![0.0; residuals.len() + 1],
            liquidations: vec![0.0; residuals.len()],
            positions: vec![],
            residuals,
            accumulated,
            max_dual_gap: 0.0,
        }
    }

    #[test]
    fn criterion_examples() {
        let all_positive = vec![ledger(vec![0.1, 0.3]), ledger(vec![0.2, 0.01])];
        let v = evaluate_criterion(CriterionKind::ProbPositiveProfit, &all_positive, 0.0).unwrap();
        assert_eq!(v.value, 1.0);
        assert_eq!(v.direction, Direction::Maximize);

        let one = vec![ledger(vec![0.1, 0.2])];
        let v = evaluate_criterion(CriterionKind::ExpectedShortfall, &one, 0.0).unwrap();
        assert!((v.value + 0.1).abs() < 1e-15);
        assert_eq!(v.direction, Direction::Minimize);

        let sq = vec![ledger(vec![1.0, 2.0])];
        assert_eq!(
            evaluate_criterion(CriterionKind::ExpectedSquaredResiduals, &sq, 0.0)
                .unwrap()
                .value,
            5.0
        );
        assert_eq!(
            evaluate_criterion(CriterionKind::ExpectedAccumulatedProfit, &sq, 0.0)
                .unwrap()
                .value,
            3.0
        );
    }

    #[test]
    fn zero_accumulated_counts_as_failure() {
        let ledgers = vec![ledger(vec![1.0, -1.0]), ledger(vec![0.5])];
        let v = evaluate_criterion(CriterionKind::ProbPositiveProfit, &ledgers, 0.0).unwrap();
        assert_eq!(v.value, 0.5);
    }

    #[test]
    fn criterion_errors() {
        assert!(matches!(
            evaluate_criterion(CriterionKind::ProbPositiveProfit, &[], 0.0),
            Err(Error::EmptySample)
        ));
        let mut other = ledger(vec![1.0]);
        other.u = 1.2;
        assert!(matches!(
            evaluate_criterion(
                CriterionKind::ProbPositiveProfit,
                &[ledger(vec![1.0]), other],
                0.0
            ),
            Err(Error::MixedLedgers(_))
        ));
        assert!(matches!(
            evaluate_criterion(
                CriterionKind::ProbPositiveProfit,
                &[ledger(vec![1.0])],
                0.01
            ),
            Err(Error::MixedLedgers(_))
        ));
    }

    #[test]
    fn directions_are_fixed() {
        use CriterionKind::*;
        let dirs: Vec<_> = CriterionKind::ALL.iter().map(|k| k.direction()).collect();
        assert_eq!(
            dirs,
            [
                Direction::Maximize,
                Direction::Minimize,
                Direction::Minimize,
                Direction::Maximize
            ]
        );
        assert_eq!(ProbPositiveProfit.index(), 0);
        assert_eq!(ExpectedAccumulatedProfit.index(), 3);
    }

    fn eval(u: f64, values: [f64; 4]) -> PointEvaluation {
        PointEvaluation {
            u,
            d: 0.9,
            values,
            max_dual_gap: 0.0,
        }
    }

    #[test]
    fn ties_go_to_smallest_u() {
        let evals = vec![
            eval(1.01, [0.5, -0.1, 0.2, 0.3]),
            eval(1.02, [0.9, -0.1, 0.1, 0.3]),
            eval(1.03, [0.9, -0.2, 0.1, 0.1]),
        ];
        let rows = select_optima(&evals, &CriterionKind::ALL);
        let us: Vec<f64> = rows.iter().map(|r| r.u).collect();
        assert_eq!(us, vec![1.02, 1.03, 1.02, 1.01]);
        assert_eq!(rows[1].value, -0.2);
    }

    #[test]
    fn empty_kind_set_gives_no_rows() {
        assert!(select_optima(&[eval(1.01, [0.0; 4])], &[]).is_empty());
    }

    #[test]
    fn median_and_spread() {
        let evals = vec![
            eval(1.01, [0.2, 0.0, 0.0, 1.0]),
            eval(1.02, [0.6, 0.0, 0.0, 3.0]),
            eval(1.03, [0.4, 0.0, 0.0, 2.0]),
        ];
        assert_eq!(
            criterion_median(&evals, CriterionKind::ProbPositiveProfit),
            0.4
        );
        assert_eq!(
            criterion_spread(&evals, CriterionKind::ExpectedAccumulatedProfit),
            2.0
        );
    }

    #[test]
    fn singleton_contour_is_optimal_everywhere() {
        let contour = Contour {
            target_level: 0.02,
            points: vec![(1.03, 0.97)],
            tolerance: 0.0,
        };
        let ensemble: Vec<PricePath> = (0..20)
            .map(|i| {
                PricePath::from_jumps(100.0, vec![1.0 + 0.002 * (i % 7) as f64 - 0.006; 10])
                    .unwrap()
            })
            .collect();
        let terms = ContractTerms::new(10, 100.0, 100.0, 0.0);
        let tag = RunTag {
            option_id: "x".into(),
            seed: 1,
        };
        let report =
            optimize_over_contour(&contour, &ensemble, &terms, &CriterionKind::ALL, &tag).unwrap();
        assert_eq!(report.rows.len(), 4);
        assert!(report.rows.iter().all(|r| (r.u, r.d) == (1.03, 0.97)));
        assert_eq!(report.rows[0].value, 1.0);
        assert_eq!(report.metadata.num_paths, 20);
    }

    #[test]
    fn invalid_pair_is_a_simulation_error() {
        let contour = Contour {
            target_level: 0.02,
            points: vec![(1.005, 0.97)],
            tolerance: 0.0,
        };
        let ensemble = vec![PricePath::from_jumps(100.0, vec![1.0; 5]).unwrap()];
        let terms = ContractTerms::new(5, 100.0, 100.0, 0.01);
        let err = scan_contour(&contour, &ensemble, &terms, Execution::Sequential).unwrap_err();
        assert!(matches!(err, Error::Simulation { u, .. } if u == 1.005));
        assert_eq!(err.exit_code(), 4);
    }
}
