//! Binomial pricing kernel for a European call: the risk-neutral weight, the
//! value function `g_k(u, d, s)` and the no-arbitrage price interval.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported number of remaining periods `n - k`.
pub const MAX_PERIODS: usize = 10_000;

/// Option and market terms that do not depend on the jump pair `(u, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContractTerms {
    /// Periods to expiration.
    pub n: usize,
    pub s0: f64,
    pub strike: f64,
    /// Per-period risk-free rate.
    pub r: f64,
    /// Initial bond price.
    pub b0: f64,
}

impl ContractTerms {
    pub fn new(n: usize, s0: f64, strike: f64, r: f64) -> Self {
        Self {
            n,
            s0,
            strike,
            r,
            b0: 1.0,
        }
    }

    pub fn with_bond(mut self, b0: f64) -> Self {
        self.b0 = b0;
        self
    }

    pub fn with_jumps(&self, u: f64, d: f64) -> Result<ModelParams> {
        ModelParams::from_terms(*self, u, d)
    }
}

/// Fully validated model parameterization. Construction enforces
/// `0 < d < 1 + r < u`, `n >= 1`, positive prices and `r >= 0`; every
/// operation taking a `ModelParams` relies on that.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    u: f64,
    d: f64,
    terms: ContractTerms,
}

impl ModelParams {
    pub fn new(u: f64, d: f64, r: f64, n: usize, s0: f64, strike: f64) -> Result<Self> {
        Self::from_terms(ContractTerms::new(n, s0, strike, r), u, d)
    }

    pub fn from_terms(terms: ContractTerms, u: f64, d: f64) -> Result<Self> {
        let ContractTerms {
            n,
            s0,
            strike,
            r,
            b0,
        } = terms;
        if !(r.is_finite() && r >= 0.0) {
            return Err(Error::domain(format!(
                "rate must be finite and >= 0, got {r}"
            )));
        }
        check_jump_pair(u, d, r)?;
        if n == 0 {
            return Err(Error::domain("horizon n must be at least 1"));
        }
        if n > MAX_PERIODS {
            return Err(Error::HorizonTooLong {
                requested: n,
                max: MAX_PERIODS,
            });
        }
        for (name, v) in [("s0", s0), ("strike", strike), ("b0", b0)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::domain(format!(
                    "{name} must be finite and > 0, got {v}"
                )));
            }
        }
        Ok(Self { u, d, terms })
    }

    pub fn u(&self) -> f64 {
        self.u
    }
    pub fn d(&self) -> f64 {
        self.d
    }
    pub fn r(&self) -> f64 {
        self.terms.r
    }
    pub fn n(&self) -> usize {
        self.terms.n
    }
    pub fn s0(&self) -> f64 {
        self.terms.s0
    }
    pub fn strike(&self) -> f64 {
        self.terms.strike
    }
    pub fn b0(&self) -> f64 {
        self.terms.b0
    }
    pub fn terms(&self) -> &ContractTerms {
        &self.terms
    }

    /// Bond price at period `k`, `b0 (1 + r)^k`.
    pub fn bond(&self, k: usize) -> f64 {
        self.b0() * growth_pow(self.r(), k)
    }

    /// Risk-neutral up-weight `((1 + r) - d) / (u - d)`.
    pub fn p(&self) -> f64 {
        ((1.0 + self.r()) - self.d) / (self.u - self.d)
    }
}

fn check_jump_pair(u: f64, d: f64, r: f64) -> Result<()> {
    let growth = 1.0 + r;
    if !(u.is_finite() && d.is_finite()) {
        return Err(Error::domain(format!("non-finite jump pair ({u}, {d})")));
    }
    if !(d > 0.0 && d < growth && growth < u) {
        return Err(Error::domain(format!(
            "jump pair must satisfy 0 < d < 1 + r < u, got u = {u}, d = {d}, 1 + r = {growth}"
        )));
    }
    Ok(())
}

/// `(1 + r)^k`.
pub(crate) fn growth_pow(r: f64, k: usize) -> f64 {
    if r == 0.0 {
        1.0
    } else {
        (1.0 + r).powi(k as i32)
    }
}

/// Risk-neutral probability `p(u, d) = ((1 + r) - d) / (u - d)`.
pub fn risk_neutral_p(u: f64, d: f64, r: f64) -> Result<f64> {
    check_jump_pair(u, d, r)?;
    Ok(((1.0 + r) - d) / (u - d))
}

/// Binomial probabilities `C(m, j) p^j (1 - p)^(m - j)` for `j = 0..=m`.
///
/// Built by the multiplicative term ratio outward from the mode and then
/// normalized, so neither factorials nor `(1 - p)^m` underflow are an issue.
pub fn binomial_weights(m: usize, p: f64) -> Vec<f64> {
    let mut w = vec![0.0; m + 1];
    let mode = (((m + 1) as f64 * p).floor() as usize).min(m);
    let odds = p / (1.0 - p);
    w[mode] = 1.0;
    for j in mode..m {
        w[j + 1] = w[j] * ((m - j) as f64 / (j + 1) as f64) * odds;
    }
    for j in (1..=mode).rev() {
        w[j - 1] = w[j] * (j as f64 / (m - j + 1) as f64) / odds;
    }
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    w
}

/// Pricing data for a fixed number of remaining periods `m = n - k`.
#[derive(Debug, Clone)]
pub struct LatticeRow {
    weights: Vec<f64>,
    /// `u^j d^(m - j)`, increasing in `j`.
    nodes: Vec<f64>,
    discount: f64,
}

impl LatticeRow {
    pub fn new(params: &ModelParams, m: usize) -> Result<Self> {
        if m > MAX_PERIODS {
            return Err(Error::HorizonTooLong {
                requested: m,
                max: MAX_PERIODS,
            });
        }
        let (ln_u, ln_d) = (params.u().ln(), params.d().ln());
        let nodes = (0..=m)
            .map(|j| {
                if m == 0 {
                    1.0
                } else {
                    (j as f64 * ln_u + (m - j) as f64 * ln_d).exp()
                }
            })
            .collect();
        Ok(Self {
            weights: binomial_weights(m, params.p()),
            nodes,
            discount: 1.0 / growth_pow(params.r(), m),
        })
    }

    /// `(1+r)^{-m} Σ_j w_j (s node_j - K)_+`.
    pub fn value(&self, s: f64, strike: f64) -> f64 {
        let mut acc = 0.0;
        for (w, node) in self.weights.iter().zip(&self.nodes).rev() {
            let payoff = s * node - strike;
            if payoff <= 0.0 {
                break;
            }
            acc += w * payoff;
        }
        acc * self.discount
    }
}

/// Cached rows for every remaining horizon `0..=n` of one parameter set, for
/// repeated evaluation along many paths.
#[derive(Debug, Clone)]
pub struct Lattice {
    params: ModelParams,
    rows: Vec<LatticeRow>,
}

impl Lattice {
    pub fn new(params: &ModelParams) -> Result<Self> {
        let rows = (0..=params.n())
            .map(|m| LatticeRow::new(params, m))
            .collect::<Result<_>>()?;
        Ok(Self {
            params: *params,
            rows,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    /// `g_k(u, d, s)`; `k` must be in `0..=n`.
    pub fn value(&self, k: usize, s: f64) -> f64 {
        self.rows[self.params.n() - k].value(s, self.params.strike())
    }
}

fn check_period(params: &ModelParams, k: usize, s: f64) -> Result<()> {
    if k > params.n() {
        return Err(Error::domain(format!(
            "period {k} outside 0..={}",
            params.n()
        )));
    }
    if !(s.is_finite() && s > 0.0) {
        return Err(Error::domain(format!("stock price must be > 0, got {s}")));
    }
    Ok(())
}

/// Binomial value `g_k(u, d, s)` of the call at period `k` with stock price
/// `s`. At `k = n` this is the payoff `(s - K)_+`.
pub fn option_value(params: &ModelParams, k: usize, s: f64) -> Result<f64> {
    check_period(params, k, s)?;
    Ok(LatticeRow::new(params, params.n() - k)?.value(s, params.strike()))
}

/// Closed interval `[lower, upper]` of no-arbitrage prices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriceInterval {
    pub lower: f64,
    pub upper: f64,
}

impl PriceInterval {
    /// Closed membership; the bounds are attained at `d = D` and `u = U`.
    pub fn contains(&self, x: f64) -> bool {
        self.lower <= x && x <= self.upper
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// No-arbitrage interval at period `k` for stock price `s`, with `params`
/// carrying the support bounds `(U, D)` of the jump distribution.
pub fn no_arbitrage_interval(bounds: &ModelParams, k: usize, s: f64) -> Result<PriceInterval> {
    check_period(bounds, k, s)?;
    let m = bounds.n() - k;
    let growth = growth_pow(bounds.r(), m);
    let lower = (s * growth - bounds.strike()).max(0.0) / growth;
    let upper = option_value(bounds, k, s)?;
    Ok(PriceInterval { lower, upper })
}
