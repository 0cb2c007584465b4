//! Dynamic `(gamma, beta)` hedge built from a jump pair `(u, d)`, rebalanced
//! along a realized price path without self-financing. Each rebalance
//! liquidates the previous portfolio, sets up the next one and withdraws (or
//! injects) the difference as the residual `delta_k`.

use crate::error::{Error, Result};
use crate::pricing::{growth_pow, option_value, Lattice, ModelParams};

/// Stock prices `s_0..s_n` with their jumps `xi_k = s_k / s_{k-1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct PricePath {
    prices: Vec<f64>,
    jumps: Vec<f64>,
}

impl PricePath {
    pub fn from_prices(prices: Vec<f64>) -> Result<Self> {
        if prices.len() < 2 {
            return Err(Error::domain("a price path needs at least two prices"));
        }
        if let Some(k) = prices.iter().position(|s| !(s.is_finite() && *s > 0.0)) {
            return Err(Error::domain(format!(
                "price at period {k} must be finite and > 0, got {}",
                prices[k]
            )));
        }
        let jumps = prices.windows(2).map(|w| w[1] / w[0]).collect();
        Ok(Self { prices, jumps })
    }

    /// Builds `s_k = s_{k-1} xi_k` from `s0`.
    pub fn from_jumps(s0: f64, jumps: Vec<f64>) -> Result<Self> {
        if !(s0.is_finite() && s0 > 0.0) {
            return Err(Error::domain(format!(
                "initial price must be > 0, got {s0}"
            )));
        }
        if jumps.is_empty() {
            return Err(Error::domain("a price path needs at least one jump"));
        }
        let mut prices = Vec::with_capacity(jumps.len() + 1);
        prices.push(s0);
        let mut s = s0;
        for (i, &xi) in jumps.iter().enumerate() {
            if !(xi.is_finite() && xi > 0.0) {
                return Err(Error::domain(format!(
                    "jump at period {} must be finite and > 0, got {xi}",
                    i + 1
                )));
            }
            s *= xi;
            prices.push(s);
        }
        Ok(Self { prices, jumps })
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    /// `jumps()[k - 1]` is `xi_k`.
    pub fn jumps(&self) -> &[f64] {
        &self.jumps
    }

    /// Number of periods `n`.
    pub fn horizon(&self) -> usize {
        self.jumps.len()
    }

    /// Periods whose jump falls outside `range` (exclusive bounds).
    pub fn jumps_outside(&self, range: SanityRange) -> Vec<usize> {
        self.jumps
            .iter()
            .enumerate()
            .filter(|(_, &xi)| !range.contains(xi))
            .map(|(i, _)| i + 1)
            .collect()
    }
}

/// Plausible range for one-period jumps. Values outside it are reported as a
/// data-quality warning and never rejected.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SanityRange {
    pub lo: f64,
    pub hi: f64,
}

impl Default for SanityRange {
    fn default() -> Self {
        Self { lo: 0.5, hi: 2.0 }
    }
}

impl SanityRange {
    pub fn contains(&self, xi: f64) -> bool {
        self.lo < xi && xi < self.hi
    }
}

/// Holding of `gamma` stocks and `beta` bonds set up at period `k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PortfolioPosition {
    pub gamma: f64,
    pub beta: f64,
    pub k: usize,
}

/// Marks a position to market: `gamma s + beta b`.
pub fn replication_value(pos: &PortfolioPosition, s: f64, b: f64) -> f64 {
    pos.gamma * s + pos.beta * b
}

#[allow(clippy::too_many_arguments)]
fn weights_from_values(
    k: usize,
    s_k: f64,
    b_k: f64,
    u: f64,
    d: f64,
    r: f64,
    up: f64,
    down: f64,
) -> PortfolioPosition {
    PortfolioPosition {
        gamma: (up - down) / (s_k * (u - d)),
        beta: (u * down - d * up) / ((1.0 + r) * b_k * (u - d)),
        k,
    }
}

/// Hedge portfolio held over period `k -> k + 1`, for `k` in `0..n`.
pub fn hedge_weights(
    params: &ModelParams,
    k: usize,
    s_k: f64,
    b_k: f64,
) -> Result<PortfolioPosition> {
    if k >= params.n() {
        return Err(Error::domain(format!(
            "hedge period {k} outside 0..{}",
            params.n()
        )));
    }
    for (name, v) in [("stock price", s_k), ("bond price", b_k)] {
        if !(v.is_finite() && v > 0.0) {
            return Err(Error::domain(format!("{name} must be > 0, got {v}")));
        }
    }
    let up = option_value(params, k + 1, s_k * params.u())?;
    let down = option_value(params, k + 1, s_k * params.d())?;
    Ok(weights_from_values(
        k,
        s_k,
        b_k,
        params.u(),
        params.d(),
        params.r(),
        up,
        down,
    ))
}

fn residual_from_values(u: f64, d: f64, xi: f64, down: f64, up: f64, realized: f64) -> f64 {
    (u - xi) / (u - d) * down + (xi - d) / (u - d) * up - realized
}

/// Residual at rebalance `k` (in `1..=n`) after the jump `xi` from `s_prev`.
///
/// `xi` may lie outside `[d, u]`; the residual is then typically negative.
pub fn step_residual(params: &ModelParams, k: usize, s_prev: f64, xi: f64) -> Result<f64> {
    if k == 0 || k > params.n() {
        return Err(Error::domain(format!(
            "rebalance period {k} outside 1..={}",
            params.n()
        )));
    }
    if !(s_prev.is_finite() && s_prev > 0.0 && xi.is_finite() && xi > 0.0) {
        return Err(Error::domain(format!(
            "need s_prev > 0 and xi > 0, got {s_prev} and {xi}"
        )));
    }
    let (u, d) = (params.u(), params.d());
    let down = option_value(params, k, s_prev * d)?;
    let up = option_value(params, k, s_prev * u)?;
    let realized = option_value(params, k, s_prev * xi)?;
    Ok(residual_from_values(u, d, xi, down, up, realized))
}

/// Residuals compounded to maturity: `Σ_k δ_k (1 + r)^(n - k)`.
pub fn accumulate_residuals(residuals: &[f64], r: f64) -> f64 {
    let n = residuals.len();
    if r == 0.0 {
        return residuals.iter().sum();
    }
    residuals
        .iter()
        .enumerate()
        .map(|(i, delta)| delta * growth_pow(r, n - (i + 1)))
        .sum()
}

/// Outcome of hedging one path with one `(u, d)` pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ResidualLedger {
    pub u: f64,
    pub d: f64,
    pub r: f64,
    /// `δ_1..δ_n`; `residuals[k - 1]` is `δ_k`.
    pub residuals: Vec<f64>,
    /// Set-up costs `x̄_0..x̄_n`; the last entry is the payoff `(s_n - K)_+`,
    /// so `liquidations[k - 1] - setup_costs[k]` is `δ_k`.
    pub setup_costs: Vec<f64>,
    /// Liquidation values `v_1..v_n`.
    pub liquidations: Vec<f64>,
    /// Positions held over periods `0..n`.
    pub positions: Vec<PortfolioPosition>,
    /// Accumulated residual `Δ_n`.
    pub accumulated: f64,
    /// Largest gap between the closed-form residual and the portfolio
    /// arithmetic `v_k - x̄_k` over the path.
    pub max_dual_gap: f64,
}

impl ResidualLedger {
    /// `max_k(-δ_k)`, the worst single-period cash infusion.
    pub fn worst_shortfall(&self) -> f64 {
        self.residuals
            .iter()
            .map(|d| -d)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sum_squared(&self) -> f64 {
        self.residuals.iter().map(|d| d * d).sum()
    }
}

/// Rebalances the `(u, d)` hedge along `path`, recording liquidation values,
/// set-up costs and residuals.
pub fn simulate_hedge(params: &ModelParams, path: &PricePath) -> Result<ResidualLedger> {
    let lattice = Lattice::new(params)?;
    simulate_with_lattice(&lattice, path)
}

/// [`simulate_hedge`] with a prebuilt lattice, for many paths under one pair.
pub fn simulate_with_lattice(lattice: &Lattice, path: &PricePath) -> Result<ResidualLedger> {
    let params = lattice.params();
    let n = params.n();
    if path.prices().len() != n + 1 {
        return Err(Error::PathLength {
            expected: n + 1,
            actual: path.prices().len(),
        });
    }
    let (u, d, r) = (params.u(), params.d(), params.r());
    let prices = path.prices();

    let mut residuals = Vec::with_capacity(n);
    let mut setup_costs = Vec::with_capacity(n + 1);
    let mut liquidations = Vec::with_capacity(n);
    let mut positions = Vec::with_capacity(n);
    let mut max_dual_gap = 0.0f64;

    setup_costs.push(lattice.value(0, prices[0]));
    let mut bond = params.b0();
    // Option values one period ahead at s_k u and s_k d, shared by the hedge
    // weights at k and the residual at k + 1.
    let mut up = lattice.value(1, prices[0] * u);
    let mut down = lattice.value(1, prices[0] * d);
    positions.push(weights_from_values(0, prices[0], bond, u, d, r, up, down));

    for k in 1..=n {
        let s_prev = prices[k - 1];
        let s_k = prices[k];
        let xi = path.jumps()[k - 1];
        bond *= 1.0 + r;

        let held = positions[k - 1];
        let liquidation = replication_value(&held, s_k, bond);
        let setup = lattice.value(k, s_k);
        let realized = lattice.value(k, s_prev * xi);
        let delta = residual_from_values(u, d, xi, down, up, realized);
        let gap = (delta - (liquidation - setup)).abs();
        if !delta.is_finite() || !liquidation.is_finite() {
            return Err(Error::Simulation {
                period: k,
                u,
                d,
                reason: format!("non-finite residual at s_{k} = {s_k} (s_{{k-1}} = {s_prev})"),
            });
        }
        max_dual_gap = max_dual_gap.max(gap);

        residuals.push(delta);
        liquidations.push(liquidation);
        setup_costs.push(setup);

        if k < n {
            up = lattice.value(k + 1, s_k * u);
            down = lattice.value(k + 1, s_k * d);
            positions.push(weights_from_values(k, s_k, bond, u, d, r, up, down));
        }
    }

    let accumulated = accumulate_residuals(&residuals, r);
    Ok(ResidualLedger {
        u,
        d,
        r,
        residuals,
        setup_costs,
        liquidations,
        positions,
        accumulated,
        max_dual_gap,
    })
}
