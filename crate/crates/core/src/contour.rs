//! Normalized value surface `c_0(u, d) = g_0(u, d, s_0) / s_0` and its level
//! set at the market-implied level `c* = x_0 / s_0`.
//!
//! The level set is traced column by column: for each `u` on a uniform grid
//! the equation `c_0(u, d) = c*` is solved for `d` by bisection, using that
//! `c_0` decreases in `d` at fixed `u`.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::par::Execution;
use crate::pricing::{LatticeRow, ModelParams};

pub const DEFAULT_GRID_SIZE: usize = 90;
pub const DEFAULT_U_MAX: f64 = 1.10;
pub const DEFAULT_D_MIN: f64 = 0.90;
pub const DEFAULT_EPSILON: f64 = 1e-6;

/// Every contour point satisfies `|c_0(u, d) - c*| <= LEVEL_TOLERANCE`.
pub const LEVEL_TOLERANCE: f64 = 1e-8;
/// Level accuracy at which bisection stops. Tighter than [`LEVEL_TOLERANCE`]
/// so that `d` itself is accurate to about 1e-8 where `c_0` is flat in `d`.
pub const BISECTION_TOLERANCE: f64 = 1e-13;
/// Bracket width at which bisection stops.
pub const WIDTH_TOLERANCE: f64 = 1e-12;

/// Domain of the value surface. The `u` range is `[1 + r + eps_u, u_max]`,
/// the `d` range is `[d_min, 1 + r - eps_d]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SurfaceSpec {
    pub n: usize,
    /// Moneyness `K / s_0`.
    pub moneyness: f64,
    pub r: f64,
    pub u_max: f64,
    pub d_min: f64,
    pub eps_u: f64,
    pub eps_d: f64,
}

impl SurfaceSpec {
    pub fn new(n: usize, moneyness: f64, r: f64) -> Result<Self> {
        Self {
            n,
            moneyness,
            r,
            u_max: DEFAULT_U_MAX,
            d_min: DEFAULT_D_MIN,
            eps_u: DEFAULT_EPSILON,
            eps_d: DEFAULT_EPSILON,
        }
        .validated()
    }

    pub fn with_u_max(mut self, u_max: f64) -> Result<Self> {
        self.u_max = u_max;
        self.validated()
    }

    pub fn with_d_min(mut self, d_min: f64) -> Result<Self> {
        self.d_min = d_min;
        self.validated()
    }

    pub fn with_epsilons(mut self, eps_u: f64, eps_d: f64) -> Result<Self> {
        self.eps_u = eps_u;
        self.eps_d = eps_d;
        self.validated()
    }

    fn validated(self) -> Result<Self> {
        if self.n == 0 {
            return Err(Error::domain("surface horizon must be at least 1"));
        }
        if !(self.moneyness.is_finite() && self.moneyness > 0.0) {
            return Err(Error::domain(format!(
                "moneyness must be > 0, got {}",
                self.moneyness
            )));
        }
        if !(self.r.is_finite() && self.r >= 0.0) {
            return Err(Error::domain(format!("rate must be >= 0, got {}", self.r)));
        }
        if !(self.eps_u > 0.0 && self.eps_d > 0.0) {
            return Err(Error::domain("range epsilons must be > 0"));
        }
        let (u_lo, u_hi) = self.u_range();
        let (d_lo, d_hi) = self.d_range();
        if !(0.0 < d_lo && d_lo < d_hi && u_lo < u_hi) {
            return Err(Error::domain(format!(
                "empty search ranges: u in [{u_lo}, {u_hi}], d in [{d_lo}, {d_hi}]"
            )));
        }
        Ok(self)
    }

    pub fn u_range(&self) -> (f64, f64) {
        (1.0 + self.r + self.eps_u, self.u_max)
    }

    pub fn d_range(&self) -> (f64, f64) {
        (self.d_min, 1.0 + self.r - self.eps_d)
    }

    /// Uniform grid of `size` points spanning the `u` range, both ends included.
    pub fn u_grid(&self, size: usize) -> Vec<f64> {
        let (lo, hi) = self.u_range();
        if size == 1 {
            return vec![hi];
        }
        (0..size)
            .map(|i| lo + (hi - lo) * i as f64 / (size - 1) as f64)
            .collect()
    }

    pub fn d_grid(&self, size: usize) -> Vec<f64> {
        let (lo, hi) = self.d_range();
        if size == 1 {
            return vec![lo];
        }
        (0..size)
            .map(|i| lo + (hi - lo) * i as f64 / (size - 1) as f64)
            .collect()
    }

    fn contains(&self, u: f64, d: f64) -> bool {
        let (u_lo, u_hi) = self.u_range();
        let (d_lo, d_hi) = self.d_range();
        u_lo <= u && u <= u_hi && d_lo <= d && d <= d_hi
    }

    fn unit_params(&self, u: f64, d: f64) -> Result<ModelParams> {
        ModelParams::new(u, d, self.r, self.n, 1.0, self.moneyness)
    }

    fn value_unchecked(&self, u: f64, d: f64) -> f64 {
        let params = self
            .unit_params(u, d)
            .expect("surface ranges keep (u, d) valid");
        LatticeRow::new(&params, self.n)
            .expect("horizon validated")
            .value(1.0, self.moneyness)
    }
}

/// `c_0(u, d)`: the time-0 call value per unit of spot.
pub fn surface_value(spec: &SurfaceSpec, u: f64, d: f64) -> Result<f64> {
    if !spec.contains(u, d) {
        let (u_lo, u_hi) = spec.u_range();
        let (d_lo, d_hi) = spec.d_range();
        return Err(Error::domain(format!(
            "({u}, {d}) outside u in [{u_lo}, {u_hi}], d in [{d_lo}, {d_hi}]"
        )));
    }
    Ok(spec.value_unchecked(u, d))
}

/// Solves `c_0(u, d) = c*` for `d` in the surface's `d` range, if the level is
/// bracketed in that column.
pub fn solve_d_for_u(spec: &SurfaceSpec, u: f64, c_star: f64) -> Option<f64> {
    let (u_lo, u_hi) = spec.u_range();
    if !(u_lo <= u && u <= u_hi) {
        return None;
    }
    let (mut lo, mut hi) = spec.d_range();
    let f = |d: f64| spec.value_unchecked(u, d) - c_star;
    // f decreases in d: need f(lo) >= 0 >= f(hi).
    let (f_lo, f_hi) = (f(lo), f(hi));
    if f_lo.abs() <= BISECTION_TOLERANCE {
        return Some(lo);
    }
    if f_hi.abs() <= BISECTION_TOLERANCE {
        return Some(hi);
    }
    if f_lo < 0.0 || f_hi > 0.0 {
        return None;
    }
    loop {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid.abs() <= BISECTION_TOLERANCE {
            return Some(mid);
        }
        if f_mid > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= WIDTH_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            return (f(mid).abs() <= LEVEL_TOLERANCE).then_some(mid);
        }
    }
}

/// Market-calibrated contour: `(u, d)` pairs with `c_0(u, d) = c*`, strictly
/// increasing in `u`.
#[derive(Debug, Clone, PartialEq)]
pub struct Contour {
    pub target_level: f64,
    pub points: Vec<(f64, f64)>,
    /// Largest `|c_0(u, d) - c*|` over the points.
    pub tolerance: f64,
}

impl Contour {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Two-column `u<TAB>d` table with a `#` header line.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("# u\td\n");
        for (u, d) in &self.points {
            let _ = writeln!(out, "{u}\t{d}");
        }
        out
    }
}

pub fn extract_contour(spec: &SurfaceSpec, c_star: f64, grid_size: usize) -> Result<Contour> {
    extract_contour_with(spec, c_star, grid_size, Execution::default())
}

pub fn extract_contour_with(
    spec: &SurfaceSpec,
    c_star: f64,
    grid_size: usize,
    exec: Execution,
) -> Result<Contour> {
    if !(c_star.is_finite() && c_star > 0.0) {
        return Err(Error::domain(format!(
            "target level must be > 0, got {c_star}"
        )));
    }
    if grid_size < 2 {
        return Err(Error::domain(format!(
            "grid size must be >= 2, got {grid_size}"
        )));
    }
    let grid = spec.u_grid(grid_size);
    let solutions = exec.map_indexed(grid.len(), |i| {
        solve_d_for_u(spec, grid[i], c_star).map(|d| (grid[i], d))
    });
    let points: Vec<(f64, f64)> = solutions.into_iter().flatten().collect();
    if points.is_empty() {
        return Err(Error::EmptyContour { c_star });
    }
    let tolerance = points
        .iter()
        .map(|&(u, d)| (spec.value_unchecked(u, d) - c_star).abs())
        .fold(0.0, f64::max);
    Ok(Contour {
        target_level: c_star,
        points,
        tolerance,
    })
}

/// `u<TAB>d<TAB>c0` samples over a `size x size` grid of the surface domain.
pub fn surface_samples_tsv(spec: &SurfaceSpec, size: usize, exec: Execution) -> String {
    let us = spec.u_grid(size);
    let ds = spec.d_grid(size);
    let rows = exec.map_indexed(us.len(), |i| {
        let mut block = String::new();
        for &d in &ds {
            let _ = writeln!(
                block,
                "{}\t{}\t{}",
                us[i],
                d,
                spec.value_unchecked(us[i], d)
            );
        }
        block
    });
    let mut out = String::from("# u\td\tc0\n");
    rows.iter().for_each(|b| out.push_str(b));
    out
}
