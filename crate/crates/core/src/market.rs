//! Annual multi-asset scenario generator and the market-to-default link.
//!
//! Equity and property follow lognormal annual returns, the long gilt yield
//! is a mean-reverting Gaussian process floored at zero, the credit spread
//! index is an additive random walk floored at zero and inflation is i.i.d.
//! Gaussian. Sponsor default intensity responds to the equity drawdown from
//! its trailing peak through a logistic shift in log-odds.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::validate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MarketConfig {
    pub equity_drift: f64,
    pub equity_vol: f64,
    pub gilt_yield_initial: f64,
    pub gilt_mean_reversion_speed: f64,
    pub gilt_long_run_mean: f64,
    pub gilt_vol: f64,
    /// Basis points.
    pub spread_initial: f64,
    /// Basis points per year.
    pub spread_vol: f64,
    pub property_drift: f64,
    pub property_vol: f64,
    pub inflation_mean: f64,
    pub inflation_vol: f64,
    /// Shift in sponsor default log-odds per unit of equity drawdown.
    pub equity_default_beta: f64,
    /// Years of history the drawdown peak looks back over; the whole path
    /// when absent.
    pub drawdown_window: Option<usize>,
    pub equity_spread_correlation: f64,
    pub equity_property_correlation: f64,
}

impl Default for MarketConfig {
    fn default() -> Self {
        MarketConfig {
            equity_drift: 0.07,
            equity_vol: 0.20,
            gilt_yield_initial: 0.045,
            gilt_mean_reversion_speed: 0.15,
            gilt_long_run_mean: 0.045,
            gilt_vol: 0.008,
            spread_initial: 100.0,
            spread_vol: 30.0,
            property_drift: 0.06,
            property_vol: 0.12,
            inflation_mean: 0.025,
            inflation_vol: 0.01,
            equity_default_beta: 8.0,
            drawdown_window: Some(2),
            equity_spread_correlation: -0.5,
            equity_property_correlation: 0.4,
        }
    }
}

impl MarketConfig {
    /// Every volatility zeroed; paths become deterministic.
    pub fn deterministic(mut self) -> Self {
        self.equity_vol = 0.0;
        self.gilt_vol = 0.0;
        self.spread_vol = 0.0;
        self.property_vol = 0.0;
        self.inflation_vol = 0.0;
        self
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        let k = |name: &str| format!("{prefix}{name}");
        validate::finite(&k("equity_drift"), self.equity_drift)?;
        if self.equity_drift <= -1.0 {
            return Err(Error::config(k("equity_drift"), "must be > -1"));
        }
        validate::non_negative(&k("equity_vol"), self.equity_vol)?;
        validate::finite(&k("gilt_yield_initial"), self.gilt_yield_initial)?;
        validate::non_negative(&k("gilt_mean_reversion_speed"), self.gilt_mean_reversion_speed)?;
        validate::finite(&k("gilt_long_run_mean"), self.gilt_long_run_mean)?;
        validate::non_negative(&k("gilt_vol"), self.gilt_vol)?;
        validate::non_negative(&k("spread_initial"), self.spread_initial)?;
        validate::non_negative(&k("spread_vol"), self.spread_vol)?;
        validate::finite(&k("property_drift"), self.property_drift)?;
        if self.property_drift <= -1.0 {
            return Err(Error::config(k("property_drift"), "must be > -1"));
        }
        validate::non_negative(&k("property_vol"), self.property_vol)?;
        validate::finite(&k("inflation_mean"), self.inflation_mean)?;
        validate::non_negative(&k("inflation_vol"), self.inflation_vol)?;
        validate::finite(&k("equity_default_beta"), self.equity_default_beta)?;
        if self.drawdown_window == Some(0) {
            return Err(Error::config(k("drawdown_window"), "must be ≥ 1 year (got 0)"));
        }
        validate::correlation(&k("equity_spread_correlation"), self.equity_spread_correlation)?;
        validate::correlation(&k("equity_property_correlation"), self.equity_property_correlation)?;
        Ok(())
    }
}

/// One simulated market history at annual resolution. Entry `t` holds the
/// realisation over year `t` (returns) or at the end of year `t` (levels).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarketPath {
    pub years: usize,
    pub equity_total_return: Vec<f64>,
    pub equity_drawdown: Vec<f64>,
    pub gilt_yield: Vec<f64>,
    pub spread_index: Vec<f64>,
    pub property_return: Vec<f64>,
    pub inflation: Vec<f64>,
    /// Gilt yield at the start of year 0.
    pub gilt_yield_start: f64,
}

impl MarketPath {
    /// A path on which every series is constant.
    pub fn flat(years: usize, equity_return: f64, gilt_yield: f64, inflation: f64) -> Self {
        MarketPath {
            years,
            equity_total_return: vec![equity_return; years],
            equity_drawdown: vec![0.0; years],
            gilt_yield: vec![gilt_yield; years],
            spread_index: vec![0.0; years],
            property_return: vec![0.0; years],
            inflation: vec![inflation; years],
            gilt_yield_start: gilt_yield,
        }
    }

    /// Gilt yield prevailing at the start of `year`.
    pub fn opening_yield(&self, year: usize) -> f64 {
        if year == 0 {
            self.gilt_yield_start
        } else {
            self.gilt_yield[year - 1]
        }
    }

    /// Recompute drawdowns from the equity returns. The index opens at 1.
    pub fn recompute_drawdowns(&mut self, window: Option<usize>) {
        self.equity_drawdown = drawdowns(&self.equity_total_return, window);
    }
}

/// Drawdown of the equity index at each year end from its peak over the
/// trailing `window` years (including the opening level of 1 while it is
/// in range); `None` looks back to the start.
pub fn drawdowns(returns: &[f64], window: Option<usize>) -> Vec<f64> {
    let mut levels = Vec::with_capacity(returns.len() + 1);
    levels.push(1.0_f64);
    for r in returns {
        let last = *levels.last().unwrap();
        levels.push(last * (1.0 + r));
    }
    (1..levels.len())
        .map(|i| {
            let from = window.map_or(0, |w| i.saturating_sub(w));
            let peak = levels[from..=i].iter().copied().fold(f64::MIN, f64::max);
            (1.0 - levels[i] / peak).clamp(0.0, 1.0)
        })
        .collect()
}

/// Lognormal annual return with arithmetic mean `drift`. With `vol == 0`
/// the result is `drift` exactly.
pub(crate) fn lognormal_return(drift: f64, vol: f64, z: f64) -> f64 {
    drift + (1.0 + drift) * (vol * z - 0.5 * vol * vol).exp_m1()
}

/// Generate path `index` of the scenario set keyed by `seed`.
pub fn simulate_path(config: &MarketConfig, seed: u64, index: u64, horizon: usize) -> MarketPath {
    let mut rng = rng::stream(seed, Purpose::Market, index);
    let mut equity = Vec::with_capacity(horizon);
    let mut gilt = Vec::with_capacity(horizon);
    let mut spread = Vec::with_capacity(horizon);
    let mut property = Vec::with_capacity(horizon);
    let mut inflation = Vec::with_capacity(horizon);

    let rho_s = config.equity_spread_correlation;
    let rho_p = config.equity_property_correlation;
    let mut y = config.gilt_yield_initial.max(0.0);
    let mut s = config.spread_initial;
    for _ in 0..horizon {
        let z_eq: f64 = rng.sample(StandardNormal);
        let z_gilt: f64 = rng.sample(StandardNormal);
        let z_spread: f64 = rng.sample(StandardNormal);
        let z_prop: f64 = rng.sample(StandardNormal);
        let z_infl: f64 = rng.sample(StandardNormal);

        equity.push(lognormal_return(config.equity_drift, config.equity_vol, z_eq));

        y = (y + config.gilt_mean_reversion_speed * (config.gilt_long_run_mean - y) + config.gilt_vol * z_gilt)
            .max(0.0);
        gilt.push(y);

        let zs = rho_s * z_eq + (1.0 - rho_s * rho_s).sqrt() * z_spread;
        s = (s + config.spread_vol * zs).max(0.0);
        spread.push(s);

        let zp = rho_p * z_eq + (1.0 - rho_p * rho_p).sqrt() * z_prop;
        property.push(lognormal_return(config.property_drift, config.property_vol, zp));

        inflation.push(config.inflation_mean + config.inflation_vol * z_infl);
    }

    MarketPath {
        years: horizon,
        equity_drawdown: drawdowns(&equity, config.drawdown_window),
        equity_total_return: equity,
        gilt_yield: gilt,
        spread_index: spread,
        property_return: property,
        inflation,
        gilt_yield_start: config.gilt_yield_initial.max(0.0),
    }
}

/// Generate `n_paths` independent paths. Path `i` depends only on
/// `(config, seed, i)`, so the result is identical for any thread count.
pub fn simulate_paths(config: &MarketConfig, seed: u64, n_paths: usize, horizon: usize) -> Result<Vec<MarketPath>> {
    config.validate("market.")?;
    if n_paths == 0 {
        return Err(Error::config("n_paths", "must be ≥ 1 (got 0)"));
    }
    if horizon == 0 {
        return Err(Error::config("horizon", "must be ≥ 1 (got 0)"));
    }
    Ok((0..n_paths as u64)
        .into_par_iter()
        .map(|i| simulate_path(config, seed, i, horizon))
        .collect())
}

fn log_odds(p: f64) -> f64 {
    (p / (1.0 - p)).ln()
}

/// Logistic link: `logit(p) = logit(base_pd) + beta * drawdown`.
pub fn default_probability(base_pd: f64, drawdown: f64, beta: f64) -> Result<f64> {
    if !(base_pd > 0.0 && base_pd < 1.0) {
        return Err(Error::Domain(format!("base_pd must lie in (0,1), got {base_pd}")));
    }
    let shift = beta * drawdown;
    if shift == 0.0 {
        return Ok(base_pd);
    }
    let p = 1.0 / (1.0 + (-(log_odds(base_pd) + shift)).exp());
    Ok(p.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON))
}

pub fn sponsor_default_probability(base_pd: f64, path: &MarketPath, year: usize, beta: f64) -> Result<f64> {
    if year >= path.years {
        return Err(Error::Domain(format!(
            "year {year} outside path of {} years",
            path.years
        )));
    }
    default_probability(base_pd, path.equity_drawdown[year], beta)
}
