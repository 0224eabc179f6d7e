//! The guarantee as a European put on scheme assets struck at the
//! guaranteed liability, valued in closed form and by an independent
//! Monte Carlo estimator, and combined with sponsor default.

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{Error, Result};
use crate::market::{self, MarketConfig};
use crate::rng::{self, Purpose};
use crate::validate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PutInputs {
    pub assets: f64,
    pub strike_liability: f64,
    pub asset_vol: f64,
    pub risk_free_rate: f64,
    /// Years; one annual levy cycle by default.
    #[serde(default = "default_horizon")]
    pub horizon: f64,
}

fn default_horizon() -> f64 {
    1.0
}

impl PutInputs {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        let k = |name: &str| format!("{prefix}{name}");
        validate::non_negative(&k("assets"), self.assets)?;
        validate::positive(&k("strike_liability"), self.strike_liability)?;
        validate::non_negative(&k("asset_vol"), self.asset_vol)?;
        validate::finite(&k("risk_free_rate"), self.risk_free_rate)?;
        validate::positive(&k("horizon"), self.horizon)
    }

    pub fn funding_ratio(&self) -> f64 {
        self.assets / self.strike_liability
    }

    fn discounted_strike(&self) -> f64 {
        self.strike_liability * (-self.risk_free_rate * self.horizon).exp()
    }
}

/// Asset volatility implied by the equity allocation when no direct figure
/// is available: the bond sleeve is treated as riskless against the strike.
pub fn asset_vol_from_equity(equity_share: f64, equity_vol: f64) -> f64 {
    equity_share * equity_vol
}

fn std_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal")
}

fn d1_d2(p: &PutInputs) -> (f64, f64) {
    let sd = p.asset_vol * p.horizon.sqrt();
    let d1 =
        ((p.assets / p.strike_liability).ln() + (p.risk_free_rate + 0.5 * p.asset_vol * p.asset_vol) * p.horizon) / sd;
    (d1, d1 - sd)
}

pub fn put_value_closed_form(p: &PutInputs) -> f64 {
    let pv_k = p.discounted_strike();
    if p.asset_vol == 0.0 || p.assets == 0.0 {
        return (pv_k - p.assets).max(0.0);
    }
    let n = std_normal();
    let (d1, d2) = d1_d2(p);
    pv_k * n.cdf(-d2) - p.assets * n.cdf(-d1)
}

/// Companion call on the same inputs, for parity checks.
pub fn call_value_closed_form(p: &PutInputs) -> f64 {
    let pv_k = p.discounted_strike();
    if p.asset_vol == 0.0 || p.assets == 0.0 {
        return (p.assets - pv_k).max(0.0);
    }
    let n = std_normal();
    let (d1, d2) = d1_d2(p);
    p.assets * n.cdf(d1) - pv_k * n.cdf(d2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct McEstimate {
    pub value: f64,
    pub std_error: f64,
}

const BLOCK: usize = 16_384;

/// Plain Monte Carlo estimate of the discounted expected shortfall
/// `max(0, strike - A_T)` under lognormal asset growth at the risk-free
/// rate. Samples are drawn in fixed blocks keyed by `(seed, block)` and
/// reduced in block order, so the estimate does not depend on threading.
pub fn put_value_monte_carlo(p: &PutInputs, seed: u64, n_samples: usize) -> Result<McEstimate> {
    if n_samples == 0 {
        return Err(Error::config("n_samples", "must be ≥ 1 (got 0)"));
    }
    let disc = (-p.risk_free_rate * p.horizon).exp();
    let drift = (p.risk_free_rate - 0.5 * p.asset_vol * p.asset_vol) * p.horizon;
    let sd = p.asset_vol * p.horizon.sqrt();
    if sd == 0.0 {
        // degenerate terminal distribution: discounted assets stay at spot
        return Ok(McEstimate {
            value: (p.strike_liability * disc - p.assets).max(0.0),
            std_error: 0.0,
        });
    }
    let n_blocks = n_samples.div_ceil(BLOCK);

    let partials: Vec<(f64, f64)> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(seed, Purpose::PutOracle, b as u64);
            let len = BLOCK.min(n_samples - b * BLOCK);
            let (mut s, mut s2) = (0.0, 0.0);
            for _ in 0..len {
                let z: f64 = rng.sample(StandardNormal);
                let terminal = p.assets * (drift + sd * z).exp();
                let payoff = disc * (p.strike_liability - terminal).max(0.0);
                s += payoff;
                s2 += payoff * payoff;
            }
            (s, s2)
        })
        .collect();

    let (sum, sum_sq) = partials.iter().fold((0.0, 0.0), |(a, b), (s, s2)| (a + s, b + s2));
    let n = n_samples as f64;
    let mean = sum / n;
    let var = if n_samples > 1 {
        ((sum_sq - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    let std_error = if sd == 0.0 { 0.0 } else { (var / n).sqrt() };
    Ok(McEstimate { value: mean, std_error })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossMode {
    /// Default and shortfall independent: `pd × put`.
    #[default]
    Independent,
    /// Default intensity and asset shortfall share the equity driver.
    Joint,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct JointConfig {
    pub market: MarketConfig,
    pub seed: u64,
    pub samples: usize,
}

/// Output of the joint estimator alongside the marginal estimates taken
/// from the same samples.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct JointLoss {
    /// `E[p · S]`, mean discounted loss with shared driver.
    pub joint: f64,
    pub std_error: f64,
    /// `E[p]`.
    pub mean_pd: f64,
    /// `E[S]`.
    pub mean_shortfall: f64,
}

impl JointLoss {
    /// `E[p] · E[S]`: the loss were default independent of the shortfall.
    pub fn product_of_marginals(&self) -> f64 {
        self.mean_pd * self.mean_shortfall
    }
}

pub fn guarantee_expected_loss(put: &PutInputs, pd: f64, mode: LossMode, joint: Option<&JointConfig>) -> Result<f64> {
    if !(0.0..=1.0).contains(&pd) {
        return Err(Error::Domain(format!("pd must lie in [0,1], got {pd}")));
    }
    match mode {
        LossMode::Independent => Ok(pd * put_value_closed_form(put)),
        LossMode::Joint => {
            let cfg = joint.ok_or_else(|| Error::config("joint", "joint mode requires a market configuration"))?;
            Ok(joint_expected_loss(put, pd, cfg)?.joint)
        }
    }
}

/// Joint Monte Carlo: each sample runs annual equity shocks over the
/// horizon. Scheme assets carry `asset_vol` on the same shocks under the
/// risk-neutral drift; the sponsor's default probability is the base `pd`
/// shifted by the worst equity drawdown seen over the horizon.
pub fn joint_expected_loss(put: &PutInputs, pd: f64, cfg: &JointConfig) -> Result<JointLoss> {
    put.validate("put.")?;
    cfg.market.validate("joint.market.")?;
    if cfg.samples == 0 {
        return Err(Error::config("joint.samples", "must be ≥ 1 (got 0)"));
    }
    if !(0.0..=1.0).contains(&pd) {
        return Err(Error::Domain(format!("pd must lie in [0,1], got {pd}")));
    }
    let steps = (put.horizon.ceil() as usize).max(1);
    let dt = put.horizon / steps as f64;
    let r = put.risk_free_rate;
    let sa = put.asset_vol;
    let se = cfg.market.equity_vol;
    let beta = cfg.market.equity_default_beta;
    let disc = (-r * put.horizon).exp();
    let n_blocks = cfg.samples.div_ceil(BLOCK);

    let partials: Vec<[f64; 4]> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng::stream(cfg.seed, Purpose::JointLoss, b as u64);
            let len = BLOCK.min(cfg.samples - b * BLOCK);
            let mut acc = [0.0; 4];
            let mut equity = vec![0.0; steps];
            for _ in 0..len {
                let mut log_a = put.assets.ln();
                for e in equity.iter_mut() {
                    let z: f64 = rng.sample(StandardNormal);
                    log_a += (r - 0.5 * sa * sa) * dt + sa * dt.sqrt() * z;
                    *e = ((r - 0.5 * se * se) * dt + se * dt.sqrt() * z).exp_m1();
                }
                let max_dd = market::drawdowns(&equity, cfg.market.drawdown_window)
                    .into_iter()
                    .fold(0.0, f64::max);
                let p = if pd == 0.0 || pd == 1.0 {
                    pd
                } else {
                    market::default_probability(pd, max_dd, beta)?
                };
                let shortfall = disc * (put.strike_liability - log_a.exp()).max(0.0);
                acc[0] += p * shortfall;
                acc[1] += (p * shortfall).powi(2);
                acc[2] += p;
                acc[3] += shortfall;
            }
            Ok(acc)
        })
        .collect::<Result<_>>()?;

    let mut total = [0.0; 4];
    for part in &partials {
        for (t, v) in total.iter_mut().zip(part) {
            *t += v;
        }
    }
    let n = cfg.samples as f64;
    let mean = total[0] / n;
    let var = if cfg.samples > 1 {
        ((total[1] - n * mean * mean) / (n - 1.0)).max(0.0)
    } else {
        0.0
    };
    Ok(JointLoss {
        joint: mean,
        std_error: (var / n).sqrt(),
        mean_pd: total[2] / n,
        mean_shortfall: total[3] / n,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn inputs(assets: f64, strike: f64, vol: f64, rate: f64, t: f64) -> PutInputs {
        PutInputs {
            assets,
            strike_liability: strike,
            asset_vol: vol,
            risk_free_rate: rate,
            horizon: t,
        }
    }

    #[test]
    fn zero_vol_limits() {
        assert_eq!(put_value_closed_form(&inputs(100.0, 100.0, 0.0, 0.0, 1.0)), 0.0);
        assert_eq!(put_value_closed_form(&inputs(50.0, 100.0, 0.0, 0.0, 1.0)), 50.0);
        let mc = put_value_monte_carlo(&inputs(50.0, 100.0, 0.0, 0.0, 1.0), 1, 1000).unwrap();
        assert_eq!(mc.value, 50.0);
        assert_eq!(mc.std_error, 0.0);
        let p = inputs(60.0, 100.0, 0.0, 0.03, 5.0);
        let mc = put_value_monte_carlo(&p, 1, 10).unwrap();
        assert_eq!(mc.value, put_value_closed_form(&p));
        assert_eq!(mc.value, 100.0 * (-0.15f64).exp() - 60.0);
    }

    #[test]
    fn monte_carlo_is_deterministic() {
        let p = inputs(80.0, 100.0, 0.2, 0.02, 1.0);
        assert_eq!(
            put_value_monte_carlo(&p, 9, 50_000).unwrap(),
            put_value_monte_carlo(&p, 9, 50_000).unwrap()
        );
    }

    #[test]
    fn closed_form_matches_oracle_at_reference_point() {
        let p = inputs(80.0, 100.0, 0.2, 0.02, 1.0);
        let mc = put_value_monte_carlo(&p, 2024, 1_000_000).unwrap();
        let cf = put_value_closed_form(&p);
        assert!((cf - mc.value).abs() <= 3.0 * mc.std_error, "cf {cf} mc {mc:?}");
    }

    #[test]
    fn put_call_parity() {
        let p = inputs(87.0, 100.0, 0.23, 0.03, 2.5);
        let lhs = call_value_closed_form(&p) - put_value_closed_form(&p);
        let rhs = p.assets - p.discounted_strike();
        assert_relative_eq!(lhs, rhs, max_relative = 1e-9);
    }

    #[test]
    fn expected_loss_examples() {
        let p = inputs(80.0, 100.0, 0.0, 0.0, 1.0);
        assert_eq!(
            guarantee_expected_loss(&p, 0.0, LossMode::Independent, None).unwrap(),
            0.0
        );
        assert_eq!(
            guarantee_expected_loss(&p, 1.0, LossMode::Independent, None).unwrap(),
            20.0
        );
        assert!(matches!(
            guarantee_expected_loss(&p, 0.5, LossMode::Joint, None),
            Err(Error::Config { .. })
        ));
    }
}
