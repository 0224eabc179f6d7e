//! The guarantee fund's own balance sheet: levy income, claim settlement
//! with sponsor recoveries, compensation outgo and investment returns
//! under the fund's risk-budgeted strategy.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::market::MarketPath;
use crate::scheme::{guaranteed_liability, GuaranteeLevel, Scheme};
use crate::validate;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Allocation {
    pub cash: f64,
    pub global_bonds: f64,
    pub uk_equities: f64,
    pub global_equities: f64,
    pub property: f64,
    pub currency_overlay: f64,
}

impl Default for Allocation {
    fn default() -> Self {
        Allocation {
            cash: 0.20,
            global_bonds: 0.50,
            uk_equities: 0.125,
            global_equities: 0.075,
            property: 0.075,
            currency_overlay: 0.025,
        }
    }
}

impl Allocation {
    fn weights(&self) -> [f64; 6] {
        [
            self.cash,
            self.global_bonds,
            self.uk_equities,
            self.global_equities,
            self.property,
            self.currency_overlay,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FundInvestmentPolicy {
    pub allocation: Allocation,
    /// Maximum ex-ante tracking error against the liability benchmark.
    pub risk_budget: f64,
    /// Tracking error actually run; must not exceed the budget.
    pub tracking_error: f64,
    /// Expected excess return over the liability benchmark.
    pub expected_alpha: f64,
    /// Part of `expected_alpha` expected from active managers.
    pub active_alpha: f64,
    /// Cap on `active_alpha` as a share of `expected_alpha`.
    pub active_share_cap: f64,
    /// Swap overlay matching the asset rate sensitivity to the liabilities.
    pub swap_overlay: bool,
    /// Duration of the global bond sleeve when the overlay is off.
    pub bond_duration: f64,
}

impl Default for FundInvestmentPolicy {
    fn default() -> Self {
        FundInvestmentPolicy {
            allocation: Allocation::default(),
            risk_budget: 0.04,
            tracking_error: 0.04,
            expected_alpha: 0.014,
            active_alpha: 0.0035,
            active_share_cap: 0.25,
            swap_overlay: true,
            bond_duration: 7.0,
        }
    }
}

impl FundInvestmentPolicy {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        let k = |name: &str| format!("{prefix}{name}");
        let a = &self.allocation;
        for (name, w) in [
            "cash",
            "global_bonds",
            "uk_equities",
            "global_equities",
            "property",
            "currency_overlay",
        ]
        .iter()
        .zip(a.weights())
        {
            validate::unit_interval(&k(&format!("allocation.{name}")), w)?;
        }
        validate::sums_to_one(&k("allocation"), &a.weights())?;
        validate::non_negative(&k("risk_budget"), self.risk_budget)?;
        validate::non_negative(&k("tracking_error"), self.tracking_error)?;
        if self.tracking_error > self.risk_budget {
            return Err(Error::config(
                k("tracking_error"),
                format!(
                    "must not exceed risk_budget {} (got {})",
                    self.risk_budget, self.tracking_error
                ),
            ));
        }
        validate::finite(&k("expected_alpha"), self.expected_alpha)?;
        validate::unit_interval(&k("active_share_cap"), self.active_share_cap)?;
        validate::non_negative(&k("active_alpha"), self.active_alpha)?;
        if self.active_alpha > self.active_share_cap * self.expected_alpha.abs() + 1e-15 {
            return Err(Error::config(
                k("active_alpha"),
                format!(
                    "must not exceed active_share_cap × expected_alpha = {} (got {})",
                    self.active_share_cap * self.expected_alpha.abs(),
                    self.active_alpha
                ),
            ));
        }
        validate::non_negative(&k("bond_duration"), self.bond_duration)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct FundConfig {
    pub policy: FundInvestmentPolicy,
    pub initial_assets: f64,
    pub initial_liabilities: f64,
    /// Duration of assumed compensation liabilities; sets the benchmark.
    pub liability_duration: f64,
    /// Annual compensation outgo as a fraction of assumed liabilities;
    /// `1 / (2 × liability_duration)` when absent.
    pub payout_rate: Option<f64>,
    /// Insolvent when assets < (1 + margin) × liabilities.
    pub insolvency_margin: f64,
}

impl Default for FundConfig {
    fn default() -> Self {
        FundConfig {
            policy: FundInvestmentPolicy::default(),
            initial_assets: 0.0,
            initial_liabilities: 0.0,
            liability_duration: 15.0,
            payout_rate: None,
            insolvency_margin: 0.0,
        }
    }
}

impl FundConfig {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        let k = |name: &str| format!("{prefix}{name}");
        self.policy.validate(&k("policy."))?;
        validate::non_negative(&k("initial_assets"), self.initial_assets)?;
        validate::non_negative(&k("initial_liabilities"), self.initial_liabilities)?;
        validate::positive(&k("liability_duration"), self.liability_duration)?;
        if let Some(p) = self.payout_rate {
            validate::unit_interval(&k("payout_rate"), p)?;
        }
        validate::finite(&k("insolvency_margin"), self.insolvency_margin)?;
        if self.insolvency_margin <= -1.0 {
            return Err(Error::config(k("insolvency_margin"), "must be > -1"));
        }
        Ok(())
    }

    pub fn payout_rate(&self) -> f64 {
        self.payout_rate.unwrap_or(1.0 / (2.0 * self.liability_duration))
    }

    pub fn opening_ledger(&self) -> FundLedger {
        let mut l = FundLedger {
            year: 0,
            assets: self.initial_assets,
            assumed_liabilities: self.initial_liabilities,
            levy_income_cum: 0.0,
            claims_cum: 0.0,
            insolvent: false,
        };
        l.insolvent = fund_is_insolvent(&l, self.insolvency_margin);
        l
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FundLedger {
    pub year: usize,
    pub assets: f64,
    pub assumed_liabilities: f64,
    pub levy_income_cum: f64,
    pub claims_cum: f64,
    pub insolvent: bool,
}

impl FundLedger {
    pub fn net_position(&self) -> f64 {
        self.assets - self.assumed_liabilities
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Recovery {
    /// Claim on up to `fraction` of the sponsor's net worth.
    NetWorth { fraction: f64 },
    /// Recover a fixed share of the deficit.
    DeficitFraction { fraction: f64 },
}

impl Default for Recovery {
    fn default() -> Self {
        Recovery::NetWorth { fraction: 0.30 }
    }
}

impl Recovery {
    pub fn validate(&self, key: &str) -> Result<()> {
        match *self {
            Recovery::NetWorth { fraction } | Recovery::DeficitFraction { fraction } => {
                validate::unit_interval(&format!("{key}.fraction"), fraction)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClaimEvent {
    pub year: usize,
    pub scheme_id: String,
    pub ppf_liability_at_entry: f64,
    pub scheme_assets_taken: f64,
    pub recovery: f64,
    pub net_claim: f64,
}

/// Take an underfunded scheme of a defaulted sponsor into the fund.
pub fn settle_claim(scheme: &Scheme, level: GuaranteeLevel, recovery: Recovery, year: usize) -> Result<ClaimEvent> {
    let liability = guaranteed_liability(scheme, level);
    let assets = scheme.assets;
    if assets >= liability {
        return Err(Error::Precondition(format!(
            "scheme {} holds {assets} against guaranteed liability {liability}; it buys out rather than entering",
            scheme.id
        )));
    }
    let deficit = liability - assets;
    let recovered = match recovery {
        Recovery::NetWorth { fraction } => (fraction * scheme.sponsor.net_worth).min(deficit),
        Recovery::DeficitFraction { fraction } => fraction * deficit,
    };
    Ok(ClaimEvent {
        year,
        scheme_id: scheme.id.clone(),
        ppf_liability_at_entry: liability,
        scheme_assets_taken: assets,
        recovery: recovered,
        net_claim: (liability - assets - recovered).max(0.0),
    })
}

/// Flows behind one year of the ledger.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FundYear {
    pub opening: FundLedger,
    pub closing: FundLedger,
    pub asset_return: f64,
    pub benchmark_return: f64,
    pub levies: f64,
    pub outgo: f64,
    pub acquired: f64,
    pub recoveries: f64,
    pub assumed: f64,
    pub net_claims: f64,
}

impl FundYear {
    /// `assets(t+1) − [assets(t)(1+r) + levies − outgo + acquired + recoveries]`.
    pub fn asset_identity_residual(&self) -> f64 {
        self.closing.assets
            - (self.opening.assets * (1.0 + self.asset_return) + self.levies - self.outgo
                + self.acquired
                + self.recoveries)
    }

    pub fn liability_identity_residual(&self) -> f64 {
        self.closing.assumed_liabilities
            - (self.opening.assumed_liabilities * (1.0 + self.benchmark_return) - self.outgo + self.assumed)
    }
}

/// Return on the duration-matched liability benchmark over `year`.
pub fn liability_benchmark_return(path: &MarketPath, year: usize, duration: f64) -> f64 {
    let y0 = path.opening_yield(year);
    y0 - duration * (path.gilt_yield[year] - y0)
}

/// Advance the ledger one year. `alpha_shock` is a standard normal draw
/// scaling the tracking error when the swap overlay is on.
pub fn fund_step_year(
    ledger: &FundLedger,
    levies: f64,
    claims: &[ClaimEvent],
    cfg: &FundConfig,
    path: &MarketPath,
    year: usize,
    alpha_shock: f64,
) -> Result<FundYear> {
    if year >= path.years {
        return Err(Error::Domain(format!(
            "year {year} outside path of {} years",
            path.years
        )));
    }
    let policy = &cfg.policy;
    let benchmark = liability_benchmark_return(path, year, cfg.liability_duration);
    let asset_return = if policy.swap_overlay {
        benchmark + policy.expected_alpha + policy.tracking_error * alpha_shock
    } else {
        let y0 = path.opening_yield(year);
        let bonds = y0 - policy.bond_duration * (path.gilt_yield[year] - y0);
        let eq = path.equity_total_return[year];
        let a = &policy.allocation;
        a.cash * y0
            + a.global_bonds * bonds
            + (a.uk_equities + a.global_equities) * eq
            + a.property * path.property_return[year]
            + a.currency_overlay * y0
    };

    let outgo = cfg.payout_rate() * ledger.assumed_liabilities;
    let acquired: f64 = claims.iter().map(|c| c.scheme_assets_taken).sum();
    let recoveries: f64 = claims.iter().map(|c| c.recovery).sum();
    let assumed: f64 = claims.iter().map(|c| c.ppf_liability_at_entry).sum();
    let net_claims: f64 = claims.iter().map(|c| c.net_claim).sum();

    let mut closing = FundLedger {
        year: ledger.year + 1,
        assets: ledger.assets * (1.0 + asset_return) + levies - outgo + acquired + recoveries,
        assumed_liabilities: ledger.assumed_liabilities * (1.0 + benchmark) - outgo + assumed,
        levy_income_cum: ledger.levy_income_cum + levies,
        claims_cum: ledger.claims_cum + net_claims,
        insolvent: ledger.insolvent,
    };
    closing.insolvent = fund_is_insolvent(&closing, cfg.insolvency_margin);

    Ok(FundYear {
        opening: ledger.clone(),
        closing,
        asset_return,
        benchmark_return: benchmark,
        levies,
        outgo,
        acquired,
        recoveries,
        assumed,
        net_claims,
    })
}

/// Sticky within a run: once flagged, stays flagged.
pub fn fund_is_insolvent(ledger: &FundLedger, margin: f64) -> bool {
    ledger.insolvent || ledger.assets < (1.0 + margin) * ledger.assumed_liabilities
}
