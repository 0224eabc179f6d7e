//! Twin-peaks regulatory capital for a with-profits life insurer: the
//! prescribed stress events, the risk capital margin, resilience capital,
//! the two peaks and the with-profits capital component, and the capital
//! resources calculation with its tier limits.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grade::CreditGrade;
use crate::validate;

pub const EQUITY_MIN_FALL: f64 = 0.10;
pub const EQUITY_MAX_FALL_BEFORE_REDUCTION: f64 = 0.25;
/// Earnings yield target as a multiple of the long gilt yield.
pub const EQUITY_YIELD_MULTIPLE: f64 = 4.0 / 3.0;
/// Yield shift as a fraction of the long gilt yield.
pub const INTEREST_SHIFT_FRACTION: f64 = 0.20;
pub const PROPERTY_MIN_FALL: f64 = 0.10;
pub const PROPERTY_MAX_FALL: f64 = 0.20;
pub const FLAT_CREDIT_CHARGE: f64 = 0.10;
pub const PERSISTENCY_FACTOR: f64 = 0.50;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetClass {
    UkEquity,
    OverseasEquity,
    FixedInterest,
    Property,
    CorporateBond,
    CommercialMortgage,
    ReinsuranceAsset,
    Cash,
}

impl AssetClass {
    fn bears_credit_stress(self) -> bool {
        matches!(
            self,
            AssetClass::CorporateBond | AssetClass::CommercialMortgage | AssetClass::ReinsuranceAsset
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Holding {
    pub class: AssetClass,
    pub market_value: f64,
    #[serde(default)]
    pub grade: Option<CreditGrade>,
    /// Grade the firm assesses an unrated asset as equivalent to.
    #[serde(default)]
    pub assessed_grade: Option<CreditGrade>,
    /// Basis points.
    #[serde(default)]
    pub current_spread: Option<f64>,
    #[serde(default)]
    pub spread_duration: Option<f64>,
    #[serde(default)]
    pub rate_duration: Option<f64>,
    #[serde(default)]
    pub in_default_provisioned: bool,
    /// Intra-group reinsurance with both parties regulated in a designated state.
    #[serde(default)]
    pub intra_group_designated: bool,
}

impl Holding {
    pub fn new(class: AssetClass, market_value: f64) -> Self {
        Holding {
            class,
            market_value,
            grade: None,
            assessed_grade: None,
            current_spread: None,
            spread_duration: None,
            rate_duration: None,
            in_default_provisioned: false,
            intra_group_designated: false,
        }
    }

    pub fn rated(mut self, grade: CreditGrade, spread_bp: f64, spread_duration: f64) -> Self {
        self.grade = Some(grade);
        self.current_spread = Some(spread_bp);
        self.spread_duration = Some(spread_duration);
        self
    }

    pub fn with_rate_duration(mut self, d: f64) -> Self {
        self.rate_duration = Some(d);
        self
    }
}

/// Market levels the stress rules are evaluated against.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarketLevels {
    pub equity_index: f64,
    pub equity_avg_90d: f64,
    pub earnings_yield: f64,
    pub gilt_yield: f64,
    /// Foreign equivalents for overseas equities; the UK levels are reused
    /// when absent.
    #[serde(default)]
    pub overseas: Option<OverseasLevels>,
    pub property_index: f64,
    pub property_avg_3y: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverseasLevels {
    pub equity_index: f64,
    pub equity_avg_90d: f64,
    pub earnings_yield: f64,
    pub government_yield: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Persistency {
    /// Annual termination rates assumed in realistic liabilities.
    pub termination_rates: Vec<f64>,
    /// Unrecouped strain per unit of termination rate per projection year.
    pub strain_per_lapse: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CapitalComponents {
    pub ordinary_shares: f64,
    pub reserves: f64,
    pub innovative_tier1: f64,
    pub perpetual_subordinated_debt: f64,
    pub upper_tier2: f64,
    pub lower_tier2: f64,
    pub intangible_assets: f64,
    pub inadmissible_assets: f64,
    /// Balance-sheet side for the traditional route.
    pub admissible_assets: f64,
    pub borrowing: f64,
}

impl CapitalComponents {
    pub fn core_tier1(&self) -> f64 {
        self.ordinary_shares + self.reserves
    }

    pub fn total_tier1(&self) -> f64 {
        self.core_tier1() + self.innovative_tier1
    }

    pub fn total_tier2(&self) -> f64 {
        self.perpetual_subordinated_debt + self.upper_tier2 + self.lower_tier2
    }

    fn values(&self) -> [(&'static str, f64); 10] {
        [
            ("ordinary_shares", self.ordinary_shares),
            ("reserves", self.reserves),
            ("innovative_tier1", self.innovative_tier1),
            ("perpetual_subordinated_debt", self.perpetual_subordinated_debt),
            ("upper_tier2", self.upper_tier2),
            ("lower_tier2", self.lower_tier2),
            ("intangible_assets", self.intangible_assets),
            ("inadmissible_assets", self.inadmissible_assets),
            ("admissible_assets", self.admissible_assets),
            ("borrowing", self.borrowing),
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InsurerBalanceSheet {
    pub holdings: Vec<Holding>,
    pub mathematical_reserves: f64,
    pub realistic_liabilities: f64,
    pub liability_rate_duration: f64,
    /// Share of an equity or property fall passed through to realistic
    /// with-profits liabilities.
    #[serde(default)]
    pub liability_participation: f64,
    #[serde(default)]
    pub persistency: Persistency,
    pub capital: CapitalComponents,
    pub market: MarketLevels,
}

impl InsurerBalanceSheet {
    pub fn validate(&self) -> Result<()> {
        for (i, h) in self.holdings.iter().enumerate() {
            validate::non_negative(&format!("holdings[{i}].market_value"), h.market_value)?;
            if let Some(d) = h.rate_duration {
                validate::non_negative(&format!("holdings[{i}].rate_duration"), d)?;
            }
            if let Some(d) = h.spread_duration {
                validate::non_negative(&format!("holdings[{i}].spread_duration"), d)?;
            }
            if let Some(s) = h.current_spread {
                validate::non_negative(&format!("holdings[{i}].current_spread"), s)?;
            }
        }
        validate::non_negative("mathematical_reserves", self.mathematical_reserves)?;
        validate::non_negative("realistic_liabilities", self.realistic_liabilities)?;
        validate::non_negative("liability_rate_duration", self.liability_rate_duration)?;
        validate::unit_interval("liability_participation", self.liability_participation)?;
        for (i, r) in self.persistency.termination_rates.iter().enumerate() {
            validate::unit_interval(&format!("persistency.termination_rates[{i}]"), *r)?;
        }
        validate::non_negative("persistency.strain_per_lapse", self.persistency.strain_per_lapse)?;
        for (name, v) in self.capital.values() {
            validate::non_negative(&format!("capital.{name}"), v)?;
        }
        let m = &self.market;
        validate::positive("market.equity_index", m.equity_index)?;
        validate::positive("market.equity_avg_90d", m.equity_avg_90d)?;
        validate::positive("market.earnings_yield", m.earnings_yield)?;
        validate::positive("market.gilt_yield", m.gilt_yield)?;
        validate::positive("market.property_index", m.property_index)?;
        validate::positive("market.property_avg_3y", m.property_avg_3y)?;
        if let Some(o) = &m.overseas {
            validate::positive("market.overseas.equity_index", o.equity_index)?;
            validate::positive("market.overseas.equity_avg_90d", o.equity_avg_90d)?;
            validate::positive("market.overseas.earnings_yield", o.earnings_yield)?;
            validate::positive("market.overseas.government_yield", o.government_yield)?;
        }
        Ok(())
    }

    fn value_of(&self, class: AssetClass) -> f64 {
        self.holdings
            .iter()
            .filter(|h| h.class == class)
            .map(|h| h.market_value)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct StressParams {
    /// RCM floor as a fraction of realistic liabilities.
    pub rcm_floor: f64,
    /// LTICR as a fraction of mathematical reserves net of resilience capital.
    pub lticr_rate: f64,
    pub minimum_capital_eur: f64,
    /// Reporting currency per euro.
    pub eur_fx: f64,
}

impl Default for StressParams {
    fn default() -> Self {
        StressParams {
            rcm_floor: 0.04,
            lticr_rate: 0.04,
            minimum_capital_eur: 3_000_000.0,
            eur_fx: 0.68,
        }
    }
}

impl StressParams {
    pub fn validate(&self) -> Result<()> {
        validate::unit_interval("params.rcm_floor", self.rcm_floor)?;
        validate::unit_interval("params.lticr_rate", self.lticr_rate)?;
        validate::non_negative("params.minimum_capital_eur", self.minimum_capital_eur)?;
        validate::positive("params.eur_fx", self.eur_fx)
    }
}

/// Required equity fall: at least 10%, otherwise the lesser of the fall
/// that lifts the earnings yield to 4/3 of the gilt yield and 25% less the
/// index's shortfall against its 90-day average.
pub fn equity_stress(current_index: f64, avg_90d: f64, earnings_yield: f64, gilt_yield: f64) -> Result<f64> {
    if !(earnings_yield > 0.0) || !(gilt_yield > 0.0) {
        return Err(Error::Domain(format!(
            "earnings yield and gilt yield must be positive (got {earnings_yield}, {gilt_yield})"
        )));
    }
    if !(current_index > 0.0) || !(avg_90d > 0.0) {
        return Err(Error::Domain("index levels must be positive".into()));
    }
    let yield_fall = (1.0 - earnings_yield / (EQUITY_YIELD_MULTIPLE * gilt_yield)).max(0.0);
    let recent_fall = ((avg_90d - current_index) / avg_90d).max(0.0);
    let capped = EQUITY_MAX_FALL_BEFORE_REDUCTION - recent_fall;
    Ok(yield_fall.min(capped).max(EQUITY_MIN_FALL))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum YieldMove {
    Rise,
    Fall,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InterestStress {
    /// Absolute yield shift (0.009 is 0.90 percentage points).
    pub shift: f64,
    pub direction: YieldMove,
    /// Fall in asset value under the chosen move (negative for a gain).
    pub asset_fall: f64,
    /// Fall in liability value under the chosen move.
    pub liability_fall: f64,
    pub net_loss: f64,
}

/// More onerous of a parallel rise or fall in yields by 20% of the gilt
/// yield, on first-order duration impacts.
pub fn interest_rate_stress(
    gilt_yield: f64,
    asset_rate_duration: f64,
    liability_rate_duration: f64,
    assets: f64,
    liabilities: f64,
) -> Result<InterestStress> {
    if !(gilt_yield > 0.0) {
        return Err(Error::Domain(format!("gilt yield must be positive, got {gilt_yield}")));
    }
    let shift = INTEREST_SHIFT_FRACTION * gilt_yield;
    let asset_sens = assets * asset_rate_duration * shift;
    let liab_sens = liabilities * liability_rate_duration * shift;
    let rise = asset_sens - liab_sens;
    let fall = liab_sens - asset_sens;
    let (direction, asset_fall, liability_fall, net) = if fall > rise {
        (YieldMove::Fall, -asset_sens, -liab_sens, fall)
    } else {
        (YieldMove::Rise, asset_sens, liab_sens, rise)
    };
    Ok(InterestStress {
        shift,
        direction,
        asset_fall,
        liability_fall,
        net_loss: net.max(0.0),
    })
}

/// Property fall ramps linearly with the index/3-year-average ratio from
/// 10% at ratio 1 to 20% at ratio 2.
pub fn property_stress(current_index: f64, avg_3y: f64) -> Result<f64> {
    if !(current_index > 0.0) || !(avg_3y > 0.0) {
        return Err(Error::Domain("property index levels must be positive".into()));
    }
    Ok((PROPERTY_MIN_FALL * current_index / avg_3y).clamp(PROPERTY_MIN_FALL, PROPERTY_MAX_FALL))
}

/// Maximum stressed spread (bp) for a rated grade; `None` for the lowest
/// grade, which takes the flat charge instead.
pub fn max_spread_bp(grade: CreditGrade) -> Option<f64> {
    match grade {
        CreditGrade::Aaa => Some(90.0),
        CreditGrade::Aa => Some(130.0),
        CreditGrade::A => Some(170.0),
        CreditGrade::Bbb => Some(210.0),
        CreditGrade::Bb => Some(525.0),
        CreditGrade::B => Some(900.0),
        CreditGrade::Ccc => None,
    }
}

pub fn credit_stress(h: &Holding) -> Result<f64> {
    if !h.class.bears_credit_stress() || h.in_default_provisioned {
        return Ok(0.0);
    }
    if h.class == AssetClass::ReinsuranceAsset && h.intra_group_designated {
        return Ok(0.0);
    }
    let flat = FLAT_CREDIT_CHARGE * h.market_value;
    let Some(grade) = h.grade.or(h.assessed_grade) else {
        return Ok(flat);
    };
    let Some(max_spread) = max_spread_bp(grade) else {
        return Ok(flat);
    };
    let (Some(spread), Some(duration)) = (h.current_spread, h.spread_duration) else {
        return Err(Error::Data(format!(
            "{grade}-rated {:?} holding needs current_spread and spread_duration",
            h.class
        )));
    };
    Ok((duration * (max_spread - spread) / 10_000.0 * h.market_value).max(0.0))
}

pub fn stressed_termination_rates(rates: &[f64]) -> Vec<f64> {
    rates.iter().map(|r| PERSISTENCY_FACTOR * r).collect()
}

/// Strain from the shortfall in terminations when assumed rates are halved.
pub fn persistency_stress(termination_rates: &[f64], strain_per_lapse: f64) -> Result<f64> {
    if let Some(r) = termination_rates.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::Domain(format!("termination rate {r} outside [0,1]")));
    }
    let avoided: f64 = termination_rates
        .iter()
        .zip(stressed_termination_rates(termination_rates))
        .map(|(a, s)| a - s)
        .sum();
    Ok((avoided * strain_per_lapse).max(0.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ScenarioLosses {
    pub equity: f64,
    pub interest_rate: f64,
    pub property: f64,
    pub credit: f64,
    pub persistency: f64,
}

impl ScenarioLosses {
    pub fn total(&self) -> f64 {
        self.equity + self.interest_rate + self.property + self.credit + self.persistency
    }
}

/// Per-scenario net losses with the gross asset falls behind them.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ScenarioDetail {
    pub losses: ScenarioLosses,
    pub equity_fall: f64,
    pub property_fall: f64,
    pub rates: RateSensitivity,
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RateSensitivity {
    pub shift: f64,
    pub asset_dollar_duration: f64,
}

pub fn scenario_losses(bs: &InsurerBalanceSheet) -> Result<ScenarioDetail> {
    let m = &bs.market;
    let uk_fall = equity_stress(m.equity_index, m.equity_avg_90d, m.earnings_yield, m.gilt_yield)?;
    let os_fall = match &m.overseas {
        Some(o) => equity_stress(o.equity_index, o.equity_avg_90d, o.earnings_yield, o.government_yield)?,
        None => uk_fall,
    };
    let equity_fall = bs.value_of(AssetClass::UkEquity) * uk_fall + bs.value_of(AssetClass::OverseasEquity) * os_fall;
    let pass = 1.0 - bs.liability_participation;

    let property_fall = bs.value_of(AssetClass::Property) * property_stress(m.property_index, m.property_avg_3y)?;

    let (rated_value, dollar_duration) = bs
        .holdings
        .iter()
        .filter_map(|h| h.rate_duration.map(|d| (h.market_value, h.market_value * d)))
        .fold((0.0, 0.0), |(v, dd), (a, b)| (v + a, dd + b));
    let asset_duration = if rated_value > 0.0 {
        dollar_duration / rated_value
    } else {
        0.0
    };
    let ir = interest_rate_stress(
        m.gilt_yield,
        asset_duration,
        bs.liability_rate_duration,
        rated_value,
        bs.realistic_liabilities,
    )?;

    let credit = bs.holdings.iter().map(credit_stress).sum::<Result<f64>>()?;

    let persistency = persistency_stress(&bs.persistency.termination_rates, bs.persistency.strain_per_lapse)?;

    Ok(ScenarioDetail {
        losses: ScenarioLosses {
            equity: equity_fall * pass,
            interest_rate: ir.net_loss,
            property: property_fall * pass,
            credit,
            persistency,
        },
        equity_fall,
        property_fall,
        rates: RateSensitivity {
            shift: ir.shift,
            asset_dollar_duration: dollar_duration,
        },
    })
}

/// Sum of scenario net losses, floored at `floor × realistic liabilities`.
pub fn risk_capital_margin(bs: &InsurerBalanceSheet, losses: &ScenarioLosses, floor: f64) -> f64 {
    losses.total().max(floor * bs.realistic_liabilities)
}

/// Capital needed if stressed assets fall by more than mathematical
/// reserves under the market and credit scenarios. Reserves respond to
/// yields only; both yield directions are tried.
pub fn resilience_capital(bs: &InsurerBalanceSheet, detail: &ScenarioDetail) -> f64 {
    let s = detail.rates.shift;
    let asset_rate = detail.rates.asset_dollar_duration * s;
    let reserve_rate = bs.mathematical_reserves * bs.liability_rate_duration * s;
    let other = detail.equity_fall + detail.property_fall + detail.losses.credit;
    let rise = other + asset_rate - reserve_rate;
    let fall = other - asset_rate + reserve_rate;
    rise.max(fall).max(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwinPeaks {
    pub lticr: f64,
    pub peak1: f64,
    pub peak2: f64,
    pub wpicc: f64,
}

pub fn twin_peaks(bs: &InsurerBalanceSheet, rcm: f64, lticr_rate: f64) -> TwinPeaks {
    twin_peaks_with_resilience(bs, rcm, lticr_rate, 0.0)
}

/// First peak: reserves, resilience capital, and LTICR on reserves net of
/// resilience capital. Second peak: realistic liabilities plus RCM.
pub fn twin_peaks_with_resilience(bs: &InsurerBalanceSheet, rcm: f64, lticr_rate: f64, resilience: f64) -> TwinPeaks {
    let reserves = bs.mathematical_reserves;
    let lticr = lticr_rate * (reserves - resilience).max(0.0);
    let peak1 = reserves + resilience + lticr;
    let peak2 = bs.realistic_liabilities + rcm;
    TwinPeaks {
        lticr,
        peak1,
        peak2,
        wpicc: (peak2 - peak1).max(0.0),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TierViolation {
    pub rule: String,
    pub amount: f64,
    pub limit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapitalResources {
    pub value: f64,
    /// Eligible assets less foreseeable liabilities.
    pub traditional: f64,
    /// Sum of capital components less deductions.
    pub components: f64,
    pub tier_violations: Vec<TierViolation>,
}

pub fn capital_resources(c: &CapitalComponents) -> Result<CapitalResources> {
    if let Some((name, v)) = c.values().into_iter().find(|(_, v)| !(*v >= 0.0)) {
        return Err(Error::Domain(format!("capital component {name} must be ≥ 0, got {v}")));
    }
    let total_assets = c.admissible_assets + c.intangible_assets + c.inadmissible_assets;
    let traditional = total_assets - c.intangible_assets - c.inadmissible_assets - c.borrowing;
    let components = c.ordinary_shares
        + c.reserves
        + c.innovative_tier1
        + c.perpetual_subordinated_debt
        + c.upper_tier2
        + c.lower_tier2
        - c.intangible_assets
        - c.inadmissible_assets;
    let scale = total_assets.abs().max(components.abs()).max(1.0);
    if (traditional - components).abs() > 1e-9 * scale {
        return Err(Error::Consistency(format!(
            "capital resources disagree: eligible assets less liabilities = {traditional}, components of capital = {components}"
        )));
    }

    let mut tier_violations = Vec::new();
    let tier1 = c.total_tier1();
    let mut check = |rule: &str, amount: f64, limit: f64, ok: bool| {
        if !ok {
            tier_violations.push(TierViolation {
                rule: rule.to_string(),
                amount,
                limit,
            });
        }
    };
    check(
        "core tier 1 at least 50% of total tier 1",
        c.core_tier1(),
        0.5 * tier1,
        c.core_tier1() >= 0.5 * tier1,
    );
    check(
        "innovative tier 1 at most 15% of total tier 1",
        c.innovative_tier1,
        0.15 * tier1,
        c.innovative_tier1 <= 0.15 * tier1,
    );
    check(
        "tier 2 at most 100% of total tier 1",
        c.total_tier2(),
        tier1,
        c.total_tier2() <= tier1,
    );
    check(
        "lower tier 2 at most 25% of total capital resources",
        c.lower_tier2,
        0.25 * components,
        c.lower_tier2 <= 0.25 * components,
    );

    Ok(CapitalResources {
        value: components,
        traditional,
        components,
        tier_violations,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StressResult {
    pub losses: ScenarioLosses,
    pub interest_shift: f64,
    pub rcm: f64,
    pub resilience_capital: f64,
    pub lticr: f64,
    pub peak1: f64,
    pub peak2: f64,
    pub wpicc: f64,
    pub capital_resources: f64,
    /// LTICR, resilience capital and WPICC, floored at the EU minimum.
    pub capital_requirement: f64,
    pub surplus: f64,
    pub tier_violations: Vec<TierViolation>,
}

pub fn run_stress(bs: &InsurerBalanceSheet, params: &StressParams) -> Result<StressResult> {
    bs.validate()?;
    params.validate()?;
    let detail = scenario_losses(bs)?;
    let rcm = risk_capital_margin(bs, &detail.losses, params.rcm_floor);
    let resilience = resilience_capital(bs, &detail);
    let peaks = twin_peaks_with_resilience(bs, rcm, params.lticr_rate, resilience);
    let cr = capital_resources(&bs.capital)?;
    let requirement = (peaks.lticr + resilience + peaks.wpicc).max(params.minimum_capital_eur * params.eur_fx);
    Ok(StressResult {
        losses: detail.losses,
        interest_shift: detail.rates.shift,
        rcm,
        resilience_capital: resilience,
        lticr: peaks.lticr,
        peak1: peaks.peak1,
        peak2: peaks.peak2,
        wpicc: peaks.wpicc,
        capital_resources: cr.value,
        capital_requirement: requirement,
        surplus: cr.value - requirement,
        tier_violations: cr.tier_violations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    pub(crate) fn worked_capital() -> CapitalComponents {
        CapitalComponents {
            ordinary_shares: 200.0,
            reserves: 100.0,
            perpetual_subordinated_debt: 150.0,
            intangible_assets: 100.0,
            inadmissible_assets: 100.0,
            admissible_assets: 350.0,
            borrowing: 100.0,
            ..CapitalComponents::default()
        }
    }

    fn sheet(holdings: Vec<Holding>) -> InsurerBalanceSheet {
        InsurerBalanceSheet {
            holdings,
            mathematical_reserves: 800.0,
            realistic_liabilities: 900.0,
            liability_rate_duration: 10.0,
            liability_participation: 0.0,
            persistency: Persistency::default(),
            capital: worked_capital(),
            market: MarketLevels {
                equity_index: 100.0,
                equity_avg_90d: 100.0,
                earnings_yield: 0.03,
                gilt_yield: 0.045,
                overseas: None,
                property_index: 150.0,
                property_avg_3y: 100.0,
            },
        }
    }

    #[test]
    fn equity_examples() {
        assert_eq!(equity_stress(100.0, 100.0, 0.03, 0.045).unwrap(), 0.25);
        assert_relative_eq!(equity_stress(90.0, 100.0, 0.03, 0.045).unwrap(), 0.15, epsilon = 1e-15);
        assert_eq!(equity_stress(100.0, 100.0, 0.06, 0.045).unwrap(), 0.10);
        assert_eq!(equity_stress(70.0, 100.0, 0.03, 0.045).unwrap(), 0.10);
        assert!(equity_stress(100.0, 100.0, 0.0, 0.045).is_err());
        assert!(equity_stress(100.0, 100.0, 0.03, -0.01).is_err());
    }

    #[test]
    fn interest_examples() {
        let s = interest_rate_stress(0.045, 5.0, 15.0, 100.0, 100.0).unwrap();
        assert_relative_eq!(s.shift, 0.009, max_relative = 1e-15);
        assert_eq!(s.direction, YieldMove::Fall);
        assert_relative_eq!(s.net_loss, 100.0 * 10.0 * 0.009, max_relative = 1e-12);
        let m = interest_rate_stress(0.045, 12.0, 12.0, 100.0, 100.0).unwrap();
        assert_eq!(m.net_loss, 0.0);
        let r = interest_rate_stress(0.05, 20.0, 5.0, 100.0, 100.0).unwrap();
        assert_eq!(r.direction, YieldMove::Rise);
        assert!(interest_rate_stress(0.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn property_examples() {
        assert_eq!(property_stress(100.0, 100.0).unwrap(), 0.10);
        assert_eq!(property_stress(250.0, 100.0).unwrap(), 0.20);
        assert_eq!(property_stress(200.0, 100.0).unwrap(), 0.20);
        assert_relative_eq!(property_stress(150.0, 100.0).unwrap(), 0.15);
        assert_eq!(property_stress(50.0, 100.0).unwrap(), 0.10);
    }

    #[test]
    fn credit_examples() {
        let ccc = Holding {
            grade: Some(CreditGrade::Ccc),
            ..Holding::new(AssetClass::CorporateBond, 100.0)
        };
        assert_eq!(credit_stress(&ccc).unwrap(), 10.0);

        let defaulted = Holding {
            in_default_provisioned: true,
            ..ccc.clone()
        };
        assert_eq!(credit_stress(&defaulted).unwrap(), 0.0);

        let aaa = Holding::new(AssetClass::CorporateBond, 100.0).rated(CreditGrade::Aaa, 50.0, 5.0);
        assert_relative_eq!(credit_stress(&aaa).unwrap(), 2.0, max_relative = 1e-12);

        let bb = Holding::new(AssetClass::CorporateBond, 100.0).rated(CreditGrade::Bb, 300.0, 4.0);
        assert_relative_eq!(credit_stress(&bb).unwrap(), 4.0 * 0.0225 * 100.0, max_relative = 1e-12);

        let wide = Holding::new(AssetClass::CorporateBond, 100.0).rated(CreditGrade::A, 400.0, 5.0);
        assert_eq!(credit_stress(&wide).unwrap(), 0.0);

        let unrated = Holding::new(AssetClass::CommercialMortgage, 80.0);
        assert_eq!(credit_stress(&unrated).unwrap(), 8.0);

        let mut assessed = Holding::new(AssetClass::CommercialMortgage, 100.0);
        assessed.assessed_grade = Some(CreditGrade::Bbb);
        assessed.current_spread = Some(110.0);
        assessed.spread_duration = Some(3.0);
        assert_relative_eq!(credit_stress(&assessed).unwrap(), 3.0, max_relative = 1e-12);

        let reins = Holding::new(AssetClass::ReinsuranceAsset, 50.0);
        assert_eq!(credit_stress(&reins).unwrap(), 5.0);
        let intra = Holding {
            intra_group_designated: true,
            ..reins
        };
        assert_eq!(credit_stress(&intra).unwrap(), 0.0);

        let missing = Holding {
            grade: Some(CreditGrade::A),
            ..Holding::new(AssetClass::CorporateBond, 10.0)
        };
        assert!(matches!(credit_stress(&missing), Err(Error::Data(_))));

        assert_eq!(credit_stress(&Holding::new(AssetClass::UkEquity, 100.0)).unwrap(), 0.0);
    }

    #[test]
    fn persistency_examples() {
        assert_eq!(persistency_stress(&[0.0, 0.0], 40.0).unwrap(), 0.0);
        assert_eq!(stressed_termination_rates(&[0.10, 0.20]), vec![0.05, 0.10]);
        // hand sum: (0.10 - 0.05) * 40 + (0.20 - 0.10) * 40 + (0.08 - 0.04) * 40 = 7.6
        assert_relative_eq!(
            persistency_stress(&[0.10, 0.20, 0.08], 40.0).unwrap(),
            7.6,
            max_relative = 1e-12
        );
        assert!(persistency_stress(&[1.2], 1.0).is_err());
    }

    #[test]
    fn rcm_examples() {
        let cash = sheet(vec![Holding::new(AssetClass::Cash, 1000.0)]);
        let detail = scenario_losses(&cash).unwrap();
        // liabilities still carry duration, so only the cash sheet with no
        // liability sensitivity has zero losses
        let cash_flat = InsurerBalanceSheet {
            liability_rate_duration: 0.0,
            ..cash.clone()
        };
        let d0 = scenario_losses(&cash_flat).unwrap();
        assert_eq!(d0.losses.total(), 0.0);
        assert_relative_eq!(risk_capital_margin(&cash_flat, &d0.losses, 0.04), 36.0);
        assert!(detail.losses.interest_rate > 0.0);

        let fixed = ScenarioLosses {
            equity: 30.0,
            interest_rate: 20.0,
            property: 10.0,
            credit: 5.0,
            persistency: 5.0,
        };
        let mut s = cash_flat.clone();
        s.realistic_liabilities = 1000.0; // floor 40
        assert_eq!(risk_capital_margin(&s, &fixed, 0.04), 70.0);
    }

    #[test]
    fn three_asset_sheet_by_hand() {
        // 400 UK equity, 300 property (index 150 vs 3y avg 100), 300 AAA bond
        // at 50bp, spread duration 5, rate duration 8; liabilities 900 at
        // duration 10; gilt 4.5%.
        let bs = sheet(vec![
            Holding::new(AssetClass::UkEquity, 400.0),
            Holding::new(AssetClass::Property, 300.0),
            Holding::new(AssetClass::CorporateBond, 300.0)
                .rated(CreditGrade::Aaa, 50.0, 5.0)
                .with_rate_duration(8.0),
        ]);
        let d = scenario_losses(&bs).unwrap();
        // equity 25% of 400
        assert_relative_eq!(d.losses.equity, 100.0, max_relative = 1e-12);
        // property 15% of 300
        assert_relative_eq!(d.losses.property, 45.0, max_relative = 1e-12);
        // credit 5 * 0.004 * 300
        assert_relative_eq!(d.losses.credit, 6.0, max_relative = 1e-12);
        // yields fall 0.9pp: liabilities +900*10*0.009 = 81, assets +300*8*0.009 = 21.6
        assert_relative_eq!(d.losses.interest_rate, 59.4, max_relative = 1e-12);
        let rcm = risk_capital_margin(&bs, &d.losses, 0.04);
        assert_relative_eq!(rcm, 210.4, max_relative = 1e-12);

        // resilience: asset falls 100 + 45 + 6 = 151; rise case adds 21.6
        // asset fall and 800*10*0.009 = 72 reserve fall → 100.6; fall case
        // 151 - 21.6 + 72 = 201.4
        let res = resilience_capital(&bs, &d);
        assert_relative_eq!(res, 201.4, max_relative = 1e-12);

        let p = twin_peaks(&bs, rcm, 0.04);
        assert_relative_eq!(p.peak1, 832.0, max_relative = 1e-12);
        assert_relative_eq!(p.peak2, 1110.4, max_relative = 1e-12);
        assert_relative_eq!(p.wpicc, 278.4, max_relative = 1e-12);
    }

    #[test]
    fn twin_peak_examples() {
        let mut bs = sheet(vec![]);
        bs.mathematical_reserves = 100.0;
        bs.realistic_liabilities = 80.0;
        let p = twin_peaks(&bs, 10.0, 0.04);
        assert_eq!(p.peak1, 104.0);
        assert_eq!(p.wpicc, 0.0);
        bs.mathematical_reserves = 100.0;
        bs.realistic_liabilities = 120.0;
        let p = twin_peaks(&bs, 0.0, 0.0);
        assert_eq!(p.wpicc, 20.0);
    }

    #[test]
    fn capital_resources_examples() {
        let cr = capital_resources(&worked_capital()).unwrap();
        assert_eq!(cr.value, 250.0);
        assert_eq!(cr.traditional, 250.0);
        assert_eq!(cr.components, 250.0);
        assert!(cr.tier_violations.is_empty());

        let zero = capital_resources(&CapitalComponents::default()).unwrap();
        assert_eq!(zero.value, 0.0);

        let innov = CapitalComponents {
            ordinary_shares: 100.0,
            innovative_tier1: 20.0,
            admissible_assets: 120.0,
            ..CapitalComponents::default()
        };
        let cr = capital_resources(&innov).unwrap();
        assert_eq!(cr.tier_violations.len(), 1);
        assert!(cr.tier_violations[0].rule.starts_with("innovative"));
        assert_relative_eq!(cr.tier_violations[0].limit, 18.0, max_relative = 1e-12);

        let unbalanced = CapitalComponents {
            admissible_assets: 400.0,
            ..worked_capital()
        };
        assert!(matches!(capital_resources(&unbalanced), Err(Error::Consistency(_))));
    }

    #[test]
    fn full_run_respects_minimum_capital() {
        let bs = sheet(vec![Holding::new(AssetClass::Cash, 1000.0)]);
        let r = run_stress(&bs, &StressParams::default()).unwrap();
        assert!(r.capital_requirement >= 3_000_000.0 * 0.68);
        assert_eq!(r.capital_resources, 250.0);
    }
}
