//! Defined-benefit schemes, their sponsors and the compensation rules the
//! guarantee fund applies on entry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grade::CreditGrade;
use crate::market::MarketPath;
use crate::validate;

/// Compensation ceiling for members below normal pension age (at 65).
pub const COMPENSATION_CAP: f64 = 25_000.0;
/// Share of promised pension paid to members below normal pension age.
pub const BELOW_NPA_FACTOR: f64 = 0.90;
/// Indexation cap for pensions in payment.
pub const LPI_CAP_IN_PAYMENT: f64 = 0.025;
/// Revaluation cap for deferred pensions.
pub const LPI_CAP_DEFERRED: f64 = 0.05;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sponsor {
    pub id: String,
    pub grade: CreditGrade,
    pub base_pd: f64,
    pub net_worth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MembershipMix {
    pub share_pensioner: f64,
    pub share_deferred: f64,
    pub share_active: f64,
}

impl MembershipMix {
    pub const ALL_PENSIONERS: MembershipMix = MembershipMix {
        share_pensioner: 1.0,
        share_deferred: 0.0,
        share_active: 0.0,
    };

    pub fn validate(&self, prefix: &str) -> Result<()> {
        validate::unit_interval(&format!("{prefix}share_pensioner"), self.share_pensioner)?;
        validate::unit_interval(&format!("{prefix}share_deferred"), self.share_deferred)?;
        validate::unit_interval(&format!("{prefix}share_active"), self.share_active)?;
        validate::sums_to_one(
            &format!("{prefix}share_pensioner + share_deferred + share_active"),
            &[self.share_pensioner, self.share_deferred, self.share_active],
        )
    }

    /// Fraction of full liability the fund would take on.
    pub fn compensation_haircut(&self) -> f64 {
        self.share_pensioner + (self.share_deferred + self.share_active) * BELOW_NPA_FACTOR
    }
}

impl Default for MembershipMix {
    fn default() -> Self {
        MembershipMix {
            share_pensioner: 0.4,
            share_deferred: 0.35,
            share_active: 0.25,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scheme {
    pub id: String,
    pub sponsor: Sponsor,
    /// Full buy-out liability.
    pub full_liability: f64,
    pub assets: f64,
    pub equity_share: f64,
    pub liability_duration: f64,
    pub mix: MembershipMix,
    pub amortisation_years: u32,
    /// Member count; proxied from liability size when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub members: Option<f64>,
}

impl Scheme {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        let k = |name: &str| format!("{prefix}{name}");
        // Zero is admitted: a sponsor that never defaults.
        validate::unit_interval(&k("sponsor.base_pd"), self.sponsor.base_pd)?;
        if self.sponsor.base_pd >= 1.0 {
            return Err(Error::config(k("sponsor.base_pd"), "must be < 1 (got 1)"));
        }
        validate::non_negative(&k("sponsor.net_worth"), self.sponsor.net_worth)?;
        validate::positive(&k("full_liability"), self.full_liability)?;
        validate::non_negative(&k("assets"), self.assets)?;
        validate::unit_interval(&k("equity_share"), self.equity_share)?;
        validate::non_negative(&k("liability_duration"), self.liability_duration)?;
        validate::at_least_one(&k("amortisation_years"), self.amortisation_years as u64)?;
        if let Some(m) = self.members {
            validate::non_negative(&k("members"), m)?;
        }
        self.mix.validate(&k("mix."))
    }

    pub fn funding_ratio(&self) -> f64 {
        self.assets / self.full_liability
    }

    /// Shortfall against full liability, floored at zero.
    pub fn deficit(&self) -> f64 {
        (self.full_liability - self.assets).max(0.0)
    }

    /// Blended indexation factor for the membership.
    pub fn indexation_factor(&self, inflation: f64) -> f64 {
        let p = self.mix.share_pensioner;
        p * lpi_factor(inflation, LPI_CAP_IN_PAYMENT) + (1.0 - p) * lpi_factor(inflation, LPI_CAP_DEFERRED)
    }
}

/// Annual compensation the fund pays a single member.
pub fn member_compensation(promised_pension: f64, above_scheme_pension_age: bool) -> Result<f64> {
    if !(promised_pension >= 0.0) || !promised_pension.is_finite() {
        return Err(Error::Domain(format!(
            "promised pension must be ≥ 0, got {promised_pension}"
        )));
    }
    if above_scheme_pension_age {
        Ok(promised_pension)
    } else {
        Ok((BELOW_NPA_FACTOR * promised_pension).min(COMPENSATION_CAP))
    }
}

/// Limited price indexation: `1 + min(max(inflation, 0), cap)`.
pub fn lpi_factor(inflation: f64, cap: f64) -> f64 {
    1.0 + inflation.max(0.0).min(cap)
}

/// Liability the fund assumes on entry, after the compensation haircut.
pub fn ppf_liability(scheme: &Scheme) -> f64 {
    scheme.mix.compensation_haircut() * scheme.full_liability
}

/// How much of a scheme's liability the guarantee covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GuaranteeLevel {
    /// Compensation-level benefits (haircut by membership class).
    #[default]
    Compensation,
    /// Every promised benefit.
    Full,
}

pub fn guaranteed_liability(scheme: &Scheme, level: GuaranteeLevel) -> f64 {
    match level {
        GuaranteeLevel::Compensation => ppf_liability(scheme),
        GuaranteeLevel::Full => scheme.full_liability,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum AmortisationRule {
    #[default]
    StraightLine,
    /// Level payments clearing the deficit at the given discount rate.
    Annuity { rate: f64 },
}

/// Straight-line deficit recovery contribution.
pub fn amortisation_contribution(deficit: f64, years: u32) -> Result<f64> {
    amortisation_contribution_with(deficit, years, AmortisationRule::StraightLine)
}

pub fn amortisation_contribution_with(deficit: f64, years: u32, rule: AmortisationRule) -> Result<f64> {
    if years == 0 {
        return Err(Error::Domain("amortisation period must be ≥ 1 year".into()));
    }
    if deficit <= 0.0 {
        return Ok(0.0);
    }
    let n = years as f64;
    Ok(match rule {
        AmortisationRule::StraightLine => deficit / n,
        AmortisationRule::Annuity { rate: 0.0 } => deficit / n,
        AmortisationRule::Annuity { rate } => deficit * rate / (1.0 - (1.0 + rate).powf(-n)),
    })
}

/// Breakdown of one annual roll-forward.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeYear {
    pub scheme: Scheme,
    pub asset_return: f64,
    pub investment_gain: f64,
    pub contribution: f64,
    pub liability_return: f64,
}

/// Roll a scheme forward through `year` of `path` with straight-line
/// deficit recovery.
pub fn scheme_step_year(scheme: &Scheme, path: &MarketPath, year: usize) -> Result<Scheme> {
    Ok(step_year(scheme, path, year, AmortisationRule::StraightLine)?.scheme)
}

/// Assets earn the blended equity/bond return plus the recovery
/// contribution on the opening deficit. Bonds and liabilities share the
/// scheme's duration; liabilities also take the year's LPI uplift.
pub fn step_year(scheme: &Scheme, path: &MarketPath, year: usize, rule: AmortisationRule) -> Result<SchemeYear> {
    if year >= path.years {
        return Err(Error::Domain(format!(
            "year {year} outside path of {} years",
            path.years
        )));
    }
    let y0 = path.opening_yield(year);
    let dy = path.gilt_yield[year] - y0;
    let bond_return = y0 - scheme.liability_duration * dy;
    let e = scheme.equity_share;
    let asset_return = e * path.equity_total_return[year] + (1.0 - e) * bond_return;

    let contribution =
        amortisation_contribution_with(scheme.full_liability - scheme.assets, scheme.amortisation_years, rule)?;
    let investment_gain = scheme.assets * asset_return;

    let growth = (1.0 + bond_return) * scheme.indexation_factor(path.inflation[year]);
    let liability = (scheme.full_liability * growth).max(f64::MIN_POSITIVE);

    let mut next = scheme.clone();
    next.assets = (scheme.assets + investment_gain + contribution).max(0.0);
    next.full_liability = liability;
    Ok(SchemeYear {
        scheme: next,
        asset_return,
        investment_gain,
        contribution,
        liability_return: growth - 1.0,
    })
}
