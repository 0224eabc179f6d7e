//! Premium schedules: historical PBGC rates, the actuarially fair
//! expected-loss premium, and the scheme-factor / risk-factor split.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grade::{CreditGrade, GradeTable};
use crate::scheme::{guaranteed_liability, GuaranteeLevel, Scheme};
use crate::validate;

/// Multiemployer flat rate per participant. Not used by any default schedule.
pub const PBGC_MULTIEMPLOYER_RATE: f64 = 2.60;

/// Single-employer PBGC premium rules in force from a given year.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PbgcRates {
    pub year: u16,
    /// Dollars per participant.
    pub flat: f64,
    /// Fraction of unfunded vested benefits.
    pub variable: f64,
    /// Dollars per participant, if the variable charge is capped.
    pub variable_cap: Option<f64>,
}

const PBGC_SCHEDULE: [PbgcRates; 8] = [
    PbgcRates {
        year: 1974,
        flat: 1.0,
        variable: 0.0,
        variable_cap: None,
    },
    PbgcRates {
        year: 1978,
        flat: 2.60,
        variable: 0.0,
        variable_cap: None,
    },
    PbgcRates {
        year: 1986,
        flat: 8.50,
        variable: 0.0,
        variable_cap: None,
    },
    PbgcRates {
        year: 1988,
        flat: 16.0,
        variable: 0.006,
        variable_cap: Some(34.0),
    },
    PbgcRates {
        year: 1991,
        flat: 19.0,
        variable: 0.009,
        variable_cap: Some(53.0),
    },
    // The 1994 phase-out of the cap has no published schedule here; the
    // 1991 cap is kept until its removal in 1996.
    PbgcRates {
        year: 1994,
        flat: 19.0,
        variable: 0.009,
        variable_cap: Some(53.0),
    },
    PbgcRates {
        year: 1996,
        flat: 19.0,
        variable: 0.009,
        variable_cap: None,
    },
    PbgcRates {
        year: 2006,
        flat: 30.0,
        variable: 0.009,
        variable_cap: None,
    },
];

pub fn pbgc_rates(schedule_year: u16) -> Result<PbgcRates> {
    PBGC_SCHEDULE
        .iter()
        .find(|r| r.year == schedule_year)
        .copied()
        .ok_or_else(|| {
            Error::config(
                "schedule_year",
                format!("must be one of 1974, 1978, 1986, 1988, 1991, 1994, 1996, 2006 (got {schedule_year})"),
            )
        })
}

pub fn pbgc_premium(participants: f64, unfunded_vested: f64, schedule_year: u16) -> Result<f64> {
    let rates = pbgc_rates(schedule_year)?;
    if !(participants >= 0.0) || !(unfunded_vested >= 0.0) {
        return Err(Error::Domain(
            "participants and unfunded vested benefits must be ≥ 0".into(),
        ));
    }
    let mut variable = rates.variable * unfunded_vested;
    if let Some(cap) = rates.variable_cap {
        variable = variable.min(cap * participants);
    }
    Ok(rates.flat * participants + variable)
}

/// Expected loss: probability of default times loss given default.
pub fn fair_premium(pd: f64, lgd: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&pd) {
        return Err(Error::Domain(format!("pd must lie in [0,1], got {pd}")));
    }
    if !(lgd >= 0.0) {
        return Err(Error::Domain(format!("lgd must be ≥ 0, got {lgd}")));
    }
    Ok(pd * lgd)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LevyKind {
    /// Per-member charge plus a charge proportional to guaranteed liability.
    Flat,
    /// PBGC-style: per-member charge plus a rate on underfunding, optionally
    /// capped per member.
    Exposure,
    /// Expected loss, `pd × underfunding`.
    RiskBased,
    /// Scheme-factor and risk-factor elements with a minimum aggregate risk share.
    PpfSplit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LevySchedule {
    pub kind: LevyKind,
    /// Currency per member.
    pub flat_rate: f64,
    /// Fraction of guaranteed liability; used by `flat`.
    pub liability_rate: f64,
    /// Fraction per unit of underfunding.
    pub variable_rate: f64,
    /// Currency per member.
    pub variable_cap: Option<f64>,
    pub risk_share_min: f64,
    /// Scale every charge so the population total equals this.
    pub target_total: Option<f64>,
    pub grade_multipliers: GradeTable,
    /// Guaranteed liability per member, for the member-count proxy.
    pub liability_per_member: f64,
    /// Fixed administration overhead added to the population total.
    pub admin_overhead: f64,
}

impl Default for LevySchedule {
    fn default() -> Self {
        LevySchedule {
            kind: LevyKind::Flat,
            flat_rate: 0.0,
            liability_rate: 0.0,
            variable_rate: 0.009,
            variable_cap: None,
            risk_share_min: 0.80,
            target_total: None,
            grade_multipliers: GradeTable {
                aaa: 0.25,
                aa: 0.5,
                a: 0.75,
                bbb: 1.0,
                bb: 2.0,
                b: 3.0,
                ccc: 4.0,
            },
            liability_per_member: 100_000.0,
            admin_overhead: 0.0,
        }
    }
}

impl LevySchedule {
    /// Zero-charge flat schedule.
    pub fn none() -> Self {
        LevySchedule::default()
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        let k = |name: &str| format!("{prefix}{name}");
        validate::non_negative(&k("flat_rate"), self.flat_rate)?;
        validate::non_negative(&k("liability_rate"), self.liability_rate)?;
        validate::non_negative(&k("variable_rate"), self.variable_rate)?;
        if let Some(cap) = self.variable_cap {
            validate::non_negative(&k("variable_cap"), cap)?;
        }
        validate::unit_interval(&k("risk_share_min"), self.risk_share_min)?;
        if let Some(t) = self.target_total {
            validate::non_negative(&k("target_total"), t)?;
        }
        for (g, v) in CreditGrade::ALL.iter().zip(self.grade_multipliers.values()) {
            validate::non_negative(&k(&format!("grade_multipliers.{g}")), v)?;
        }
        validate::positive(&k("liability_per_member"), self.liability_per_member)?;
        validate::non_negative(&k("admin_overhead"), self.admin_overhead)
    }

    pub fn members(&self, scheme: &Scheme) -> f64 {
        scheme
            .members
            .unwrap_or(scheme.full_liability / self.liability_per_member)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevyBreakdown {
    pub scheme_id: String,
    pub scheme_factor: f64,
    pub risk_factor: f64,
    pub total: f64,
}

fn underfunding(scheme: &Scheme, level: GuaranteeLevel) -> f64 {
    (guaranteed_liability(scheme, level) - scheme.assets).max(0.0)
}

/// Unscaled levy on one scheme under the split schedule.
pub fn ppf_levy(scheme: &Scheme, schedule: &LevySchedule) -> Result<LevyBreakdown> {
    if schedule.kind != LevyKind::PpfSplit {
        return Err(Error::Usage(format!(
            "ppf_levy requires a ppf_split schedule, got {:?}",
            schedule.kind
        )));
    }
    let scheme_factor = schedule.flat_rate * schedule.members(scheme);
    let risk_factor = schedule.variable_rate
        * underfunding(scheme, GuaranteeLevel::Compensation)
        * schedule.grade_multipliers.get(scheme.sponsor.grade);
    Ok(LevyBreakdown {
        scheme_id: scheme.id.clone(),
        scheme_factor,
        risk_factor,
        total: scheme_factor + risk_factor,
    })
}

/// Per-scheme levies for a population, with the schedule's aggregate rules
/// (risk-share rescaling, target total) applied.
pub fn population_levies(
    schemes: &[Scheme],
    schedule: &LevySchedule,
    level: GuaranteeLevel,
) -> Result<Vec<LevyBreakdown>> {
    let mut out: Vec<LevyBreakdown> = match schedule.kind {
        LevyKind::PpfSplit => {
            let raw = schemes
                .iter()
                .map(|s| ppf_levy(s, schedule))
                .collect::<Result<Vec<_>>>()?;
            rescale_risk_share(raw, schedule.risk_share_min)?
        }
        _ => schemes
            .iter()
            .map(|s| single_levy(s, schedule, level))
            .collect::<Result<Vec<_>>>()?,
    };
    if let Some(target) = schedule.target_total {
        let total: f64 = out.iter().map(|b| b.total).sum();
        if total > 0.0 {
            let k = target / total;
            for b in &mut out {
                b.scheme_factor *= k;
                b.risk_factor *= k;
                b.total = b.scheme_factor + b.risk_factor;
            }
        }
    }
    Ok(out)
}

fn single_levy(scheme: &Scheme, schedule: &LevySchedule, level: GuaranteeLevel) -> Result<LevyBreakdown> {
    let members = schedule.members(scheme);
    let (scheme_factor, risk_factor) = match schedule.kind {
        LevyKind::Flat => (
            schedule.flat_rate * members + schedule.liability_rate * guaranteed_liability(scheme, level),
            0.0,
        ),
        LevyKind::Exposure => {
            let mut v = schedule.variable_rate * underfunding(scheme, level);
            if let Some(cap) = schedule.variable_cap {
                v = v.min(cap * members);
            }
            (schedule.flat_rate * members, v)
        }
        LevyKind::RiskBased => (
            schedule.flat_rate * members,
            fair_premium(scheme.sponsor.base_pd, underfunding(scheme, level))?,
        ),
        LevyKind::PpfSplit => unreachable!("split schedules are priced at population level"),
    };
    Ok(LevyBreakdown {
        scheme_id: scheme.id.clone(),
        scheme_factor,
        risk_factor,
        total: scheme_factor + risk_factor,
    })
}

/// Scale risk factors up until they make up at least `min_share` of the
/// aggregate charge. Fails when no scheme carries any risk factor but the
/// scheme-factor element is positive: no rescaling can then satisfy the
/// constraint.
pub fn rescale_risk_share(mut levies: Vec<LevyBreakdown>, min_share: f64) -> Result<Vec<LevyBreakdown>> {
    let risk: f64 = levies.iter().map(|b| b.risk_factor).sum();
    let scheme: f64 = levies.iter().map(|b| b.scheme_factor).sum();
    let total = risk + scheme;
    if total == 0.0 || risk >= min_share * total {
        return Ok(levies);
    }
    if risk == 0.0 {
        return Err(Error::Usage(format!(
            "risk share of {min_share} is infeasible: no scheme in the population is underfunded"
        )));
    }
    if min_share >= 1.0 {
        // only a zero scheme-factor element satisfies a 100% risk share
        for b in &mut levies {
            b.scheme_factor = 0.0;
            b.total = b.risk_factor;
        }
        return Ok(levies);
    }
    let k = min_share * scheme / ((1.0 - min_share) * risk);
    for b in &mut levies {
        b.risk_factor *= k;
        b.total = b.scheme_factor + b.risk_factor;
    }
    Ok(levies)
}

pub fn risk_share(levies: &[LevyBreakdown]) -> f64 {
    let risk: f64 = levies.iter().map(|b| b.risk_factor).sum();
    let total: f64 = levies.iter().map(|b| b.total).sum();
    if total == 0.0 {
        1.0
    } else {
        risk / total
    }
}

/// The rate on liabilities that equates expected levy income with expected
/// claims: total claims over total liability base.
pub fn breakeven_levy_rate(claims: &[f64], liability_base: &[f64]) -> Result<f64> {
    if claims.is_empty() || liability_base.is_empty() {
        return Err(Error::Domain("breakeven rate needs non-empty series".into()));
    }
    if claims.len() != liability_base.len() {
        return Err(Error::Domain(format!(
            "claim and liability series differ in length ({} vs {})",
            claims.len(),
            liability_base.len()
        )));
    }
    let base: f64 = liability_base.iter().sum();
    if !(base > 0.0) {
        return Err(Error::Domain("liability base is zero".into()));
    }
    Ok(claims.iter().sum::<f64>() / base)
}

/// One cell of the fair-versus-PBGC comparison grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PremiumComparison {
    pub pd: f64,
    pub funding_ratio: f64,
    pub participants: f64,
    pub liability: f64,
    pub fair: f64,
    pub pbgc: f64,
}

/// Fair premium against a PBGC schedule over a grid of sponsors.
/// Loss given default is the unfunded liability.
pub fn compare_fair_with_pbgc(
    pds: &[f64],
    funding_ratios: &[f64],
    participants: &[f64],
    liability_per_participant: f64,
    schedule_year: u16,
) -> Result<Vec<PremiumComparison>> {
    let mut out = Vec::with_capacity(pds.len() * funding_ratios.len() * participants.len());
    for &pd in pds {
        for &fr in funding_ratios {
            for &n in participants {
                let liability = n * liability_per_participant;
                let unfunded = (liability * (1.0 - fr)).max(0.0);
                out.push(PremiumComparison {
                    pd,
                    funding_ratio: fr,
                    participants: n,
                    liability,
                    fair: fair_premium(pd, unfunded)?,
                    pbgc: pbgc_premium(n, unfunded, schedule_year)?,
                });
            }
        }
    }
    Ok(out)
}
