//! Canned scenario configurations.

use crate::config::StressConfig;
use crate::error::{Error, Result};
use crate::grade::CreditGrade;
use crate::ledger::Recovery;
use crate::levy::{LevyKind, LevySchedule};
use crate::scheme::{GuaranteeLevel, MembershipMix, Scheme, Sponsor};
use crate::sim::{ForcedDefault, SimulationConfig};
use crate::stress::{
    AssetClass, CapitalComponents, Holding, InsurerBalanceSheet, MarketLevels, Persistency, StressParams,
};

pub const SIMULATION_FIXTURES: [&str; 3] = ["mn_baseline", "ppf_2005", "first_month"];
pub const STRESS_FIXTURES: [&str; 1] = ["three_asset"];

/// Population study: two-thirds equity, ten-year deficit recovery, every
/// promised benefit guaranteed and no recovery from sponsors. The flat levy
/// of 0.3% of liabilities only feeds the fund ledger; claims do not depend
/// on it.
pub fn mn_baseline() -> SimulationConfig {
    let mut cfg = SimulationConfig {
        guarantee: GuaranteeLevel::Full,
        recovery: Recovery::NetWorth { fraction: 0.0 },
        levy: LevySchedule {
            kind: LevyKind::Flat,
            liability_rate: 0.003,
            ..LevySchedule::default()
        },
        horizon: 30,
        n_paths: 1000,
        ..SimulationConfig::default()
    };
    cfg.population.count = 1000;
    cfg.population.equity_share = 2.0 / 3.0;
    cfg.population.amortisation_years = 10;
    cfg
}

/// £300m a year of levy split between scheme and risk factors against a
/// population sized so expected net claims run near £670m a year, with
/// 40% of each deficit recovered from the sponsor.
pub fn ppf_2005() -> SimulationConfig {
    let mut cfg = SimulationConfig {
        guarantee: GuaranteeLevel::Compensation,
        recovery: Recovery::DeficitFraction { fraction: 0.4 },
        levy: LevySchedule {
            kind: LevyKind::PpfSplit,
            flat_rate: 15.0,
            variable_rate: 0.009,
            risk_share_min: 0.8,
            target_total: Some(300e6),
            ..LevySchedule::default()
        },
        horizon: 30,
        n_paths: 400,
        ..SimulationConfig::default()
    };
    cfg.population.liability_median = 140e6;
    cfg
}

fn large_scheme(id: &str, liability: f64, funding: f64) -> Scheme {
    Scheme {
        id: id.into(),
        sponsor: Sponsor {
            id: format!("{id}_sponsor"),
            grade: CreditGrade::Ccc,
            base_pd: 0.0,
            net_worth: 0.0,
        },
        full_liability: liability,
        assets: funding * liability,
        equity_share: 2.0 / 3.0,
        liability_duration: 15.0,
        mix: MembershipMix::default(),
        amortisation_years: 10,
        members: None,
    }
}

/// Two large schemes (£875m and £400m of liabilities) whose sponsors fail
/// in the first year, against a fund that starts empty and collects £300m
/// of levy.
pub fn first_month() -> SimulationConfig {
    let mut cfg = SimulationConfig {
        guarantee: GuaranteeLevel::Compensation,
        recovery: Recovery::DeficitFraction { fraction: 0.0 },
        levy: LevySchedule {
            kind: LevyKind::Flat,
            liability_rate: 0.001,
            target_total: Some(300e6),
            ..LevySchedule::default()
        },
        horizon: 5,
        n_paths: 100,
        forced_defaults: vec![
            ForcedDefault {
                scheme_id: "engineering".into(),
                year: 0,
            },
            ForcedDefault {
                scheme_id: "motors".into(),
                year: 0,
            },
        ],
        ..SimulationConfig::default()
    };
    cfg.population.schemes = Some(vec![
        large_scheme("engineering", 875e6, 0.6),
        large_scheme("motors", 400e6, 0.7),
    ]);
    cfg
}

pub fn simulation_fixture(name: &str) -> Result<SimulationConfig> {
    match name {
        "mn_baseline" => Ok(mn_baseline()),
        "ppf_2005" => Ok(ppf_2005()),
        "first_month" => Ok(first_month()),
        other => Err(Error::Usage(format!(
            "unknown simulation fixture `{other}`; expected one of {}",
            SIMULATION_FIXTURES.join(", ")
        ))),
    }
}

/// Insurer (amounts in millions) with 400 of UK equity, 300 of property
/// standing 50% above its three-year average and 300 of AAA bonds,
/// reserves 800 and realistic liabilities 900.
pub fn three_asset() -> StressConfig {
    StressConfig {
        balance_sheet: InsurerBalanceSheet {
            holdings: vec![
                Holding::new(AssetClass::UkEquity, 400.0),
                Holding::new(AssetClass::Property, 300.0),
                Holding::new(AssetClass::CorporateBond, 300.0)
                    .rated(CreditGrade::Aaa, 50.0, 5.0)
                    .with_rate_duration(8.0),
            ],
            mathematical_reserves: 800.0,
            realistic_liabilities: 900.0,
            liability_rate_duration: 10.0,
            liability_participation: 0.0,
            persistency: Persistency::default(),
            capital: CapitalComponents {
                ordinary_shares: 200.0,
                reserves: 100.0,
                perpetual_subordinated_debt: 150.0,
                intangible_assets: 100.0,
                inadmissible_assets: 100.0,
                admissible_assets: 350.0,
                borrowing: 100.0,
                ..CapitalComponents::default()
            },
            market: MarketLevels {
                equity_index: 100.0,
                equity_avg_90d: 100.0,
                earnings_yield: 0.03,
                gilt_yield: 0.045,
                overseas: None,
                property_index: 150.0,
                property_avg_3y: 100.0,
            },
        },
        params: StressParams {
            minimum_capital_eur: 3.0,
            ..StressParams::default()
        },
    }
}

pub fn stress_fixture(name: &str) -> Result<StressConfig> {
    match name {
        "three_asset" => Ok(three_asset()),
        other => Err(Error::Usage(format!(
            "unknown stress fixture `{other}`; expected one of {}",
            STRESS_FIXTURES.join(", ")
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_validate() {
        for name in SIMULATION_FIXTURES {
            simulation_fixture(name).unwrap().validate().unwrap();
        }
        three_asset().validate().unwrap();
        assert!(matches!(simulation_fixture("nope"), Err(Error::Usage(_))));
    }

    #[test]
    fn baseline_shape() {
        let cfg = mn_baseline();
        assert_eq!(cfg.population.count, 1000);
        assert_eq!(cfg.horizon, 30);
        assert_eq!(cfg.n_paths, 1000);
        assert_eq!(cfg.guarantee, GuaranteeLevel::Full);
        assert!(cfg.market.equity_default_beta > 0.0);
    }

    #[test]
    fn first_month_breaks_the_fund() {
        let r = crate::sim::run_simulation(&first_month()).unwrap();
        assert_eq!(r.insolvency_probability, 1.0);
        // both schemes enter in year 0 on every path
        assert_eq!(r.claims.iter().filter(|(_, c)| c.year == 0).count(), 2 * r.n_paths);
        let entered: f64 = r.claims[..2].iter().map(|(_, c)| c.ppf_liability_at_entry).sum();
        let haircut = MembershipMix::default().compensation_haircut();
        assert!((entered - haircut * 1275e6).abs() < 1e-3);
    }
}
