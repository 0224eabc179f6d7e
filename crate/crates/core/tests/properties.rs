use proptest::prelude::*;

use pgfrisk::config;
use pgfrisk::grade::CreditGrade;
use pgfrisk::ledger::{fund_step_year, settle_claim, FundConfig, Recovery};
use pgfrisk::levy::{self, LevyKind, LevySchedule};
use pgfrisk::market::{self, MarketConfig};
use pgfrisk::pricing::{self, PutInputs};
use pgfrisk::scheme::{self, GuaranteeLevel, MembershipMix, Scheme, Sponsor};
use pgfrisk::sim::{self, SimulationConfig};
use pgfrisk::stats;
use pgfrisk::stress::{self, AssetClass, CapitalComponents, Holding};

fn mix() -> impl Strategy<Value = MembershipMix> {
    (0.0..1.0f64, 0.0..1.0f64).prop_map(|(p, d)| {
        let d = d * (1.0 - p);
        MembershipMix {
            share_pensioner: p,
            share_deferred: d,
            share_active: 1.0 - p - d,
        }
    })
}

fn scheme_with(assets: f64, liability: f64, net_worth: f64, mix: MembershipMix) -> Scheme {
    Scheme {
        id: "p".into(),
        sponsor: Sponsor {
            id: "p".into(),
            grade: CreditGrade::Bb,
            base_pd: 0.03,
            net_worth,
        },
        full_liability: liability,
        assets,
        equity_share: 0.5,
        liability_duration: 12.0,
        mix,
        amortisation_years: 8,
        members: None,
    }
}

fn small_sim(seed: u64) -> SimulationConfig {
    let mut cfg = SimulationConfig {
        n_paths: 6,
        horizon: 8,
        seed,
        ..SimulationConfig::default()
    };
    cfg.population.count = 80;
    cfg
}

proptest! {
    #[test]
    fn compensation_never_exceeds_promise(pension in 0.0..200_000.0f64, above in any::<bool>()) {
        let c = scheme::member_compensation(pension, above).unwrap();
        prop_assert!(c <= pension);
        if above {
            prop_assert_eq!(c, pension);
        }
    }

    #[test]
    fn lpi_within_cap(inflation in -0.1..0.3f64, cap in 0.0..0.1f64) {
        let f = scheme::lpi_factor(inflation, cap);
        prop_assert!((1.0..=1.0 + cap).contains(&f));
    }

    #[test]
    fn ppf_liability_haircut(m in mix(), liability in 1.0..1e9f64) {
        let s = scheme_with(0.0, liability, 0.0, m);
        let ppf = scheme::ppf_liability(&s);
        prop_assert!(ppf <= liability);
        if m.share_pensioner < 1.0 {
            prop_assert!(ppf < liability);
        }
        let all = scheme_with(0.0, liability, 0.0, MembershipMix::ALL_PENSIONERS);
        prop_assert_eq!(scheme::ppf_liability(&all), liability);
    }

    #[test]
    fn scheme_step_conserves_value(
        fr in 0.3..1.5f64,
        liability in 1e6..1e9f64,
        seed in 0u64..1000,
        year in 0usize..10,
    ) {
        let path = market::simulate_path(&MarketConfig::default(), seed, 0, 10);
        let s = scheme_with(fr * liability, liability, 0.0, MembershipMix::default());
        let y = scheme::step_year(&s, &path, year, scheme::AmortisationRule::StraightLine).unwrap();
        let expected = s.assets + y.investment_gain + y.contribution;
        if expected >= 0.0 {
            prop_assert!((y.scheme.assets - expected).abs() <= 1e-9 * expected.abs().max(1.0));
        }
        prop_assert_eq!(y.investment_gain, s.assets * y.asset_return);
    }

    #[test]
    fn pbgc_non_decreasing(
        n1 in 0.0..1e5f64, n2 in 0.0..1e5f64,
        u1 in 0.0..1e9f64, u2 in 0.0..1e9f64,
        y in 0usize..8,
    ) {
        let year = [1974, 1978, 1986, 1988, 1991, 1994, 1996, 2006][y];
        let (nl, nh) = if n1 <= n2 { (n1, n2) } else { (n2, n1) };
        let (ul, uh) = if u1 <= u2 { (u1, u2) } else { (u2, u1) };
        let base = levy::pbgc_premium(nl, ul, year).unwrap();
        prop_assert!(levy::pbgc_premium(nh, ul, year).unwrap() >= base);
        prop_assert!(levy::pbgc_premium(nl, uh, year).unwrap() >= base);
    }

    #[test]
    fn split_levy_risk_share_after_rescaling(
        funding in proptest::collection::vec(0.2..1.4f64, 2..30),
        min_share in 0.5..1.0f64,
    ) {
        let schedule = LevySchedule {
            kind: LevyKind::PpfSplit,
            flat_rate: 20.0,
            variable_rate: 0.001,
            risk_share_min: min_share,
            ..LevySchedule::default()
        };
        let pool: Vec<Scheme> = funding
            .iter()
            .map(|f| scheme_with(f * 1e8, 1e8, 0.0, MembershipMix::default()))
            .collect();
        let any_underfunded = pool.iter().any(|s| s.assets < scheme::ppf_liability(s));
        match levy::population_levies(&pool, &schedule, GuaranteeLevel::Compensation) {
            Ok(levies) => prop_assert!(levy::risk_share(&levies) >= min_share - 1e-12),
            Err(_) => prop_assert!(!any_underfunded),
        }
    }

    #[test]
    fn put_value_bounds(a in 0.0..300.0f64, k in 1.0..300.0f64, v in 0.0..1.0f64, r in 0.0..0.1f64, t in 0.05..30.0f64) {
        let p = PutInputs { assets: a, strike_liability: k, asset_vol: v, risk_free_rate: r, horizon: t };
        let put = pricing::put_value_closed_form(&p);
        let pv_k = k * (-r * t).exp();
        prop_assert!(put >= (pv_k - a).max(0.0) - 1e-9 * k);
        prop_assert!(put <= pv_k + 1e-9 * k);
    }

    #[test]
    fn equity_and_property_stress_ranges(
        index in 10.0..200.0f64,
        avg in 10.0..200.0f64,
        gilt in 0.001..0.15f64,
        ey_scale in 0.5..3.0f64,
        prop_ratio in 0.2..4.0f64,
    ) {
        // earnings yield at least half of 4/3 of the gilt yield
        let ey = ey_scale * (2.0 / 3.0) * gilt;
        let f = stress::equity_stress(index, avg, ey, gilt).unwrap();
        prop_assert!((0.10..=0.50).contains(&f));
        let low = stress::equity_stress(index, avg, 1e-6, gilt).unwrap();
        prop_assert!(low >= 0.10);
        let pf = stress::property_stress(prop_ratio * 100.0, 100.0).unwrap();
        prop_assert!((0.10..=0.20).contains(&pf));
    }

    #[test]
    fn capital_routes_agree(c in proptest::collection::vec(0.0..1e4f64, 9)) {
        let components = c[0] + c[1] + c[2] + c[3] + c[4] + c[5] - c[6] - c[7];
        prop_assume!(components >= 0.0);
        let cap = CapitalComponents {
            ordinary_shares: c[0],
            reserves: c[1],
            innovative_tier1: c[2],
            perpetual_subordinated_debt: c[3],
            upper_tier2: c[4],
            lower_tier2: c[5],
            intangible_assets: c[6],
            inadmissible_assets: c[7],
            admissible_assets: components + c[8],
            borrowing: c[8],
        };
        let r = stress::capital_resources(&cap).unwrap();
        prop_assert!((r.traditional - r.components).abs() <= 1e-9 * (components + c[8]).max(1.0));
        let off = CapitalComponents { borrowing: c[8] + 1.0, ..cap };
        prop_assert!(stress::capital_resources(&off).is_err());
    }

    #[test]
    fn credit_stress_monotone(
        g in 0usize..6,
        mv in 1.0..1e3f64,
        s1 in 0.0..600.0f64, s2 in 0.0..600.0f64,
        d1 in 0.0..15.0f64, d2 in 0.0..15.0f64,
    ) {
        let grade = CreditGrade::ALL[g];
        let (tight, wide) = if s1 <= s2 { (s1, s2) } else { (s2, s1) };
        let (short, long) = if d1 <= d2 { (d1, d2) } else { (d2, d1) };
        let charge = |spread: f64, dur: f64| {
            stress::credit_stress(&Holding::new(AssetClass::CorporateBond, mv).rated(grade, spread, dur)).unwrap()
        };
        // more headroom to the maximum spread, or longer duration, costs more
        prop_assert!(charge(tight, short) >= charge(wide, short));
        prop_assert!(charge(tight, long) >= charge(tight, short));
    }

    #[test]
    fn settlement_formula(
        fr in 0.0..0.999f64,
        liability in 1.0..1e9f64,
        net_worth in 0.0..1e9f64,
        fraction in 0.0..1.0f64,
        by_deficit in any::<bool>(),
    ) {
        let s = scheme_with(fr * liability, liability, net_worth, MembershipMix::ALL_PENSIONERS);
        let rec = if by_deficit { Recovery::DeficitFraction { fraction } } else { Recovery::NetWorth { fraction } };
        let c = settle_claim(&s, GuaranteeLevel::Full, rec, 0).unwrap();
        prop_assert_eq!(c.net_claim, (c.ppf_liability_at_entry - c.scheme_assets_taken - c.recovery).max(0.0));
        prop_assert!(c.recovery <= c.ppf_liability_at_entry - c.scheme_assets_taken + 1e-9 * liability);
    }

    #[test]
    fn ledger_identity_random_flows(
        assets in 0.0..1e10f64,
        liabilities in 0.0..1e10f64,
        levies in 0.0..1e9f64,
        z in -4.0..4.0f64,
        seed in 0u64..500,
        overlay in any::<bool>(),
    ) {
        let mut cfg = FundConfig::default();
        cfg.policy.swap_overlay = overlay;
        let path = market::simulate_path(&MarketConfig::default(), seed, 0, 3);
        let mut ledger = cfg.opening_ledger();
        ledger.assets = assets;
        ledger.assumed_liabilities = liabilities;
        let s = scheme_with(1e8, 3e8, 1e7, MembershipMix::default());
        let claim = settle_claim(&s, GuaranteeLevel::Compensation, Recovery::default(), 1).unwrap();
        let fy = fund_step_year(&ledger, levies, &[claim], &cfg, &path, 1, z).unwrap();
        let scale = fy.closing.assets.abs().max(assets).max(1.0);
        prop_assert!(fy.asset_identity_residual().abs() <= 1e-9 * scale);
        let lscale = fy.closing.assumed_liabilities.abs().max(liabilities).max(1.0);
        prop_assert!(fy.liability_identity_residual().abs() <= 1e-9 * lscale);
    }

    #[test]
    fn drawdowns_in_unit_interval(returns in proptest::collection::vec(-0.9..1.0f64, 1..40), w in proptest::option::of(1usize..6)) {
        let d = market::drawdowns(&returns, w);
        prop_assert_eq!(d.len(), returns.len());
        prop_assert!(d.iter().all(|x| (0.0..1.0).contains(x)));
    }

    #[test]
    fn percentiles_ordered(xs in proptest::collection::vec(-1e6..1e6f64, 1..200), q1 in 0.0..1.0f64, q2 in 0.0..1.0f64) {
        let (lo, hi) = if q1 <= q2 { (q1, q2) } else { (q2, q1) };
        prop_assert!(stats::percentile(&xs, lo) <= stats::percentile(&xs, hi));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn config_round_trip(seed in any::<u64>(), paths in 1usize..5000, horizon in 1usize..80, beta in 0.0..20.0f64, eq in 0.0..1.0f64) {
        let mut cfg = SimulationConfig { seed, n_paths: paths, horizon, ..SimulationConfig::default() };
        cfg.market.equity_default_beta = beta;
        cfg.population.equity_share = eq;
        let back = config::parse_simulation_config(&config::to_json_pretty(&cfg)).unwrap();
        prop_assert_eq!(back, cfg);
    }

    #[test]
    fn claim_rates_in_unit_interval(seed in 0u64..1000) {
        let r = sim::run_simulation(&small_sim(seed)).unwrap();
        for path in &r.claim_rates {
            prop_assert!(path.iter().all(|x| (0.0..=1.0).contains(x)));
        }
    }

    #[test]
    fn more_recovery_fewer_net_claims(seed in 0u64..1000, f1 in 0.0..1.0f64, f2 in 0.0..1.0f64) {
        let (lo, hi) = if f1 <= f2 { (f1, f2) } else { (f2, f1) };
        let total = |fraction: f64| {
            let mut cfg = small_sim(seed);
            cfg.recovery = Recovery::DeficitFraction { fraction };
            let r = sim::run_simulation(&cfg).unwrap();
            r.claims.iter().map(|(_, c)| c.net_claim).sum::<f64>()
        };
        prop_assert!(total(hi) <= total(lo));
    }

    #[test]
    fn adverse_selection_pool_pd_rises(seed in 0u64..1000, kappa in 0.1..40.0f64) {
        let run = sim::adverse_selection_experiment(&small_sim(seed), kappa).unwrap();
        for path in &run.paths {
            for w in path.windows(2) {
                prop_assert!(w[1].average_pd >= w[0].average_pd);
            }
        }
    }

    #[test]
    fn same_seed_same_report(seed in 0u64..1000) {
        let a = sim::run_simulation(&small_sim(seed)).unwrap();
        let b = sim::run_simulation(&small_sim(seed)).unwrap();
        prop_assert_eq!(config::to_json_pretty(&a), config::to_json_pretty(&b));
    }
}

#[test]
fn overlay_tracking_error_within_budget() {
    let cfg = FundConfig::default();
    let years = 20_000;
    let path = market::simulate_path(&MarketConfig::default(), 3, 0, years);
    let mut rng = pgfrisk::rng::stream(3, pgfrisk::rng::Purpose::FundAlpha, 0);
    let mut active = Vec::with_capacity(years);
    let ledger = cfg.opening_ledger();
    for year in 0..years {
        let z: f64 = rand::Rng::sample(&mut rng, rand_distr::StandardNormal);
        let fy = fund_step_year(&ledger, 0.0, &[], &cfg, &path, year, z).unwrap();
        active.push(fy.asset_return - fy.benchmark_return);
    }
    let te = stats::std_dev(&active);
    let budget = cfg.policy.risk_budget;
    // three standard errors of a sample standard deviation
    assert!(
        te <= budget * (1.0 + 3.0 / (2.0 * years as f64).sqrt()),
        "tracking error {te}"
    );
}
