//! Population simulation: markets, schemes, sponsor defaults, levies and
//! the fund ledger composed path by path, plus the behavioural
//! experiments built on top.

use std::path::PathBuf;

use rand::Rng;
use rand_distr::{Distribution, LogNormal, Normal, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grade::{CreditGrade, GradeTable};
use crate::ledger::{fund_step_year, settle_claim, ClaimEvent, FundConfig, FundLedger, Recovery};
use crate::levy::{self, LevyKind, LevySchedule};
use crate::market::{self, MarketConfig};
use crate::pricing::{self, LossMode, PutInputs};
use crate::rng::{self, Purpose};
use crate::scheme::{
    guaranteed_liability, step_year, AmortisationRule, GuaranteeLevel, MembershipMix, Scheme, Sponsor,
};
use crate::stats;
use crate::validate;

/// How the scheme population is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PopulationSpec {
    pub count: usize,
    /// Median full liability of a generated scheme.
    pub liability_median: f64,
    /// Log-scale dispersion of liability sizes.
    pub liability_sigma: f64,
    pub funding_ratio_mean: f64,
    pub funding_ratio_sd: f64,
    pub funding_ratio_min: f64,
    pub funding_ratio_max: f64,
    pub equity_share: f64,
    pub amortisation_years: u32,
    pub liability_duration: f64,
    pub mix: MembershipMix,
    /// Sponsor net worth as a multiple of scheme liability.
    pub net_worth_multiple: f64,
    pub grade_weights: GradeTable,
    pub base_pd: GradeTable,
    /// Explicit schemes; overrides generation.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub schemes: Option<Vec<Scheme>>,
    /// CSV file of schemes; overrides generation when `schemes` is absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl Default for PopulationSpec {
    fn default() -> Self {
        PopulationSpec {
            count: 1000,
            liability_median: 40e6,
            liability_sigma: 1.0,
            funding_ratio_mean: 0.75,
            funding_ratio_sd: 0.20,
            funding_ratio_min: 0.30,
            funding_ratio_max: 1.60,
            equity_share: 2.0 / 3.0,
            amortisation_years: 10,
            liability_duration: 15.0,
            mix: MembershipMix::default(),
            net_worth_multiple: 0.5,
            grade_weights: GradeTable {
                aaa: 0.02,
                aa: 0.08,
                a: 0.25,
                bbb: 0.35,
                bb: 0.18,
                b: 0.09,
                ccc: 0.03,
            },
            base_pd: GradeTable {
                aaa: 0.00006,
                aa: 0.00015,
                a: 0.0003,
                bbb: 0.0012,
                bb: 0.0045,
                b: 0.015,
                ccc: 0.045,
            },
            schemes: None,
            file: None,
        }
    }
}

impl PopulationSpec {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        let k = |name: &str| format!("{prefix}{name}");
        if let Some(schemes) = &self.schemes {
            if schemes.is_empty() {
                return Err(Error::config(k("schemes"), "must contain at least one scheme"));
            }
            for (i, s) in schemes.iter().enumerate() {
                s.validate(&k(&format!("schemes[{i}].")))?;
            }
            return Ok(());
        }
        if self.file.is_some() {
            return Ok(());
        }
        validate::at_least_one(&k("count"), self.count as u64)?;
        validate::positive(&k("liability_median"), self.liability_median)?;
        validate::non_negative(&k("liability_sigma"), self.liability_sigma)?;
        validate::positive(&k("funding_ratio_mean"), self.funding_ratio_mean)?;
        validate::non_negative(&k("funding_ratio_sd"), self.funding_ratio_sd)?;
        validate::non_negative(&k("funding_ratio_min"), self.funding_ratio_min)?;
        if self.funding_ratio_max < self.funding_ratio_min {
            return Err(Error::config(
                k("funding_ratio_max"),
                format!(
                    "must be ≥ funding_ratio_min {} (got {})",
                    self.funding_ratio_min, self.funding_ratio_max
                ),
            ));
        }
        validate::unit_interval(&k("equity_share"), self.equity_share)?;
        validate::at_least_one(&k("amortisation_years"), self.amortisation_years as u64)?;
        validate::non_negative(&k("liability_duration"), self.liability_duration)?;
        self.mix.validate(&k("mix."))?;
        validate::non_negative(&k("net_worth_multiple"), self.net_worth_multiple)?;
        for (g, w) in CreditGrade::ALL.iter().zip(self.grade_weights.values()) {
            validate::unit_interval(&k(&format!("grade_weights.{g}")), w)?;
        }
        validate::sums_to_one(&k("grade_weights"), &self.grade_weights.values())?;
        for (g, p) in CreditGrade::ALL.iter().zip(self.base_pd.values()) {
            validate::unit_interval(&k(&format!("base_pd.{g}")), p)?;
            if p >= 1.0 {
                return Err(Error::config(k(&format!("base_pd.{g}")), "must be < 1 (got 1)"));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum MoralHazardRule {
    #[default]
    Off,
    /// Sub-investment-grade sponsors of underfunded schemes move the
    /// equity share up to `target_share`.
    WeakSponsorsRaiseEquity { target_share: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case", deny_unknown_fields)]
pub enum AdverseSelectionRule {
    #[default]
    Off,
    /// Schemes with below-average sponsor risk leave with probability
    /// `2σ(kappa × levy_rate) − 1`.
    ExitHazard { kappa: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Behaviour {
    pub moral_hazard: MoralHazardRule,
    pub adverse_selection: AdverseSelectionRule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcedDefault {
    pub scheme_id: String,
    pub year: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EarlyWarning {
    pub liability_threshold: f64,
    pub underfunding_threshold: f64,
}

impl Default for EarlyWarning {
    fn default() -> Self {
        EarlyWarning {
            liability_threshold: 25e6,
            underfunding_threshold: 5e6,
        }
    }
}

impl EarlyWarning {
    pub fn flags(&self, s: &Scheme) -> bool {
        let large = s.full_liability > self.liability_threshold;
        large && (!s.sponsor.grade.is_investment_grade() || s.deficit() > self.underfunding_threshold)
    }
}

/// Which valuation of a defaulting scheme decides entry and sizes the claim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryValuation {
    /// Start of the default year, before that year's market move.
    #[default]
    Opening,
    /// End of the default year, after the scheme has rolled forward.
    Closing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SimulationConfig {
    pub market: MarketConfig,
    pub population: PopulationSpec,
    pub levy: LevySchedule,
    pub recovery: Recovery,
    pub fund: FundConfig,
    pub guarantee: GuaranteeLevel,
    pub amortisation: AmortisationRule,
    pub horizon: usize,
    pub n_paths: usize,
    pub seed: u64,
    pub behaviour: Behaviour,
    pub forced_defaults: Vec<ForcedDefault>,
    pub early_warning: EarlyWarning,
    pub entry_valuation: EntryValuation,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            market: MarketConfig::default(),
            population: PopulationSpec::default(),
            levy: LevySchedule::default(),
            recovery: Recovery::default(),
            fund: FundConfig::default(),
            guarantee: GuaranteeLevel::default(),
            amortisation: AmortisationRule::default(),
            horizon: 30,
            n_paths: 1000,
            seed: 1,
            behaviour: Behaviour::default(),
            forced_defaults: Vec::new(),
            early_warning: EarlyWarning::default(),
            entry_valuation: EntryValuation::default(),
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        self.market.validate("market.")?;
        self.population.validate("population.")?;
        self.levy.validate("levy.")?;
        self.recovery.validate("recovery")?;
        self.fund.validate("fund.")?;
        if let AmortisationRule::Annuity { rate } = self.amortisation {
            validate::finite("amortisation.rate", rate)?;
            if rate <= -1.0 {
                return Err(Error::config("amortisation.rate", format!("must be > -1 (got {rate})")));
            }
        }
        validate::at_least_one("horizon", self.horizon as u64)?;
        validate::at_least_one("n_paths", self.n_paths as u64)?;
        if let MoralHazardRule::WeakSponsorsRaiseEquity { target_share } = self.behaviour.moral_hazard {
            validate::unit_interval("behaviour.moral_hazard.target_share", target_share)?;
        }
        if let AdverseSelectionRule::ExitHazard { kappa } = self.behaviour.adverse_selection {
            validate::non_negative("behaviour.adverse_selection.kappa", kappa)?;
        }
        for (i, f) in self.forced_defaults.iter().enumerate() {
            if f.year >= self.horizon {
                return Err(Error::config(
                    format!("forced_defaults[{i}].year"),
                    format!("must be < horizon {} (got {})", self.horizon, f.year),
                ));
            }
        }
        validate::non_negative(
            "early_warning.liability_threshold",
            self.early_warning.liability_threshold,
        )?;
        validate::non_negative(
            "early_warning.underfunding_threshold",
            self.early_warning.underfunding_threshold,
        )
    }
}

/// Build the starting population: explicit schemes, a CSV file, or a draw
/// from the generator keyed by the run seed.
pub fn build_population(cfg: &SimulationConfig) -> Result<Vec<Scheme>> {
    let spec = &cfg.population;
    if let Some(s) = &spec.schemes {
        return Ok(s.clone());
    }
    if let Some(path) = &spec.file {
        let schemes = crate::config::load_schemes_csv(path)?;
        for (i, s) in schemes.iter().enumerate() {
            s.validate(&format!("population.file[{i}]."))?;
        }
        if schemes.is_empty() {
            return Err(Error::Data(format!("{}: no schemes", path.display())));
        }
        return Ok(schemes);
    }
    let mut rng = rng::stream(cfg.seed, Purpose::Population, 0);
    let sizes = LogNormal::new(spec.liability_median.ln(), spec.liability_sigma)
        .map_err(|e| Error::config("population.liability_sigma", e.to_string()))?;
    let funding = Normal::new(spec.funding_ratio_mean, spec.funding_ratio_sd)
        .map_err(|e| Error::config("population.funding_ratio_sd", e.to_string()))?;
    let weights = spec.grade_weights.values();
    let mut out = Vec::with_capacity(spec.count);
    for i in 0..spec.count {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut grade = CreditGrade::Ccc;
        for (g, w) in CreditGrade::ALL.iter().zip(weights) {
            acc += w;
            if u < acc {
                grade = *g;
                break;
            }
        }
        let liability = sizes.sample(&mut rng);
        let fr = funding
            .sample(&mut rng)
            .clamp(spec.funding_ratio_min, spec.funding_ratio_max);
        out.push(Scheme {
            id: format!("S{i:05}"),
            sponsor: Sponsor {
                id: format!("C{i:05}"),
                grade,
                base_pd: spec.base_pd.get(grade),
                net_worth: spec.net_worth_multiple * liability,
            },
            full_liability: liability,
            assets: fr * liability,
            equity_share: spec.equity_share,
            liability_duration: spec.liability_duration,
            mix: spec.mix,
            amortisation_years: spec.amortisation_years,
            members: None,
        });
    }
    Ok(out)
}

/// Fund ledger at the close of one simulated year.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerRow {
    pub year: usize,
    pub assets: f64,
    pub liabilities: f64,
    pub levies: f64,
    pub claims: f64,
    pub insolvent: bool,
}

/// Pool composition at the start of a year.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoolYear {
    pub year: usize,
    pub schemes: f64,
    pub average_pd: f64,
    pub levy_rate: f64,
}

#[derive(Debug, Clone)]
struct PathOutcome {
    claim_amounts: Vec<f64>,
    equity_returns: Vec<f64>,
    bases: Vec<f64>,
    levies: Vec<f64>,
    ledger: Vec<LedgerRow>,
    events: Vec<ClaimEvent>,
    pool: Vec<PoolYear>,
    flagged_claims: f64,
    max_identity_residual: f64,
    insolvent: bool,
    terminal_net_position: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EarlyWarningSummary {
    /// Schemes flagged at the start of the run.
    pub initial_flagged: Vec<String>,
    /// Share of net claims arising from schemes flagged at the start of
    /// the year they claimed.
    pub flagged_claim_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationReport {
    pub seed: u64,
    pub n_paths: usize,
    pub horizon: usize,
    pub n_schemes: usize,
    /// `[path][year]` net claims over the opening guaranteed liabilities.
    pub claim_rates: Vec<Vec<f64>>,
    pub claim_amounts: Vec<Vec<f64>>,
    pub equity_returns: Vec<Vec<f64>>,
    pub mean_claim_rate: f64,
    pub p99_claim_rate: f64,
    pub max_claim_rate_by_path: Vec<f64>,
    pub median_max_claim_rate: f64,
    pub breakeven_levy_rate: f64,
    pub mean_annual_claims: f64,
    pub mean_annual_levies: f64,
    pub insolvency_probability: f64,
    pub claims_equity_correlation: f64,
    /// Mean across paths of the pool composition by year.
    pub pool: Vec<PoolYear>,
    pub early_warning: EarlyWarningSummary,
    pub terminal_net_position: Vec<f64>,
    /// Largest relative residual of the fund accounting identity.
    pub max_identity_residual: f64,
    #[serde(skip)]
    pub claims: Vec<(usize, ClaimEvent)>,
    #[serde(skip)]
    pub ledgers: Vec<Vec<LedgerRow>>,
}

impl SimulationReport {
    /// Per-year percentiles of the fund net position, for a fan chart.
    pub fn net_position_fan(&self, quantiles: &[f64]) -> Vec<Vec<f64>> {
        (0..self.horizon)
            .map(|t| {
                let mut xs: Vec<f64> = self.ledgers.iter().map(|l| l[t].assets - l[t].liabilities).collect();
                xs.sort_by(f64::total_cmp);
                quantiles.iter().map(|&q| stats::percentile_sorted(&xs, q)).collect()
            })
            .collect()
    }

    pub fn all_claim_rates(&self) -> Vec<f64> {
        self.claim_rates.iter().flatten().copied().collect()
    }
}

fn exit_probability(kappa: f64, levy_rate: f64) -> f64 {
    2.0 / (1.0 + (-kappa * levy_rate).exp()) - 1.0
}

fn mean_pd(pool: &[Scheme]) -> f64 {
    pool.iter().map(|s| s.sponsor.base_pd).sum::<f64>() / pool.len() as f64
}

fn annual_levies(cfg: &SimulationConfig, pool: &[Scheme], solved_rate: Option<f64>) -> Result<f64> {
    if let Some(rate) = solved_rate {
        return Ok(rate * pool.iter().map(|s| guaranteed_liability(s, cfg.guarantee)).sum::<f64>());
    }
    let levies = match levy::population_levies(pool, &cfg.levy, cfg.guarantee) {
        Ok(v) => v,
        // A split schedule cannot reach its risk share when nobody is
        // underfunded; charge the scheme factor alone.
        Err(Error::Usage(_)) if cfg.levy.kind == LevyKind::PpfSplit => {
            let raw: Vec<_> = pool
                .iter()
                .map(|s| levy::ppf_levy(s, &cfg.levy))
                .collect::<Result<_>>()?;
            let total: f64 = raw.iter().map(|b| b.scheme_factor).sum();
            return Ok(match cfg.levy.target_total {
                Some(t) if total > 0.0 => t,
                _ => total,
            } + cfg.levy.admin_overhead);
        }
        Err(e) => return Err(e),
    };
    Ok(levies.iter().map(|b| b.total).sum::<f64>() + cfg.levy.admin_overhead)
}

/// Expected claims over the pool as a rate on guaranteed liabilities.
fn required_levy_rate(cfg: &SimulationConfig, pool: &[Scheme]) -> f64 {
    let base: f64 = pool.iter().map(|s| guaranteed_liability(s, cfg.guarantee)).sum();
    if base <= 0.0 {
        return 0.0;
    }
    let expected: f64 = pool
        .iter()
        .map(|s| s.sponsor.base_pd * (guaranteed_liability(s, cfg.guarantee) - s.assets).max(0.0))
        .sum();
    expected / base
}

fn simulate_one_path(cfg: &SimulationConfig, initial: &[Scheme], path_index: usize) -> Result<PathOutcome> {
    let horizon = cfg.horizon;
    let path = market::simulate_path(&cfg.market, cfg.seed, path_index as u64, horizon);
    let beta = cfg.market.equity_default_beta;
    let mut default_rng = rng::stream(cfg.seed, Purpose::Defaults, path_index as u64);
    let mut alpha_rng = rng::stream(cfg.seed, Purpose::FundAlpha, path_index as u64);
    let mut exit_rng = rng::stream(cfg.seed, Purpose::Exits, path_index as u64);

    let initial_funding: Vec<f64> = initial.iter().map(|s| s.funding_ratio()).collect();
    // Slot index into `initial`, so replacements inherit the slot's profile.
    let mut slots: Vec<usize> = (0..initial.len()).collect();
    let mut pool: Vec<Scheme> = initial.to_vec();
    let mut ledger: FundLedger = cfg.fund.opening_ledger();

    let mut out = PathOutcome {
        claim_amounts: Vec::with_capacity(horizon),
        equity_returns: Vec::new(),
        bases: Vec::with_capacity(horizon),
        levies: Vec::with_capacity(horizon),
        ledger: Vec::with_capacity(horizon),
        events: Vec::new(),
        pool: Vec::with_capacity(horizon),
        flagged_claims: 0.0,
        max_identity_residual: 0.0,
        insolvent: false,
        terminal_net_position: 0.0,
    };

    for year in 0..horizon {
        if let MoralHazardRule::WeakSponsorsRaiseEquity { target_share } = cfg.behaviour.moral_hazard {
            for s in pool.iter_mut() {
                if !s.sponsor.grade.is_investment_grade() && s.assets < s.full_liability {
                    s.equity_share = s.equity_share.max(target_share);
                }
            }
        }

        let solved_rate = match cfg.behaviour.adverse_selection {
            AdverseSelectionRule::Off => None,
            AdverseSelectionRule::ExitHazard { kappa } => {
                let rate = required_levy_rate(cfg, &pool);
                let p_exit = exit_probability(kappa, rate);
                let avg = mean_pd(&pool);
                let mut keep = Vec::with_capacity(pool.len());
                for s in &pool {
                    let u: f64 = exit_rng.random();
                    keep.push(!(s.sponsor.base_pd < avg && u < p_exit));
                }
                let mut k = keep.iter();
                slots.retain(|_| *k.next().unwrap());
                let mut k = keep.iter();
                pool.retain(|_| *k.next().unwrap());
                Some(required_levy_rate(cfg, &pool))
            }
        };

        let base: f64 = pool.iter().map(|s| guaranteed_liability(s, cfg.guarantee)).sum();
        let levies = annual_levies(cfg, &pool, solved_rate)?;
        out.pool.push(PoolYear {
            year,
            schemes: pool.len() as f64,
            average_pd: mean_pd(&pool),
            levy_rate: if base > 0.0 { levies / base } else { 0.0 },
        });

        let mut claims = Vec::new();
        let mut next = Vec::with_capacity(pool.len());
        for (i, s) in pool.iter().enumerate() {
            let u: f64 = default_rng.random();
            let p = if s.sponsor.base_pd == 0.0 {
                0.0
            } else {
                market::default_probability(s.sponsor.base_pd, path.equity_drawdown[year], beta)?
            };
            let forced = cfg
                .forced_defaults
                .iter()
                .any(|f| f.year == year && f.scheme_id == s.id);
            let defaulted = forced || u < p;
            if !defaulted {
                next.push(step_year(s, &path, year, cfg.amortisation)?.scheme);
                continue;
            }
            // Entry is judged on the opening or the post-market valuation.
            let valued = match cfg.entry_valuation {
                EntryValuation::Opening => s.clone(),
                EntryValuation::Closing => step_year(s, &path, year, cfg.amortisation)?.scheme,
            };
            if valued.assets < guaranteed_liability(&valued, cfg.guarantee) {
                let event = settle_claim(&valued, cfg.guarantee, cfg.recovery, year)?;
                if cfg.early_warning.flags(s) {
                    out.flagged_claims += event.net_claim;
                }
                claims.push(event);
            }
            // The slot is refilled by a new scheme of the same profile and
            // current size.
            let fresh = &initial[slots[i]];
            let mut r = fresh.clone();
            r.full_liability = valued.full_liability;
            r.assets = initial_funding[slots[i]] * valued.full_liability;
            r.sponsor.net_worth = fresh.sponsor.net_worth * valued.full_liability / fresh.full_liability;
            next.push(match cfg.entry_valuation {
                EntryValuation::Opening => step_year(&r, &path, year, cfg.amortisation)?.scheme,
                EntryValuation::Closing => r,
            });
        }
        pool = next;

        let z: f64 = alpha_rng.sample(StandardNormal);
        let fy = fund_step_year(&ledger, levies, &claims, &cfg.fund, &path, year, z)?;
        let scale = fy
            .closing
            .assets
            .abs()
            .max(fy.closing.assumed_liabilities.abs())
            .max(1.0);
        let residual = fy
            .asset_identity_residual()
            .abs()
            .max(fy.liability_identity_residual().abs())
            / scale;
        out.max_identity_residual = out.max_identity_residual.max(residual);
        ledger = fy.closing;

        out.claim_amounts.push(fy.net_claims);
        out.bases.push(base);
        out.levies.push(levies);
        out.ledger.push(LedgerRow {
            year,
            assets: ledger.assets,
            liabilities: ledger.assumed_liabilities,
            levies,
            claims: fy.net_claims,
            insolvent: ledger.insolvent,
        });
        out.events.extend(claims);
    }
    out.equity_returns = path.equity_total_return;
    out.insolvent = ledger.insolvent;
    out.terminal_net_position = ledger.net_position();
    Ok(out)
}

/// Run the full population simulation. Paths run in parallel; the
/// reduction is in path order, so results do not depend on thread count.
pub fn run_simulation(cfg: &SimulationConfig) -> Result<SimulationReport> {
    cfg.validate()?;
    let initial = build_population(cfg)?;
    let outcomes: Vec<PathOutcome> = (0..cfg.n_paths)
        .into_par_iter()
        .map(|p| simulate_one_path(cfg, &initial, p))
        .collect::<Result<_>>()?;
    Ok(assemble(cfg, &initial, outcomes))
}

fn assemble(cfg: &SimulationConfig, initial: &[Scheme], outcomes: Vec<PathOutcome>) -> SimulationReport {
    let equity_returns: Vec<Vec<f64>> = outcomes.iter().map(|o| o.equity_returns.clone()).collect();
    let claim_rates: Vec<Vec<f64>> = outcomes
        .iter()
        .map(|o| {
            o.claim_amounts
                .iter()
                .zip(&o.bases)
                .map(|(c, b)| if *b > 0.0 { (c / b).clamp(0.0, 1.0) } else { 0.0 })
                .collect()
        })
        .collect();
    let flat_rates: Vec<f64> = claim_rates.iter().flatten().copied().collect();
    let flat_claims: Vec<f64> = outcomes.iter().flat_map(|o| o.claim_amounts.iter().copied()).collect();
    let flat_bases: Vec<f64> = outcomes.iter().flat_map(|o| o.bases.iter().copied()).collect();
    let flat_equity: Vec<f64> = equity_returns.iter().flatten().copied().collect();
    let max_by_path: Vec<f64> = claim_rates
        .iter()
        .map(|r| r.iter().copied().fold(0.0, f64::max))
        .collect();
    let total_claims: f64 = flat_claims.iter().sum();
    let path_years = flat_claims.len() as f64;

    let horizon = cfg.horizon;
    let n = outcomes.len() as f64;
    let pool = (0..horizon)
        .map(|t| {
            let mut acc = PoolYear {
                year: t,
                schemes: 0.0,
                average_pd: 0.0,
                levy_rate: 0.0,
            };
            for o in &outcomes {
                acc.schemes += o.pool[t].schemes / n;
                acc.average_pd += o.pool[t].average_pd / n;
                acc.levy_rate += o.pool[t].levy_rate / n;
            }
            acc
        })
        .collect();

    let flagged: f64 = outcomes.iter().map(|o| o.flagged_claims).sum();
    let mut claims = Vec::new();
    let mut ledgers = Vec::with_capacity(outcomes.len());
    let mut terminal = Vec::with_capacity(outcomes.len());
    let mut insolvent = 0usize;
    let mut max_residual: f64 = 0.0;
    for (p, o) in outcomes.into_iter().enumerate() {
        claims.extend(o.events.into_iter().map(|e| (p, e)));
        ledgers.push(o.ledger);
        terminal.push(o.terminal_net_position);
        insolvent += o.insolvent as usize;
        max_residual = max_residual.max(o.max_identity_residual);
    }

    SimulationReport {
        seed: cfg.seed,
        n_paths: cfg.n_paths,
        horizon,
        n_schemes: initial.len(),
        mean_claim_rate: stats::mean(&flat_rates),
        p99_claim_rate: stats::percentile(&flat_rates, 0.99),
        median_max_claim_rate: stats::percentile(&max_by_path, 0.5),
        max_claim_rate_by_path: max_by_path,
        breakeven_levy_rate: levy::breakeven_levy_rate(&flat_claims, &flat_bases).unwrap_or(0.0),
        mean_annual_claims: total_claims / path_years,
        mean_annual_levies: ledgers.iter().flatten().map(|r| r.levies).sum::<f64>() / path_years,
        insolvency_probability: insolvent as f64 / n,
        claims_equity_correlation: stats::correlation(&flat_claims, &flat_equity),
        pool,
        early_warning: EarlyWarningSummary {
            initial_flagged: initial
                .iter()
                .filter(|s| cfg.early_warning.flags(s))
                .map(|s| s.id.clone())
                .collect(),
            flagged_claim_share: if total_claims > 0.0 {
                flagged / total_claims
            } else {
                0.0
            },
        },
        terminal_net_position: terminal,
        max_identity_residual: max_residual,
        claim_rates,
        claim_amounts: flat_claims.chunks(horizon).map(|c| c.to_vec()).collect(),
        equity_returns,
        claims,
        ledgers,
    }
}

/// Breakeven levy rate: run with no levy and divide total net claims by
/// total guaranteed liabilities.
pub fn calibrate_breakeven_premium(cfg: &SimulationConfig) -> Result<f64> {
    let mut c = cfg.clone();
    c.levy = LevySchedule::none();
    c.behaviour.adverse_selection = AdverseSelectionRule::Off;
    Ok(run_simulation(&c)?.breakeven_levy_rate)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FlatRateSolution {
    pub liability_rate: f64,
    pub mean_terminal_net_position: f64,
    pub iterations: usize,
}

/// Bisect on a flat levy rate on guaranteed liabilities until the mean
/// terminal net position of the fund is zero.
pub fn solve_flat_levy_rate(cfg: &SimulationConfig, tolerance: f64) -> Result<FlatRateSolution> {
    validate::positive("tolerance", tolerance)?;
    let mut c = cfg.clone();
    c.behaviour.adverse_selection = AdverseSelectionRule::Off;
    let eval = |rate: f64| -> Result<f64> {
        let mut c = c.clone();
        c.levy = LevySchedule {
            kind: LevyKind::Flat,
            liability_rate: rate,
            ..LevySchedule::none()
        };
        // A flat schedule charges on the guaranteed liability.
        Ok(stats::mean(&run_simulation(&c)?.terminal_net_position))
    };
    let mut lo = 0.0;
    let f_lo = eval(lo)?;
    if f_lo >= 0.0 {
        return Ok(FlatRateSolution {
            liability_rate: 0.0,
            mean_terminal_net_position: f_lo,
            iterations: 0,
        });
    }
    let mut hi = 0.01;
    let mut f_hi = eval(hi)?;
    let mut iterations = 2;
    while f_hi < 0.0 {
        hi *= 2.0;
        if hi > 1.0 {
            return Err(Error::Domain("no levy rate up to 100% balances the fund".into()));
        }
        f_hi = eval(hi)?;
        iterations += 1;
    }
    while hi - lo > tolerance {
        let mid = 0.5 * (lo + hi);
        let f = eval(mid)?;
        iterations += 1;
        if f < 0.0 {
            lo = mid;
        } else {
            hi = mid;
            f_hi = f;
        }
    }
    Ok(FlatRateSolution {
        liability_rate: hi,
        mean_terminal_net_position: f_hi,
        iterations,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MoralHazardCell {
    pub equity_share: f64,
    pub funding_ratio: f64,
    pub asset_vol: f64,
    /// Expected loss per unit of guaranteed liability.
    pub guarantee_value: f64,
    pub simulated_claim_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MoralHazardTable {
    pub pd: f64,
    pub cells: Vec<MoralHazardCell>,
    pub value_increasing_in_equity_share: bool,
    pub value_decreasing_in_funding_ratio: bool,
}

/// Guarantee values and simulated claim rates across a grid of equity
/// shares and funding ratios. Every generated scheme takes the cell's
/// share and funding ratio; the rest of the config is kept.
pub fn moral_hazard_experiment(
    cfg: &SimulationConfig,
    equity_shares: &[f64],
    funding_ratios: &[f64],
) -> Result<MoralHazardTable> {
    cfg.validate()?;
    if equity_shares.is_empty() || funding_ratios.is_empty() {
        return Err(Error::Usage("moral hazard grid must be non-empty".into()));
    }
    for &e in equity_shares {
        validate::unit_interval("equity_share", e)?;
    }
    for &f in funding_ratios {
        validate::positive("funding_ratio", f)?;
    }
    let base = build_population(cfg)?;
    let pd = mean_pd(&base);
    let mut cells = Vec::with_capacity(equity_shares.len() * funding_ratios.len());
    for &e in equity_shares {
        for &f in funding_ratios {
            let vol = pricing::asset_vol_from_equity(e, cfg.market.equity_vol);
            let put = PutInputs {
                assets: f,
                strike_liability: 1.0,
                asset_vol: vol,
                risk_free_rate: cfg.market.gilt_yield_initial,
                horizon: 1.0,
            };
            let value = pricing::guarantee_expected_loss(&put, pd, LossMode::Independent, None)?;
            let mut c = cfg.clone();
            c.levy = LevySchedule::none();
            let schemes = base
                .iter()
                .map(|s| {
                    let mut s = s.clone();
                    s.equity_share = e;
                    s.assets = f * guaranteed_liability(&s, cfg.guarantee);
                    s
                })
                .collect();
            c.population.schemes = Some(schemes);
            cells.push(MoralHazardCell {
                equity_share: e,
                funding_ratio: f,
                asset_vol: vol,
                guarantee_value: value,
                simulated_claim_rate: run_simulation(&c)?.mean_claim_rate,
            });
        }
    }
    let nf = funding_ratios.len();
    let at = |i: usize, j: usize| cells[i * nf + j].guarantee_value;
    let mut inc_share = true;
    let mut dec_funding = true;
    for i in 0..equity_shares.len() {
        for j in 0..nf {
            if i > 0 && equity_shares[i] >= equity_shares[i - 1] && at(i, j) < at(i - 1, j) {
                inc_share = false;
            }
            if j > 0 && funding_ratios[j] >= funding_ratios[j - 1] && at(i, j) > at(i, j - 1) {
                dec_funding = false;
            }
        }
    }
    Ok(MoralHazardTable {
        pd,
        cells,
        value_increasing_in_equity_share: inc_share,
        value_decreasing_in_funding_ratio: dec_funding,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdverseSelectionRun {
    pub kappa: f64,
    /// Mean across paths by year.
    pub mean: Vec<PoolYear>,
    /// Every path's trajectory.
    pub paths: Vec<Vec<PoolYear>>,
}

/// Pool composition and required levy rate when low-risk schemes leave in
/// response to the levy.
pub fn adverse_selection_experiment(cfg: &SimulationConfig, kappa: f64) -> Result<AdverseSelectionRun> {
    validate::non_negative("kappa", kappa)?;
    let mut c = cfg.clone();
    c.behaviour.adverse_selection = AdverseSelectionRule::ExitHazard { kappa };
    c.validate()?;
    let initial = build_population(&c)?;
    let outcomes: Vec<PathOutcome> = (0..c.n_paths)
        .into_par_iter()
        .map(|p| simulate_one_path(&c, &initial, p))
        .collect::<Result<_>>()?;
    let paths: Vec<Vec<PoolYear>> = outcomes.into_iter().map(|o| o.pool).collect();
    let n = paths.len() as f64;
    let mean = (0..c.horizon)
        .map(|t| {
            let mut acc = PoolYear {
                year: t,
                schemes: 0.0,
                average_pd: 0.0,
                levy_rate: 0.0,
            };
            for p in &paths {
                acc.schemes += p[t].schemes / n;
                acc.average_pd += p[t].average_pd / n;
                acc.levy_rate += p[t].levy_rate / n;
            }
            acc
        })
        .collect();
    Ok(AdverseSelectionRun { kappa, mean, paths })
}
