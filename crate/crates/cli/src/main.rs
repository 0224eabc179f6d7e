use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use pgfrisk::config::{self, PutConfig, StressConfig};
use pgfrisk::pricing::{self, LossMode};
use pgfrisk::sim::{self, SimulationConfig};
use pgfrisk::{fixtures, levy, report, stress, Error, Result};

#[derive(Parser)]
#[command(name = "pgfrisk", version, about = "Pension guarantee fund risk laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON config file.
    #[arg(long, conflicts_with = "fixture")]
    config: Option<PathBuf>,
    /// Named built-in scenario.
    #[arg(long)]
    fixture: Option<String>,
    /// Override the config seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the number of simulated paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Directory for report files and the run manifest.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the default config as JSON and exit.
    #[arg(long)]
    print_defaults: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Run the population simulation.
    Simulate(Common),
    /// Run the regulatory stress test on an insurer balance sheet.
    Stress(Common),
    /// Per-scheme levy table (CSV) for the starting population, or a
    /// single-plan PBGC premium.
    Levy {
        #[command(flatten)]
        common: Common,
        /// PBGC schedule year for a single-plan premium.
        #[arg(long, requires_all = ["participants", "uvb"])]
        pbgc_year: Option<u16>,
        #[arg(long)]
        participants: Option<f64>,
        /// Unfunded vested benefits.
        #[arg(long)]
        uvb: Option<f64>,
    },
    /// Value the guarantee as a put on scheme assets.
    PricePut {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        assets: Option<f64>,
        #[arg(long)]
        strike: Option<f64>,
        #[arg(long)]
        vol: Option<f64>,
        #[arg(long)]
        rate: Option<f64>,
        #[arg(long)]
        horizon: Option<f64>,
        #[arg(long)]
        pd: Option<f64>,
        /// independent or joint
        #[arg(long)]
        mode: Option<String>,
        /// Monte Carlo samples for the oracle.
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Breakeven levy rate with no levy charged.
    Calibrate {
        #[command(flatten)]
        common: Common,
        /// Also bisect for the flat rate that balances the fund.
        #[arg(long)]
        solve_flat: bool,
        #[arg(long, default_value_t = 1e-5)]
        tolerance: f64,
    },
}

// A closed pipe on stdout (e.g. `| head`) is not an error worth a panic.
fn emit(bytes: &[u8]) {
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(bytes).and_then(|_| out.flush());
}

fn print_json<T: serde::Serialize>(value: &T) {
    let mut text = config::to_json_pretty(value);
    text.push('\n');
    emit(text.as_bytes());
}

fn simulation_config(c: &Common) -> Result<SimulationConfig> {
    let mut cfg = match (&c.config, &c.fixture) {
        (Some(p), _) => config::load_simulation_config(p)?,
        (None, Some(f)) => fixtures::simulation_fixture(f)?,
        (None, None) => SimulationConfig::default(),
    };
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(n) = c.paths {
        cfg.n_paths = n;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn stress_config(c: &Common) -> Result<StressConfig> {
    match (&c.config, &c.fixture) {
        (Some(p), _) => config::load_stress_config(p),
        (None, Some(f)) => fixtures::stress_fixture(f),
        (None, None) => Err(Error::Usage("stress needs --config or --fixture".into())),
    }
}

fn write_single<T: serde::Serialize>(
    value: &T,
    name: &str,
    checksum: &str,
    seed: u64,
    out: Option<&Path>,
) -> Result<()> {
    if let Some(dir) = out {
        report::write_json_result(value, name, checksum, seed, dir)?;
    }
    Ok(())
}

fn simulate(c: &Common) -> Result<()> {
    if c.print_defaults {
        print_json(&SimulationConfig::default());
        return Ok(());
    }
    let cfg = simulation_config(c)?;
    if let Some(dir) = &c.out {
        report::prepare_out_dir(dir)?;
    }
    let r = sim::run_simulation(&cfg)?;
    if let Some(dir) = &c.out {
        report::write_report(&r, &config::checksum(&cfg), dir)?;
    }
    print_json(&json!({
        "seed": r.seed,
        "n_paths": r.n_paths,
        "horizon": r.horizon,
        "n_schemes": r.n_schemes,
        "mean_claim_rate": r.mean_claim_rate,
        "breakeven_levy_rate": r.breakeven_levy_rate,
        "median_max_claim_rate": r.median_max_claim_rate,
        "p99_claim_rate": r.p99_claim_rate,
        "mean_annual_claims": r.mean_annual_claims,
        "mean_annual_levies": r.mean_annual_levies,
        "insolvency_probability": r.insolvency_probability,
        "claims_equity_correlation": r.claims_equity_correlation,
        "early_warning_initial_flagged": r.early_warning.initial_flagged.len(),
        "early_warning_flagged_claim_share": r.early_warning.flagged_claim_share,
    }));
    Ok(())
}

fn run_stress(c: &Common) -> Result<()> {
    if c.print_defaults {
        print_json(&fixtures::three_asset());
        return Ok(());
    }
    let cfg = stress_config(c)?;
    if let Some(dir) = &c.out {
        report::prepare_out_dir(dir)?;
    }
    let result = stress::run_stress(&cfg.balance_sheet, &cfg.params)?;
    write_single(&result, "stress.json", &config::checksum(&cfg), 0, c.out.as_deref())?;
    eprint!("{}", report::stress_table(&result));
    print_json(&result);
    Ok(())
}

fn run_levy(c: &Common, pbgc: Option<(u16, f64, f64)>) -> Result<()> {
    if c.print_defaults {
        print_json(&SimulationConfig::default());
        return Ok(());
    }
    if let Some((year, participants, uvb)) = pbgc {
        print_json(&json!({
            "schedule_year": year,
            "participants": participants,
            "unfunded_vested_benefits": uvb,
            "pbgc_premium": levy::pbgc_premium(participants, uvb, year)?,
        }));
        return Ok(());
    }
    let cfg = simulation_config(c)?;
    if let Some(dir) = &c.out {
        report::prepare_out_dir(dir)?;
    }
    let pool = sim::build_population(&cfg)?;
    let levies = levy::population_levies(&pool, &cfg.levy, cfg.guarantee)?;
    let scheme_total: f64 = levies.iter().map(|b| b.scheme_factor).sum();
    let risk_total: f64 = levies.iter().map(|b| b.risk_factor).sum();
    let out = json!({
        "schemes": pool.len(),
        "total": scheme_total + risk_total + cfg.levy.admin_overhead,
        "scheme_factor_total": scheme_total,
        "risk_factor_total": risk_total,
        "admin_overhead": cfg.levy.admin_overhead,
        "risk_share": levy::risk_share(&levies),
        "levies": levies,
    });
    write_single(&out, "levy.json", &config::checksum(&cfg), cfg.seed, c.out.as_deref())?;
    emit(&report::levy_table_csv(&levies));
    Ok(())
}

struct PutFlags {
    assets: Option<f64>,
    strike: Option<f64>,
    vol: Option<f64>,
    rate: Option<f64>,
    horizon: Option<f64>,
    pd: Option<f64>,
    mode: Option<String>,
    samples: Option<usize>,
}

fn price_put(c: &Common, f: PutFlags) -> Result<()> {
    if c.print_defaults {
        print_json(&PutConfig::default());
        return Ok(());
    }
    let mut cfg = match &c.config {
        Some(p) => config::load_put_config(p)?,
        None => PutConfig::default(),
    };
    if c.fixture.is_some() {
        return Err(Error::Usage("price-put takes --config or flags, not --fixture".into()));
    }
    let p = &mut cfg.put;
    p.assets = f.assets.unwrap_or(p.assets);
    p.strike_liability = f.strike.unwrap_or(p.strike_liability);
    p.asset_vol = f.vol.unwrap_or(p.asset_vol);
    p.risk_free_rate = f.rate.unwrap_or(p.risk_free_rate);
    p.horizon = f.horizon.unwrap_or(p.horizon);
    cfg.pd = f.pd.unwrap_or(cfg.pd);
    cfg.samples = f.samples.unwrap_or(cfg.samples);
    cfg.seed = c.seed.unwrap_or(cfg.seed);
    if let Some(m) = f.mode {
        cfg.mode = match m.as_str() {
            "independent" => LossMode::Independent,
            "joint" => LossMode::Joint,
            other => {
                return Err(Error::Usage(format!(
                    "--mode must be independent or joint, got `{other}`"
                )))
            }
        };
    }
    cfg.validate()?;
    if let Some(dir) = &c.out {
        report::prepare_out_dir(dir)?;
    }
    let closed = pricing::put_value_closed_form(&cfg.put);
    let mc = pricing::put_value_monte_carlo(&cfg.put, cfg.seed, cfg.samples)?;
    let joint_cfg = pricing::JointConfig {
        market: pgfrisk::market::MarketConfig::default(),
        seed: cfg.seed,
        samples: cfg.samples,
    };
    let loss = pricing::guarantee_expected_loss(&cfg.put, cfg.pd, cfg.mode, Some(&joint_cfg))?;
    let out = json!({
        "inputs": cfg,
        "put_closed_form": closed,
        "put_monte_carlo": mc,
        "call_closed_form": pricing::call_value_closed_form(&cfg.put),
        "expected_loss": loss,
    });
    write_single(
        &out,
        "price_put.json",
        &config::checksum(&cfg),
        cfg.seed,
        c.out.as_deref(),
    )?;
    print_json(&out);
    Ok(())
}

fn calibrate(c: &Common, solve_flat: bool, tolerance: f64) -> Result<()> {
    if c.print_defaults {
        print_json(&SimulationConfig::default());
        return Ok(());
    }
    let cfg = simulation_config(c)?;
    if let Some(dir) = &c.out {
        report::prepare_out_dir(dir)?;
    }
    let breakeven = sim::calibrate_breakeven_premium(&cfg)?;
    let flat = if solve_flat {
        Some(sim::solve_flat_levy_rate(&cfg, tolerance)?)
    } else {
        None
    };
    let out = json!({
        "breakeven_levy_rate": breakeven,
        "flat_rate_solution": flat,
    });
    write_single(
        &out,
        "calibrate.json",
        &config::checksum(&cfg),
        cfg.seed,
        c.out.as_deref(),
    )?;
    print_json(&out);
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(c) => simulate(&c),
        Command::Stress(c) => run_stress(&c),
        Command::Levy {
            common,
            pbgc_year,
            participants,
            uvb,
        } => {
            let pbgc = pbgc_year.map(|y| (y, participants.unwrap_or(0.0), uvb.unwrap_or(0.0)));
            run_levy(&common, pbgc)
        }
        Command::PricePut {
            common,
            assets,
            strike,
            vol,
            rate,
            horizon,
            pd,
            mode,
            samples,
        } => price_put(
            &common,
            PutFlags {
                assets,
                strike,
                vol,
                rate,
                horizon,
                pd,
                mode,
                samples,
            },
        ),
        Command::Calibrate {
            common,
            solve_flat,
            tolerance,
        } => calibrate(&common, solve_flat, tolerance),
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
