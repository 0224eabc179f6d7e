//! Report files and the run manifest.
//!
//! Data files are fully determined by the config and seed. Only the
//! manifest carries a timestamp; it is written last, through a temporary
//! file and a rename.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::sim::SimulationReport;
use crate::stats;

pub const MANIFEST: &str = "manifest.json";
pub const FAN_QUANTILES: [f64; 5] = [0.05, 0.25, 0.5, 0.75, 0.95];
pub const HISTOGRAM_BINS: usize = 50;

#[derive(Debug, Clone, PartialEq, Serialize, serde::Deserialize)]
pub struct RunManifest {
    pub config_checksum: String,
    pub seed: u64,
    pub tool_version: String,
    pub timestamp: String,
    pub outputs: Vec<String>,
}

/// Create `dir` if needed and prove it is writable, before any work that
/// would produce output.
pub fn prepare_out_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let probe = dir.join(".pgfrisk-write-probe");
    fs::write(&probe, b"").map_err(|e| Error::io(&probe, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))
}

fn write_file(dir: &Path, name: &str, bytes: &[u8], written: &mut Vec<String>) -> Result<()> {
    let path = dir.join(name);
    fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
    written.push(name.to_string());
    Ok(())
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Vec<u8> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory csv");
    for r in rows {
        w.write_record(&r).expect("in-memory csv");
    }
    w.into_inner().expect("in-memory csv")
}

pub fn to_json_bytes<T: Serialize>(value: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(value).expect("report types serialise");
    v.push(b'\n');
    v
}

/// Write the manifest atomically.
pub fn write_manifest(dir: &Path, config_checksum: &str, seed: u64, outputs: &[String]) -> Result<PathBuf> {
    let manifest = RunManifest {
        config_checksum: config_checksum.to_string(),
        seed,
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        timestamp: chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true),
        outputs: outputs.to_vec(),
    };
    let tmp = dir.join(format!("{MANIFEST}.tmp"));
    let path = dir.join(MANIFEST);
    let mut f = fs::File::create(&tmp).map_err(|e| Error::io(&tmp, e))?;
    f.write_all(&to_json_bytes(&manifest)).map_err(|e| Error::io(&tmp, e))?;
    f.sync_all().map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, &path).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

/// Emit report.json, claims.csv, ledger.csv, histogram.csv and fan.csv,
/// then the manifest. Returns the data file names.
pub fn write_report(report: &SimulationReport, config_checksum: &str, dir: &Path) -> Result<Vec<String>> {
    prepare_out_dir(dir)?;
    let mut written = Vec::new();

    write_file(dir, "report.json", &to_json_bytes(report), &mut written)?;

    let claims = csv_bytes(
        &["path", "year", "scheme", "net_claim"],
        report.claims.iter().map(|(p, c)| {
            vec![
                p.to_string(),
                c.year.to_string(),
                c.scheme_id.clone(),
                c.net_claim.to_string(),
            ]
        }),
    );
    write_file(dir, "claims.csv", &claims, &mut written)?;

    let ledger = csv_bytes(
        &["path", "year", "assets", "liabilities", "levies", "claims", "insolvent"],
        report.ledgers.iter().enumerate().flat_map(|(p, rows)| {
            rows.iter().map(move |r| {
                vec![
                    p.to_string(),
                    r.year.to_string(),
                    r.assets.to_string(),
                    r.liabilities.to_string(),
                    r.levies.to_string(),
                    r.claims.to_string(),
                    r.insolvent.to_string(),
                ]
            })
        }),
    );
    write_file(dir, "ledger.csv", &ledger, &mut written)?;

    let rates = report.all_claim_rates();
    let hist = if rates.is_empty() {
        stats::Histogram {
            edges: vec![],
            counts: vec![],
        }
    } else {
        stats::histogram(&rates, HISTOGRAM_BINS)
    };
    let histogram = csv_bytes(
        &["bin_lower", "bin_upper", "count"],
        hist.counts
            .iter()
            .enumerate()
            .map(|(i, c)| vec![hist.edges[i].to_string(), hist.edges[i + 1].to_string(), c.to_string()]),
    );
    write_file(dir, "histogram.csv", &histogram, &mut written)?;

    let fan = report.net_position_fan(&FAN_QUANTILES);
    let fan_csv = csv_bytes(
        &["year", "p05", "p25", "p50", "p75", "p95"],
        fan.iter().enumerate().map(|(t, qs)| {
            std::iter::once(t.to_string())
                .chain(qs.iter().map(|q| q.to_string()))
                .collect()
        }),
    );
    write_file(dir, "fan.csv", &fan_csv, &mut written)?;

    write_manifest(dir, config_checksum, report.seed, &written)?;
    Ok(written)
}

/// Per-scheme levy table with a fixed column order.
pub fn levy_table_csv(levies: &[crate::levy::LevyBreakdown]) -> Vec<u8> {
    csv_bytes(
        &["scheme", "scheme_factor", "risk_factor", "total"],
        levies.iter().map(|b| {
            vec![
                b.scheme_id.clone(),
                b.scheme_factor.to_string(),
                b.risk_factor.to_string(),
                b.total.to_string(),
            ]
        }),
    )
}

/// Plain-text summary of a stress run.
pub fn stress_table(r: &crate::stress::StressResult) -> String {
    let rows = [
        ("equity loss", r.losses.equity),
        ("interest rate loss", r.losses.interest_rate),
        ("property loss", r.losses.property),
        ("credit loss", r.losses.credit),
        ("persistency loss", r.losses.persistency),
        ("RCM", r.rcm),
        ("resilience capital", r.resilience_capital),
        ("LTICR", r.lticr),
        ("peak 1", r.peak1),
        ("peak 2", r.peak2),
        ("WPICC", r.wpicc),
        ("capital resources", r.capital_resources),
        ("capital requirement", r.capital_requirement),
        ("surplus", r.surplus),
    ];
    let mut out = String::new();
    for (name, v) in rows {
        out.push_str(&format!("{name:<22}{v:>16.4}\n"));
    }
    out.push_str(&format!(
        "{:<22}{:>16.4}\n",
        "interest shift (pp)",
        100.0 * r.interest_shift
    ));
    for v in &r.tier_violations {
        out.push_str(&format!(
            "tier limit breached: {} ({} > {})\n",
            v.rule, v.amount, v.limit
        ));
    }
    out
}

/// Single JSON result plus manifest, for the non-simulation subcommands.
pub fn write_json_result<T: Serialize>(
    value: &T,
    name: &str,
    config_checksum: &str,
    seed: u64,
    dir: &Path,
) -> Result<Vec<String>> {
    prepare_out_dir(dir)?;
    let mut written = Vec::new();
    write_file(dir, name, &to_json_bytes(value), &mut written)?;
    write_manifest(dir, config_checksum, seed, &written)?;
    Ok(written)
}
