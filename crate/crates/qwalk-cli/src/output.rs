//! Artifact writers. CSV is locale-independent ('.' decimal separator, \n
//! line endings) with floats at 17 significant digits so read-back is exact;
//! JSON serializes through serde with stable field order.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use qwalk_core::stats::{
    position_variance, second_moment_about, shannon_entropy, tsallis_entropy,
};
use qwalk_core::walk::channel_coordinate;
use qwalk_core::{DistributionSeries, SweepRow};
use serde::Serialize;

use crate::config::{FormatArg, SimulateSpec, SweepSpec};
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// 17 significant digits: exact f64 round-trip, locale independent.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

fn fmt_opt(v: Option<f64>) -> String {
    v.map(fmt_f64).unwrap_or_default()
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent)
                .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", parent.display())))?;
        }
    }
    fs::write(path, contents)
        .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display())))
}

fn with_suffix(base: &Path, suffix: &str) -> PathBuf {
    let mut os = base.as_os_str().to_owned();
    os.push(suffix);
    PathBuf::from(os)
}

/// Per-snapshot observables emitted next to the raw matrix.
#[derive(Debug, Clone, Serialize)]
pub struct SummaryRow {
    pub t: usize,
    pub variance: f64,
    pub shannon: f64,
    pub tsallis_q2: f64,
    /// Second moment about the injection channel (auxiliary output).
    pub m2_injection: f64,
}

pub fn summarize(
    snapshots: &[(usize, Vec<f64>)],
    initial_channel: f64,
) -> Result<Vec<SummaryRow>, CliError> {
    snapshots
        .iter()
        .map(|(t, dist)| {
            let variance =
                position_variance(dist).map_err(|e| CliError::Runtime(e.to_string()))?;
            Ok(SummaryRow {
                t: *t,
                variance,
                shannon: shannon_entropy(dist),
                tsallis_q2: tsallis_entropy(dist, 2.0)
                    .map_err(|e| CliError::Runtime(e.to_string()))?,
                m2_injection: second_moment_about(dist, initial_channel),
            })
        })
        .collect()
}

pub fn channel_coordinates(n: usize) -> Vec<f64> {
    (0..n).map(|k| channel_coordinate(n, k)).collect()
}

fn matrix_csv(channels: &[f64], snapshots: &[(usize, Vec<f64>)]) -> String {
    let mut out = String::new();
    out.push('t');
    for c in channels {
        let _ = write!(out, ",{c}");
    }
    out.push('\n');
    for (t, dist) in snapshots {
        let _ = write!(out, "{t}");
        for p in dist {
            let _ = write!(out, ",{}", fmt_f64(*p));
        }
        out.push('\n');
    }
    out
}

fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("t,variance,shannon,tsallis_q2,m2_injection\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            r.t,
            fmt_f64(r.variance),
            fmt_f64(r.shannon),
            fmt_f64(r.tsallis_q2),
            fmt_f64(r.m2_injection)
        );
    }
    out
}

#[derive(Serialize)]
struct SimulateMeta<'a> {
    command: &'static str,
    version: &'static str,
    spec: &'a SimulateSpec,
    initial_slot: usize,
    snapshots_recorded: usize,
}

#[derive(Serialize)]
struct SimulateDoc<'a> {
    meta: SimulateMeta<'a>,
    channels: &'a [f64],
    snapshots: Vec<SnapshotDoc<'a>>,
    summary: &'a [SummaryRow],
}

#[derive(Serialize)]
struct SnapshotDoc<'a> {
    t: usize,
    probabilities: &'a [f64],
}

/// Write the simulate artifacts; returns the file paths produced.
pub fn write_simulate(
    spec: &SimulateSpec,
    series: &DistributionSeries,
    initial_slot: usize,
) -> Result<Vec<PathBuf>, CliError> {
    let n = spec.n;
    let channels = channel_coordinates(n);
    let snapshots: Vec<(usize, Vec<f64>)> = series
        .snapshots
        .iter()
        .map(|s| (s.t, s.probabilities.clone()))
        .collect();
    let summary = summarize(&snapshots, spec.initial_channel)?;
    let meta = SimulateMeta {
        command: "simulate",
        version: VERSION,
        spec,
        initial_slot,
        snapshots_recorded: snapshots.len(),
    };
    match spec.format {
        FormatArg::Csv => {
            let matrix_path = with_suffix(&spec.out, ".matrix.csv");
            let summary_path = with_suffix(&spec.out, ".summary.csv");
            let meta_path = with_suffix(&spec.out, ".meta.json");
            write_file(&matrix_path, &matrix_csv(&channels, &snapshots))?;
            write_file(&summary_path, &summary_csv(&summary))?;
            let meta_json = serde_json::to_string_pretty(&meta)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            write_file(&meta_path, &(meta_json + "\n"))?;
            Ok(vec![matrix_path, summary_path, meta_path])
        }
        FormatArg::Json => {
            let doc = SimulateDoc {
                meta,
                channels: &channels,
                snapshots: snapshots
                    .iter()
                    .map(|(t, p)| SnapshotDoc {
                        t: *t,
                        probabilities: p,
                    })
                    .collect(),
                summary: &summary,
            };
            let path = with_suffix(&spec.out, ".json");
            let json =
                serde_json::to_string_pretty(&doc).map_err(|e| CliError::Runtime(e.to_string()))?;
            write_file(&path, &(json + "\n"))?;
            Ok(vec![path])
        }
    }
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(
        "p,j,variance,shannon,tsallis_q2,inv_a_whole,inv_a_peak,x,y,error\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            fmt_f64(r.p),
            r.j,
            fmt_opt(r.variance),
            fmt_opt(r.shannon),
            fmt_opt(r.tsallis2),
            fmt_opt(r.inv_a_whole),
            fmt_opt(r.inv_a_peak),
            fmt_opt(r.x),
            fmt_opt(r.y),
            csv_quote(r.error.as_deref().unwrap_or(""))
        );
    }
    out
}

#[derive(Serialize)]
struct SweepMeta<'a> {
    command: &'static str,
    version: &'static str,
    spec: &'a SweepSpec,
    rows_total: usize,
    rows_failed: usize,
}

#[derive(Serialize)]
struct SweepDoc<'a> {
    meta: SweepMeta<'a>,
    rows: &'a [SweepRow],
}

pub fn write_sweep(spec: &SweepSpec, rows: &[SweepRow]) -> Result<Vec<PathBuf>, CliError> {
    let meta = SweepMeta {
        command: "sweep",
        version: VERSION,
        spec,
        rows_total: rows.len(),
        rows_failed: rows.iter().filter(|r| r.error.is_some()).count(),
    };
    match spec.format {
        FormatArg::Csv => {
            let table_path = with_suffix(&spec.out, ".csv");
            let meta_path = with_suffix(&spec.out, ".meta.json");
            write_file(&table_path, &sweep_csv(rows))?;
            let meta_json = serde_json::to_string_pretty(&meta)
                .map_err(|e| CliError::Runtime(e.to_string()))?;
            write_file(&meta_path, &(meta_json + "\n"))?;
            Ok(vec![table_path, meta_path])
        }
        FormatArg::Json => {
            let doc = SweepDoc { meta, rows };
            let path = with_suffix(&spec.out, ".json");
            let json =
                serde_json::to_string_pretty(&doc).map_err(|e| CliError::Runtime(e.to_string()))?;
            write_file(&path, &(json + "\n"))?;
            Ok(vec![path])
        }
    }
}

/// Write the `stats` command's recomputed summary next to `out`.
pub fn write_stats_summary(
    out: &Path,
    format: FormatArg,
    summary: &[SummaryRow],
    input: &Path,
) -> Result<PathBuf, CliError> {
    match format {
        FormatArg::Csv => {
            let path = with_suffix(out, ".summary.csv");
            write_file(&path, &summary_csv(summary))?;
            Ok(path)
        }
        FormatArg::Json => {
            let path = with_suffix(out, ".summary.json");
            let doc = serde_json::json!({
                "meta": {
                    "command": "stats",
                    "version": VERSION,
                    "input": input.display().to_string(),
                },
                "summary": summary,
            });
            let json =
                serde_json::to_string_pretty(&doc).map_err(|e| CliError::Runtime(e.to_string()))?;
            write_file(&path, &(json + "\n"))?;
            Ok(path)
        }
    }
}

/// Parse a matrix written by `write_simulate` (CSV flavour).
pub fn parse_matrix_csv(path: &Path) -> Result<(Vec<f64>, Vec<(usize, Vec<f64>)>), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.lines();
    let header = lines
        .next()
        .ok_or_else(|| CliError::Validation("empty matrix file".into()))?;
    let channels: Vec<f64> = header
        .split(',')
        .skip(1)
        .map(|c| {
            c.parse::<f64>()
                .map_err(|e| CliError::Validation(format!("bad channel header '{c}': {e}")))
        })
        .collect::<Result<_, _>>()?;
    let mut rows = Vec::new();
    for line in lines.filter(|l| !l.is_empty()) {
        let mut fields = line.split(',');
        let t: usize = fields
            .next()
            .unwrap()
            .parse()
            .map_err(|e| CliError::Validation(format!("bad t field: {e}")))?;
        let dist: Vec<f64> = fields
            .map(|f| {
                f.parse::<f64>()
                    .map_err(|e| CliError::Validation(format!("bad probability field: {e}")))
            })
            .collect::<Result<_, _>>()?;
        if dist.len() != channels.len() {
            return Err(CliError::Validation(format!(
                "row t={t} has {} values, expected {}",
                dist.len(),
                channels.len()
            )));
        }
        rows.push((t, dist));
    }
    Ok((channels, rows))
}

/// Parse the single-document JSON flavour.
pub fn parse_matrix_json(path: &Path) -> Result<(Vec<f64>, Vec<(usize, Vec<f64>)>), CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let doc: serde_json::Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Validation(format!("invalid JSON in {}: {e}", path.display())))?;
    let channels: Vec<f64> = serde_json::from_value(
        doc.get("channels")
            .cloned()
            .ok_or_else(|| CliError::Validation("missing 'channels' array".into()))?,
    )
    .map_err(|e| CliError::Validation(format!("bad 'channels' array: {e}")))?;
    let snaps = doc
        .get("snapshots")
        .and_then(|v| v.as_array())
        .ok_or_else(|| CliError::Validation("missing 'snapshots' array".into()))?;
    let mut rows = Vec::new();
    for snap in snaps {
        let t = snap
            .get("t")
            .and_then(|v| v.as_u64())
            .ok_or_else(|| CliError::Validation("snapshot missing 't'".into()))?;
        let probs: Vec<f64> = serde_json::from_value(
            snap.get("probabilities")
                .cloned()
                .ok_or_else(|| CliError::Validation("snapshot missing 'probabilities'".into()))?,
        )
        .map_err(|e| CliError::Validation(format!("bad probabilities: {e}")))?;
        rows.push((t as usize, probs));
    }
    Ok((channels, rows))
}
