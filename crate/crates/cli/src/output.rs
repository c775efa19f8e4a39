//! Result emission: line-delimited per-trial records plus a columnar
//! summary with a header row. Field order and float formatting are fixed
//! so identical (config, seed) runs produce byte-identical files.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context;
use qkdsim::protocols::{record, ProtocolKind, Summary, Transcript};
use qkdsim::streams::RNG_SCHEME;

pub fn render_trials(transcripts: &[Transcript]) -> String {
    let mut out = String::new();
    for t in transcripts {
        out.push_str(&t.to_record());
        out.push('\n');
    }
    out
}

fn fmt_opt(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:.6}"),
        None => "-".to_string(),
    }
}

/// One header row and one data row, tab-separated.
pub fn render_summary(
    kind: ProtocolKind,
    code_name: &str,
    n: usize,
    seed: u64,
    summary: &Summary,
) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "protocol\tcode\tn\ttrials\tseed\trng\taborts\tabort_rate\tcheck_fail\tsift_fail\tdecode_fail\tkey_agreement\tmean_check_error_rate\teve_info_bits\teve_info_low_confidence"
    );
    let eve_bits = summary.eve_info.map(|i| i.bits_per_bit);
    let eve_low = summary
        .eve_info
        .map(|i| i.low_confidence.to_string())
        .unwrap_or_else(|| "-".to_string());
    let _ = writeln!(
        out,
        "{kind}\t{code_name}\t{n}\t{}\t{seed}\t{RNG_SCHEME}\t{}\t{:.6}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        summary.trials,
        summary.aborts,
        summary.abort_rate,
        summary.check_failures,
        summary.sift_failures,
        summary.decode_failures,
        fmt_opt(summary.key_agreement_rate),
        fmt_opt(summary.mean_check_error_rate),
        fmt_opt(eve_bits),
        eve_low,
    );
    out
}

pub fn write_file(path: &Path, contents: &str) -> anyhow::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)
            .with_context(|| format!("creating output directory {}", parent.display()))?;
    }
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

/// Recomputes headline summary numbers from rendered trial records; used
/// to verify that summaries stay consistent with the per-trial data.
pub fn recompute_from_records(trials_text: &str) -> anyhow::Result<(u64, u64, u64)> {
    let mut trials = 0u64;
    let mut aborts = 0u64;
    let mut agreements = 0u64;
    for line in trials_text.lines() {
        if line.trim().is_empty() {
            continue;
        }
        let fields = record::parse_record(line).map_err(|e| anyhow::anyhow!("{e}"))?;
        trials += 1;
        if fields["abort"] != "-" {
            aborts += 1;
        }
        if fields["keys_agree"] == "true" {
            agreements += 1;
        }
    }
    Ok((trials, aborts, agreements))
}
