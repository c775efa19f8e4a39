//! Line-delimited transcript records.
//!
//! One line per trial, space-separated `key=value` fields, `-` for absent
//! values, comma-separated integer lists. Field order is fixed so that
//! identical runs serialize byte-identically:
//!
//! `trial protocol n abort sifted check_count check_errors keys_agree
//! alice_key bob_key b check_positions selected_positions check_values
//! correction phase_correction bit_syndrome phase_syndrome rel_bit_syndrome
//! rel_phase_syndrome phase_decode_fail permutation eve_intercepts`

use std::collections::HashMap;

use super::{AbortReason, Transcript};
use crate::{Error, Result};

fn opt<T: std::fmt::Display>(v: &Option<T>) -> String {
    match v {
        Some(x) => x.to_string(),
        None => "-".to_string(),
    }
}

fn list(v: &[usize]) -> String {
    if v.is_empty() {
        return "-".to_string();
    }
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join(",")
}

fn opt_list(v: &Option<Vec<usize>>) -> String {
    match v {
        Some(v) => list(v),
        None => "-".to_string(),
    }
}

impl Transcript {
    /// Serializes the transcript as one record line.
    pub fn to_record(&self) -> String {
        let abort = match self.abort {
            Some(AbortReason::CheckFailure) => "check",
            Some(AbortReason::InsufficientSifted) => "sift",
            Some(AbortReason::DecodeFailure) => "decode",
            None => "-",
        };
        let keys_agree = match self.keys_agree() {
            Some(true) => "true",
            Some(false) => "false",
            None => "-",
        };
        let a = &self.announcements;
        format!(
            "trial={} protocol={} n={} abort={} sifted={} check_count={} check_errors={} \
             keys_agree={} alice_key={} bob_key={} b={} check_positions={} \
             selected_positions={} check_values={} correction={} phase_correction={} \
             bit_syndrome={} phase_syndrome={} rel_bit_syndrome={} rel_phase_syndrome={} \
             phase_decode_fail={} permutation={} eve_intercepts={}",
            self.trial,
            self.protocol,
            self.n,
            abort,
            opt(&self.sifted_count),
            self.check_count,
            opt(&self.check_errors),
            keys_agree,
            opt(&self.alice_key),
            opt(&self.bob_key),
            a.basis_flags,
            list(&a.check_positions),
            opt_list(&a.selected_positions),
            a.check_values,
            opt(&a.correction),
            opt(&a.phase_correction),
            opt(&a.bit_syndrome),
            opt(&a.phase_syndrome),
            opt(&self.relative_bit_syndrome),
            opt(&self.relative_phase_syndrome),
            self.phase_decode_failed,
            opt_list(&a.permutation),
            self.eve_intercepts,
        )
    }
}

/// Parses one record line back into its fields.
pub fn parse_record(line: &str) -> Result<HashMap<String, String>> {
    let mut fields = HashMap::new();
    for token in line.split_whitespace() {
        let (key, value) = token
            .split_once('=')
            .ok_or_else(|| Error::Parse(format!("bad record token {token:?}")))?;
        if fields.insert(key.to_string(), value.to_string()).is_some() {
            return Err(Error::Parse(format!("duplicate record key {key:?}")));
        }
    }
    for required in ["trial", "protocol", "abort", "keys_agree", "check_errors"] {
        if !fields.contains_key(required) {
            return Err(Error::Parse(format!("record missing key {required:?}")));
        }
    }
    Ok(fields)
}
