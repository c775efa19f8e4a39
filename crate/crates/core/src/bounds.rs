//! Closed-form security-bound calculators and their empirical hooks.

use rand::{Rng, RngExt};

use crate::css::{gv_rate, shannon_rate};
use crate::streams;
use crate::{Error, Result};

/// High-fidelity-implies-low-information bound: if the shared state has
/// fidelity 1 - 2^-s with the ideal m-pair state, the eavesdropper's
/// mutual information with the key is at most 2^-c (plus a 2^O(-2s) term
/// whose constant is unspecified and therefore reported only
/// symbolically), where c = s - log2(2m + s + 1/ln 2).
#[derive(Clone, Copy, Debug)]
pub struct InfoBound {
    pub c: f64,
    /// 2^-c, the numeric part of the bound.
    pub bits: f64,
    /// Set when c <= 0 and the bound says nothing.
    pub vacuous: bool,
}

pub fn lo_chau_info_bound(s: f64, m: u64) -> Result<InfoBound> {
    if !s.is_finite() || s <= 0.0 {
        return Err(Error::Domain {
            what: "s",
            value: s,
            domain: "(0, inf)",
        });
    }
    let c = s - (2.0 * m as f64 + s + std::f64::consts::LOG2_E).log2();
    Ok(InfoBound {
        c,
        bits: (-c).exp2(),
        vacuous: c <= 0.0,
    })
}

/// Tail bound for the check/code random-sampling estimate: the
/// probability of more than delta*n errors on the code half while fewer
/// than (delta - eps)*n show on the check half is asymptotically below
/// exp(-eps^2 n / (4 (delta - delta^2))).
pub fn sampling_tail_bound(n: u64, delta: f64, eps: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&delta) || delta <= 0.0 {
        return Err(Error::Domain {
            what: "delta",
            value: delta,
            domain: "(0, 1)",
        });
    }
    if !(0.0..1.0).contains(&eps) || eps <= 0.0 || eps >= delta {
        return Err(Error::Domain {
            what: "eps",
            value: eps,
            domain: "(0, delta)",
        });
    }
    Ok((-0.25 * eps * eps * n as f64 / (delta - delta * delta)).exp())
}

/// Result of the planted-error sampling experiment.
#[derive(Clone, Copy, Debug)]
pub struct SamplingOutcome {
    pub trials: u64,
    pub bad_events: u64,
    pub empirical: f64,
    pub bound: f64,
    pub planted: usize,
}

/// Simulates the random check/code split of a fixed error pattern and
/// counts the bad event: more than delta*n errors on the code half AND
/// fewer than (delta - eps)*n on the check half.
///
/// The adversary fixes the pattern before the split, so only the planted
/// count matters; the check-side count is exactly hypergeometric over a
/// 2n population with an n/n split. `planted` defaults to
/// floor((2 delta - eps) n), the count that maximizes the bad-event
/// probability.
pub fn empirical_sampling_experiment(
    n: usize,
    delta: f64,
    eps: f64,
    planted: Option<usize>,
    trials: u64,
    master_seed: u64,
) -> Result<SamplingOutcome> {
    let bound = sampling_tail_bound(n as u64, delta, eps)?;
    let planted = planted.unwrap_or_else(|| ((2.0 * delta - eps) * n as f64).floor() as usize);
    if planted > 2 * n {
        return Err(Error::Domain {
            what: "planted",
            value: planted as f64,
            domain: "[0, 2n]",
        });
    }

    let code_threshold = delta * n as f64;
    let check_threshold = (delta - eps) * n as f64;
    let run_chunk = |chunk: u64, count: u64| -> u64 {
        let mut rng = streams::substream(master_seed, chunk, EXPERIMENT_DOMAIN);
        let mut bad = 0u64;
        for _ in 0..count {
            let check_errors = sample_check_side(2 * n, n, planted, &mut rng);
            let code_errors = planted - check_errors;
            if (code_errors as f64) > code_threshold && (check_errors as f64) < check_threshold {
                bad += 1;
            }
        }
        bad
    };

    const CHUNK: u64 = 16_384;
    let chunks: Vec<(u64, u64)> = (0..trials.div_ceil(CHUNK))
        .map(|c| (c, CHUNK.min(trials - c * CHUNK)))
        .collect();
    #[cfg(feature = "parallel")]
    let bad_events: u64 = {
        use rayon::prelude::*;
        chunks.par_iter().map(|&(c, k)| run_chunk(c, k)).sum()
    };
    #[cfg(not(feature = "parallel"))]
    let bad_events: u64 = chunks.iter().map(|&(c, k)| run_chunk(c, k)).sum();

    Ok(SamplingOutcome {
        trials,
        bad_events,
        empirical: bad_events as f64 / trials as f64,
        bound,
        planted,
    })
}

const EXPERIMENT_DOMAIN: u64 = 101;

/// Hypergeometric draw: how many of `planted` marked positions land on
/// the check side of a uniform n_check / (population - n_check) split.
/// Sequential urn sampling over the marked positions only.
fn sample_check_side<R: Rng>(population: usize, n_check: usize, planted: usize, rng: &mut R) -> usize {
    let mut check_remaining = n_check as u64;
    let mut total_remaining = population as u64;
    let mut on_check = 0usize;
    for _ in 0..planted {
        let u: f64 = rng.random();
        if u * (total_remaining as f64) < check_remaining as f64 {
            on_check += 1;
            check_remaining -= 1;
        }
        total_remaining -= 1;
    }
    on_check
}

/// Rate formula selection for [`key_rate`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RateMode {
    Gv,
    Shannon,
}

/// Asymptotic key rate, clamped at zero for reporting.
pub fn key_rate(delta: f64, mode: RateMode) -> Result<f64> {
    let raw = match mode {
        RateMode::Gv => gv_rate(delta)?,
        RateMode::Shannon => shannon_rate(delta)?,
    };
    Ok(raw.max(0.0))
}
