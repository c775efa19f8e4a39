//! Browser bindings for the qkdsim laboratory.
//!
//! Three interactive operations, each returning JSON for the demo page:
//! asymptotic key-rate curves with the threshold, batched protocol runs
//! under a configurable attack, and the purification success rate against
//! its fidelity lower bound. Everything is seeded, so the page is
//! reproducible.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use qkdsim::adversary::AttackModel;
use qkdsim::bell_frame::{purify, BellFrameState, PairwisePauliNoise, PurifyOutcome};
use qkdsim::bell_frame::fidelity_lower_bound;
use qkdsim::css::{gv_rate, shannon_rate, shannon_threshold, CssCodePair};
use qkdsim::protocols::{run_trials, summarize, ProtocolConfig, ProtocolKind};
use qkdsim::streams;

#[derive(Serialize)]
struct RateCurves {
    delta: Vec<f64>,
    shannon: Vec<f64>,
    gv: Vec<f64>,
    threshold: f64,
}

/// Asymptotic key-rate curves over delta in [0, 0.5): the random-error
/// (Shannon) rate 1 - 2H(delta), the worst-case (GV) rate 1 - 2H(2 delta),
/// and the error rate where the Shannon rate hits zero.
#[wasm_bindgen]
pub fn rate_curves(points: usize) -> Result<String, JsError> {
    rate_curves_impl(points).map_err(|e| JsError::new(&e))
}

fn rate_curves_impl(points: usize) -> Result<String, String> {
    let points = points.clamp(2, 4096);
    let mut curves = RateCurves {
        delta: Vec::with_capacity(points),
        shannon: Vec::with_capacity(points),
        gv: Vec::with_capacity(points),
        threshold: shannon_threshold(),
    };
    for i in 0..points {
        let d = 0.5 * i as f64 / points as f64;
        curves.delta.push(d);
        curves
            .shannon
            .push(shannon_rate(d).map_err(|e| e.to_string())?);
        curves
            .gv
            .push(gv_rate(d).map_err(|e| e.to_string())?);
    }
    serde_json::to_string(&curves).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct RunSummary {
    protocol: String,
    code: String,
    n: usize,
    trials: u64,
    seed: u64,
    abort_rate: f64,
    check_failures: u64,
    sift_failures: u64,
    decode_failures: u64,
    key_agreement_rate: Option<f64>,
    mean_check_error_rate: Option<f64>,
    eve_info_bits: Option<f64>,
}

fn build_attack(kind: &str, param: f64, positions: usize) -> Result<AttackModel, String> {
    let model = match kind {
        "none" => AttackModel::None,
        "iid_bitflip" => AttackModel::IidPauli {
            px: param,
            py: 0.0,
            pz: 0.0,
        },
        "iid_depolarizing" => AttackModel::IidPauli {
            px: param / 3.0,
            py: param / 3.0,
            pz: param / 3.0,
        },
        "intercept_resend" => AttackModel::InterceptResend { fraction: param },
        other => {
            return Err(format!(
                "unknown attack {other:?} (valid: none, iid_bitflip, iid_depolarizing, intercept_resend); positions={positions}"
            ))
        }
    };
    model.validate().map_err(|e| e.to_string())?;
    Ok(model)
}

/// Runs one protocol for `trials` seeded trials and returns the summary
/// statistics. `protocol` is 1 (purification), 2 (CSS code), or 3 (BB84);
/// `code` is "steane" or "toy3".
#[wasm_bindgen]
pub fn protocol_run(
    protocol: u8,
    code: &str,
    attack_kind: &str,
    attack_param: f64,
    trials: u32,
    seed: u64,
) -> Result<String, JsError> {
    protocol_run_impl(protocol, code, attack_kind, attack_param, trials, seed)
        .map_err(|e| JsError::new(&e))
}

fn protocol_run_impl(
    protocol: u8,
    code: &str,
    attack_kind: &str,
    attack_param: f64,
    trials: u32,
    seed: u64,
) -> Result<String, String> {
    let kind = match protocol {
        1 => ProtocolKind::Purification,
        2 => ProtocolKind::CssCode,
        3 => ProtocolKind::Bb84,
        other => return Err(format!("protocol must be 1..=3, got {other}")),
    };
    let pair = match code {
        "steane" => CssCodePair::steane(),
        "toy3" => CssCodePair::toy3(),
        other => return Err(format!("unknown code {other:?}")),
    };
    let trials = trials.clamp(1, 20_000) as u64;
    let mut cfg = ProtocolConfig::new(pair);
    cfg.delta = 4.0;
    let positions = match kind {
        ProtocolKind::Bb84 => ((4.0 + cfg.delta) * cfg.n() as f64).ceil() as usize,
        _ => 2 * cfg.n(),
    };
    cfg.attack = build_attack(attack_kind, attack_param, positions)?;
    if !cfg.attack.frame_compatible() && kind != ProtocolKind::Bb84 {
        return Err("intercept-resend acts on prepared qubits; choose the BB84 protocol".to_string());
    }
    let transcripts =
        run_trials(kind, &cfg, seed, trials).map_err(|e| e.to_string())?;
    let summary = summarize(&transcripts);
    let out = RunSummary {
        protocol: kind.to_string(),
        code: code.to_string(),
        n: cfg.n(),
        trials,
        seed,
        abort_rate: summary.abort_rate,
        check_failures: summary.check_failures,
        sift_failures: summary.sift_failures,
        decode_failures: summary.decode_failures,
        key_agreement_rate: summary.key_agreement_rate,
        mean_check_error_rate: summary.mean_check_error_rate,
        eve_info_bits: summary.eve_info.map(|i| i.bits_per_bit),
    };
    serde_json::to_string(&out).map_err(|e| e.to_string())
}

#[derive(Serialize)]
struct PurifyCurve {
    p: Vec<f64>,
    bound: Vec<f64>,
    empirical: Vec<f64>,
    trials: u32,
}

/// Sweeps a depolarizing rate over the Steane block and returns the
/// empirical purification success rate next to the fidelity lower bound
/// (the probability of at most t bit and t phase flips).
#[wasm_bindgen]
pub fn purify_vs_bound(
    p_max: f64,
    points: usize,
    trials: u32,
    seed: u64,
) -> Result<String, JsError> {
    purify_vs_bound_impl(p_max, points, trials, seed).map_err(|e| JsError::new(&e))
}

fn purify_vs_bound_impl(
    p_max: f64,
    points: usize,
    trials: u32,
    seed: u64,
) -> Result<String, String> {
    let pair = CssCodePair::steane();
    let indices: Vec<usize> = (0..pair.n()).collect();
    let points = points.clamp(2, 256);
    let trials = trials.clamp(10, 20_000);
    let p_max = p_max.clamp(0.0, 0.75);
    let mut curve = PurifyCurve {
        p: Vec::new(),
        bound: Vec::new(),
        empirical: Vec::new(),
        trials,
    };
    for i in 0..points {
        let p = p_max * i as f64 / (points - 1) as f64;
        let noise = PairwisePauliNoise::iid(pair.n(), p / 3.0, p / 3.0, p / 3.0)
            .map_err(|e| e.to_string())?;
        let bound =
            fidelity_lower_bound(&noise, &pair).map_err(|e| e.to_string())?;
        let mut rng = streams::substream(seed, i as u64, 71);
        let mut successes = 0u32;
        for _ in 0..trials {
            let (eb, ep) = noise.sample(&mut rng);
            let state =
                BellFrameState::from_pattern(eb, ep).map_err(|e| e.to_string())?;
            if purify(&state, &pair, &indices).map_err(|e| e.to_string())?
                == PurifyOutcome::Success
            {
                successes += 1;
            }
        }
        curve.p.push(p);
        curve.bound.push(bound);
        curve.empirical.push(successes as f64 / trials as f64);
    }
    serde_json::to_string(&curve).map_err(|e| e.to_string())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rate_curves_json() {
        let json = rate_curves_impl(16).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["delta"].as_array().unwrap().len(), 16);
        let thr = v["threshold"].as_f64().unwrap();
        assert!(thr > 0.109 && thr < 0.111);
        assert!((v["shannon"][0].as_f64().unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn protocol_run_json() {
        let json = protocol_run_impl(3, "steane", "none", 0.0, 50, 1).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["abort_rate"].as_f64().unwrap(), 0.0);
        assert_eq!(v["key_agreement_rate"].as_f64().unwrap(), 1.0);

        // Full interception at n = 7: the sifted disagreement rate sits
        // near 25%, and with only 7 check bits the abort probability is
        // P(Bin(7, 1/4) > 1) ~ 0.55.
        let json = protocol_run_impl(3, "steane", "intercept_resend", 1.0, 2000, 2).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let abort = v["abort_rate"].as_f64().unwrap();
        assert!((abort - 0.555).abs() < 0.05, "abort rate {abort}");
        let rate = v["mean_check_error_rate"].as_f64().unwrap();
        assert!((rate - 0.25).abs() < 0.02, "check error rate {rate}");

        assert!(protocol_run_impl(9, "steane", "none", 0.0, 10, 1).is_err());
        assert!(protocol_run_impl(3, "steane", "cloning", 0.0, 10, 1).is_err());
    }

    #[test]
    fn purify_curve_dominates_bound() {
        let json = purify_vs_bound_impl(0.3, 8, 2000, 5).unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let bound = v["bound"].as_array().unwrap();
        let empirical = v["empirical"].as_array().unwrap();
        for (b, e) in bound.iter().zip(empirical) {
            let b = b.as_f64().unwrap();
            let e = e.as_f64().unwrap();
            let sigma = (b * (1.0 - b) / 2000.0).sqrt();
            assert!(e >= b - 3.0 * sigma, "empirical {e} below bound {b}");
        }
    }
}
