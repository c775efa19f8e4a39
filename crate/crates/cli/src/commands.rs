//! Subcommand implementations.

use std::path::PathBuf;

use anyhow::{anyhow, bail};
use qkdsim::bounds::{
    empirical_sampling_experiment, key_rate, lo_chau_info_bound, sampling_tail_bound, RateMode,
};
use qkdsim::crosscheck::frame_oracle_agreement;
use qkdsim::css::{binary_entropy, gv_rate, shannon_rate, shannon_threshold, CssCodePair};
use qkdsim::protocols::dense::{equivalence_dense, CoherentAttack};
use qkdsim::protocols::{
    equivalence_exhaustive_fixed_patterns, equivalence_harness, run_trials, summarize,
    z_average_check, ProtocolKind,
};
use qkdsim::statevector::{bell_projector_identity_deviations, verify_hadamard_duality};

use crate::config::RunConfig;
use crate::output;

pub fn cmd_simulate(run: RunConfig) -> anyhow::Result<i32> {
    let transcripts = run_trials(run.kind, &run.protocol, run.seed, run.trials)
        .map_err(|e| anyhow!("running {}: {e}", run.kind))?;
    let summary = summarize(&transcripts);

    let trials_text = output::render_trials(&transcripts);
    let summary_text = output::render_summary(
        run.kind,
        &run.code_name,
        run.protocol.n(),
        run.seed,
        &summary,
    );
    output::write_file(&run.out_dir.join("trials.txt"), &trials_text)?;
    output::write_file(&run.out_dir.join("summary.tsv"), &summary_text)?;
    print!("{summary_text}");
    Ok(0)
}

pub struct EquivalenceRun {
    pub base: RunConfig,
    pub kinds: (ProtocolKind, ProtocolKind),
    pub mode: String,
    pub max_weight: usize,
    pub draws_per_pattern: usize,
    pub theta: f64,
}

pub fn cmd_equivalence(run: EquivalenceRun) -> anyhow::Result<i32> {
    let cfg = run.base.protocol.clone();
    let report_text = match run.mode.as_str() {
        "mc" => {
            let report = equivalence_harness(
                run.kinds.0,
                &cfg,
                run.kinds.1,
                &cfg,
                run.base.trials,
                run.base.seed,
            )
            .map_err(|e| anyhow!("equivalence harness: {e}"))?;
            format!("mode=mc kinds={},{}\n{report}", run.kinds.0, run.kinds.1)
        }
        "exhaustive" => {
            let report = equivalence_exhaustive_fixed_patterns(
                &cfg,
                run.max_weight,
                run.draws_per_pattern,
                run.base.seed,
            )
            .map_err(|e| anyhow!("exhaustive comparison: {e}"))?;
            format!(
                "mode=exhaustive kinds=css,bb84 patterns={} draws_per_pattern={} comparisons={} mismatches={}\n",
                report.patterns, report.draws_per_pattern, report.comparisons, report.mismatches
            )
        }
        "dense" => {
            if cfg.n() * 4 > 12 {
                bail!(
                    "dense mode runs 4n qubits; block size {} exceeds the 12-qubit cap (use code.kind = toy3)",
                    cfg.n()
                );
            }
            let mut attack = CoherentAttack::identity();
            for slot in 0..2 * cfg.n() {
                attack = attack.rotate_y(slot, run.theta);
            }
            attack = attack.controlled_z(0, 1);
            let eq = equivalence_dense(&cfg, &attack, run.base.trials, run.base.seed, 12)
                .map_err(|e| anyhow!("dense comparison: {e}"))?;
            format!(
                "mode=dense kinds=purification,css trials={} tvd={:.6} max_sigma={:.3} within_3sigma={}\n",
                eq.trials, eq.tvd, eq.max_sigma, eq.within_three_sigma
            )
        }
        other => bail!("unknown equivalence mode `{other}` (valid: mc, exhaustive, dense)"),
    };
    output::write_file(&run.base.out_dir.join("equivalence.txt"), &report_text)?;
    print!("{report_text}");
    Ok(0)
}

pub fn cmd_codes(
    pair: CssCodePair,
    name: &str,
    export: Option<PathBuf>,
) -> anyhow::Result<i32> {
    // Export before printing so a truncated pipe cannot lose the file.
    if let Some(path) = &export {
        output::write_file(path, &pair.to_text())?;
    }
    println!("code\t{name}");
    println!("n\t{}", pair.n());
    println!("dim_c1\t{}", pair.dim_c1());
    println!("dim_c2\t{}", pair.dim_c2());
    println!("key_bits\t{}", pair.key_bits());
    println!("t\t{}", pair.t());
    println!("code_rate\t{:.6}", pair.key_bits() as f64 / pair.n() as f64);
    println!("shannon_threshold\t{:.6}", shannon_threshold());
    for delta in [0.01, 0.05, 0.11] {
        println!(
            "shannon_rate({delta})\t{:.6}\tgv_rate({delta})\t{:.6}",
            shannon_rate(delta).map_err(|e| anyhow!("{e}"))?,
            gv_rate(delta).map_err(|e| anyhow!("{e}"))?,
        );
    }
    match pair.validate() {
        Ok(()) => println!("validation\tok"),
        Err(violation) => {
            println!("validation\tFAILED: {violation}");
            return Ok(3);
        }
    }
    if let Some(path) = export {
        println!("exported\t{}", path.display());
    }
    Ok(0)
}

pub struct BoundsRun {
    pub formula: String,
    pub s: Option<f64>,
    pub m: Option<u64>,
    pub n: Option<u64>,
    pub delta: Option<f64>,
    pub eps: Option<f64>,
    pub p: Option<f64>,
    pub planted: Option<usize>,
    pub trials: Option<u64>,
    pub seed: Option<u64>,
    pub rate_mode: String,
    pub grid: Option<String>,
    pub out: Option<PathBuf>,
}

fn parse_grid(spec: &str) -> anyhow::Result<Vec<f64>> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        bail!("grid must be start:stop:step, got {spec:?}");
    }
    let start: f64 = parts[0].parse()?;
    let stop: f64 = parts[1].parse()?;
    let step: f64 = parts[2].parse()?;
    if step <= 0.0 || stop < start {
        bail!("grid needs step > 0 and stop >= start");
    }
    let mut out = Vec::new();
    let mut x = start;
    while x <= stop + 1e-12 {
        out.push(x);
        x += step;
    }
    Ok(out)
}

pub fn cmd_bounds(run: BoundsRun) -> anyhow::Result<i32> {
    let need = |v: Option<f64>, name: &str| v.ok_or_else(|| anyhow!("--{name} is required"));
    let mode = match run.rate_mode.as_str() {
        "gv" => RateMode::Gv,
        "shannon" => RateMode::Shannon,
        other => bail!("unknown rate mode `{other}` (valid: gv, shannon)"),
    };
    let mut text = String::new();
    use std::fmt::Write as _;
    match run.formula.as_str() {
        "lo_chau" => {
            let s = need(run.s, "s")?;
            let m = run.m.ok_or_else(|| anyhow!("--m is required"))?;
            let b = lo_chau_info_bound(s, m).map_err(|e| anyhow!("{e}"))?;
            let _ = writeln!(text, "s\tm\tc\tinfo_bound_bits\tvacuous\tresidual");
            let _ = writeln!(
                text,
                "{s}\t{m}\t{:.6}\t{:.6e}\t{}\t2^O(-2s)",
                b.c, b.bits, b.vacuous
            );
        }
        "sampling_tail" => {
            let n = run.n.ok_or_else(|| anyhow!("--n is required"))?;
            let delta = need(run.delta, "delta")?;
            let eps = need(run.eps, "eps")?;
            let b = sampling_tail_bound(n, delta, eps).map_err(|e| anyhow!("{e}"))?;
            let _ = writeln!(text, "n\tdelta\teps\tbound");
            let _ = writeln!(text, "{n}\t{delta}\t{eps}\t{b:.6e}");
        }
        "sampling_experiment" => {
            let n = run.n.ok_or_else(|| anyhow!("--n is required"))? as usize;
            let delta = need(run.delta, "delta")?;
            let eps = need(run.eps, "eps")?;
            let trials = run.trials.unwrap_or(100_000);
            let seed = run
                .seed
                .ok_or_else(|| anyhow!("--seed is required for the experiment"))?;
            let out = empirical_sampling_experiment(n, delta, eps, run.planted, trials, seed)
                .map_err(|e| anyhow!("{e}"))?;
            let _ = writeln!(
                text,
                "n\tdelta\teps\tplanted\ttrials\tbad_events\tempirical\tbound"
            );
            let _ = writeln!(
                text,
                "{n}\t{delta}\t{eps}\t{}\t{}\t{}\t{:.6e}\t{:.6e}",
                out.planted, out.trials, out.bad_events, out.empirical, out.bound
            );
        }
        "key_rate" => {
            let grid = match &run.grid {
                Some(spec) => parse_grid(spec)?,
                None => vec![need(run.delta, "delta")?],
            };
            let _ = writeln!(text, "delta\tkey_rate_{}", run.rate_mode);
            for d in grid {
                let _ = writeln!(text, "{d:.6}\t{:.6}", key_rate(d, mode).map_err(|e| anyhow!("{e}"))?);
            }
        }
        "entropy" => {
            let grid = match &run.grid {
                Some(spec) => parse_grid(spec)?,
                None => vec![need(run.p, "p")?],
            };
            let _ = writeln!(text, "p\tbinary_entropy");
            for p in grid {
                let _ = writeln!(text, "{p:.6}\t{:.6}", binary_entropy(p).map_err(|e| anyhow!("{e}"))?);
            }
        }
        "threshold" => {
            let _ = writeln!(text, "shannon_threshold");
            let _ = writeln!(text, "{:.9}", shannon_threshold());
        }
        other => bail!(
            "unknown formula `{other}` (valid: lo_chau, sampling_tail, sampling_experiment, key_rate, entropy, threshold)"
        ),
    }
    if let Some(path) = &run.out {
        output::write_file(path, &text)?;
    }
    print!("{text}");
    Ok(0)
}

/// Runs the oracle-vs-frame and operator-identity checks, printing one
/// PASS/FAIL line each; a failure maps to exit code 3.
pub fn cmd_verify(circuits: u64, seed: u64) -> anyhow::Result<i32> {
    let mut all_ok = true;
    let mut report = |name: &str, ok: bool, detail: String| {
        println!("{} {name} ({detail})", if ok { "PASS" } else { "FAIL" });
        all_ok &= ok;
    };

    let (first, second) = bell_projector_identity_deviations();
    report(
        "bell-projector-identities",
        first <= 1e-12 && second <= 1e-12,
        format!("deviations {first:.2e}, {second:.2e}"),
    );

    let steane = CssCodePair::steane();
    report(
        "steane-pair-valid",
        steane.validate().is_ok(),
        "nesting and orthogonality invariants".to_string(),
    );

    let duality = verify_hadamard_duality(&steane, 12).map_err(|e| anyhow!("{e}"))?;
    report(
        "hadamard-duality-steane",
        duality.ok(),
        format!("projector distance {:.2e}", duality.projector_distance),
    );

    let zero7 = qkdsim::gf2::BitVector::zeros(7);
    let za = z_average_check(&steane, &zero7, &zero7, 12).map_err(|e| anyhow!("{e}"))?;
    report(
        "phase-average-steane",
        za.ok(),
        format!("max deviation {:.2e}", za.max_deviation),
    );
    let toy = CssCodePair::toy3();
    let zero3 = qkdsim::gf2::BitVector::zeros(3);
    let za = z_average_check(&toy, &zero3, &zero3, 12).map_err(|e| anyhow!("{e}"))?;
    report(
        "phase-average-toy3",
        za.ok(),
        format!("max deviation {:.2e}", za.max_deviation),
    );

    let worst = frame_oracle_agreement(circuits, 5, seed).map_err(|e| anyhow!("{e}"))?;
    report(
        "frame-oracle-agreement",
        worst <= 1e-12,
        format!("{circuits} circuits, worst deviation {worst:.2e}"),
    );

    let threshold = shannon_threshold();
    report(
        "shannon-threshold",
        threshold > 0.109 && threshold < 0.111,
        format!("{threshold:.6}"),
    );

    Ok(if all_ok { 0 } else { 3 })
}
