//! Acceptance suite: every release-gating property of the laboratory,
//! one test per criterion, each printing a PASS line with its headline
//! numbers (visible under `--nocapture`).
//!
//! Run with: `cargo test -p qkdsim-cli --test acceptance -- --nocapture`

use std::time::Instant;

use qkdsim::adversary::AttackModel;
use qkdsim::bell_frame::{
    fidelity_lower_bound, purify, BellFrameState, PairwisePauliNoise, PauliOp, PurifyOutcome,
};
use qkdsim::bounds::{empirical_sampling_experiment, key_rate, RateMode};
use qkdsim::crosscheck::frame_oracle_agreement;
use qkdsim::css::{shannon_threshold, CssCodePair};
use qkdsim::gf2::BitVector;
use qkdsim::protocols::dense::{equivalence_dense, CoherentAttack};
use qkdsim::protocols::{
    equivalence_exhaustive_fixed_patterns, equivalence_harness, run_trials, summarize,
    z_average_check, ProtocolConfig, ProtocolKind,
};
use qkdsim::statevector::{
    bell_projector_identity_deviations, verify_hadamard_duality, DEFAULT_QUBIT_CAP,
};
use qkdsim::{streams, PauliAxis};

fn pass(criterion: u32, name: &str, detail: String) {
    println!("ACCEPTANCE {criterion} ({name}): PASS [{detail}]");
}

#[test]
fn criterion_01_bell_projector_identities() {
    let start = Instant::now();
    let (first, second) = bell_projector_identity_deviations();
    assert!(first <= 1e-12, "first identity deviates by {first}");
    assert!(second <= 1e-12, "second identity deviates by {second}");
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 1.0, "took {elapsed:?}");
    pass(
        1,
        "bell identities",
        format!("deviations {first:.2e}/{second:.2e}, {elapsed:?}"),
    );
}

#[test]
fn criterion_02_css_machinery() {
    let start = Instant::now();
    let pair = CssCodePair::steane();

    // (a) The pair satisfies every structural invariant.
    assert!(pair.validate().is_ok());

    // (b) Identity plus all 21 single-qubit Paulis are corrected.
    let indices: Vec<usize> = (0..7).collect();
    let clean = BellFrameState::perfect(7);
    assert_eq!(purify(&clean, &pair, &indices).unwrap(), PurifyOutcome::Success);
    let mut corrected = 1usize;
    for axis in [PauliAxis::X, PauliAxis::Y, PauliAxis::Z] {
        for index in 0..7 {
            let mut state = BellFrameState::perfect(7);
            state.apply_pauli(PauliOp { axis, index }).unwrap();
            assert_eq!(
                purify(&state, &pair, &indices).unwrap(),
                PurifyOutcome::Success,
                "{axis:?} on pair {index}"
            );
            corrected += 1;
        }
    }
    assert_eq!(corrected, 22);

    // (c) Transversal Hadamard maps the code space onto the dual's.
    let duality = verify_hadamard_duality(&pair, DEFAULT_QUBIT_CAP).unwrap();
    assert!(
        duality.projector_distance <= 1e-10,
        "projector distance {}",
        duality.projector_distance
    );

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 10.0, "took {elapsed:?}");
    pass(
        2,
        "css machinery",
        format!(
            "22 error cases corrected, duality distance {:.2e}, {elapsed:?}",
            duality.projector_distance
        ),
    );
}

#[test]
fn criterion_03_phase_averaging() {
    let steane = CssCodePair::steane();
    let zero7 = BitVector::zeros(7);
    let x7: BitVector = "1011001".parse().unwrap();
    let k7 = steane
        .labeler()
        .representative(&BitVector::from_bits([true]))
        .unwrap();
    let mut worst = 0.0f64;
    for (k, x) in [(&zero7, &zero7), (&k7, &x7)] {
        let out = z_average_check(&steane, k, x, DEFAULT_QUBIT_CAP).unwrap();
        assert!(out.max_deviation <= 1e-10, "steane deviation {}", out.max_deviation);
        worst = worst.max(out.max_deviation);
    }
    let toy = CssCodePair::toy3();
    let zero3 = BitVector::zeros(3);
    let k3 = toy
        .labeler()
        .representative(&BitVector::from_bits([true]))
        .unwrap();
    let x3: BitVector = "011".parse().unwrap();
    for (k, x) in [(&zero3, &zero3), (&k3, &x3)] {
        let out = z_average_check(&toy, k, x, DEFAULT_QUBIT_CAP).unwrap();
        assert!(out.max_deviation <= 1e-10, "toy3 deviation {}", out.max_deviation);
        worst = worst.max(out.max_deviation);
    }
    pass(3, "phase averaging", format!("worst deviation {worst:.2e}"));
}

#[test]
fn criterion_04_eleven_percent_threshold() {
    let threshold = shannon_threshold();
    assert!(
        threshold > 0.109 && threshold < 0.111,
        "threshold {threshold}"
    );
    let rate = key_rate(0.11, RateMode::Shannon).unwrap();
    assert!(
        rate > -0.01 && rate < 0.01,
        "key rate at 0.11 is {rate}"
    );
    pass(
        4,
        "11% threshold",
        format!("threshold {threshold:.6}, key_rate(0.11) {rate:.6}"),
    );
}

#[test]
fn criterion_05_sampling_tail_bound() {
    let start = Instant::now();
    let out = empirical_sampling_experiment(1000, 0.1, 0.05, None, 1_000_000, 20260).unwrap();
    let analytic = (-0.25f64 * 0.05 * 0.05 * 1000.0 / (0.1 - 0.01)).exp();
    assert!((out.bound - analytic).abs() < 1e-12);
    assert!((analytic - 9.63e-4).abs() < 2e-5, "analytic {analytic}");
    // No 3-sigma violation: the empirical frequency stays below the bound.
    let sigma = (out.empirical * (1.0 - out.empirical) / out.trials as f64).sqrt();
    assert!(
        out.empirical + 3.0 * sigma < out.bound,
        "empirical {} vs bound {}",
        out.empirical,
        out.bound
    );
    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 60.0, "took {elapsed:?}");
    pass(
        5,
        "sampling bound",
        format!(
            "empirical {:.3e} < bound {:.3e} ({} bad events in 1e6, planted {}), {elapsed:?}",
            out.empirical, out.bound, out.bad_events, out.planted
        ),
    );
}

#[test]
fn criterion_06_fidelity_lower_bound() {
    use rand::RngExt;
    let pair = CssCodePair::steane();
    let indices: Vec<usize> = (0..7).collect();
    let mut config_rng = streams::substream(606, 0, 1);
    let trials = 5000u32;

    // 20 random Bell-diagonal products plus four stress cases that leave
    // plenty of correctable weight-2+ mass.
    let mut distributions: Vec<[f64; 3]> = (0..20)
        .map(|_| {
            [
                0.20 * config_rng.random::<f64>(),
                0.20 * config_rng.random::<f64>(),
                0.20 * config_rng.random::<f64>(),
            ]
        })
        .collect();
    distributions.push([0.5, 0.0, 0.0]);
    distributions.push([0.0, 0.0, 0.5]);
    distributions.push([0.35, 0.0, 0.02]);
    distributions.push([0.02, 0.3, 0.02]);

    let mut max_gap = 0.0f64;
    for (i, [px, py, pz]) in distributions.iter().enumerate() {
        let noise = PairwisePauliNoise::iid(7, *px, *py, *pz).unwrap();
        let bound = fidelity_lower_bound(&noise, &pair).unwrap();
        let mut rng = streams::substream(606, i as u64 + 1, 2);
        let mut successes = 0u32;
        for _ in 0..trials {
            let (eb, ep) = noise.sample(&mut rng);
            let state = BellFrameState::from_pattern(eb, ep).unwrap();
            if purify(&state, &pair, &indices).unwrap() == PurifyOutcome::Success {
                successes += 1;
            }
        }
        let rate = successes as f64 / trials as f64;
        let sigma = (bound * (1.0 - bound) / trials as f64).sqrt();
        assert!(
            rate >= bound - 3.0 * sigma,
            "distribution {i} ({px},{py},{pz}): success {rate} below bound {bound}"
        );
        max_gap = max_gap.max(rate - bound);
    }
    assert!(
        max_gap > 0.05,
        "no distribution shows a strict gap: max {max_gap}"
    );
    pass(
        6,
        "fidelity bound",
        format!(
            "{} distributions x {trials} trials, max strict gap {max_gap:.3}",
            distributions.len()
        ),
    );
}

#[test]
fn criterion_07_equivalence_css_bb84() {
    let start = Instant::now();

    // Exhaustive: every fixed Pauli pattern of weight <= 2 on the 14
    // transmitted positions, compared on coupled draws.
    let cfg = ProtocolConfig::new(CssCodePair::steane());
    let report = equivalence_exhaustive_fixed_patterns(&cfg, 2, 25, 707).unwrap();
    let expected_patterns = 1 + 14 * 3 + (14 * 13 / 2) * 9;
    assert_eq!(report.patterns, expected_patterns);
    assert_eq!(
        report.mismatches, 0,
        "{} mismatching coupled runs",
        report.mismatches
    );

    // Monte Carlo: independent randomness with matched channel seeds.
    let mut mc_cfg = ProtocolConfig::new(CssCodePair::steane());
    mc_cfg.delta = 4.0;
    mc_cfg.attack = AttackModel::IidPauli {
        px: 0.03,
        py: 0.0,
        pz: 0.03,
    };
    let mc = equivalence_harness(
        ProtocolKind::CssCode,
        &mc_cfg,
        ProtocolKind::Bb84,
        &mc_cfg,
        100_000,
        708,
    )
    .unwrap();
    assert!(mc.tvd < 0.02, "tvd {}", mc.tvd);

    let elapsed = start.elapsed();
    assert!(elapsed.as_secs_f64() < 300.0, "took {elapsed:?}");
    pass(
        7,
        "equivalence css<->bb84",
        format!(
            "{} patterns exact, mc tvd {:.4} (p {:.3}), {elapsed:?}",
            report.patterns, mc.tvd, mc.p_value
        ),
    );
}

#[test]
fn criterion_08_equivalence_purification_css_dense() {
    let cfg = ProtocolConfig::new(CssCodePair::toy3());
    let attack = CoherentAttack::identity()
        .rotate_y(0, 0.4)
        .rotate_y(2, 0.7)
        .rotate_y(4, 0.25)
        .controlled_z(1, 3);
    let eq = equivalence_dense(&cfg, &attack, 10_000, 808, DEFAULT_QUBIT_CAP).unwrap();
    assert!(
        eq.within_three_sigma,
        "max per-cell deviation {:.2} sigma, tvd {:.4}",
        eq.max_sigma, eq.tvd
    );
    pass(
        8,
        "equivalence purification<->css (dense)",
        format!("10^4 trials, max {:.2} sigma, tvd {:.4}", eq.max_sigma, eq.tvd),
    );
}

#[test]
fn criterion_09_completeness() {
    for kind in [
        ProtocolKind::Purification,
        ProtocolKind::CssCode,
        ProtocolKind::Bb84,
    ] {
        let mut cfg = ProtocolConfig::new(CssCodePair::steane());
        cfg.delta = 6.0;
        let transcripts = run_trials(kind, &cfg, 909, 100).unwrap();
        let summary = summarize(&transcripts);
        assert_eq!(summary.abort_rate, 0.0, "{kind} aborted");
        assert_eq!(summary.key_agreement_rate, Some(1.0), "{kind} keys differ");
    }
    pass(9, "completeness", "3 protocols x 100 seeds, abort 0, agreement 1".to_string());
}

#[test]
fn criterion_10_soundness_intercept_resend() {
    use rand::SeedableRng;
    let mut code_rng = rand_chacha::ChaCha8Rng::seed_from_u64(1010);
    let pair = CssCodePair::random_nested(200, 100, 50, 1, &mut code_rng).unwrap();
    let mut cfg = ProtocolConfig::new(pair);
    cfg.delta = 2.0;
    cfg.threshold.rate = 0.11;
    cfg.threshold.margin = 0.02;
    cfg.attack = AttackModel::InterceptResend { fraction: 1.0 };

    let trials = 10_000u64;
    let transcripts = run_trials(ProtocolKind::Bb84, &cfg, 1011, trials).unwrap();
    let summary = summarize(&transcripts);
    assert!(
        summary.abort_rate >= 0.999,
        "abort rate {}",
        summary.abort_rate
    );

    // Pooled sifted disagreement rate across all check comparisons.
    let mut errors = 0u64;
    let mut comparisons = 0u64;
    for t in &transcripts {
        if let Some(e) = t.check_errors {
            errors += e as u64;
            comparisons += t.check_count as u64;
        }
    }
    let rate = errors as f64 / comparisons as f64;
    assert!(
        (rate - 0.25).abs() < 0.01,
        "sifted disagreement rate {rate}"
    );
    pass(
        10,
        "soundness under interception",
        format!(
            "abort rate {:.4}, disagreement {rate:.4} over {comparisons} checks",
            summary.abort_rate
        ),
    );
}

#[test]
fn criterion_11_frame_oracle_agreement() {
    let worst = frame_oracle_agreement(1000, 5, 1111).unwrap();
    assert!(worst <= 1e-12, "worst deviation {worst}");
    pass(
        11,
        "frame/oracle agreement",
        format!("1000 circuits, worst deviation {worst:.2e}"),
    );
}

#[test]
fn criterion_12_cli_determinism() {
    let binary = env!("CARGO_BIN_EXE_qkdsim");
    let base = std::env::temp_dir().join(format!("qkdsim-acceptance-{}", std::process::id()));
    let run = |out: &std::path::Path| {
        let status = std::process::Command::new(binary)
            .args([
                "simulate",
                "--protocol",
                "3",
                "--code-kind",
                "steane",
                "--delta",
                "4",
                "--attack-kind",
                "intercept_resend",
                "--attack-fraction",
                "0.5",
                "--trials",
                "200",
                "--seed",
                "42",
                "--out-dir",
            ])
            .arg(out)
            .stdout(std::process::Stdio::null())
            .status()
            .expect("spawning the CLI");
        assert!(status.success(), "CLI exited with {status}");
    };
    let dir_a = base.join("a");
    let dir_b = base.join("b");
    run(&dir_a);
    run(&dir_b);
    for file in ["trials.txt", "summary.tsv"] {
        let a = std::fs::read(dir_a.join(file)).unwrap();
        let b = std::fs::read(dir_b.join(file)).unwrap();
        assert_eq!(a, b, "{file} differs between identical runs");
        assert!(!a.is_empty());
    }
    std::fs::remove_dir_all(&base).ok();
    pass(
        12,
        "cli determinism",
        "repeated seeded run produced byte-identical trials.txt and summary.tsv".to_string(),
    );
}
