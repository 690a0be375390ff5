//! Acceptance suite: one test per release criterion, each printing a
//! PASS line with its runtime (run with `--nocapture` to see them).
//!
//! The criteria pin exact metric oracles, the analytic/structural duality
//! of the response models, statistical contracts of the stochastic device
//! model and the Monte Carlo engine, and end-to-end reproducibility of the
//! CLI pipeline.

use pufbench_core::apuf::{
    analytic_response, evaluate_crp_set, structural_response, ApufDesign, ApufInstance, Challenge,
    Memristor, StagePair, Topology,
};
use pufbench_core::config::ExperimentConfig;
use pufbench_core::device::{
    linear_drift_resistance, step_state, LinearDriftDevice, StanfordParams, StanfordState, T_REF_K,
};
use pufbench_core::metrics::{
    bit_aliasing, hamming_distance, reliability, uniformity, uniqueness, ReliabilitySample,
    ResponseMatrix,
};
use pufbench_core::montecarlo::derive_stream;
use pufbench_core::rng::NoiseStream;
use pufbench_core::variation::{
    environment_sweep, sample_instance, EnvAxis, Environment, VariationSpec,
};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

fn bits(s: &str) -> Vec<bool> {
    s.chars().map(|c| c == '1').collect()
}

fn finish(criterion: u32, what: &str, started: Instant, budget: Duration) {
    let elapsed = started.elapsed();
    assert!(
        elapsed < budget,
        "criterion {criterion} exceeded its {budget:?} budget: {elapsed:?}"
    );
    println!("criterion {criterion} PASS — {what} ({elapsed:.2?})");
}

fn tmp_dir(tag: &str) -> PathBuf {
    let dir =
        std::env::temp_dir().join(format!("pufbench-acceptance-{tag}-{}", std::process::id()));
    std::fs::remove_dir_all(&dir).ok();
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

/// Criterion 1: metric operations reproduce the hand-computed fixtures at
/// full precision (exact rationals, two-decimal rendering).
#[test]
fn criterion_1_metric_exactness() {
    let started = Instant::now();

    assert_eq!(hamming_distance(&bits("0101"), &bits("0011")).unwrap(), 2);

    let m = ResponseMatrix::new(vec![bits("0000"), bits("1111"), bits("0011")], "fx").unwrap();
    let u = uniqueness(&m).unwrap();
    // (2/(3·2)) · (4+2+2)/4 · 100 = 200/3 %.
    assert_eq!(u.format_2dp(), "66.67");
    assert_eq!(u.value(), 200.0 / 3.0);

    let s = ReliabilitySample::new(bits("0000"), vec![bits("0001"), bits("0011")]).unwrap();
    let (intra, rel) = reliability(&s).unwrap();
    assert_eq!(intra.format_2dp(), "37.50");
    assert_eq!(rel.format_2dp(), "62.50");
    assert_eq!(intra.value(), 37.5);
    assert_eq!(rel.value(), 62.5);

    let perfect = ReliabilitySample::new(bits("0110"), vec![bits("0110"), bits("0110")]).unwrap();
    let (i0, r100) = reliability(&perfect).unwrap();
    assert!(i0.eq_int(0) && r100.eq_int(100));
    assert_eq!(r100.format_2dp(), "100.00");

    assert!(uniformity(&bits("1111")).unwrap().eq_int(100));
    assert!(uniformity(&bits("0000")).unwrap().eq_int(0));
    assert!(uniformity(&bits("0110")).unwrap().eq_int(50));

    let aliasing =
        bit_aliasing(&ResponseMatrix::new(vec![bits("00"), bits("01"), bits("11")], "fx").unwrap())
            .unwrap();
    assert_eq!(aliasing[0].format_2dp(), "33.33");
    assert_eq!(aliasing[1].format_2dp(), "66.67");
    assert_eq!(aliasing[0].value(), 100.0 / 3.0);

    finish(
        1,
        "metric fixtures exact to full precision",
        started,
        Duration::from_secs(1),
    );
}

/// Criterion 2: the structural arrival-time race agrees with the analytic
/// sign-of-scalar-product response on all 256 challenges of 50 sampled
/// 8-stage instances — 12,800/12,800.
#[test]
fn criterion_2_analytic_structural_cross_validation() {
    let started = Instant::now();
    let design = ApufDesign::default();
    let spec = VariationSpec::paper_shape_defaults();
    let challenges = Challenge::enumerate_all(8).unwrap();
    let nominal = Environment::nominal();
    let mut agreements = 0u32;
    for idx in 0..50u64 {
        let inst = sample_instance(&design, &spec, &derive_stream(0x0c2e_c5ed, idx)).unwrap();
        for challenge in &challenges {
            let a = analytic_response(&inst, challenge).unwrap();
            let s = structural_response(&inst, challenge, &nominal).unwrap();
            assert_eq!(
                a.logic,
                s.bits[0].logic,
                "instance {idx}, challenge {}",
                challenge.to_bit_string()
            );
            agreements += 1;
        }
    }
    assert_eq!(agreements, 12_800);
    finish(
        2,
        "12,800/12,800 structural = analytic agreement",
        started,
        Duration::from_secs(10),
    );
}

/// Criterion 3: 100 chips from the joint variation profile, 8-bit
/// exhaustive challenges, concatenated identifiers — uniqueness within
/// 50% ± 3%.
#[test]
fn criterion_3_ideal_population_uniqueness() {
    let started = Instant::now();
    let design = ApufDesign::default();
    let spec = VariationSpec::paper_shape_defaults();
    let challenges = Challenge::enumerate_all(8).unwrap();
    let nominal = Environment::nominal();
    let rows: Vec<Vec<bool>> = (0..100u64)
        .map(|idx| {
            let inst = sample_instance(&design, &spec, &derive_stream(0xf1e1d, idx)).unwrap();
            evaluate_crp_set(&inst, &challenges, &nominal)
                .unwrap()
                .records
                .iter()
                .flat_map(|r| r.word.bits.iter().map(|b| b.logic))
                .collect()
        })
        .collect();
    assert!(rows.iter().all(|r| r.len() == 256));
    let u = uniqueness(&ResponseMatrix::new(rows, "population").unwrap())
        .unwrap()
        .value();
    assert!(
        (47.0..=53.0).contains(&u),
        "uniqueness {u}% outside 50% ± 3%"
    );
    finish(
        3,
        &format!("k=100 concatenated-identifier uniqueness {u:.2}% within 50% ± 3%"),
        started,
        Duration::from_secs(60),
    );
}

/// Two-stage near-tie fixture: stage 0 is challenge-shunted so its margin
/// contribution tracks the switch resistance; stage 1 opposes it with a
/// fixed offset just below the nominal contribution.
fn near_tie_fixture() -> ApufInstance {
    let stage = |u: f64, l: f64| StagePair {
        upper: Memristor::fixed(u).unwrap(),
        lower: Memristor::fixed(l).unwrap(),
        c_drain: 1.0e-15,
        r_on_upper: 1.0e3,
        r_on_lower: 1.0e3,
    };
    ApufInstance {
        stages: vec![stage(5_000.0, 6_000.0), stage(20_000.0, 19_953.0)],
        topology: Topology::SingleResponse,
        env_sensitivity: Default::default(),
        kappa: std::f64::consts::LN_2,
        metastability_window_s: 1.0e-12,
    }
}

/// Criterion 4: nominal-vs-nominal reliability is exactly 100.00%, and on
/// the near-tie fixture reliability is non-increasing in the perturbation
/// magnitude with a guaranteed flip at the extreme.
#[test]
fn criterion_4_reliability_degeneracy_and_trend() {
    let started = Instant::now();

    // Degeneracy: the noiseless simulator repeats itself exactly.
    let design = ApufDesign::default();
    let spec = VariationSpec::paper_shape_defaults();
    let inst = sample_instance(&design, &spec, &derive_stream(4, 0)).unwrap();
    let challenges = Challenge::enumerate_all(8).unwrap();
    let nominal = Environment::nominal();
    let word_bits = |env: &Environment| -> Vec<bool> {
        evaluate_crp_set(&inst, &challenges, env)
            .unwrap()
            .records
            .iter()
            .flat_map(|r| r.word.bits.iter().map(|b| b.logic))
            .collect()
    };
    let reference = word_bits(&nominal);
    let repeat = word_bits(&nominal);
    let (intra, rel) =
        reliability(&ReliabilitySample::new(reference, vec![repeat]).unwrap()).unwrap();
    assert!(intra.eq_int(0));
    assert!(rel.eq_int(100));
    assert_eq!(rel.format_2dp(), "100.00");

    // Trend: reliability per |ΔT_cmos| magnitude on the near-tie fixture.
    let fixture = near_tie_fixture();
    let challenge = Challenge::new(vec![true, false]).unwrap();
    let response_at = |env: &Environment| -> Vec<bool> {
        vec![structural_response(&fixture, &challenge, env).unwrap().bits[0].logic]
    };
    let ref_bit = response_at(&nominal);
    let mut previous = 101.0;
    let mut last_reliability = 100.0;
    for magnitude in [0.0, 25.0, 50.0] {
        let envs = environment_sweep(
            &nominal,
            EnvAxis::TempCmos,
            &[27.0 - magnitude, 27.0 + magnitude],
        )
        .unwrap();
        let trials: Vec<Vec<bool>> = envs.iter().map(response_at).collect();
        let (_, rel) =
            reliability(&ReliabilitySample::new(ref_bit.clone(), trials).unwrap()).unwrap();
        let value = rel.value();
        assert!(
            value <= previous + 1e-12,
            "reliability must be non-increasing in perturbation magnitude: {value} after {previous}"
        );
        previous = value;
        last_reliability = value;
    }
    assert!(
        last_reliability < 100.0,
        "extreme perturbation must flip the near-tie bit"
    );

    finish(
        4,
        "nominal reliability exactly 100.00%, monotone degradation with guaranteed flip",
        started,
        Duration::from_secs(10),
    );
}

/// Criterion 5: the stochastic integrator honors the additive-noise
/// contract — driftless gap variance after 10⁴ steps equals δg²·N·dt
/// within 10% over 10⁴ trials, and δ = 0 integration is bit-deterministic.
#[test]
fn criterion_5_sde_contract() {
    let started = Instant::now();
    let params = StanfordParams::default();
    let n_steps = 10_000u32;
    let n_trials = 10_000u64;
    let dt = 1.0e-9;
    let g0 = 1.5;
    // Deviations from g0 keep the accumulation well inside f64 precision.
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for trial in 0..n_trials {
        let mut noise = derive_stream(0x5de_c0de, trial);
        let mut state = StanfordState { g: g0, r: 0.5 };
        for _ in 0..n_steps {
            state = step_state(&state, &params, 0.0, dt, T_REF_K, &mut noise).unwrap();
        }
        let d = state.g - g0;
        sum += d;
        sumsq += d * d;
    }
    let mean_dev = sum / n_trials as f64;
    let var = sumsq / n_trials as f64 - mean_dev * mean_dev;
    let expected = params.delta_g * params.delta_g * n_steps as f64 * dt;
    let ratio = var / expected;
    assert!(
        (ratio - 1.0).abs() < 0.10,
        "gap variance {var} vs δg²·N·dt {expected} (ratio {ratio})"
    );

    // Bit-determinism with the noise amplitudes at zero.
    let mut quiet = params.clone();
    quiet.delta_g = 0.0;
    quiet.delta_r = 0.0;
    let run = || {
        let mut state = StanfordState { g: 2.0, r: 0.5 };
        let mut noise = NoiseStream::from_seed(1);
        for _ in 0..10_000 {
            state = step_state(&state, &quiet, 0.08, dt, T_REF_K, &mut noise).unwrap();
        }
        (state.g.to_bits(), state.r.to_bits())
    };
    assert_eq!(run(), run());

    finish(
        5,
        &format!("driftless variance ratio {ratio:.4} within 10%, δ=0 bit-deterministic"),
        started,
        Duration::from_secs(60),
    );
}

/// Criterion 6: a 350-sample Monte Carlo run at n = 8 finishes inside a
/// minute and its outputs are byte-identical across worker counts and
/// across reruns with the same seed.
#[test]
fn criterion_6_mc_reproducibility_and_parallel_invariance() {
    let started = Instant::now();
    let bin = env!("CARGO_BIN_EXE_pufbench");
    let base = tmp_dir("mc350");
    let run = |dir: &Path, workers: &str| {
        let out = std::process::Command::new(bin)
            .args([
                "mc",
                "--preset",
                "paper-shape-defaults",
                "--seed",
                "350",
                "--samples",
                "350",
                "--consolidated",
                "--workers",
                workers,
                "--out",
                dir.to_str().unwrap(),
            ])
            .output()
            .expect("spawn pufbench mc");
        assert!(
            out.status.success(),
            "mc run failed: {}",
            String::from_utf8_lossy(&out.stderr)
        );
    };
    let dir_w1 = base.join("w1");
    let dir_w8 = base.join("w8");
    let dir_rerun = base.join("rerun");
    run(&dir_w1, "1");
    run(&dir_w8, "8");
    run(&dir_rerun, "8");

    let crp_w1 = std::fs::read(dir_w1.join("mc.crp")).unwrap();
    let crp_w8 = std::fs::read(dir_w8.join("mc.crp")).unwrap();
    let crp_rerun = std::fs::read(dir_rerun.join("mc.crp")).unwrap();
    assert_eq!(crp_w1, crp_w8, "worker count changed CRP bytes");
    assert_eq!(crp_w8, crp_rerun, "rerun with same seed changed CRP bytes");
    let stats_w1 = std::fs::read(dir_w1.join("mc_stats.txt")).unwrap();
    let stats_w8 = std::fs::read(dir_w8.join("mc_stats.txt")).unwrap();
    let stats_rerun = std::fs::read(dir_rerun.join("mc_stats.txt")).unwrap();
    assert_eq!(stats_w1, stats_w8);
    assert_eq!(stats_w8, stats_rerun);

    // 350 instances × 256 exhaustive challenges.
    let text = String::from_utf8(crp_w1).unwrap();
    assert_eq!(text.lines().count(), 6 + 350 * 256);

    std::fs::remove_dir_all(&base).ok();
    finish(
        6,
        "350-sample MC byte-identical across --workers 1/8 and reruns",
        started,
        Duration::from_secs(60),
    );
}

/// Criterion 7: linear ion-drift resistance is exact at both endpoints and
/// affine in the doped width to ulp-scale tolerance on 10⁴ random cases.
#[test]
fn criterion_7_linear_drift_endpoints_and_affinity() {
    let started = Instant::now();
    let mut stream = NoiseStream::from_seed(0x11f_ea12);
    for case in 0..10_000 {
        let d = 1.0 + 99.0 * stream.next_uniform();
        let r_on = 10.0 + 1.0e3 * stream.next_uniform();
        let r_off = r_on * (2.0 + 100.0 * stream.next_uniform());
        let dev = |w: f64| LinearDriftDevice { w, d, r_on, r_off };

        assert_eq!(
            linear_drift_resistance(&dev(0.0)).unwrap(),
            r_off,
            "case {case}"
        );
        assert_eq!(
            linear_drift_resistance(&dev(d)).unwrap(),
            r_on,
            "case {case}"
        );

        let w1 = d * stream.next_uniform();
        let w2 = d * stream.next_uniform();
        let lambda = stream.next_uniform();
        let w_mix = lambda * w1 + (1.0 - lambda) * w2;
        let direct = linear_drift_resistance(&dev(w_mix)).unwrap();
        let mixed = lambda * linear_drift_resistance(&dev(w1)).unwrap()
            + (1.0 - lambda) * linear_drift_resistance(&dev(w2)).unwrap();
        let tolerance = 16.0 * f64::EPSILON * r_off;
        assert!(
            (direct - mixed).abs() <= tolerance,
            "case {case}: |{direct} - {mixed}| > {tolerance}"
        );
        assert!(direct >= r_on - tolerance && direct <= r_off + tolerance);
    }
    finish(
        7,
        "endpoints exact, affinity within 16 ulps on 10,000 cases",
        started,
        Duration::from_secs(10),
    );
}

/// Criterion 8: the `report` pipeline renders the four-column
/// Size/Reliability/Uniqueness table with every cell traceable to CRP
/// files through the column's config hash.
#[test]
fn criterion_8_report_shape_and_traceability() {
    let started = Instant::now();
    let dir = tmp_dir("report");
    let mut config = ExperimentConfig::default();
    config.set("io.out_dir", dir.to_str().unwrap()).unwrap();
    let out = pufbench::cmd_report(&config).unwrap();

    // Shape: four topology columns, three labelled rows.
    let expected_columns = [
        "CMOS",
        "Memristor (1res_1T1M)",
        "Memristor (4res_1T1M_2Stage)",
        "Memristor (4res_1T1M_4Stage)",
    ];
    assert_eq!(out.columns.len(), 4);
    for (column, expected) in out.columns.iter().zip(expected_columns) {
        assert_eq!(column.display_name, expected);
        assert!(out.table_text.contains(expected));
    }
    for row in ["Size", "Reliability (%)", "Uniqueness (%)"] {
        assert!(out.table_text.contains(row), "missing row {row}");
    }
    let sizes: Vec<usize> = out.reports.iter().map(|r| r.size_bits).collect();
    assert_eq!(sizes, vec![16, 8, 8, 16]);

    // Traceability: every column's hash appears in the table footer and in
    // the headers of the CRP files its cells were computed from.
    for column in &out.columns {
        assert!(out.table_text.contains(&column.config_hash));
        assert!(column.crp_files > 0);
        let chip_dir = dir.join("report").join(&column.dir_name);
        let chip0 = chip_dir.join("chip000.crp");
        let file = pufbench_core::crpfile::CrpFile::read(&chip0).unwrap();
        assert_eq!(file.config_hash, column.config_hash);
        // Reliability trials are persisted too.
        assert!(chip_dir.join("chip000_trial00.crp").is_file());
    }
    for report in &out.reports {
        let u = report.uniqueness.unwrap().value();
        let r = report.reliability.unwrap().value();
        assert!((0.0..=100.0).contains(&u));
        assert!((0.0..=100.0).contains(&r));
    }
    assert!(out.table_path.is_file() && out.kv_path.is_file());

    std::fs::remove_dir_all(&dir).ok();
    finish(
        8,
        "four-column report rendered with hash-traceable cells",
        started,
        Duration::from_secs(120),
    );
}
