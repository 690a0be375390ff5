//! Command implementations behind the `pufbench` binary.
//!
//! Each command is an ordinary function of an [`ExperimentConfig`] so the
//! pipeline can be driven from tests as well as from the CLI. All outputs
//! land under the configured `io.out_dir`, carry the config hash, and are
//! byte-identical across reruns with the same configuration and seed.

use anyhow::{bail, Context, Result};
use pufbench_core::apuf::evaluate_crp_set;
use pufbench_core::config::ExperimentConfig;
use pufbench_core::crpfile::{
    header_stanza, render_iv, render_stats, render_sweep, write_atomic, CrpFile,
};
use pufbench_core::device::stanford_current;
use pufbench_core::metrics::{
    hamming_distance, render_table, table4_report, ReliabilitySample, ResponseMatrix,
    TopologyPopulation,
};
use pufbench_core::montecarlo::{derive_stream, run_mc, summarize};
use pufbench_core::report::{generate_report, ReportOutput};
use pufbench_core::variation::{environment_sweep, sample_instance};
use std::path::PathBuf;

/// Run `f` on a dedicated rayon pool of `workers` threads (or the default
/// pool when `None`). Outputs are invariant to the choice.
pub fn with_workers<T: Send>(workers: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    match workers {
        None | Some(0) => Ok(f()),
        Some(w) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(w)
                .build()
                .context("building worker pool")?;
            Ok(pool.install(f))
        }
    }
}

fn out_dir(config: &ExperimentConfig) -> Result<PathBuf> {
    let dir = PathBuf::from(config.get("io.out_dir")?);
    std::fs::create_dir_all(&dir)
        .with_context(|| format!("creating output directory {}", dir.display()))?;
    Ok(dir)
}

/// I-V table of the nominal device at its initial state across a bias list.
pub fn cmd_device_sweep(config: &ExperimentConfig) -> Result<PathBuf> {
    let params = config.device_params()?;
    let state = params.initial_state();
    let voltages = config.device_sweep_voltages()?;
    if voltages.is_empty() {
        bail!("device sweep needs at least one voltage");
    }
    let rows: Vec<(f64, f64, f64, f64)> = voltages
        .iter()
        .map(|&v| Ok((v, stanford_current(&state, &params, v)?, state.g, state.r)))
        .collect::<pufbench_core::Result<_>>()?;
    let dir = out_dir(config)?;
    let path = dir.join("device_sweep.csv");
    let seed = config.get_u64("mc.seed")?;
    write_atomic(&path, &render_iv(&config.hash_hex(), seed, &rows))?;
    Ok(path)
}

/// Single-instance CRP file over the configured challenge set.
pub fn cmd_simulate(config: &ExperimentConfig) -> Result<PathBuf> {
    let mc = config.mc_config()?;
    let inst = sample_instance(&mc.design, &mc.variation, &derive_stream(mc.master_seed, 0))?;
    let challenges = mc.challenge_list()?;
    let env = config.environment()?;
    let set = evaluate_crp_set(&inst, &challenges, &env)?;
    let file = CrpFile::from_crp_set(
        &set,
        config.hash_hex(),
        mc.master_seed,
        config.get("topology.preset")?,
        &env,
    );
    let dir = out_dir(config)?;
    let path = dir.join("simulate.crp");
    file.write(&path)?;
    Ok(path)
}

/// Outputs of [`cmd_mc`].
#[derive(Debug)]
pub struct McOutputs {
    pub crp_paths: Vec<PathBuf>,
    pub stats_path: PathBuf,
    pub records: usize,
}

/// Monte Carlo population run: CRP files (consolidated or per instance)
/// plus the stats sidecar.
pub fn cmd_mc(config: &ExperimentConfig, consolidated: Option<bool>) -> Result<McOutputs> {
    let mc = config.mc_config()?;
    let consolidated = match consolidated {
        Some(c) => c,
        None => config.get_bool("mc.consolidated")?,
    };
    let samples = run_mc(&mc)?;
    let hash = config.hash_hex();
    let topology = config.get("topology.preset")?;
    let env = config.environment()?;
    let dir = out_dir(config)?;

    let mut crp_paths = Vec::new();
    if consolidated {
        // All instances in one file, instance-major; each instance
        // contributes one full copy of the challenge column.
        let mut all = CrpFile {
            config_hash: hash.clone(),
            seed: mc.master_seed,
            topology: topology.to_string(),
            env,
            rows: Vec::new(),
        };
        for inst in &samples.per_instance {
            let part = CrpFile::from_crp_set(&inst.crps[0], &hash, mc.master_seed, topology, &env);
            all.rows.extend(part.rows);
        }
        let path = dir.join("mc.crp");
        all.write(&path)?;
        crp_paths.push(path);
    } else {
        let chip_dir = dir.join("mc");
        std::fs::create_dir_all(&chip_dir)?;
        for inst in &samples.per_instance {
            let path = chip_dir.join(format!("chip{:03}.crp", inst.instance_index));
            CrpFile::from_crp_set(&inst.crps[0], &hash, mc.master_seed, topology, &env)
                .write(&path)?;
            crp_paths.push(path);
        }
    }

    let stats = summarize(&samples, config.get_usize("mc.hist_bins")?)?;
    let stats_path = dir.join("mc_stats.txt");
    write_atomic(&stats_path, &render_stats(&stats, &hash, mc.master_seed)?)?;

    Ok(McOutputs {
        crp_paths,
        stats_path,
        records: samples.record_count(),
    })
}

/// Outputs of [`cmd_metrics`].
#[derive(Debug)]
pub struct MetricsOutputs {
    pub text_path: PathBuf,
    pub kv_path: PathBuf,
    pub table_text: String,
}

fn check_same_challenges(files: &[CrpFile], what: &str) -> Result<()> {
    if let Some(first) = files.first() {
        let expected = first.challenge_column();
        for f in files.iter().skip(1) {
            if f.challenge_column() != expected {
                bail!("schema mismatch: {what} files answer different challenge sets");
            }
            if f.rows.first().map(|r| r.response.len())
                != first.rows.first().map(|r| r.response.len())
            {
                bail!("schema mismatch: {what} files have different response widths");
            }
        }
    }
    Ok(())
}

/// Compute metrics from CRP files: `chips` (one file per chip, same
/// challenge set) feed uniqueness/bit-aliasing, `reference` + `trials`
/// feed reliability.
pub fn cmd_metrics(
    config: &ExperimentConfig,
    chips: &[PathBuf],
    reference: Option<&PathBuf>,
    trials: &[PathBuf],
) -> Result<MetricsOutputs> {
    if chips.is_empty() && reference.is_none() {
        bail!("metrics needs --chips files and/or --reference with --trials");
    }
    if reference.is_some() && trials.is_empty() {
        bail!("--reference needs at least one --trials file");
    }
    let window = config.get_f64("topology.metastability_window_s")?;

    let chip_files: Vec<CrpFile> = chips
        .iter()
        .map(|p| CrpFile::read(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<_>>()?;
    check_same_challenges(&chip_files, "chip")?;

    let ref_file = reference
        .map(|p| CrpFile::read(p).with_context(|| format!("reading {}", p.display())))
        .transpose()?;
    let trial_files: Vec<CrpFile> = trials
        .iter()
        .map(|p| CrpFile::read(p).with_context(|| format!("reading {}", p.display())))
        .collect::<Result<_>>()?;
    if let Some(rf) = &ref_file {
        let mut all = vec![rf.clone()];
        all.extend(trial_files.iter().cloned());
        check_same_challenges(&all, "reference/trial")?;
    }

    // Uniqueness rows come from the chip files; with no chip files the
    // reference alone fills the matrix (k = 1: reliability-only report).
    let (rows, topology_name, challenge_count, metastable, total) = if !chip_files.is_empty() {
        let rows: Vec<Vec<bool>> = chip_files.iter().map(|f| f.response_identifier()).collect();
        let meta: u64 = chip_files.iter().map(|f| f.metastable_bits(window)).sum();
        let total: u64 = rows.iter().map(|r| r.len() as u64).sum();
        (
            rows,
            chip_files[0].topology.clone(),
            chip_files[0].rows.len(),
            meta,
            total,
        )
    } else {
        let rf = ref_file.as_ref().unwrap();
        let row = rf.response_identifier();
        let total = row.len() as u64;
        (
            vec![row],
            rf.topology.clone(),
            rf.rows.len(),
            rf.metastable_bits(window),
            total,
        )
    };
    let matrix = ResponseMatrix::new(rows, "from-files")?;

    let mut reliability_samples = Vec::new();
    if let Some(rf) = &ref_file {
        let trials_bits: Vec<Vec<bool>> = trial_files
            .iter()
            .map(|f| f.response_identifier())
            .collect();
        let labels = trial_files
            .iter()
            .map(|f| {
                format!(
                    "tc={},tm={},sv={}",
                    f.env.temp_cmos_c, f.env.temp_mem_c, f.env.supply_v
                )
            })
            .collect();
        reliability_samples.push(ReliabilitySample::with_labels(
            rf.response_identifier(),
            trials_bits,
            labels,
        )?);
    }

    let n_stages = chip_files
        .first()
        .or(ref_file.as_ref())
        .and_then(|f| f.rows.first().map(|r| r.challenge.len()))
        .unwrap_or(0);
    let population = TopologyPopulation {
        matrix,
        reliability: reliability_samples,
        size_bits: n_stages,
        challenge_count,
        metastable_bits: metastable,
        total_bits: total,
        config_hash: Some(config.hash_hex()),
    };
    let reports = table4_report(&[(topology_name.clone(), population)])?;
    let report = &reports[0];

    let seed = config.get_u64("mc.seed")?;
    let mut text = header_stanza("metrics-v1", &config.hash_hex(), seed);
    text.push_str(&render_table(&reports));
    if let Some(meta) = &report.metastability_rate {
        text.push_str(&format!("metastability rate (%): {meta}\n"));
    }
    if let Some(u) = &report.mean_uniformity {
        text.push_str(&format!("mean uniformity (%): {u}\n"));
    }
    text.push_str(&format!(
        "k={} chips, m={} trials, {} challenges, config={}\n",
        report.k_chips,
        report.m_trials,
        report.challenge_count,
        config.hash_hex()
    ));

    let mut kv_lines = report.to_kv_lines("metrics");
    if config.get_bool("metrics.per_challenge")? && chip_files.len() >= 2 {
        // Optional per-challenge uniqueness breakdown.
        for (idx, _) in chip_files[0].rows.iter().enumerate() {
            let rows: Vec<Vec<bool>> = chip_files
                .iter()
                .map(|f| f.rows[idx].response.chars().map(|c| c == '1').collect())
                .collect();
            let m = ResponseMatrix::new(rows, format!("challenge{idx}"))?;
            let u = pufbench_core::metrics::uniqueness(&m)?;
            kv_lines.push(format!("metrics.per_challenge.{idx}.uniqueness_pct={u}"));
        }
    }
    let mut kv_text = header_stanza("metrics-v1", &config.hash_hex(), seed);
    kv_text.push_str(&kv_lines.join("\n"));
    kv_text.push('\n');

    let dir = out_dir(config)?;
    let text_path = dir.join("metrics_report.txt");
    let kv_path = dir.join("metrics_report.kv");
    write_atomic(&text_path, &text)?;
    write_atomic(&kv_path, &kv_text)?;
    Ok(MetricsOutputs {
        text_path,
        kv_path,
        table_text: text,
    })
}

/// Reliability-versus-axis sweep of a single sampled instance, relative to
/// the configured nominal environment.
pub fn cmd_sweep(config: &ExperimentConfig) -> Result<PathBuf> {
    let mc = config.mc_config()?;
    let axis = config.sweep_axis()?;
    let points = config.sweep_points()?;
    let inst = sample_instance(&mc.design, &mc.variation, &derive_stream(mc.master_seed, 0))?;
    let challenges = mc.challenge_list()?;
    let base = config.environment()?;
    let envs = environment_sweep(&base, axis, &points)?;

    let reference = evaluate_crp_set(&inst, &challenges, &base)?;
    let ref_bits: Vec<bool> = reference
        .records
        .iter()
        .flat_map(|r| r.word.bits.iter().map(|b| b.logic))
        .collect();

    let mut rows = Vec::with_capacity(points.len());
    for (point, env) in points.iter().zip(&envs) {
        let trial = evaluate_crp_set(&inst, &challenges, env)?;
        let trial_bits: Vec<bool> = trial
            .records
            .iter()
            .flat_map(|r| r.word.bits.iter().map(|b| b.logic))
            .collect();
        let flips = hamming_distance(&ref_bits, &trial_bits)?;
        let sample = ReliabilitySample::new(ref_bits.clone(), vec![trial_bits])?;
        let (intra, rel) = pufbench_core::metrics::reliability(&sample)?;
        rows.push((*point, intra, rel, flips));
    }

    let dir = out_dir(config)?;
    let path = dir.join(format!("sweep_{}.csv", axis.name()));
    write_atomic(
        &path,
        &render_sweep(&config.hash_hex(), mc.master_seed, axis.name(), &rows),
    )?;
    Ok(path)
}

/// Four-column end-to-end report (see [`pufbench_core::report`]).
pub fn cmd_report(config: &ExperimentConfig) -> Result<ReportOutput> {
    let dir = out_dir(config)?.join("report");
    Ok(generate_report(config, &dir)?)
}
