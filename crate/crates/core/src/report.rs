//! End-to-end report generation.
//!
//! [`generate_report`] reproduces the full evaluation pipeline for four
//! standard populations — a CMOS-only profile plus the three memristor
//! topologies — and renders a column-per-topology table with Size,
//! Reliability and Uniqueness rows. Every population's CRP data is written
//! to disk first and the metrics are computed from the re-read files, so
//! each cell is traceable to concrete CRP files via the column's config
//! hash.

use crate::config::ExperimentConfig;
use crate::crpfile::{header_stanza, write_atomic, CrpFile};
use crate::metrics::{
    render_table, table4_report, MetricsReport, ReliabilitySample, ResponseMatrix,
    TopologyPopulation,
};
use crate::montecarlo::{run_mc, ChallengeSource, McConfig};
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

/// One rendered report column.
#[derive(Debug, Clone)]
pub struct ReportColumn {
    pub display_name: String,
    pub dir_name: String,
    pub config_hash: String,
    pub crp_files: usize,
}

/// Output of [`generate_report`].
#[derive(Debug, Clone)]
pub struct ReportOutput {
    pub table_text: String,
    pub kv_text: String,
    pub table_path: PathBuf,
    pub kv_path: PathBuf,
    pub columns: Vec<ReportColumn>,
    pub reports: Vec<MetricsReport>,
}

/// (display name, directory name, presets, extra key overrides).
type ColumnSpec = (
    &'static str,
    &'static str,
    Vec<&'static str>,
    Vec<(&'static str, &'static str)>,
);

/// The four standard report columns.
fn standard_columns() -> Vec<ColumnSpec> {
    vec![
        (
            "CMOS",
            "cmos",
            vec!["cmos-shape-defaults", "1res_1T1M"],
            vec![("topology.n_stages", "16")],
        ),
        (
            "Memristor (1res_1T1M)",
            "1res_1T1M",
            vec!["paper-shape-defaults", "1res_1T1M"],
            vec![],
        ),
        (
            "Memristor (4res_1T1M_2Stage)",
            "4res_1T1M_2Stage",
            vec!["paper-shape-defaults", "4res_1T1M_2Stage"],
            vec![],
        ),
        (
            "Memristor (4res_1T1M_4Stage)",
            "4res_1T1M_4Stage",
            vec!["paper-shape-defaults", "4res_1T1M_4Stage"],
            vec![],
        ),
    ]
}

struct ColumnData {
    display_name: String,
    dir_name: String,
    config_hash: String,
    population: TopologyPopulation,
    crp_files: usize,
}

fn run_column(
    config: &ExperimentConfig,
    display_name: &str,
    dir_name: &str,
    out_dir: &Path,
) -> Result<ColumnData> {
    let hash = config.hash_hex();
    let k = config.get_usize("metrics.report_samples")?;
    if k < 2 {
        return Err(Error::config("metrics.report_samples must be >= 2"));
    }
    let rel_chips = config.get_usize("metrics.report_rel_chips")?.min(k).max(1);
    let design = config.design()?;
    let n = design.n_stages;
    // Exhaustive challenges up to 8 stages, a seeded subsample beyond.
    let challenges = if n <= 8 {
        ChallengeSource::Exhaustive
    } else {
        ChallengeSource::Sampled {
            count: config.get_usize("metrics.report_challenge_count")?,
        }
    };
    let base_env = config.environment()?;
    let mut environments = vec![base_env];
    environments.extend(config.trial_environments()?);
    let mc = McConfig {
        n_samples: k,
        master_seed: config.get_u64("mc.seed")?,
        design,
        variation: config.variation_spec()?,
        challenges,
        environments,
        config_hash: config.hash_u64(),
    };
    let samples = run_mc(&mc)?;
    let topology_name = config.get("topology.preset")?.to_string();
    let window = config.get_f64("topology.metastability_window_s")?;

    let column_dir = out_dir.join(dir_name);
    std::fs::create_dir_all(&column_dir)?;
    let mut crp_files = 0usize;

    // Persist the nominal population and the trial sets for the
    // reliability chips, then compute everything from the files.
    let mut nominal_paths = Vec::with_capacity(k);
    for inst in &samples.per_instance {
        let path = column_dir.join(format!("chip{:03}.crp", inst.instance_index));
        CrpFile::from_crp_set(
            &inst.crps[0],
            &hash,
            samples.master_seed,
            &topology_name,
            &samples.environments[0],
        )
        .write(&path)?;
        nominal_paths.push(path);
        crp_files += 1;
    }
    let mut trial_paths: Vec<Vec<PathBuf>> = Vec::new();
    for inst in samples.per_instance.iter().take(rel_chips) {
        let mut chip_trials = Vec::new();
        for (e, crp) in inst.crps.iter().enumerate().skip(1) {
            let path = column_dir.join(format!(
                "chip{:03}_trial{:02}.crp",
                inst.instance_index,
                e - 1
            ));
            CrpFile::from_crp_set(
                crp,
                &hash,
                samples.master_seed,
                &topology_name,
                &samples.environments[e],
            )
            .write(&path)?;
            chip_trials.push(path);
            crp_files += 1;
        }
        trial_paths.push(chip_trials);
    }

    let mut rows = Vec::with_capacity(k);
    let mut metastable_bits = 0u64;
    let mut total_bits = 0u64;
    let mut challenge_column: Option<Vec<String>> = None;
    for path in &nominal_paths {
        let file = CrpFile::read(path)?;
        let column: Vec<String> = file
            .challenge_column()
            .iter()
            .map(|s| s.to_string())
            .collect();
        match &challenge_column {
            None => challenge_column = Some(column),
            Some(expected) if *expected != column => {
                return Err(Error::Schema(format!(
                    "challenge set differs between chips in {dir_name}"
                )))
            }
            _ => {}
        }
        metastable_bits += file.metastable_bits(window);
        let id = file.response_identifier();
        total_bits += id.len() as u64;
        rows.push(id);
    }
    let challenge_count = challenge_column.as_ref().map(|c| c.len()).unwrap_or(0);
    let matrix = ResponseMatrix::new(rows, format!("{dir_name}:{hash}"))?;

    let mut reliability = Vec::with_capacity(trial_paths.len());
    for (chip, chip_trials) in trial_paths.iter().enumerate() {
        let reference = CrpFile::read(&nominal_paths[chip])?.response_identifier();
        let mut trials = Vec::with_capacity(chip_trials.len());
        let mut labels = Vec::with_capacity(chip_trials.len());
        for path in chip_trials {
            let file = CrpFile::read(path)?;
            trials.push(file.response_identifier());
            labels.push(format!(
                "tc={},tm={},sv={}",
                file.env.temp_cmos_c, file.env.temp_mem_c, file.env.supply_v
            ));
        }
        reliability.push(ReliabilitySample::with_labels(reference, trials, labels)?);
    }

    Ok(ColumnData {
        display_name: display_name.to_string(),
        dir_name: dir_name.to_string(),
        config_hash: hash,
        population: TopologyPopulation {
            matrix,
            reliability,
            size_bits: n,
            challenge_count,
            metastable_bits,
            total_bits,
            config_hash: None,
        },
        crp_files,
    })
}

/// Run the standard four-column report against a base configuration,
/// writing all CRP data plus `report.txt` and `report.kv` under `out_dir`.
pub fn generate_report(base: &ExperimentConfig, out_dir: &Path) -> Result<ReportOutput> {
    std::fs::create_dir_all(out_dir)?;
    let mut columns = Vec::new();
    for (display, dir_name, presets, extra) in standard_columns() {
        let mut config = base.clone();
        for preset in presets {
            config.apply_preset(preset)?;
        }
        for (key, value) in extra {
            config.set(key, value)?;
        }
        let mut data = run_column(&config, display, dir_name, out_dir)?;
        data.population.config_hash = Some(data.config_hash.clone());
        columns.push(data);
    }

    let populations: Vec<(String, TopologyPopulation)> = columns
        .iter()
        .map(|c| (c.display_name.clone(), c.population.clone()))
        .collect();
    let reports = table4_report(&populations)?;

    let seed = base.get_u64("mc.seed")?;
    let mut table_text = header_stanza("report-v1", &base.hash_hex(), seed);
    table_text.push_str(&render_table(&reports));
    table_text.push('\n');
    for (c, report) in columns.iter().zip(&reports) {
        writeln!(
            table_text,
            "column {}: config={} dir={} k={} m={} challenges={}",
            c.display_name,
            c.config_hash,
            c.dir_name,
            report.k_chips,
            report.m_trials,
            report.challenge_count,
        )
        .unwrap();
    }
    table_text.push_str(
        "std convention: population; identifiers concatenate responses over the challenge set\n",
    );

    let mut kv_text = header_stanza("report-v1", &base.hash_hex(), seed);
    for (c, report) in columns.iter().zip(&reports) {
        for line in report.to_kv_lines(&c.dir_name) {
            kv_text.push_str(&line);
            kv_text.push('\n');
        }
    }

    let table_path = out_dir.join("report.txt");
    let kv_path = out_dir.join("report.kv");
    write_atomic(&table_path, &table_text)?;
    write_atomic(&kv_path, &kv_text)?;

    Ok(ReportOutput {
        table_text,
        kv_text,
        table_path,
        kv_path,
        columns: columns
            .into_iter()
            .map(|c| ReportColumn {
                display_name: c.display_name,
                dir_name: c.dir_name,
                config_hash: c.config_hash,
                crp_files: c.crp_files,
            })
            .collect(),
        reports,
    })
}
