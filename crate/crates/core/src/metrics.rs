//! PUF quality metrics.
//!
//! Uniqueness, reliability, uniformity and bit-aliasing are ratios of bit
//! counts, so they are computed exactly as integer rationals and only
//! rendered to decimals at the end. [`Percent`] keeps the numerator and
//! denominator in `u128`, which is exact for populations up to 10⁶ chips,
//! bits and trials.

use crate::{Error, Result};
use std::collections::BTreeMap;
use std::fmt;

// ---------------------------------------------------------------------------
// Exact percentages
// ---------------------------------------------------------------------------

/// An exact percentage `num/den` (already scaled: `num/den` is the value in
/// percent).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Percent {
    num: u128,
    den: u128,
}

impl Percent {
    pub fn new(num: u128, den: u128) -> Percent {
        assert!(den != 0, "percent with zero denominator");
        Percent { num, den }
    }

    pub fn zero() -> Percent {
        Percent { num: 0, den: 1 }
    }

    /// `100 − self`, saturating at zero.
    pub fn complement(&self) -> Percent {
        let hundred = 100u128 * self.den;
        Percent {
            num: hundred.saturating_sub(self.num),
            den: self.den,
        }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    /// Exact comparison against an integer percentage.
    pub fn eq_int(&self, pct: u128) -> bool {
        self.num == pct * self.den
    }

    /// Render with two decimals, rounding half away from zero in exact
    /// integer arithmetic.
    pub fn format_2dp(&self) -> String {
        let scaled = self.num * 100; // percent × 100
        let rounded = (scaled + self.den / 2) / self.den;
        format!("{}.{:02}", rounded / 100, rounded % 100)
    }
}

impl fmt::Display for Percent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.format_2dp())
    }
}

// ---------------------------------------------------------------------------
// Core operations
// ---------------------------------------------------------------------------

/// Number of differing positions between two equal-length bit vectors.
pub fn hamming_distance(a: &[bool], b: &[bool]) -> Result<u64> {
    if a.len() != b.len() {
        return Err(Error::Dimension {
            expected: a.len(),
            got: b.len(),
        });
    }
    Ok(a.iter().zip(b).filter(|(x, y)| x != y).count() as u64)
}

/// Responses of `k` chips to the same challenge set, one row per chip.
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseMatrix {
    rows: Vec<Vec<bool>>,
    /// Identifier of the challenge set the rows answer.
    pub challenge_id: String,
}

impl ResponseMatrix {
    pub fn new(rows: Vec<Vec<bool>>, challenge_id: impl Into<String>) -> Result<Self> {
        if rows.is_empty() {
            return Err(Error::Empty("response matrix rows"));
        }
        let n = rows[0].len();
        if n == 0 {
            return Err(Error::Empty("response bits"));
        }
        if !rows.iter().all(|r| r.len() == n) {
            return Err(Error::domain(
                "response rows must have uniform length".to_string(),
            ));
        }
        Ok(ResponseMatrix {
            rows,
            challenge_id: challenge_id.into(),
        })
    }

    pub fn k(&self) -> usize {
        self.rows.len()
    }

    pub fn n(&self) -> usize {
        self.rows[0].len()
    }

    pub fn rows(&self) -> &[Vec<bool>] {
        &self.rows
    }
}

/// Average inter-chip Hamming distance over all chip pairs, as a
/// percentage of the response width:
/// `(2 / (k(k−1))) · Σ_{i<j} HD(Rᵢ, Rⱼ)/n · 100`.
pub fn uniqueness(m: &ResponseMatrix) -> Result<Percent> {
    let k = m.k();
    if k < 2 {
        return Err(Error::domain(format!(
            "uniqueness needs k >= 2 chips, got {k}"
        )));
    }
    let mut total: u128 = 0;
    for i in 0..k {
        for j in (i + 1)..k {
            total += hamming_distance(&m.rows[i], &m.rows[j])? as u128;
        }
    }
    let den = (k as u128) * (k as u128 - 1) * m.n() as u128;
    Ok(Percent::new(200 * total, den))
}

/// A reference response plus re-measurements under perturbed conditions.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilitySample {
    pub reference: Vec<bool>,
    pub trials: Vec<Vec<bool>>,
    /// One label per trial (environment descriptors).
    pub trial_labels: Vec<String>,
}

impl ReliabilitySample {
    pub fn new(reference: Vec<bool>, trials: Vec<Vec<bool>>) -> Result<Self> {
        let labels = (0..trials.len()).map(|i| format!("trial{i}")).collect();
        Self::with_labels(reference, trials, labels)
    }

    pub fn with_labels(
        reference: Vec<bool>,
        trials: Vec<Vec<bool>>,
        trial_labels: Vec<String>,
    ) -> Result<Self> {
        if reference.is_empty() {
            return Err(Error::Empty("reference response"));
        }
        if trials.is_empty() {
            return Err(Error::Empty("reliability trials"));
        }
        if trial_labels.len() != trials.len() {
            return Err(Error::Dimension {
                expected: trials.len(),
                got: trial_labels.len(),
            });
        }
        for t in &trials {
            if t.len() != reference.len() {
                return Err(Error::Dimension {
                    expected: reference.len(),
                    got: t.len(),
                });
            }
        }
        Ok(ReliabilitySample {
            reference,
            trials,
            trial_labels,
        })
    }
}

/// Average intra-chip HD percentage and its complement:
/// `intra = (1/m) Σ_t HD(ref, trial_t)/n · 100`, `reliability = 100 − intra`.
pub fn reliability(sample: &ReliabilitySample) -> Result<(Percent, Percent)> {
    let n = sample.reference.len() as u128;
    let m = sample.trials.len() as u128;
    let mut total: u128 = 0;
    for t in &sample.trials {
        total += hamming_distance(&sample.reference, t)? as u128;
    }
    let intra = Percent::new(100 * total, m * n);
    let rel = intra.complement();
    Ok((intra, rel))
}

/// Fraction of ones in a response, in percent.
pub fn uniformity(bits: &[bool]) -> Result<Percent> {
    if bits.is_empty() {
        return Err(Error::Empty("uniformity input"));
    }
    let ones = bits.iter().filter(|&&b| b).count() as u128;
    Ok(Percent::new(100 * ones, bits.len() as u128))
}

/// Per-bit-position percentage of chips producing a one.
pub fn bit_aliasing(m: &ResponseMatrix) -> Result<Vec<Percent>> {
    let k = m.k();
    if k < 2 {
        return Err(Error::domain(format!(
            "bit-aliasing needs k >= 2 chips, got {k}"
        )));
    }
    Ok((0..m.n())
        .map(|pos| {
            let ones = m.rows.iter().filter(|row| row[pos]).count() as u128;
            Percent::new(100 * ones, k as u128)
        })
        .collect())
}

// ---------------------------------------------------------------------------
// Report assembly
// ---------------------------------------------------------------------------

/// The metrics of one topology population, with the sample counts that
/// produced them.
#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub topology: String,
    /// Challenge width of the design ("Size" in the rendered table).
    pub size_bits: usize,
    pub uniqueness: Option<Percent>,
    pub reliability: Option<Percent>,
    pub intra_hd: Option<Percent>,
    pub mean_uniformity: Option<Percent>,
    pub bit_aliasing: Vec<Percent>,
    /// Fraction of evaluated bits that were flagged metastable.
    pub metastability_rate: Option<Percent>,
    pub k_chips: usize,
    pub n_response_bits: usize,
    pub m_trials: usize,
    pub challenge_count: usize,
    /// Hash of the configuration that produced the underlying CRP data.
    pub config_hash: Option<String>,
}

impl MetricsReport {
    pub fn validate(&self) -> Result<()> {
        for p in [
            &self.uniqueness,
            &self.reliability,
            &self.intra_hd,
            &self.mean_uniformity,
            &self.metastability_rate,
        ]
        .into_iter()
        .flatten()
        {
            if p.value() < 0.0 || p.value() > 100.0 {
                return Err(Error::domain(format!(
                    "percentage {} out of [0, 100]",
                    p.value()
                )));
            }
        }
        Ok(())
    }

    /// Flat machine-readable key-value lines under a key prefix (the
    /// topology name is free-form display text, so callers pass a
    /// path-safe prefix).
    pub fn to_kv_lines(&self, key_prefix: &str) -> Vec<String> {
        let mut out = Vec::new();
        let t = key_prefix;
        out.push(format!("{t}.size_bits={}", self.size_bits));
        out.push(format!("{t}.k_chips={}", self.k_chips));
        out.push(format!("{t}.n_response_bits={}", self.n_response_bits));
        out.push(format!("{t}.m_trials={}", self.m_trials));
        out.push(format!("{t}.challenge_count={}", self.challenge_count));
        if let Some(u) = &self.uniqueness {
            out.push(format!("{t}.uniqueness_pct={u}"));
        }
        if let Some(r) = &self.reliability {
            out.push(format!("{t}.reliability_pct={r}"));
        }
        if let Some(i) = &self.intra_hd {
            out.push(format!("{t}.intra_hd_pct={i}"));
        }
        if let Some(u) = &self.mean_uniformity {
            out.push(format!("{t}.uniformity_pct={u}"));
        }
        if let Some(m) = &self.metastability_rate {
            out.push(format!("{t}.metastability_rate_pct={m}"));
        }
        for (pos, p) in self.bit_aliasing.iter().enumerate() {
            out.push(format!("{t}.bit_aliasing.{pos}={p}"));
        }
        if let Some(h) = &self.config_hash {
            out.push(format!("{t}.config_hash={h}"));
        }
        out
    }
}

/// Input to [`table4_report`]: the response matrix of a population plus the
/// per-chip reliability samples.
#[derive(Debug, Clone)]
pub struct TopologyPopulation {
    pub matrix: ResponseMatrix,
    pub reliability: Vec<ReliabilitySample>,
    pub size_bits: usize,
    pub challenge_count: usize,
    pub metastable_bits: u64,
    pub total_bits: u64,
    pub config_hash: Option<String>,
}

/// Compute one [`MetricsReport`] per topology, preserving input order.
///
/// Reliability is the mean over the population's per-chip samples;
/// uniqueness comes from the concatenated response identifiers in the
/// matrix.
pub fn table4_report(populations: &[(String, TopologyPopulation)]) -> Result<Vec<MetricsReport>> {
    if populations.is_empty() {
        return Err(Error::Empty("report populations"));
    }
    let mut reports = Vec::with_capacity(populations.len());
    for (name, pop) in populations {
        let uniq = if pop.matrix.k() >= 2 {
            Some(uniqueness(&pop.matrix)?)
        } else {
            None
        };
        // Mean intra-HD over chips, kept exact by summing HD counts over
        // all (chip, trial) pairs with a common denominator.
        let (intra, rel) = if pop.reliability.is_empty() {
            (None, None)
        } else {
            let mut total: u128 = 0;
            let mut weight: u128 = 0;
            for s in &pop.reliability {
                for t in &s.trials {
                    total += hamming_distance(&s.reference, t)? as u128;
                    weight += s.reference.len() as u128;
                }
            }
            let intra = Percent::new(100 * total, weight);
            let rel = intra.complement();
            (Some(intra), Some(rel))
        };
        let mean_uniformity = {
            let mut ones: u128 = 0;
            let mut bits: u128 = 0;
            for row in pop.matrix.rows() {
                ones += row.iter().filter(|&&b| b).count() as u128;
                bits += row.len() as u128;
            }
            Some(Percent::new(100 * ones, bits))
        };
        let aliasing = if pop.matrix.k() >= 2 {
            bit_aliasing(&pop.matrix)?
        } else {
            Vec::new()
        };
        let metastability_rate = if pop.total_bits > 0 {
            Some(Percent::new(
                100 * pop.metastable_bits as u128,
                pop.total_bits as u128,
            ))
        } else {
            None
        };
        let m_trials = pop.reliability.first().map(|s| s.trials.len()).unwrap_or(0);
        let report = MetricsReport {
            topology: name.clone(),
            size_bits: pop.size_bits,
            uniqueness: uniq,
            reliability: rel,
            intra_hd: intra,
            mean_uniformity,
            bit_aliasing: aliasing,
            metastability_rate,
            k_chips: pop.matrix.k(),
            n_response_bits: pop.matrix.n(),
            m_trials,
            challenge_count: pop.challenge_count,
            config_hash: pop.config_hash.clone(),
        };
        report.validate()?;
        reports.push(report);
    }
    Ok(reports)
}

/// Render reports as a column-per-topology table with Size, Reliability and
/// Uniqueness rows.
pub fn render_table(reports: &[MetricsReport]) -> String {
    let mut widths: Vec<usize> = reports.iter().map(|r| r.topology.len().max(10)).collect();
    let size_cells: Vec<String> = reports
        .iter()
        .map(|r| format!("{} bits", r.size_bits))
        .collect();
    let rel_cells: Vec<String> = reports
        .iter()
        .map(|r| {
            r.reliability
                .map(|p| p.format_2dp())
                .unwrap_or_else(|| "-".into())
        })
        .collect();
    let uniq_cells: Vec<String> = reports
        .iter()
        .map(|r| {
            r.uniqueness
                .map(|p| p.format_2dp())
                .unwrap_or_else(|| "-".into())
        })
        .collect();
    for (i, w) in widths.iter_mut().enumerate() {
        *w = (*w)
            .max(size_cells[i].len())
            .max(rel_cells[i].len())
            .max(uniq_cells[i].len());
    }
    let label_w = "Reliability (%)".len();
    let mut out = String::new();
    let mut line = format!("{:label_w$}", "");
    for (r, w) in reports.iter().zip(&widths) {
        line.push_str(&format!("  {:>w$}", r.topology));
    }
    out.push_str(line.trim_end());
    out.push('\n');
    for (label, cells) in [
        ("Size", &size_cells),
        ("Reliability (%)", &rel_cells),
        ("Uniqueness (%)", &uniq_cells),
    ] {
        let mut line = format!("{label:label_w$}");
        for (cell, w) in cells.iter().zip(&widths) {
            line.push_str(&format!("  {cell:>w$}"));
        }
        out.push_str(line.trim_end());
        out.push('\n');
    }
    out
}

/// Group chips' bit rows into a map keyed by chip identifier, preserving a
/// deterministic order. Convenience for CLI-side assembly.
pub fn ordered_rows(map: BTreeMap<String, Vec<bool>>) -> Vec<Vec<bool>> {
    map.into_values().collect()
}

// ---------------------------------------------------------------------------
