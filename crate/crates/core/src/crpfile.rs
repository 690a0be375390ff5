//! Dataset persistence.
//!
//! All output files are plain text with `#`-prefixed header lines carrying
//! the schema version, the configuration fingerprint and the seed, so any
//! number in any report can be traced back to the run that produced it.
//! Writes go through a temp-file-and-rename so failures never leave
//! partial files behind.
//!
//! The CRP format (`crp-v1`) stores one record per line:
//! `challenge_bits,response_bits,margins_ns`. Bit strings are MSB-first
//! (stage n−1 first, highest tap first) and margins are semicolon-separated
//! nanoseconds with six decimals, which keeps serialization byte-exact
//! across re-runs.

use crate::apuf::{Challenge, CrpSet, ResponseBit, ResponseWord};
use crate::montecarlo::SummaryStats;
use crate::variation::Environment;
use crate::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

/// Write `content` to `path` atomically (temp file + rename).
pub fn write_atomic(path: &Path, content: &str) -> Result<()> {
    let tmp = path.with_extension(match path.extension() {
        Some(ext) => format!("{}.tmp", ext.to_string_lossy()),
        None => "tmp".to_string(),
    });
    std::fs::write(&tmp, content)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn ns(seconds: f64) -> f64 {
    seconds * 1.0e9
}

/// Quantize a margin to the file resolution (six decimals of a nanosecond)
/// so the in-memory value equals what a reader will parse back.
fn quantize_margin_ns(margin_s: f64) -> f64 {
    format!("{:.6}", ns(margin_s)).parse().unwrap()
}

/// One persisted challenge-response record.
#[derive(Debug, Clone, PartialEq)]
pub struct CrpRow {
    /// MSB-first challenge bits.
    pub challenge: String,
    /// MSB-first response bits.
    pub response: String,
    /// Margins in ns, one per response bit, in the same MSB-first order as
    /// `response`.
    pub margins_ns: Vec<f64>,
}

/// The in-memory model of a `crp-v1` file.
#[derive(Debug, Clone, PartialEq)]
pub struct CrpFile {
    pub config_hash: String,
    pub seed: u64,
    pub topology: String,
    pub env: Environment,
    pub rows: Vec<CrpRow>,
}

impl CrpFile {
    pub fn from_crp_set(
        set: &CrpSet,
        config_hash: impl Into<String>,
        seed: u64,
        topology: impl Into<String>,
        env: &Environment,
    ) -> CrpFile {
        let rows = set
            .records
            .iter()
            .map(|rec| CrpRow {
                challenge: rec.challenge.to_bit_string(),
                response: rec.word.to_bit_string(),
                margins_ns: rec
                    .word
                    .margins_s
                    .iter()
                    .rev()
                    .map(|&m| quantize_margin_ns(m))
                    .collect(),
            })
            .collect();
        CrpFile {
            config_hash: config_hash.into(),
            seed,
            topology: topology.into(),
            env: *env,
            rows,
        }
    }

    /// Rebuild a [`CrpSet`]; the metastable flag is recomputed from the
    /// stored margins against `metastability_window_s`.
    pub fn to_crp_set(&self, metastability_window_s: f64) -> Result<CrpSet> {
        let mut records = Vec::with_capacity(self.rows.len());
        let window_ns = ns(metastability_window_s);
        for row in &self.rows {
            let challenge = Challenge::from_bit_string(&row.challenge)?;
            if row.response.len() != row.margins_ns.len() {
                return Err(Error::Schema(format!(
                    "row '{}': {} response bits but {} margins",
                    row.challenge,
                    row.response.len(),
                    row.margins_ns.len()
                )));
            }
            // File bit strings and margins are MSB-first; in-memory words
            // are in tap order (ascending).
            let bits: Vec<ResponseBit> = row
                .response
                .chars()
                .rev()
                .zip(row.margins_ns.iter().rev())
                .map(|(ch, &m)| {
                    Ok(ResponseBit {
                        logic: match ch {
                            '1' => true,
                            '0' => false,
                            other => {
                                return Err(Error::Schema(format!(
                                    "invalid response character '{other}'"
                                )))
                            }
                        },
                        metastable: m.abs() < window_ns,
                    })
                })
                .collect::<Result<_>>()?;
            let margins_s = row.margins_ns.iter().rev().map(|&m| m * 1.0e-9).collect();
            records.push(crate::apuf::CrpRecord {
                challenge,
                word: ResponseWord { bits, margins_s },
            });
        }
        let first = records
            .first()
            .ok_or(Error::Empty("CRP file has no records"))?;
        Ok(CrpSet {
            n_challenge_bits: first.challenge.len(),
            n_response_bits: first.word.bits.len(),
            records,
            flagged: Vec::new(),
        })
    }

    /// Concatenated response bits over all rows, MSB-first within each row —
    /// the chip identifier used for multi-challenge uniqueness.
    pub fn response_identifier(&self) -> Vec<bool> {
        self.rows
            .iter()
            .flat_map(|row| row.response.chars().map(|c| c == '1'))
            .collect()
    }

    /// The ordered challenge column, used to check that chips answered the
    /// same challenge set.
    pub fn challenge_column(&self) -> Vec<&str> {
        self.rows.iter().map(|r| r.challenge.as_str()).collect()
    }

    /// Count of margins within the metastability window.
    pub fn metastable_bits(&self, metastability_window_s: f64) -> u64 {
        let window_ns = ns(metastability_window_s);
        self.rows
            .iter()
            .flat_map(|r| r.margins_ns.iter())
            .filter(|m| m.abs() < window_ns)
            .count() as u64
    }

    pub fn serialize(&self) -> String {
        let mut out = String::new();
        writeln!(out, "# schema=crp-v1").unwrap();
        writeln!(out, "# config={}", self.config_hash).unwrap();
        writeln!(out, "# seed={}", self.seed).unwrap();
        writeln!(out, "# topology={}", self.topology).unwrap();
        writeln!(
            out,
            "# env={},{},{}",
            self.env.temp_cmos_c, self.env.temp_mem_c, self.env.supply_v
        )
        .unwrap();
        writeln!(out, "challenge_bits,response_bits,margins_ns").unwrap();
        for row in &self.rows {
            let margins = row
                .margins_ns
                .iter()
                .map(|m| format!("{m:.6}"))
                .collect::<Vec<_>>()
                .join(";");
            writeln!(out, "{},{},{}", row.challenge, row.response, margins).unwrap();
        }
        out
    }

    pub fn parse(text: &str) -> Result<CrpFile> {
        let mut lines = text.lines().enumerate();
        let mut expect_header = |prefix: &str| -> Result<String> {
            let (no, line) = lines
                .next()
                .ok_or(Error::Schema("unexpected end of CRP file header".into()))?;
            line.strip_prefix(prefix)
                .map(|rest| rest.to_string())
                .ok_or(Error::Parse {
                    line: no + 1,
                    msg: format!("expected '{prefix}…', got '{line}'"),
                })
        };
        let schema = expect_header("# schema=")?;
        if schema != "crp-v1" {
            return Err(Error::Schema(format!("unsupported schema '{schema}'")));
        }
        let config_hash = expect_header("# config=")?;
        let seed = expect_header("# seed=")?
            .parse::<u64>()
            .map_err(|_| Error::Schema("seed header is not a u64".into()))?;
        let topology = expect_header("# topology=")?;
        let env_raw = expect_header("# env=")?;
        let env_parts: Vec<&str> = env_raw.split(',').collect();
        if env_parts.len() != 3 {
            return Err(Error::Schema(format!(
                "env header '{env_raw}' needs 3 numbers"
            )));
        }
        let parse_f = |s: &str| -> Result<f64> {
            s.parse::<f64>()
                .map_err(|_| Error::Schema(format!("bad env number '{s}'")))
        };
        let env = Environment {
            temp_cmos_c: parse_f(env_parts[0])?,
            temp_mem_c: parse_f(env_parts[1])?,
            supply_v: parse_f(env_parts[2])?,
        };
        let (no, columns) = lines
            .next()
            .ok_or(Error::Schema("missing column header".into()))?;
        if columns != "challenge_bits,response_bits,margins_ns" {
            return Err(Error::Parse {
                line: no + 1,
                msg: format!("unexpected column header '{columns}'"),
            });
        }
        let mut rows = Vec::new();
        let mut widths: Option<(usize, usize)> = None;
        for (no, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 3 {
                return Err(Error::Parse {
                    line: no + 1,
                    msg: format!("expected 3 comma-separated fields, got {}", parts.len()),
                });
            }
            let margins_ns = parts[2]
                .split(';')
                .map(|m| {
                    m.parse::<f64>().map_err(|_| Error::Parse {
                        line: no + 1,
                        msg: format!("bad margin '{m}'"),
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            let row = CrpRow {
                challenge: parts[0].to_string(),
                response: parts[1].to_string(),
                margins_ns,
            };
            let w = (row.challenge.len(), row.response.len());
            match widths {
                None => widths = Some(w),
                Some(expected) if expected != w => {
                    return Err(Error::Parse {
                        line: no + 1,
                        msg: format!("ragged row: widths {w:?} versus {expected:?}"),
                    })
                }
                _ => {}
            }
            rows.push(row);
        }
        Ok(CrpFile {
            config_hash,
            seed,
            topology,
            env,
            rows,
        })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        write_atomic(path, &self.serialize())
    }

    pub fn read(path: &Path) -> Result<CrpFile> {
        Self::parse(&std::fs::read_to_string(path)?)
    }
}

/// Render the stats sidecar (`stats-v1`): per-bit mean/std and histogram of
/// the analog margins, nanoseconds throughout. The per-bit `hist_total`
/// footer lines restate the histogram mass so readers can check
/// conservation against `points_per_bit`.
pub fn render_stats(stats: &SummaryStats, config_hash: &str, seed: u64) -> Result<String> {
    let mut out = String::new();
    writeln!(out, "# schema=stats-v1").unwrap();
    writeln!(out, "# config={config_hash}").unwrap();
    writeln!(out, "# seed={seed}").unwrap();
    writeln!(out, "# std_convention=population").unwrap();
    writeln!(out, "points_per_bit = {}", stats.points_per_bit).unwrap();
    writeln!(out, "bits = {}", stats.per_bit.len()).unwrap();
    for (i, bit) in stats.per_bit.iter().enumerate() {
        writeln!(out, "bit{i}.mean_ns = {}", ns(bit.mean)).unwrap();
        writeln!(out, "bit{i}.std_ns = {}", ns(bit.std)).unwrap();
        let edges = bit
            .histogram
            .edges
            .iter()
            .map(|e| format!("{}", ns(*e)))
            .collect::<Vec<_>>()
            .join(";");
        let counts = bit
            .histogram
            .counts
            .iter()
            .map(|c| c.to_string())
            .collect::<Vec<_>>()
            .join(";");
        writeln!(out, "bit{i}.hist_edges_ns = {edges}").unwrap();
        writeln!(out, "bit{i}.hist_counts = {counts}").unwrap();
        let total = bit.histogram.total();
        if total != stats.points_per_bit as u64 {
            return Err(Error::Schema(format!(
                "histogram of bit {i} holds {total} points, expected {}",
                stats.points_per_bit
            )));
        }
        writeln!(out, "bit{i}.hist_total = {total}").unwrap();
    }
    Ok(out)
}

/// Render a reliability-versus-axis sweep table (`sweep-v1`).
pub fn render_sweep(
    config_hash: &str,
    seed: u64,
    axis: &str,
    rows: &[(f64, crate::metrics::Percent, crate::metrics::Percent, u64)],
) -> String {
    let mut out = String::new();
    writeln!(out, "# schema=sweep-v1").unwrap();
    writeln!(out, "# config={config_hash}").unwrap();
    writeln!(out, "# seed={seed}").unwrap();
    writeln!(out, "# axis={axis}").unwrap();
    writeln!(out, "axis_value,intra_hd_pct,reliability_pct,flipped_bits").unwrap();
    for (value, intra, rel, flips) in rows {
        writeln!(
            out,
            "{value},{},{},{flips}",
            intra.format_2dp(),
            rel.format_2dp()
        )
        .unwrap();
    }
    out
}

/// Render a device I-V sweep table (`iv-v1`).
pub fn render_iv(config_hash: &str, seed: u64, rows: &[(f64, f64, f64, f64)]) -> String {
    let mut out = String::new();
    writeln!(out, "# schema=iv-v1").unwrap();
    writeln!(out, "# config={config_hash}").unwrap();
    writeln!(out, "# seed={seed}").unwrap();
    writeln!(out, "v,i_a,g_nm,r_nm").unwrap();
    for (v, i, g, r) in rows {
        writeln!(out, "{v:.6},{i:.6e},{g},{r}").unwrap();
    }
    out
}

/// The `# schema=…`, `# config=…`, `# seed=…` header stanza shared by the
/// report-style text outputs.
pub fn header_stanza(schema: &str, config_hash: &str, seed: u64) -> String {
    format!("# schema={schema}\n# config={config_hash}\n# seed={seed}\n")
}
