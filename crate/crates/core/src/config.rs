//! Flat key-value experiment configuration.
//!
//! A configuration is a map of dotted keys to string values. Every key has
//! a built-in default, unknown keys are rejected, and the canonical
//! serialization (sorted `key = value` lines, minus the `io.*` output
//! routing) is hashed into every output file so results stay traceable to
//! the exact configuration that produced them.
//!
//! Named presets overlay groups of keys: `table3-nominal` (device
//! nominals), `table1-nominal` (operating point), `paper-shape-defaults`
//! and `cmos-shape-defaults` (variation profiles), and the topology presets
//! `1res_1T1M`, `4res_1T1M_2Stage`, `4res_1T1M_4Stage`. Setting
//! `PUFBENCH_PRESET_DIR` makes `<dir>/<name>.cfg` take precedence over the
//! built-in preset of the same name.

use crate::apuf::{ApufDesign, EnvSensitivity, Topology};
use crate::device::{celsius_to_kelvin, ResetPulseTrain, StanfordParams};
use crate::montecarlo::{ChallengeSource, McConfig};
use crate::variation::{CornerTable, DeviceSigmas, EnvAxis, Environment, VariationSpec};
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::path::Path;

/// Environment variable overriding the preset search path.
pub const PRESET_DIR_ENV: &str = "PUFBENCH_PRESET_DIR";

/// 64-bit FNV-1a, the stable hash used for config fingerprints.
pub fn fnv1a64(data: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in data {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}

fn f(v: f64) -> String {
    format!("{v}")
}

/// All known keys with their default values. Defaults are rendered from
/// the domain types' `Default` impls so the two never drift apart.
fn default_entries() -> Vec<(String, String)> {
    let device = StanfordParams::default();
    let design = ApufDesign::default();
    let env_sens = EnvSensitivity::default();
    let reset = ResetPulseTrain::default();
    let variation = VariationSpec::default();
    let corner = CornerTable::default();
    let env = Environment::nominal();

    let pulses = reset
        .pulses
        .iter()
        .map(|(v, n)| format!("{v}:{n}"))
        .collect::<Vec<_>>()
        .join(";");
    let weights = variation
        .corner_weights
        .iter()
        .map(|w| f(*w))
        .collect::<Vec<_>>()
        .join(",");

    // device.*
    let mut e: Vec<(String, String)> = vec![("device.a0_nm".into(), f(device.a0))];
    e.push(("device.f0_hz".into(), f(device.f0)));
    e.push(("device.ea_ev".into(), f(device.ea)));
    e.push(("device.gamma0_nm".into(), f(device.gamma0)));
    e.push(("device.x_t_nm".into(), f(device.x_t)));
    e.push(("device.j0_a_per_m2".into(), f(device.j0)));
    e.push(("device.g_init_nm".into(), f(device.g_init)));
    e.push(("device.l_f_nm".into(), f(device.l_f)));
    e.push(("device.r_init_nm".into(), f(device.r_init)));
    e.push(("device.delta_g".into(), f(device.delta_g)));
    e.push(("device.delta_r".into(), f(device.delta_r)));
    e.push(("device.g_min_nm".into(), f(device.g_min)));
    e.push(("device.g_max_nm".into(), f(device.g_max)));
    e.push(("device.r_min_nm".into(), f(device.r_min)));
    e.push(("device.r_max_nm".into(), f(device.r_max)));
    e.push(("device.rho_f_ohm_nm".into(), f(device.rho_f)));
    e.push(("device.v0_v".into(), f(device.v0)));
    e.push(("device.v_read_v".into(), f(device.v_read)));
    e.push(("device.v_read_max_v".into(), f(device.v_read_max)));
    e.push(("device.reset_pulses".into(), pulses));
    e.push(("device.reset_dt_s".into(), f(reset.dt)));
    e.push(("device.reset_temp_c".into(), f(reset.t_k - 273.15)));
    e.push((
        "device.sweep_v_list".into(),
        "-2,-1.5,-1,-0.5,-0.2,0,0.2,0.5,1,1.5,2".into(),
    ));
    // topology.*
    e.push(("topology.preset".into(), "1res_1T1M".into()));
    e.push(("topology.n_stages".into(), design.n_stages.to_string()));
    e.push(("topology.c_drain_f".into(), f(design.c_drain)));
    e.push(("topology.r_on_switch_ohm".into(), f(design.r_on_switch)));
    e.push(("topology.kappa".into(), f(design.kappa)));
    e.push((
        "topology.metastability_window_s".into(),
        f(design.metastability_window_s),
    ));
    e.push((
        "topology.alpha_cmos_per_k".into(),
        f(env_sens.alpha_cmos_per_k),
    ));
    e.push((
        "topology.alpha_mem_per_k".into(),
        f(env_sens.alpha_mem_per_k),
    ));
    e.push(("topology.beta_supply".into(), f(env_sens.beta_supply)));
    // variation.*
    e.push(("variation.sigma_a0".into(), f(variation.device.a0)));
    e.push(("variation.sigma_f0".into(), f(variation.device.f0)));
    e.push(("variation.sigma_ea".into(), f(variation.device.ea)));
    e.push(("variation.sigma_gamma0".into(), f(variation.device.gamma0)));
    e.push(("variation.sigma_x_t".into(), f(variation.device.x_t)));
    e.push(("variation.sigma_j0".into(), f(variation.device.j0)));
    e.push(("variation.sigma_g_init".into(), f(variation.device.g_init)));
    e.push(("variation.sigma_l_f".into(), f(variation.device.l_f)));
    e.push(("variation.sigma_r_init".into(), f(variation.device.r_init)));
    e.push((
        "variation.sigma_delta_g".into(),
        f(variation.device.delta_g),
    ));
    e.push((
        "variation.sigma_delta_r".into(),
        f(variation.device.delta_r),
    ));
    e.push(("variation.sigma_rho_f".into(), f(variation.device.rho_f)));
    e.push(("variation.sigma_c_drain".into(), f(variation.sigma_c_drain)));
    e.push(("variation.sigma_r_on".into(), f(variation.sigma_r_on)));
    e.push(("variation.corner_weights".into(), weights));
    e.push((
        "variation.corner_ff".into(),
        format!("{},{}", corner.ff.0, corner.ff.1),
    ));
    e.push((
        "variation.corner_fs".into(),
        format!("{},{}", corner.fs.0, corner.fs.1),
    ));
    e.push((
        "variation.corner_sf".into(),
        format!("{},{}", corner.sf.0, corner.sf.1),
    ));
    e.push((
        "variation.corner_ss".into(),
        format!("{},{}", corner.ss.0, corner.ss.1),
    ));
    e.push((
        "variation.truncation_sigma".into(),
        f(variation.truncation_sigma),
    ));
    // mc.*
    e.push(("mc.samples".into(), "350".into()));
    e.push(("mc.seed".into(), "1".into()));
    e.push(("mc.challenges".into(), "exhaustive".into()));
    e.push(("mc.challenge_count".into(), "256".into()));
    e.push(("mc.consolidated".into(), "true".into()));
    e.push(("mc.hist_bins".into(), "20".into()));
    e.push(("mc.temp_cmos_c".into(), f(env.temp_cmos_c)));
    e.push(("mc.temp_mem_c".into(), f(env.temp_mem_c)));
    e.push(("mc.supply_v".into(), f(env.supply_v)));
    e.push(("mc.sweep_axis".into(), "supply".into()));
    e.push(("mc.sweep_points".into(), "4.5,4.75,5,5.25,5.5".into()));
    // metrics.*
    e.push(("metrics.report_samples".into(), "40".into()));
    e.push(("metrics.report_rel_chips".into(), "5".into()));
    e.push(("metrics.report_challenge_count".into(), "256".into()));
    e.push((
        "metrics.report_trials".into(),
        "tc:-20;tc:0;tc:60;tc:85;tm:-20;tm:85;sv:4.5;sv:4.75;sv:5.25;sv:5.5".into(),
    ));
    e.push(("metrics.per_challenge".into(), "false".into()));
    // io.*
    e.push(("io.out_dir".into(), "out".into()));
    e
}

/// Built-in presets: name → key overrides.
fn builtin_preset(name: &str) -> Option<Vec<(String, String)>> {
    let device = StanfordParams::default();
    match name {
        // Nominal device parameter set.
        "table3-nominal" => Some(vec![
            ("device.a0_nm".into(), f(device.a0)),
            ("device.f0_hz".into(), f(device.f0)),
            ("device.ea_ev".into(), f(device.ea)),
            ("device.gamma0_nm".into(), f(device.gamma0)),
            ("device.x_t_nm".into(), f(device.x_t)),
            ("device.j0_a_per_m2".into(), f(device.j0)),
            ("device.g_init_nm".into(), f(device.g_init)),
            ("device.l_f_nm".into(), f(device.l_f)),
            ("device.r_init_nm".into(), f(device.r_init)),
            ("device.delta_g".into(), f(device.delta_g)),
            ("device.delta_r".into(), f(device.delta_r)),
        ]),
        // Nominal operating point.
        "table1-nominal" => Some(vec![
            ("mc.temp_cmos_c".into(), "27".into()),
            ("mc.temp_mem_c".into(), "27".into()),
            ("mc.supply_v".into(), "5".into()),
        ]),
        // Joint CMOS + memristor variation profile.
        "paper-shape-defaults" => {
            let v = VariationSpec::paper_shape_defaults();
            Some(vec![
                ("variation.sigma_a0".into(), f(v.device.a0)),
                ("variation.sigma_gamma0".into(), f(v.device.gamma0)),
                ("variation.sigma_x_t".into(), f(v.device.x_t)),
                ("variation.sigma_g_init".into(), f(v.device.g_init)),
                ("variation.sigma_l_f".into(), f(v.device.l_f)),
                ("variation.sigma_r_init".into(), f(v.device.r_init)),
                ("variation.sigma_c_drain".into(), f(v.sigma_c_drain)),
                ("variation.sigma_r_on".into(), f(v.sigma_r_on)),
                (
                    "variation.corner_weights".into(),
                    "0.2,0.2,0.2,0.2,0.2".into(),
                ),
            ])
        }
        // CMOS-only variation profile: nominal, noiseless memristors.
        "cmos-shape-defaults" => {
            let v = VariationSpec::cmos_shape_defaults();
            Some(vec![
                ("variation.sigma_a0".into(), "0".into()),
                ("variation.sigma_gamma0".into(), "0".into()),
                ("variation.sigma_x_t".into(), "0".into()),
                ("variation.sigma_g_init".into(), "0".into()),
                ("variation.sigma_l_f".into(), "0".into()),
                ("variation.sigma_r_init".into(), "0".into()),
                ("variation.sigma_c_drain".into(), f(v.sigma_c_drain)),
                ("variation.sigma_r_on".into(), f(v.sigma_r_on)),
                (
                    "variation.corner_weights".into(),
                    "0.2,0.2,0.2,0.2,0.2".into(),
                ),
                ("device.delta_g".into(), "0".into()),
                ("device.delta_r".into(), "0".into()),
            ])
        }
        "1res_1T1M" => Some(vec![
            ("topology.preset".into(), "1res_1T1M".into()),
            ("topology.n_stages".into(), "8".into()),
        ]),
        "4res_1T1M_2Stage" => Some(vec![
            ("topology.preset".into(), "4res_1T1M_2Stage".into()),
            ("topology.n_stages".into(), "8".into()),
        ]),
        "4res_1T1M_4Stage" => Some(vec![
            ("topology.preset".into(), "4res_1T1M_4Stage".into()),
            ("topology.n_stages".into(), "16".into()),
        ]),
        _ => None,
    }
}

/// The experiment configuration: every known key mapped to a value string.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExperimentConfig {
    values: BTreeMap<String, String>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            values: default_entries().into_iter().collect(),
        }
    }
}

impl ExperimentConfig {
    pub fn get(&self, key: &str) -> Result<&str> {
        self.values
            .get(key)
            .map(String::as_str)
            .ok_or_else(|| Error::config(format!("unknown config key '{key}'")))
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<()> {
        if !self.values.contains_key(key) {
            return Err(Error::config(format!("unknown config key '{key}'")));
        }
        self.values.insert(key.to_string(), value.into());
        Ok(())
    }

    /// Overlay a named preset (built-in, or `<name>.cfg` from
    /// `PUFBENCH_PRESET_DIR` which takes precedence).
    pub fn apply_preset(&mut self, name: &str) -> Result<()> {
        if let Ok(dir) = std::env::var(PRESET_DIR_ENV) {
            let path = Path::new(&dir).join(format!("{name}.cfg"));
            if path.is_file() {
                let text = std::fs::read_to_string(&path)?;
                return self.apply_str(&text);
            }
        }
        let entries = builtin_preset(name)
            .ok_or_else(|| Error::config(format!("unknown preset '{name}'")))?;
        for (k, v) in entries {
            self.set(&k, v)?;
        }
        Ok(())
    }

    /// Overlay `key = value` lines onto this configuration.
    pub fn apply_str(&mut self, text: &str) -> Result<()> {
        let mut seen = std::collections::HashSet::new();
        for (line_no, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(Error::Parse {
                line: line_no + 1,
                msg: format!("expected 'key = value', got '{line}'"),
            })?;
            let key = key.trim();
            let value = value.trim();
            if !seen.insert(key.to_string()) {
                return Err(Error::Parse {
                    line: line_no + 1,
                    msg: format!("duplicate key '{key}'"),
                });
            }
            self.set(key, value).map_err(|e| Error::Parse {
                line: line_no + 1,
                msg: e.to_string(),
            })?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        config.apply_str(text)?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// Canonical serialization: sorted `key = value` lines.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.values {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(v);
            out.push('\n');
        }
        out
    }

    /// Fingerprint of everything that determines results. Output routing
    /// (`io.*`) is excluded so the same experiment written to two
    /// directories carries the same hash.
    pub fn hash_u64(&self) -> u64 {
        let mut canonical = String::new();
        for (k, v) in &self.values {
            if k.starts_with("io.") {
                continue;
            }
            canonical.push_str(k);
            canonical.push_str(" = ");
            canonical.push_str(v);
            canonical.push('\n');
        }
        fnv1a64(canonical.as_bytes())
    }

    /// 16-hex-digit configuration fingerprint embedded in output files.
    pub fn hash_hex(&self) -> String {
        format!("{:016x}", self.hash_u64())
    }

    // -- typed getters ----------------------------------------------------

    pub fn get_f64(&self, key: &str) -> Result<f64> {
        let raw = self.get(key)?;
        raw.parse::<f64>()
            .map_err(|_| Error::config(format!("key '{key}': '{raw}' is not a number")))
    }

    pub fn get_usize(&self, key: &str) -> Result<usize> {
        let raw = self.get(key)?;
        raw.parse::<usize>().map_err(|_| {
            Error::config(format!("key '{key}': '{raw}' is not a nonnegative integer"))
        })
    }

    pub fn get_u64(&self, key: &str) -> Result<u64> {
        let raw = self.get(key)?;
        raw.parse::<u64>()
            .map_err(|_| Error::config(format!("key '{key}': '{raw}' is not a u64")))
    }

    pub fn get_bool(&self, key: &str) -> Result<bool> {
        match self.get(key)? {
            "true" | "1" | "yes" => Ok(true),
            "false" | "0" | "no" => Ok(false),
            other => Err(Error::config(format!(
                "key '{key}': '{other}' is not a boolean"
            ))),
        }
    }

    fn get_f64_list(&self, key: &str) -> Result<Vec<f64>> {
        let raw = self.get(key)?;
        raw.split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::config(format!("key '{key}': '{s}' is not a number")))
            })
            .collect()
    }

    fn get_pair(&self, key: &str) -> Result<(f64, f64)> {
        let list = self.get_f64_list(key)?;
        if list.len() != 2 {
            return Err(Error::config(format!(
                "key '{key}' needs exactly two numbers"
            )));
        }
        Ok((list[0], list[1]))
    }

    // -- domain views -----------------------------------------------------

    pub fn device_params(&self) -> Result<StanfordParams> {
        let p = StanfordParams {
            a0: self.get_f64("device.a0_nm")?,
            f0: self.get_f64("device.f0_hz")?,
            ea: self.get_f64("device.ea_ev")?,
            gamma0: self.get_f64("device.gamma0_nm")?,
            x_t: self.get_f64("device.x_t_nm")?,
            j0: self.get_f64("device.j0_a_per_m2")?,
            g_init: self.get_f64("device.g_init_nm")?,
            l_f: self.get_f64("device.l_f_nm")?,
            r_init: self.get_f64("device.r_init_nm")?,
            delta_g: self.get_f64("device.delta_g")?,
            delta_r: self.get_f64("device.delta_r")?,
            g_min: self.get_f64("device.g_min_nm")?,
            g_max: self.get_f64("device.g_max_nm")?,
            r_min: self.get_f64("device.r_min_nm")?,
            r_max: self.get_f64("device.r_max_nm")?,
            rho_f: self.get_f64("device.rho_f_ohm_nm")?,
            v0: self.get_f64("device.v0_v")?,
            v_read: self.get_f64("device.v_read_v")?,
            v_read_max: self.get_f64("device.v_read_max_v")?,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn reset_train(&self) -> Result<ResetPulseTrain> {
        let raw = self.get("device.reset_pulses")?;
        let mut pulses = Vec::new();
        for part in raw.split(';') {
            let (v, n) = part.split_once(':').ok_or_else(|| {
                Error::config(format!("reset pulse '{part}' must be 'voltage:steps'"))
            })?;
            let v = v
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("bad pulse voltage '{v}'")))?;
            let n = n
                .trim()
                .parse::<u32>()
                .map_err(|_| Error::config(format!("bad pulse step count '{n}'")))?;
            pulses.push((v, n));
        }
        if pulses.is_empty() {
            return Err(Error::config("reset pulse train is empty"));
        }
        let dt = self.get_f64("device.reset_dt_s")?;
        let t_k = celsius_to_kelvin(self.get_f64("device.reset_temp_c")?);
        if !(dt > 0.0 && t_k > 0.0) {
            return Err(Error::config("reset dt and temperature must be positive"));
        }
        Ok(ResetPulseTrain { pulses, dt, t_k })
    }

    pub fn topology(&self) -> Result<Topology> {
        let n = self.get_usize("topology.n_stages")?;
        match self.get("topology.preset")? {
            "1res_1T1M" => Ok(Topology::SingleResponse),
            "4res_1T1M_2Stage" => four_tap_topology(n, 2),
            "4res_1T1M_4Stage" => four_tap_topology(n, 4),
            other => Err(Error::config(format!("unknown topology preset '{other}'"))),
        }
    }

    pub fn design(&self) -> Result<ApufDesign> {
        let design = ApufDesign {
            n_stages: self.get_usize("topology.n_stages")?,
            topology: self.topology()?,
            device: self.device_params()?,
            c_drain: self.get_f64("topology.c_drain_f")?,
            r_on_switch: self.get_f64("topology.r_on_switch_ohm")?,
            kappa: self.get_f64("topology.kappa")?,
            metastability_window_s: self.get_f64("topology.metastability_window_s")?,
            env_sensitivity: EnvSensitivity {
                alpha_cmos_per_k: self.get_f64("topology.alpha_cmos_per_k")?,
                alpha_mem_per_k: self.get_f64("topology.alpha_mem_per_k")?,
                beta_supply: self.get_f64("topology.beta_supply")?,
            },
            reset: self.reset_train()?,
        };
        design.validate()?;
        Ok(design)
    }

    pub fn variation_spec(&self) -> Result<VariationSpec> {
        let weights = self.get_f64_list("variation.corner_weights")?;
        if weights.len() != 5 {
            return Err(Error::config(
                "variation.corner_weights needs 5 numbers (tt,ff,fs,sf,ss)",
            ));
        }
        let spec = VariationSpec {
            device: DeviceSigmas {
                a0: self.get_f64("variation.sigma_a0")?,
                f0: self.get_f64("variation.sigma_f0")?,
                ea: self.get_f64("variation.sigma_ea")?,
                gamma0: self.get_f64("variation.sigma_gamma0")?,
                x_t: self.get_f64("variation.sigma_x_t")?,
                j0: self.get_f64("variation.sigma_j0")?,
                g_init: self.get_f64("variation.sigma_g_init")?,
                l_f: self.get_f64("variation.sigma_l_f")?,
                r_init: self.get_f64("variation.sigma_r_init")?,
                delta_g: self.get_f64("variation.sigma_delta_g")?,
                delta_r: self.get_f64("variation.sigma_delta_r")?,
                rho_f: self.get_f64("variation.sigma_rho_f")?,
            },
            sigma_c_drain: self.get_f64("variation.sigma_c_drain")?,
            sigma_r_on: self.get_f64("variation.sigma_r_on")?,
            corner_weights: [weights[0], weights[1], weights[2], weights[3], weights[4]],
            corner_table: CornerTable {
                ff: self.get_pair("variation.corner_ff")?,
                fs: self.get_pair("variation.corner_fs")?,
                sf: self.get_pair("variation.corner_sf")?,
                ss: self.get_pair("variation.corner_ss")?,
            },
            truncation_sigma: self.get_f64("variation.truncation_sigma")?,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn environment(&self) -> Result<Environment> {
        let env = Environment {
            temp_cmos_c: self.get_f64("mc.temp_cmos_c")?,
            temp_mem_c: self.get_f64("mc.temp_mem_c")?,
            supply_v: self.get_f64("mc.supply_v")?,
        };
        env.validate()?;
        Ok(env)
    }

    pub fn mc_config(&self) -> Result<McConfig> {
        let challenges = match self.get("mc.challenges")? {
            "exhaustive" => ChallengeSource::Exhaustive,
            "sampled" => ChallengeSource::Sampled {
                count: self.get_usize("mc.challenge_count")?,
            },
            other => Err(Error::config(format!(
                "mc.challenges must be 'exhaustive' or 'sampled', got '{other}'"
            )))?,
        };
        let config = McConfig {
            n_samples: self.get_usize("mc.samples")?,
            master_seed: self.get_u64("mc.seed")?,
            design: self.design()?,
            variation: self.variation_spec()?,
            challenges,
            environments: vec![self.environment()?],
            config_hash: self.hash_u64(),
        };
        config.validate()?;
        Ok(config)
    }

    pub fn sweep_axis(&self) -> Result<EnvAxis> {
        EnvAxis::parse(self.get("mc.sweep_axis")?)
    }

    pub fn sweep_points(&self) -> Result<Vec<f64>> {
        self.get_f64_list("mc.sweep_points")
    }

    pub fn device_sweep_voltages(&self) -> Result<Vec<f64>> {
        self.get_f64_list("device.sweep_v_list")
    }

    /// Perturbed environments of the `metrics.report_trials` list, applied
    /// to this configuration's base environment. Codes: `tc` (CMOS
    /// temperature °C), `tm` (memristor temperature °C), `sv` (supply V).
    pub fn trial_environments(&self) -> Result<Vec<Environment>> {
        let base = self.environment()?;
        let raw = self.get("metrics.report_trials")?;
        let mut envs = Vec::new();
        for part in raw.split(';') {
            let (axis, value) = part
                .split_once(':')
                .ok_or_else(|| Error::config(format!("trial '{part}' must be 'axis:value'")))?;
            let value = value
                .trim()
                .parse::<f64>()
                .map_err(|_| Error::config(format!("bad trial value '{value}'")))?;
            let mut env = base;
            match axis.trim() {
                "tc" => env.temp_cmos_c = value,
                "tm" => env.temp_mem_c = value,
                "sv" => env.supply_v = value,
                other => {
                    return Err(Error::config(format!(
                        "unknown trial axis '{other}' (expected tc, tm or sv)"
                    )))
                }
            }
            env.validate()?;
            envs.push(env);
        }
        if envs.is_empty() {
            return Err(Error::Empty("trial environment list"));
        }
        Ok(envs)
    }
}

fn four_tap_topology(n: usize, group: usize) -> Result<Topology> {
    let topology = Topology::multi_every(n, group)?;
    let taps = topology.taps(n);
    if taps.len() != 4 {
        return Err(Error::config(format!(
            "a 4-response topology with {group}-stage groups needs n = {} stages, got {n}",
            4 * group
        )));
    }
    Ok(topology)
}
