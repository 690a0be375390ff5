//! Process-variation and operating-environment sampling.
//!
//! A chip population is drawn by perturbing every per-stage element of a
//! nominal [`ApufDesign`] with independent truncated Gaussians, picking one
//! process corner per chip, and letting each memristor settle through its
//! reset pulse train. All draws come from streams derived by `(seed,
//! index)`, so populations are identical no matter how sampling work is
//! distributed.

use crate::apuf::{ApufDesign, ApufInstance, Memristor, StagePair};
use crate::device::{celsius_to_kelvin, reset_to_random_state, StanfordParams};
use crate::rng::NoiseStream;
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Environment
// ---------------------------------------------------------------------------

/// Operating conditions: CMOS and memristor ambient temperatures plus the
/// supply voltage.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Environment {
    pub temp_cmos_c: f64,
    pub temp_mem_c: f64,
    pub supply_v: f64,
}

impl Environment {
    /// Nominal operating point: 27 °C / 27 °C / 5 V.
    pub fn nominal() -> Environment {
        Environment {
            temp_cmos_c: 27.0,
            temp_mem_c: 27.0,
            supply_v: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.supply_v > 0.0) || !self.supply_v.is_finite() {
            return Err(Error::domain(format!(
                "supply voltage {} must be > 0",
                self.supply_v
            )));
        }
        for (name, t) in [
            ("temp_cmos", self.temp_cmos_c),
            ("temp_mem", self.temp_mem_c),
        ] {
            if !(t > -273.15) || !t.is_finite() {
                return Err(Error::domain(format!("{name}={t} °C below absolute zero")));
            }
        }
        Ok(())
    }

    pub fn temp_mem_k(&self) -> f64 {
        celsius_to_kelvin(self.temp_mem_c)
    }
}

/// Sweepable environment axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EnvAxis {
    TempCmos,
    TempMemristor,
    Supply,
}

impl EnvAxis {
    pub fn parse(s: &str) -> Result<EnvAxis> {
        match s {
            "temp_cmos" => Ok(EnvAxis::TempCmos),
            "temp_memristor" | "temp_mem" => Ok(EnvAxis::TempMemristor),
            "supply" => Ok(EnvAxis::Supply),
            other => Err(Error::config(format!(
                "unknown sweep axis '{other}' (expected temp_cmos, temp_memristor or supply)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            EnvAxis::TempCmos => "temp_cmos",
            EnvAxis::TempMemristor => "temp_memristor",
            EnvAxis::Supply => "supply",
        }
    }
}

/// Replace one axis of `base` with each point, order preserved.
pub fn environment_sweep(
    base: &Environment,
    axis: EnvAxis,
    points: &[f64],
) -> Result<Vec<Environment>> {
    if points.is_empty() {
        return Err(Error::Empty("sweep points"));
    }
    base.validate()?;
    points
        .iter()
        .map(|&p| {
            let mut env = *base;
            match axis {
                EnvAxis::TempCmos => env.temp_cmos_c = p,
                EnvAxis::TempMemristor => env.temp_mem_c = p,
                EnvAxis::Supply => env.supply_v = p,
            }
            env.validate()?;
            Ok(env)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Process corners
// ---------------------------------------------------------------------------

/// CMOS process corner labels.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Corner {
    Tt,
    Ff,
    Fs,
    Sf,
    Ss,
}

impl Corner {
    pub const ALL: [Corner; 5] = [Corner::Tt, Corner::Ff, Corner::Fs, Corner::Sf, Corner::Ss];

    pub fn parse(s: &str) -> Result<Corner> {
        match s {
            "tt" => Ok(Corner::Tt),
            "ff" => Ok(Corner::Ff),
            "fs" => Ok(Corner::Fs),
            "sf" => Ok(Corner::Sf),
            "ss" => Ok(Corner::Ss),
            other => Err(Error::UnknownCorner(other.to_string())),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Corner::Tt => "tt",
            Corner::Ff => "ff",
            Corner::Fs => "fs",
            Corner::Sf => "sf",
            Corner::Ss => "ss",
        }
    }
}

/// Per-corner delay multipliers `(nmos_factor, pmos_factor)`.
///
/// Only the qualitative ordering is contractual: fast corners multiply by
/// less than 1, slow corners by more. `tt` is pinned to exactly (1, 1).
#[derive(Debug, Clone, PartialEq)]
pub struct CornerTable {
    pub ff: (f64, f64),
    pub fs: (f64, f64),
    pub sf: (f64, f64),
    pub ss: (f64, f64),
}

impl Default for CornerTable {
    fn default() -> Self {
        CornerTable {
            ff: (0.92, 0.92),
            fs: (0.92, 1.08),
            sf: (1.08, 0.92),
            ss: (1.08, 1.08),
        }
    }
}

impl CornerTable {
    pub fn validate(&self) -> Result<()> {
        for (name, (n, p)) in [
            ("ff", self.ff),
            ("fs", self.fs),
            ("sf", self.sf),
            ("ss", self.ss),
        ] {
            if !(n > 0.0 && p > 0.0) {
                return Err(Error::config(format!(
                    "corner {name} factors ({n}, {p}) must be > 0"
                )));
            }
        }
        Ok(())
    }
}

/// Look up the `(nmos_factor, pmos_factor)` delay multipliers of a corner.
/// `tt` is the identity by definition.
pub fn corner_multipliers(corner: Corner, table: &CornerTable) -> Result<(f64, f64)> {
    table.validate()?;
    Ok(match corner {
        Corner::Tt => (1.0, 1.0),
        Corner::Ff => table.ff,
        Corner::Fs => table.fs,
        Corner::Sf => table.sf,
        Corner::Ss => table.ss,
    })
}

// ---------------------------------------------------------------------------
// Variation spec
// ---------------------------------------------------------------------------

/// Relative Gaussian sigmas for the memristor model parameters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DeviceSigmas {
    pub a0: f64,
    pub f0: f64,
    pub ea: f64,
    pub gamma0: f64,
    pub x_t: f64,
    pub j0: f64,
    pub g_init: f64,
    pub l_f: f64,
    pub r_init: f64,
    pub delta_g: f64,
    pub delta_r: f64,
    pub rho_f: f64,
}

impl DeviceSigmas {
    fn as_named(&self) -> [(&'static str, f64); 12] {
        [
            ("a0", self.a0),
            ("f0", self.f0),
            ("ea", self.ea),
            ("gamma0", self.gamma0),
            ("x_t", self.x_t),
            ("j0", self.j0),
            ("g_init", self.g_init),
            ("l_f", self.l_f),
            ("r_init", self.r_init),
            ("delta_g", self.delta_g),
            ("delta_r", self.delta_r),
            ("rho_f", self.rho_f),
        ]
    }
}

/// Distributions that turn one nominal design into a chip population.
#[derive(Debug, Clone, PartialEq)]
pub struct VariationSpec {
    pub device: DeviceSigmas,
    /// Relative sigma of the switch drain capacitance.
    pub sigma_c_drain: f64,
    /// Relative sigma of the per-line switch on-resistance.
    pub sigma_r_on: f64,
    /// Chip-level corner weights in [tt, ff, fs, sf, ss] order; must sum
    /// to 1.
    pub corner_weights: [f64; 5],
    pub corner_table: CornerTable,
    /// Gaussian draws are rejected beyond this many sigmas (default 4).
    pub truncation_sigma: f64,
}

impl Default for VariationSpec {
    fn default() -> Self {
        VariationSpec {
            device: DeviceSigmas::default(),
            sigma_c_drain: 0.0,
            sigma_r_on: 0.0,
            corner_weights: [1.0, 0.0, 0.0, 0.0, 0.0],
            corner_table: CornerTable::default(),
            truncation_sigma: 4.0,
        }
    }
}

impl VariationSpec {
    /// Declared population profile: 5% relative sigma on the memristor
    /// geometry lengths, 3% on the drain capacitance, uniform corners.
    /// Results under this profile are profile-dependent, not device data.
    pub fn paper_shape_defaults() -> Self {
        VariationSpec {
            device: DeviceSigmas {
                a0: 0.05,
                gamma0: 0.05,
                x_t: 0.05,
                g_init: 0.05,
                l_f: 0.05,
                r_init: 0.05,
                ..DeviceSigmas::default()
            },
            sigma_c_drain: 0.03,
            sigma_r_on: 0.0,
            corner_weights: [0.2; 5],
            corner_table: CornerTable::default(),
            truncation_sigma: 4.0,
        }
    }

    /// CMOS-only profile: the memristors stay nominal and noiseless, all
    /// randomness comes from the switches (on-resistance and drain
    /// capacitance) and the corner draw.
    pub fn cmos_shape_defaults() -> Self {
        VariationSpec {
            device: DeviceSigmas::default(),
            sigma_c_drain: 0.03,
            sigma_r_on: 0.05,
            corner_weights: [0.2; 5],
            corner_table: CornerTable::default(),
            truncation_sigma: 4.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut named = vec![("c_drain", self.sigma_c_drain), ("r_on", self.sigma_r_on)];
        named.extend(self.device.as_named());
        for (name, sigma) in named {
            if sigma < 0.0 || !sigma.is_finite() {
                return Err(Error::config(format!(
                    "sigma for {name} must be >= 0, got {sigma}"
                )));
            }
            // Truncated support must stay strictly positive for relative
            // spreads around positive nominals.
            if sigma * self.truncation_sigma >= 1.0 {
                return Err(Error::config(format!(
                    "sigma for {name} ({sigma}) times truncation ({}) reaches zero: \
                     non-physical support",
                    self.truncation_sigma
                )));
            }
        }
        if !(self.truncation_sigma > 0.0) {
            return Err(Error::config("truncation_sigma must be > 0"));
        }
        let total: f64 = self.corner_weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 || self.corner_weights.iter().any(|&w| w < 0.0) {
            return Err(Error::config(format!(
                "corner weights {:?} must be nonnegative and sum to 1",
                self.corner_weights
            )));
        }
        self.corner_table.validate()
    }
}

/// Truncated standard Gaussian: redraw until the magnitude is inside the
/// truncation bound. Deterministic for a given stream position.
fn truncated_gaussian(noise: &mut NoiseStream, bound: f64) -> f64 {
    loop {
        let z = noise.next_gaussian();
        if z.abs() <= bound {
            return z;
        }
    }
}

/// Relative Gaussian perturbation of a positive nominal.
fn perturb(nominal: f64, sigma_rel: f64, bound: f64, noise: &mut NoiseStream) -> f64 {
    if sigma_rel == 0.0 {
        return nominal;
    }
    nominal * (1.0 + sigma_rel * truncated_gaussian(noise, bound))
}

/// Draw the chip-level corner from the configured weights.
fn draw_corner(spec: &VariationSpec, noise: &mut NoiseStream) -> Corner {
    let u = noise.next_uniform();
    let mut acc = 0.0;
    for (corner, &w) in Corner::ALL.iter().zip(&spec.corner_weights) {
        acc += w;
        if u < acc {
            return *corner;
        }
    }
    Corner::Ss
}

/// Sample the per-device memristor parameters around the nominal ones.
fn sample_device_params(
    nominal: &StanfordParams,
    spec: &VariationSpec,
    noise: &mut NoiseStream,
) -> Result<StanfordParams> {
    let b = spec.truncation_sigma;
    let s = &spec.device;
    let mut p = nominal.clone();
    p.a0 = perturb(nominal.a0, s.a0, b, noise);
    p.f0 = perturb(nominal.f0, s.f0, b, noise);
    p.ea = perturb(nominal.ea, s.ea, b, noise);
    p.gamma0 = perturb(nominal.gamma0, s.gamma0, b, noise);
    p.x_t = perturb(nominal.x_t, s.x_t, b, noise);
    p.j0 = perturb(nominal.j0, s.j0, b, noise);
    p.g_init = perturb(nominal.g_init, s.g_init, b, noise);
    p.l_f = perturb(nominal.l_f, s.l_f, b, noise);
    p.r_init = perturb(nominal.r_init, s.r_init, b, noise);
    p.delta_g = perturb(nominal.delta_g, s.delta_g, b, noise);
    p.delta_r = perturb(nominal.delta_r, s.delta_r, b, noise);
    p.rho_f = perturb(nominal.rho_f, s.rho_f, b, noise);
    // Keep the drawn geometry inside the clamp system: the gap cannot
    // exceed the filament length, and the initial point must respect the
    // configured bounds.
    p.g_max = nominal.g_max.min(p.l_f);
    if p.g_max <= p.g_min {
        return Err(Error::config(format!(
            "drawn filament length {} leaves no valid gap range above g_min {}",
            p.l_f, p.g_min
        )));
    }
    p.g_init = p.g_init.clamp(p.g_min * (1.0 + 1e-9), p.g_max);
    p.r_init = p.r_init.clamp(p.r_min, p.r_max * (1.0 - 1e-9));
    p.validate()?;
    Ok(p)
}

/// Sub-stream indices: one per sampled object, so evaluation order cannot
/// change any draw.
const STREAM_CORNER: u64 = 0;
const STREAM_STAGE_BASE: u64 = 16;

/// Sample one chip from a nominal design and a variation spec.
///
/// Every stage's two memristors get independently drawn parameters and are
/// then settled through the design's reset pulse train; the stage's switch
/// elements get their own draws; the chip-level corner multiplies the NMOS
/// on-resistances and drain capacitances. Deterministic given the stream.
pub fn sample_instance(
    design: &ApufDesign,
    spec: &VariationSpec,
    noise: &NoiseStream,
) -> Result<ApufInstance> {
    design.validate()?;
    spec.validate()?;
    let corner = draw_corner(spec, &mut noise.child(STREAM_CORNER));
    let (nmos_factor, _pmos_factor) = corner_multipliers(corner, &spec.corner_table)?;
    let b = spec.truncation_sigma;

    let mut stages = Vec::with_capacity(design.n_stages);
    for stage_idx in 0..design.n_stages {
        let base = STREAM_STAGE_BASE + 4 * stage_idx as u64;
        let mut upper_stream = noise.child(base);
        let mut lower_stream = noise.child(base + 1);
        let mut switch_stream = noise.child(base + 2);

        let upper_params = sample_device_params(&design.device, spec, &mut upper_stream)?;
        let lower_params = sample_device_params(&design.device, spec, &mut lower_stream)?;
        let upper_state = reset_to_random_state(&upper_params, &design.reset, &mut upper_stream)?;
        let lower_state = reset_to_random_state(&lower_params, &design.reset, &mut lower_stream)?;

        let c_drain =
            perturb(design.c_drain, spec.sigma_c_drain, b, &mut switch_stream) * nmos_factor;
        let r_on_upper =
            perturb(design.r_on_switch, spec.sigma_r_on, b, &mut switch_stream) * nmos_factor;
        let r_on_lower =
            perturb(design.r_on_switch, spec.sigma_r_on, b, &mut switch_stream) * nmos_factor;

        stages.push(StagePair {
            upper: Memristor::Stanford {
                state: upper_state,
                params: upper_params,
            },
            lower: Memristor::Stanford {
                state: lower_state,
                params: lower_params,
            },
            c_drain,
            r_on_upper,
            r_on_lower,
        });
    }

    let inst = ApufInstance {
        stages,
        topology: design.topology.clone(),
        env_sensitivity: design.env_sensitivity,
        kappa: design.kappa,
        metastability_window_s: design.metastability_window_s,
    };
    inst.validate()?;
    Ok(inst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::apuf::Topology;

    #[test]
    fn nominal_environment_and_validation() {
        let env = Environment::nominal();
        assert_eq!(env.temp_cmos_c, 27.0);
        assert_eq!(env.temp_mem_c, 27.0);
        assert_eq!(env.supply_v, 5.0);
        assert!(Environment {
            supply_v: 0.0,
            ..env
        }
        .validate()
        .is_err());
        assert!(Environment {
            temp_mem_c: -300.0,
            ..env
        }
        .validate()
        .is_err());
    }

    #[test]
    fn sweep_constructive_examples() {
        let base = Environment::nominal();
        let envs = environment_sweep(&base, EnvAxis::Supply, &[4.5, 5.0, 5.5]).unwrap();
        assert_eq!(envs.len(), 3);
        assert_eq!(envs[0].supply_v, 4.5);
        assert_eq!(envs[2].supply_v, 5.5);
        assert!(envs
            .iter()
            .all(|e| e.temp_cmos_c == 27.0 && e.temp_mem_c == 27.0));

        let identity = environment_sweep(&base, EnvAxis::TempCmos, &[27.0]).unwrap();
        assert_eq!(identity, vec![base]);

        assert!(environment_sweep(&base, EnvAxis::TempCmos, &[-300.0]).is_err());
        assert!(environment_sweep(&base, EnvAxis::Supply, &[]).is_err());
    }

    #[test]
    fn corner_lookup() {
        let table = CornerTable::default();
        assert_eq!(corner_multipliers(Corner::Tt, &table).unwrap(), (1.0, 1.0));
        assert_eq!(
            corner_multipliers(Corner::Ss, &table).unwrap(),
            (1.08, 1.08)
        );
        assert_eq!(
            corner_multipliers(Corner::Fs, &table).unwrap(),
            (0.92, 1.08)
        );
        assert!(Corner::parse("xx").is_err());
        assert_eq!(Corner::parse("sf").unwrap(), Corner::Sf);
    }

    #[test]
    fn zero_sigma_zero_noise_sampling_is_degenerate() {
        let mut design = ApufDesign::default();
        design.device.delta_g = 0.0;
        design.device.delta_r = 0.0;
        let spec = VariationSpec::default();
        let a = sample_instance(&design, &spec, &NoiseStream::derive(1, 0)).unwrap();
        let b = sample_instance(&design, &spec, &NoiseStream::derive(1, 1)).unwrap();
        let c = sample_instance(&design, &spec, &NoiseStream::derive(2, 77)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a, c);
    }

    #[test]
    fn distinct_seeds_differ_and_sampling_is_deterministic() {
        let design = ApufDesign::default();
        let spec = VariationSpec::paper_shape_defaults();
        let a = sample_instance(&design, &spec, &NoiseStream::derive(9, 0)).unwrap();
        let a2 = sample_instance(&design, &spec, &NoiseStream::derive(9, 0)).unwrap();
        let b = sample_instance(&design, &spec, &NoiseStream::derive(9, 1)).unwrap();
        assert_eq!(a, a2);
        assert_ne!(a, b);
    }

    #[test]
    fn sampled_sigma_matches_configured_sigma() {
        // 1000 draws of one 10%-sigma parameter: empirical sigma/mu within
        // 10% of 0.1.
        let design = ApufDesign {
            n_stages: 1,
            topology: Topology::SingleResponse,
            ..ApufDesign::default()
        };
        let mut spec = VariationSpec::default();
        spec.device.r_init = 0.10;
        let mut values = Vec::with_capacity(1000);
        for i in 0..1000u64 {
            let inst = sample_instance(&design, &spec, &NoiseStream::derive(500, i)).unwrap();
            match &inst.stages[0].upper {
                Memristor::Stanford { params, .. } => values.push(params.r_init),
                _ => unreachable!(),
            }
        }
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / values.len() as f64;
        let rel = var.sqrt() / mean;
        assert!((rel / 0.10 - 1.0).abs() < 0.10, "sigma/mu {rel}");
    }

    #[test]
    fn truncation_bounds_every_draw() {
        let design = ApufDesign::default();
        let mut spec = VariationSpec::default();
        spec.device.g_init = 0.05;
        spec.device.l_f = 0.05;
        for i in 0..200u64 {
            let inst = sample_instance(&design, &spec, &NoiseStream::derive(7, i)).unwrap();
            for stage in &inst.stages {
                for m in [&stage.upper, &stage.lower] {
                    if let Memristor::Stanford { params, .. } = m {
                        assert!((params.l_f - 3.0).abs() <= 3.0 * 0.05 * 4.0 + 1e-12);
                        assert!(params.g_init > 0.0);
                        assert!(params.g_init <= params.g_max);
                    }
                }
            }
        }
    }

    #[test]
    fn oversized_sigma_is_a_config_error() {
        let mut spec = VariationSpec::default();
        spec.device.g_init = 0.30; // 4σ support reaches zero
        assert!(spec.validate().is_err());
        let spec = VariationSpec {
            corner_weights: [0.5, 0.5, 0.5, 0.0, 0.0],
            ..VariationSpec::default()
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn corner_draw_follows_weights() {
        let spec = VariationSpec {
            corner_weights: [0.0, 0.0, 0.0, 0.0, 1.0],
            ..VariationSpec::default()
        };
        let noise = NoiseStream::from_seed(3);
        assert_eq!(draw_corner(&spec, &mut noise.child(0)), Corner::Ss);
    }
}
