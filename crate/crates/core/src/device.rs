//! Memristive device models.
//!
//! Two models are provided:
//!
//! * [`LinearDriftDevice`] — the classic linear ion-drift picture: a doped
//!   region of width `w` inside a film of width `D`, giving an equivalent
//!   resistance that interpolates affinely between `R_on` and `R_off`.
//! * The gap/radius model ([`StanfordParams`] / [`StanfordState`]) — a
//!   bipolar RRAM cell whose resistance is set by a tunneling gap `g` and a
//!   conductive-filament radius `r`. Both evolve under a field-accelerated
//!   ion-hopping drift law plus additive Gaussian cycle noise, integrated
//!   with explicit Euler-Maruyama.
//!
//! Units: lengths in nm, voltages in V, currents in A, resistances in Ω,
//! temperatures in K, time in s. `rho_f` is in Ω·nm so that
//! `rho_f · length(nm) / area(nm²)` is directly in Ω.
//!
//! Drift law (documented here because it is a model choice, not a plot
//! fit): with `q` the elementary charge and `kB` Boltzmann's constant,
//!
//! ```text
//! dg/dt = -a0 · f0 · exp(-Ea·q / (kB·T)) · sinh( gamma0·q·V / (x_T·kB·T) )
//! dr/dt = +a0 · f0 · exp(-Ea·q / (kB·T)) · sinh( gamma0·q·V / (x_T·kB·T) )
//! ```
//!
//! so positive bias (SET polarity) closes the gap and grows the filament,
//! negative bias does the reverse, and zero bias leaves the state fixed.
//! The stochastic update per step of size `dt` adds `delta_g·χ·√dt` to `g`
//! and `delta_r·χ'·√dt` to `r` with independent standard Gaussians χ, χ',
//! then clamps to the configured bounds.

use crate::rng::NoiseStream;
use crate::{Error, Result};

/// Boltzmann constant (J/K).
pub const KB: f64 = 1.380_649e-23;
/// Elementary charge (C).
pub const Q: f64 = 1.602_176_634e-19;
/// Reference (nominal ambient) temperature: 27 °C in kelvin.
pub const T_REF_K: f64 = 300.15;

/// Thermal voltage kB·T/q at temperature `t_k`.
#[inline]
pub fn thermal_voltage(t_k: f64) -> f64 {
    KB * t_k / Q
}

/// Convert °C to K.
#[inline]
pub fn celsius_to_kelvin(t_c: f64) -> f64 {
    t_c + 273.15
}

// ---------------------------------------------------------------------------
// Linear ion-drift baseline
// ---------------------------------------------------------------------------

/// Linear ion-drift device: doped width `w` inside total width `d`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearDriftDevice {
    /// Doped-region width (nm).
    pub w: f64,
    /// Total device width (nm).
    pub d: f64,
    /// Fully-doped resistance (Ω).
    pub r_on: f64,
    /// Fully-undoped resistance (Ω).
    pub r_off: f64,
}

impl LinearDriftDevice {
    pub fn new(w: f64, d: f64, r_on: f64, r_off: f64) -> Result<Self> {
        let dev = LinearDriftDevice { w, d, r_on, r_off };
        dev.validate()?;
        Ok(dev)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.d > 0.0) {
            return Err(Error::domain(format!(
                "device width d={} must be > 0",
                self.d
            )));
        }
        if self.w < 0.0 || self.w > self.d {
            return Err(Error::domain(format!(
                "doped width w={} outside [0, {}]",
                self.w, self.d
            )));
        }
        if !(self.r_on > 0.0 && self.r_on < self.r_off) {
            return Err(Error::domain(format!(
                "need 0 < r_on < r_off, got r_on={} r_off={}",
                self.r_on, self.r_off
            )));
        }
        Ok(())
    }
}

/// Equivalent resistance of a linear ion-drift device:
/// `(w/D)·R_on + (1 - w/D)·R_off`. Always within `[R_on, R_off]`.
pub fn linear_drift_resistance(dev: &LinearDriftDevice) -> Result<f64> {
    dev.validate()?;
    let x = dev.w / dev.d;
    Ok(x * dev.r_on + (1.0 - x) * dev.r_off)
}

// ---------------------------------------------------------------------------
// Gap/radius RRAM model
// ---------------------------------------------------------------------------

/// Physical parameters of the gap/radius RRAM model.
///
/// Defaults come from the built-in `table3-nominal` preset. `delta_g` and
/// `delta_r` are noise amplitudes in nm·s^(-1/2); the per-step contribution
/// is `delta · χ · √dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct StanfordParams {
    /// Adjacent oxygen-vacancy hop distance (nm).
    pub a0: f64,
    /// Oxygen-atom vibration frequency (Hz).
    pub f0: f64,
    /// Average activation energy for an O vacancy (eV).
    pub ea: f64,
    /// Field-enhancement / localization length (nm).
    pub gamma0: f64,
    /// Characteristic tunneling length (nm).
    pub x_t: f64,
    /// Gap-region hopping current density (A/m²).
    pub j0: f64,
    /// Initial tunneling gap (nm).
    pub g_init: f64,
    /// Filament length (nm).
    pub l_f: f64,
    /// Initial filament radius (nm).
    pub r_init: f64,
    /// Gap noise amplitude (nm·s^-1/2).
    pub delta_g: f64,
    /// Radius noise amplitude (nm·s^-1/2).
    pub delta_r: f64,
    /// Gap clamp bounds (nm).
    pub g_min: f64,
    pub g_max: f64,
    /// Radius clamp bounds (nm).
    pub r_min: f64,
    pub r_max: f64,
    /// Filament resistivity (Ω·nm).
    pub rho_f: f64,
    /// Sinh voltage scale of the gap conduction law (V).
    pub v0: f64,
    /// Read voltage used when a delay model asks for a resistance (V).
    pub v_read: f64,
    /// Largest |V| accepted as a non-switching read (V).
    pub v_read_max: f64,
}

impl Default for StanfordParams {
    fn default() -> Self {
        let gamma0 = 0.75;
        let x_t = 0.4;
        let g_init = 3.0;
        let r_init = 0.5;
        let delta_g = 4.0e-5;
        StanfordParams {
            a0: 0.25,
            f0: 1.0e13,
            ea: 0.7,
            gamma0,
            x_t,
            j0: 1.0e13,
            g_init,
            l_f: 3.0,
            r_init,
            delta_g,
            // No independently published amplitude; scaled from delta_g by
            // the nominal radius-to-gap ratio. Config-overridable.
            delta_r: delta_g * r_init / g_init,
            g_min: 0.1,
            g_max: 3.0,
            r_min: 0.05,
            r_max: 2.0,
            rho_f: 300.0,
            v0: thermal_voltage(T_REF_K) * (x_t / gamma0),
            v_read: 0.1,
            v_read_max: 0.3,
        }
    }
}

impl StanfordParams {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("a0", self.a0),
            ("f0", self.f0),
            ("ea", self.ea),
            ("gamma0", self.gamma0),
            ("x_t", self.x_t),
            ("j0", self.j0),
            ("g_init", self.g_init),
            ("l_f", self.l_f),
            ("r_init", self.r_init),
            ("v0", self.v0),
            ("v_read", self.v_read),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!(
                    "{name}={v} must be strictly positive"
                )));
            }
        }
        if self.delta_g < 0.0 || self.delta_r < 0.0 {
            return Err(Error::domain("noise amplitudes must be >= 0".to_string()));
        }
        if self.rho_f < 0.0 {
            return Err(Error::domain("rho_f must be >= 0".to_string()));
        }
        if !(self.g_min > 0.0 && self.g_min < self.g_init && self.g_init <= self.g_max) {
            return Err(Error::domain(format!(
                "need 0 < g_min < g_init <= g_max, got g_min={} g_init={} g_max={}",
                self.g_min, self.g_init, self.g_max
            )));
        }
        if self.g_max > self.l_f {
            return Err(Error::domain(format!(
                "g_max={} must not exceed filament length l_f={}",
                self.g_max, self.l_f
            )));
        }
        if !(self.r_min > 0.0 && self.r_min <= self.r_init && self.r_init < self.r_max) {
            return Err(Error::domain(format!(
                "need 0 < r_min <= r_init < r_max, got r_min={} r_init={} r_max={}",
                self.r_min, self.r_init, self.r_max
            )));
        }
        if self.v_read > self.v_read_max {
            return Err(Error::domain(format!(
                "v_read={} above v_read_max={}",
                self.v_read, self.v_read_max
            )));
        }
        Ok(())
    }

    /// Initial state `(g_init, r_init)`.
    pub fn initial_state(&self) -> StanfordState {
        StanfordState {
            g: self.g_init,
            r: self.r_init,
        }
    }
}

/// Dynamic state of a gap/radius device.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StanfordState {
    /// Tunneling gap (nm).
    pub g: f64,
    /// Conductive-filament radius (nm).
    pub r: f64,
}

impl StanfordState {
    fn check_within(&self, p: &StanfordParams) -> Result<()> {
        if self.g < p.g_min || self.g > p.g_max || self.r < p.r_min || self.r > p.r_max {
            return Err(Error::domain(format!(
                "state (g={}, r={}) outside clamps g∈[{},{}] r∈[{},{}]",
                self.g, self.r, p.g_min, p.g_max, p.r_min, p.r_max
            )));
        }
        Ok(())
    }
}

/// Filament area π·r² (nm²).
#[inline]
fn filament_area_nm2(r: f64) -> f64 {
    std::f64::consts::PI * r * r
}

/// Ohmic resistance of the grown part of the filament (Ω).
#[inline]
fn filament_resistance(state: &StanfordState, params: &StanfordParams) -> f64 {
    let len = (params.l_f - state.g).max(0.0);
    params.rho_f * len / filament_area_nm2(state.r)
}

/// Prefactor of the gap hopping current (A): `J0 · π r² · exp(-g / x_T)`.
/// The area converts from nm² to m².
#[inline]
fn hop_prefactor(state: &StanfordState, params: &StanfordParams) -> f64 {
    params.j0 * filament_area_nm2(state.r) * 1.0e-18 * (-state.g / params.x_t).exp()
}

/// Terminal current of the cell at bias `v` and ambient temperature `t_k`.
///
/// The cell is a hopping gap element `I = I0 · sinh(V_gap / v0(T))` in
/// series with the ohmic filament stub; the gap voltage is solved by
/// bisection. `v0` is a thermal-voltage scale, so it grows linearly with
/// absolute temperature: `v0(T) = v0 · T / T_ref`. Odd in `v` by
/// construction.
pub fn stanford_current_at(
    state: &StanfordState,
    params: &StanfordParams,
    v: f64,
    t_k: f64,
) -> Result<f64> {
    if !v.is_finite() {
        return Err(Error::domain(format!("bias voltage {v} is not finite")));
    }
    if !(t_k > 0.0) || !t_k.is_finite() {
        return Err(Error::domain(format!("temperature {t_k} K must be > 0")));
    }
    state.check_within(params)?;
    if v == 0.0 {
        return Ok(0.0);
    }
    if v < 0.0 {
        return Ok(-stanford_current_at(state, params, -v, t_k)?);
    }
    let v0 = params.v0 * (t_k / T_REF_K);

    let i0 = hop_prefactor(state, params);
    let r_fil = filament_resistance(state, params);
    if r_fil == 0.0 {
        return Ok(i0 * (v / v0).sinh());
    }

    // Solve v_gap + r_fil·I0·sinh(v_gap/v0) = v on [0, v]; the left side is
    // strictly increasing, so plain bisection is safe.
    let f = |v_gap: f64| v_gap + r_fil * i0 * (v_gap / v0).sinh() - v;
    let mut lo = 0.0;
    let mut hi = v;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= f64::EPSILON * v {
            break;
        }
    }
    let v_gap = 0.5 * (lo + hi);
    Ok(i0 * (v_gap / v0).sinh())
}

/// [`stanford_current_at`] at the reference temperature (27 °C).
pub fn stanford_current(state: &StanfordState, params: &StanfordParams, v: f64) -> Result<f64> {
    stanford_current_at(state, params, v, T_REF_K)
}

/// Read resistance `v_probe / I(v_probe)` at ambient temperature `t_k`.
///
/// `v_probe` must be nonzero and at most `v_read_max` in magnitude; the
/// result is even in `v_probe` because the current is odd.
pub fn effective_resistance_at(
    state: &StanfordState,
    params: &StanfordParams,
    v_probe: f64,
    t_k: f64,
) -> Result<f64> {
    if v_probe == 0.0 || !v_probe.is_finite() {
        return Err(Error::domain(format!(
            "probe voltage {v_probe} must be nonzero and finite"
        )));
    }
    if v_probe.abs() > params.v_read_max {
        return Err(Error::domain(format!(
            "probe voltage {} above read limit {}",
            v_probe, params.v_read_max
        )));
    }
    let i = stanford_current_at(state, params, v_probe, t_k)?;
    if i == 0.0 {
        return Err(Error::Singularity(format!(
            "zero current at probe voltage {v_probe} (g={}, r={})",
            state.g, state.r
        )));
    }
    let r = v_probe / i;
    if !(r.is_finite() && r > 0.0) {
        return Err(Error::Singularity(format!(
            "non-finite resistance at g={}",
            state.g
        )));
    }
    Ok(r)
}

/// [`effective_resistance_at`] at the reference temperature (27 °C).
pub fn effective_resistance(
    state: &StanfordState,
    params: &StanfordParams,
    v_probe: f64,
) -> Result<f64> {
    effective_resistance_at(state, params, v_probe, T_REF_K)
}

/// Keeps sinh arguments representable; once a drift step saturates the
/// clamp bounds anyway, the exact magnitude is irrelevant.
const MAX_SINH_ARG: f64 = 700.0;

/// Drift speed shared by the gap and radius laws (nm/s), signed by the
/// sinh of the field term: positive bias gives a positive speed.
fn drift_speed(params: &StanfordParams, v: f64, t_k: f64) -> f64 {
    let arrhenius = (-params.ea * Q / (KB * t_k)).exp();
    let arg = (params.gamma0 * Q * v / (params.x_t * KB * t_k)).clamp(-MAX_SINH_ARG, MAX_SINH_ARG);
    params.a0 * params.f0 * arrhenius * arg.sinh()
}

/// One explicit Euler-Maruyama step of the gap/radius dynamics.
///
/// Draws two Gaussians (gap first, then radius) from `noise`, so the result
/// is a pure function of `(state, v, dt, t_k, stream position)`.
pub fn step_state(
    state: &StanfordState,
    params: &StanfordParams,
    v: f64,
    dt: f64,
    t_k: f64,
    noise: &mut NoiseStream,
) -> Result<StanfordState> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(Error::domain(format!("time step dt={dt} must be > 0")));
    }
    if !(t_k > 0.0) || !t_k.is_finite() {
        return Err(Error::domain(format!("temperature {t_k} K must be > 0")));
    }
    if !v.is_finite() {
        return Err(Error::domain(format!("bias voltage {v} is not finite")));
    }
    let speed = drift_speed(params, v, t_k);
    let sqrt_dt = dt.sqrt();
    let chi_g = noise.next_gaussian();
    let chi_r = noise.next_gaussian();
    let g =
        (state.g - speed * dt + params.delta_g * chi_g * sqrt_dt).clamp(params.g_min, params.g_max);
    let r =
        (state.r + speed * dt + params.delta_r * chi_r * sqrt_dt).clamp(params.r_min, params.r_max);
    Ok(StanfordState { g, r })
}

/// A pulse train applied by [`reset_to_random_state`]: a list of
/// `(voltage, step count)` segments at fixed `dt` and temperature.
#[derive(Debug, Clone, PartialEq)]
pub struct ResetPulseTrain {
    pub pulses: Vec<(f64, u32)>,
    pub dt: f64,
    pub t_k: f64,
}

impl Default for ResetPulseTrain {
    fn default() -> Self {
        // A short low-bias settling pulse pulls the state strictly inside
        // the clamp bounds before the zero-bias accumulation phase, so the
        // accumulated noise is never truncated by a clamp.
        ResetPulseTrain {
            pulses: vec![(0.05, 200), (0.0, 800)],
            dt: 1.0e-9,
            t_k: T_REF_K,
        }
    }
}

impl ResetPulseTrain {
    pub fn total_steps(&self) -> u64 {
        self.pulses.iter().map(|&(_, n)| n as u64).sum()
    }

    /// Noise variance `Σ delta² · dt` accumulated over the whole train for
    /// a given amplitude.
    pub fn accumulated_variance(&self, delta: f64) -> f64 {
        delta * delta * self.dt * self.total_steps() as f64
    }
}

/// Drive a fresh device through the reset pulse train so it settles into a
/// noise-determined state. Identical `(params, train, seed)` give the same
/// state; with nonzero noise amplitudes, distinct seeds practically always
/// give distinct states.
pub fn reset_to_random_state(
    params: &StanfordParams,
    train: &ResetPulseTrain,
    noise: &mut NoiseStream,
) -> Result<StanfordState> {
    let mut state = params.initial_state();
    for &(v, steps) in &train.pulses {
        for _ in 0..steps {
            state = step_state(&state, params, v, train.dt, train.t_k, noise)?;
        }
    }
    Ok(state)
}
