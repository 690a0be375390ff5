//! The 1T1M arbiter PUF delay line.
//!
//! An instance is two racing delay lines of `n` stages. Each stage holds a
//! memristor with an NMOS switch in parallel; the challenge bit of the
//! stage decides whether the switch shunts the memristor (bit = 1) or
//! leaves it in the signal path (bit = 0). After the challenge phase fixes
//! every stage's effective resistance, a pulse races down both lines and an
//! arbiter at the final stage (or a latch at each tap, for multi-response
//! topologies) records which edge arrived first.
//!
//! Two response paths are implemented and cross-checked:
//!
//! * [`analytic_response`] — the sign of the scalar product between the
//!   challenge-dependent weight vector (drain capacitance times per-stage
//!   resistance difference) and the position vector `(n, n-1, …, 1)`.
//! * [`structural_response`] — an arrival-time race over the RC ladder.
//!   Stage `i`'s segment delay is `R_i·c_i`; an edge reaching stage `k` has
//!   accumulated every upstream segment once per stage it passed through,
//!   which reproduces the position weighting of the analytic model.
//!
//! Upper line feeds the arbiter's D input, lower line its clock; the
//! arbiter outputs logic 1 iff the D edge arrives strictly first. Logic 0
//! is bipolar −1.

use crate::device::{
    effective_resistance_at, linear_drift_resistance, LinearDriftDevice, ResetPulseTrain,
    StanfordParams, StanfordState, T_REF_K,
};
use crate::variation::Environment;
use crate::{Error, Result};

/// Nominal operating point used by the environment delay scaling.
pub const NOMINAL_TEMP_C: f64 = 27.0;
pub const NOMINAL_SUPPLY_V: f64 = 5.0;

// ---------------------------------------------------------------------------
// Challenge
// ---------------------------------------------------------------------------

/// An ordered challenge bit vector; bit 0 drives stage 0, the stage nearest
/// the pulse source.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Challenge {
    bits: Vec<bool>,
}

impl Challenge {
    pub fn new(bits: Vec<bool>) -> Result<Self> {
        if bits.is_empty() {
            return Err(Error::domain(
                "challenge must have at least one bit".to_string(),
            ));
        }
        Ok(Challenge { bits })
    }

    /// Challenge built from the low `n` bits of `index` (bit `i` of the
    /// index drives stage `i`).
    pub fn from_index(n: usize, index: u64) -> Result<Self> {
        if n == 0 || n > 64 {
            return Err(Error::domain(format!("challenge width {n} outside 1..=64")));
        }
        Ok(Challenge {
            bits: (0..n).map(|i| (index >> i) & 1 == 1).collect(),
        })
    }

    /// All `2^n` challenges in index order. Refused above 16 bits.
    pub fn enumerate_all(n: usize) -> Result<Vec<Challenge>> {
        if n == 0 {
            return Err(Error::domain("challenge width must be >= 1".to_string()));
        }
        if n > 16 {
            return Err(Error::config(format!(
                "exhaustive challenge enumeration limited to n <= 16, got {n}"
            )));
        }
        (0..(1u64 << n))
            .map(|i| Challenge::from_index(n, i))
            .collect()
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bit(&self, stage: usize) -> bool {
        self.bits[stage]
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    /// MSB-first rendering (stage n−1 first), the file convention.
    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .rev()
            .map(|&b| if b { '1' } else { '0' })
            .collect()
    }

    /// Parse the MSB-first file rendering.
    pub fn from_bit_string(s: &str) -> Result<Self> {
        let mut bits = Vec::with_capacity(s.len());
        for ch in s.chars().rev() {
            match ch {
                '0' => bits.push(false),
                '1' => bits.push(true),
                other => {
                    return Err(Error::domain(format!(
                        "invalid challenge character '{other}'"
                    )))
                }
            }
        }
        Challenge::new(bits)
    }
}

// ---------------------------------------------------------------------------
// Stages and instances
// ---------------------------------------------------------------------------

/// A memristor handle: either a live gap/radius device or the linear
/// ion-drift baseline.
#[derive(Debug, Clone, PartialEq)]
pub enum Memristor {
    Stanford {
        state: StanfordState,
        params: StanfordParams,
    },
    Linear(LinearDriftDevice),
}

impl Memristor {
    /// Read resistance of the element (Ω) at its configured read voltage
    /// and the reference temperature.
    pub fn resistance(&self) -> Result<f64> {
        self.resistance_at(T_REF_K)
    }

    /// Read resistance at ambient temperature `t_k`. The gap conduction's
    /// thermal-voltage scale tracks temperature, so two devices with
    /// different tunneling parameters shift by different amounts — the
    /// device-level part of the temperature sensitivity. Linear-drift
    /// elements are temperature-flat here (the instance-level multiplier
    /// still applies to them).
    pub fn resistance_at(&self, t_k: f64) -> Result<f64> {
        match self {
            Memristor::Stanford { state, params } => {
                effective_resistance_at(state, params, params.v_read, t_k)
            }
            Memristor::Linear(dev) => linear_drift_resistance(dev),
        }
    }

    /// An ideal fixed resistor stand-in (a fully doped linear-drift device),
    /// handy for hand-built fixtures.
    pub fn fixed(r: f64) -> Result<Self> {
        Ok(Memristor::Linear(LinearDriftDevice::new(
            1.0,
            1.0,
            r,
            r * 10.0,
        )?))
    }
}

/// One delay-line stage: the upper/lower memristors, the NMOS switch
/// on-resistances of both lines, and the shared switch drain capacitance.
#[derive(Debug, Clone, PartialEq)]
pub struct StagePair {
    pub upper: Memristor,
    pub lower: Memristor,
    /// NMOS switch drain capacitance (F).
    pub c_drain: f64,
    /// Switch on-resistances (Ω) per line; equal unless a CMOS variation
    /// profile spreads them.
    pub r_on_upper: f64,
    pub r_on_lower: f64,
}

impl StagePair {
    fn validate(&self) -> Result<()> {
        if !(self.c_drain > 0.0) {
            return Err(Error::domain(format!(
                "c_drain={} must be > 0",
                self.c_drain
            )));
        }
        if !(self.r_on_upper > 0.0 && self.r_on_lower > 0.0) {
            return Err(Error::domain(
                "switch on-resistance must be > 0".to_string(),
            ));
        }
        for m in [&self.upper, &self.lower] {
            let r = m.resistance()?;
            if !(r.is_finite() && r > 0.0) {
                return Err(Error::domain(format!(
                    "memristor resistance {r} not positive finite"
                )));
            }
        }
        Ok(())
    }
}

/// Arbiter placement.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Topology {
    /// One arbiter after the last stage.
    SingleResponse,
    /// One latch per tap; `invert[t]` swaps which line feeds that latch's
    /// D input.
    MultiResponse { taps: Vec<usize>, invert: Vec<bool> },
}

impl Topology {
    /// Multi-response topology with a tap at the end of every group of
    /// `group` stages.
    pub fn multi_every(n: usize, group: usize) -> Result<Topology> {
        if group == 0 || n == 0 || !n.is_multiple_of(group) {
            return Err(Error::config(format!(
                "stage count {n} must be a positive multiple of the group size {group}"
            )));
        }
        let taps: Vec<usize> = (1..=n / group).map(|k| k * group - 1).collect();
        let invert = vec![false; taps.len()];
        Ok(Topology::MultiResponse { taps, invert })
    }

    /// Tap stage indices for a line of `n` stages.
    pub fn taps(&self, n: usize) -> Vec<usize> {
        match self {
            Topology::SingleResponse => vec![n - 1],
            Topology::MultiResponse { taps, .. } => taps.clone(),
        }
    }

    pub fn response_width(&self, n: usize) -> usize {
        self.taps(n).len()
    }

    fn validate(&self, n: usize) -> Result<()> {
        if let Topology::MultiResponse { taps, invert } = self {
            if taps.is_empty() {
                return Err(Error::config(
                    "multi-response topology needs at least one tap",
                ));
            }
            if !taps.windows(2).all(|w| w[0] < w[1]) {
                return Err(Error::config(format!(
                    "taps {taps:?} must be strictly increasing"
                )));
            }
            if *taps.last().unwrap() != n - 1 {
                return Err(Error::config(format!(
                    "last tap must be the final stage {} (got {:?})",
                    n - 1,
                    taps
                )));
            }
            if invert.len() != taps.len() {
                return Err(Error::Dimension {
                    expected: taps.len(),
                    got: invert.len(),
                });
            }
        }
        Ok(())
    }
}

/// Sensitivity of delays to the operating environment.
///
/// The whole race is scaled by `(1 + alpha_cmos·(T_cmos − 27 °C)) ·
/// (5 V / V_supply)^beta`; the same factor also scales the NMOS switch
/// on-resistance, and `(1 + alpha_mem·(T_mem − 27 °C))` scales every
/// memristor resistance. A common multiplier preserves every sign, so
/// responses can flip only through the asymmetric paths: the shunted
/// parallel combinations of the two lines shift by different amounts, and
/// each memristor's read resistance has its own temperature response (see
/// [`Memristor::resistance_at`]).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvSensitivity {
    pub alpha_cmos_per_k: f64,
    pub alpha_mem_per_k: f64,
    pub beta_supply: f64,
}

impl Default for EnvSensitivity {
    fn default() -> Self {
        EnvSensitivity {
            alpha_cmos_per_k: 2.0e-3,
            alpha_mem_per_k: 2.0e-3,
            beta_supply: 1.0,
        }
    }
}

impl EnvSensitivity {
    /// CMOS delay multiplier for an environment.
    pub fn cmos_factor(&self, env: &Environment) -> Result<f64> {
        env.validate()?;
        let temp = 1.0 + self.alpha_cmos_per_k * (env.temp_cmos_c - NOMINAL_TEMP_C);
        let supply = (NOMINAL_SUPPLY_V / env.supply_v).powf(self.beta_supply);
        let f = temp * supply;
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::domain(format!(
                "environment {env:?} gives non-positive CMOS delay factor {f}"
            )));
        }
        Ok(f)
    }

    /// Memristor resistance multiplier for an environment.
    pub fn mem_factor(&self, env: &Environment) -> Result<f64> {
        env.validate()?;
        let f = 1.0 + self.alpha_mem_per_k * (env.temp_mem_c - NOMINAL_TEMP_C);
        if !(f > 0.0 && f.is_finite()) {
            return Err(Error::domain(format!(
                "environment {env:?} gives non-positive memristor factor {f}"
            )));
        }
        Ok(f)
    }
}

/// A sampled PUF chip.
#[derive(Debug, Clone, PartialEq)]
pub struct ApufInstance {
    pub stages: Vec<StagePair>,
    pub topology: Topology,
    pub env_sensitivity: EnvSensitivity,
    /// RC-to-delay proportionality constant (dimensionless; cancels in sign
    /// comparisons).
    pub kappa: f64,
    /// Arrival-time difference below which a latch is flagged metastable (s).
    pub metastability_window_s: f64,
}

impl ApufInstance {
    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn response_width(&self) -> usize {
        self.topology.response_width(self.stages.len())
    }

    pub fn validate(&self) -> Result<()> {
        if self.stages.is_empty() {
            return Err(Error::Empty("instance has no stages"));
        }
        if !(self.kappa > 0.0) {
            return Err(Error::domain(format!("kappa={} must be > 0", self.kappa)));
        }
        if self.metastability_window_s < 0.0 {
            return Err(Error::domain(
                "metastability window must be >= 0".to_string(),
            ));
        }
        self.topology.validate(self.stages.len())?;
        for stage in &self.stages {
            stage.validate()?;
        }
        Ok(())
    }

    /// The same chip with upper and lower lines exchanged at every stage.
    pub fn with_swapped_lines(&self) -> ApufInstance {
        let mut out = self.clone();
        for stage in &mut out.stages {
            std::mem::swap(&mut stage.upper, &mut stage.lower);
            std::mem::swap(&mut stage.r_on_upper, &mut stage.r_on_lower);
        }
        out
    }
}

/// Nominal design a population is sampled from: stage count, topology and
/// the nominal values of every per-stage element.
#[derive(Debug, Clone, PartialEq)]
pub struct ApufDesign {
    pub n_stages: usize,
    pub topology: Topology,
    pub device: StanfordParams,
    /// Nominal switch drain capacitance (F).
    pub c_drain: f64,
    /// Nominal switch on-resistance (Ω).
    pub r_on_switch: f64,
    pub kappa: f64,
    pub metastability_window_s: f64,
    pub env_sensitivity: EnvSensitivity,
    pub reset: ResetPulseTrain,
}

impl Default for ApufDesign {
    fn default() -> Self {
        ApufDesign {
            n_stages: 8,
            topology: Topology::SingleResponse,
            device: StanfordParams::default(),
            c_drain: 1.0e-15,
            r_on_switch: 1.0e3,
            kappa: std::f64::consts::LN_2,
            metastability_window_s: 1.0e-12,
            env_sensitivity: EnvSensitivity::default(),
            reset: ResetPulseTrain::default(),
        }
    }
}

impl ApufDesign {
    pub fn validate(&self) -> Result<()> {
        if self.n_stages == 0 {
            return Err(Error::config("design needs at least one stage"));
        }
        if !(self.c_drain > 0.0 && self.r_on_switch > 0.0 && self.kappa > 0.0) {
            return Err(Error::config(
                "c_drain, r_on_switch and kappa must be strictly positive",
            ));
        }
        self.device.validate()?;
        self.topology.validate(self.n_stages)
    }
}

// ---------------------------------------------------------------------------
// Responses
// ---------------------------------------------------------------------------

/// One arbiter decision. Logic 0 is bipolar −1.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ResponseBit {
    pub logic: bool,
    pub metastable: bool,
}

impl ResponseBit {
    pub fn bipolar(&self) -> i8 {
        if self.logic {
            1
        } else {
            -1
        }
    }
}

/// The bits of one evaluation, in tap order, each with its analog margin:
/// the clock-minus-D arrival-time difference in seconds (positive margins
/// decide logic 1).
#[derive(Debug, Clone, PartialEq)]
pub struct ResponseWord {
    pub bits: Vec<ResponseBit>,
    pub margins_s: Vec<f64>,
}

impl ResponseWord {
    /// MSB-first rendering (highest tap first), the file convention.
    pub fn to_bit_string(&self) -> String {
        self.bits
            .iter()
            .rev()
            .map(|b| if b.logic { '1' } else { '0' })
            .collect()
    }
}

/// One challenge → response record.
#[derive(Debug, Clone, PartialEq)]
pub struct CrpRecord {
    pub challenge: Challenge,
    pub word: ResponseWord,
}

/// An ordered table of challenge-response records for one instance under
/// one environment.
#[derive(Debug, Clone, PartialEq)]
pub struct CrpSet {
    pub n_challenge_bits: usize,
    pub n_response_bits: usize,
    pub records: Vec<CrpRecord>,
    /// Challenges whose evaluation failed, with the reason. Kept out of the
    /// record table so persistence stays rectangular.
    pub flagged: Vec<(Challenge, String)>,
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// The position vector `(n, n−1, …, 1)`.
pub fn phi_vector(n: usize) -> Result<Vec<u64>> {
    if n == 0 {
        return Err(Error::domain("phi vector needs n >= 1".to_string()));
    }
    Ok((1..=n as u64).rev().collect())
}

/// Parallel resistance of a memristor and its turned-on switch.
#[inline]
fn parallel(a: f64, b: f64) -> f64 {
    a * b / (a + b)
}

/// Per-stage element values resolved against an environment.
struct StageLoads {
    r_mem_upper: Vec<f64>,
    r_mem_lower: Vec<f64>,
    r_sh_upper: Vec<f64>,
    r_sh_lower: Vec<f64>,
    c_drain: Vec<f64>,
    /// Whole-race CMOS delay multiplier of the resolved environment.
    global_scale: f64,
}

impl StageLoads {
    fn resolve(inst: &ApufInstance, env: &Environment) -> Result<StageLoads> {
        let mu_cmos = inst.env_sensitivity.cmos_factor(env)?;
        let mu_mem = inst.env_sensitivity.mem_factor(env)?;
        let n = inst.stages.len();
        let mut loads = StageLoads {
            r_mem_upper: Vec::with_capacity(n),
            r_mem_lower: Vec::with_capacity(n),
            r_sh_upper: Vec::with_capacity(n),
            r_sh_lower: Vec::with_capacity(n),
            c_drain: Vec::with_capacity(n),
            global_scale: mu_cmos,
        };
        let t_mem_k = env.temp_mem_k();
        for stage in &inst.stages {
            loads
                .r_mem_upper
                .push(stage.upper.resistance_at(t_mem_k)? * mu_mem);
            loads
                .r_mem_lower
                .push(stage.lower.resistance_at(t_mem_k)? * mu_mem);
            loads.r_sh_upper.push(stage.r_on_upper * mu_cmos);
            loads.r_sh_lower.push(stage.r_on_lower * mu_cmos);
            loads.c_drain.push(stage.c_drain);
        }
        Ok(loads)
    }

    /// Effective (upper, lower) stage resistances under one challenge bit:
    /// bit = 1 shunts the memristor with the switch, bit = 0 leaves the
    /// memristor in-path.
    #[inline]
    fn effective(&self, i: usize, bit: bool) -> (f64, f64) {
        if bit {
            (
                parallel(self.r_mem_upper[i], self.r_sh_upper[i]),
                parallel(self.r_mem_lower[i], self.r_sh_lower[i]),
            )
        } else {
            (self.r_mem_upper[i], self.r_mem_lower[i])
        }
    }
}

/// Challenge-dependent weight vector: component `i` is
/// `c_drain_i · (R_upper,i − R_lower,i)` at the nominal environment, in
/// seconds per position unit.
pub fn weight_vector(inst: &ApufInstance, challenge: &Challenge) -> Result<Vec<f64>> {
    if challenge.len() != inst.stages.len() {
        return Err(Error::Dimension {
            expected: inst.stages.len(),
            got: challenge.len(),
        });
    }
    let loads = StageLoads::resolve(inst, &Environment::nominal())?;
    Ok((0..inst.stages.len())
        .map(|i| {
            let (ru, rl) = loads.effective(i, challenge.bit(i));
            loads.c_drain[i] * (ru - rl)
        })
        .collect())
}

/// Sign-of-scalar-product response: `−sgn(wᵀ·Φ)` in bipolar encoding. An
/// exactly zero product resolves to logic 0 with the metastable flag set.
pub fn analytic_response(inst: &ApufInstance, challenge: &Challenge) -> Result<ResponseBit> {
    let w = weight_vector(inst, challenge)?;
    let phi = phi_vector(w.len())?;
    let dot: f64 = w.iter().zip(&phi).map(|(wi, &p)| wi * p as f64).sum();
    Ok(ResponseBit {
        logic: dot < 0.0,
        metastable: dot == 0.0,
    })
}

/// Arrival-time race down both delay lines.
///
/// Challenge phase: the challenge bits fix each stage's effective
/// resistance (bit = 1 shunts the memristor with its switch). Response
/// phase: an edge walks down each line; entering stage `i` adds that
/// stage's segment delay `R_i·c_i` to the line's per-stage charging term,
/// which accumulates into the arrival time at every subsequent stage. At
/// each tap the latch compares cumulative arrival times; margin =
/// t_clock − t_D (lower minus upper), scaled by `kappa` and the
/// environment's CMOS delay factor.
pub fn structural_response(
    inst: &ApufInstance,
    challenge: &Challenge,
    env: &Environment,
) -> Result<ResponseWord> {
    if challenge.len() != inst.stages.len() {
        return Err(Error::Dimension {
            expected: inst.stages.len(),
            got: challenge.len(),
        });
    }
    inst.topology.validate(inst.stages.len())?;
    let loads = StageLoads::resolve(inst, env)?;
    structural_response_with_loads(inst, challenge, &loads)
}

fn structural_response_with_loads(
    inst: &ApufInstance,
    challenge: &Challenge,
    loads: &StageLoads,
) -> Result<ResponseWord> {
    let n = inst.stages.len();
    let taps = inst.topology.taps(n);
    let invert: Vec<bool> = match &inst.topology {
        Topology::MultiResponse { invert, .. } => invert.clone(),
        Topology::SingleResponse => vec![false],
    };

    let mut seg_upper = 0.0; // running per-stage charging term Σ R·c
    let mut seg_lower = 0.0;
    let mut t_upper = 0.0; // cumulative arrival time (double prefix sum)
    let mut t_lower = 0.0;
    let mut bits = Vec::with_capacity(taps.len());
    let mut margins = Vec::with_capacity(taps.len());
    let mut tap_cursor = 0;
    for i in 0..n {
        let (ru, rl) = loads.effective(i, challenge.bit(i));
        seg_upper += ru * loads.c_drain[i];
        seg_lower += rl * loads.c_drain[i];
        t_upper += seg_upper;
        t_lower += seg_lower;
        if tap_cursor < taps.len() && taps[tap_cursor] == i {
            let mut margin = inst.kappa * loads.global_scale * (t_lower - t_upper);
            if invert[tap_cursor] {
                margin = -margin;
            }
            bits.push(ResponseBit {
                logic: margin > 0.0,
                metastable: margin.abs() < inst.metastability_window_s,
            });
            margins.push(margin);
            tap_cursor += 1;
        }
    }
    Ok(ResponseWord {
        bits,
        margins_s: margins,
    })
}

/// Evaluate an ordered challenge list into a [`CrpSet`]. Per-challenge
/// failures are collected into `flagged` without aborting the batch.
pub fn evaluate_crp_set(
    inst: &ApufInstance,
    challenges: &[Challenge],
    env: &Environment,
) -> Result<CrpSet> {
    if challenges.is_empty() {
        return Err(Error::Empty("challenge list"));
    }
    let n = inst.stages.len();
    if !challenges.iter().all(|c| c.len() == n) {
        return Err(Error::domain(format!(
            "all challenges must have uniform length {n}"
        )));
    }
    inst.validate()?;
    let loads = StageLoads::resolve(inst, env)?;
    let mut set = CrpSet {
        n_challenge_bits: n,
        n_response_bits: inst.response_width(),
        records: Vec::with_capacity(challenges.len()),
        flagged: Vec::new(),
    };
    for challenge in challenges {
        match structural_response_with_loads(inst, challenge, &loads) {
            Ok(word) => set.records.push(CrpRecord {
                challenge: challenge.clone(),
                word,
            }),
            Err(e) => set.flagged.push((challenge.clone(), e.to_string())),
        }
    }
    Ok(set)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::NoiseStream;

    fn fixed_instance(upper: &[f64], lower: &[f64]) -> ApufInstance {
        let stages = upper
            .iter()
            .zip(lower)
            .map(|(&u, &l)| StagePair {
                upper: Memristor::fixed(u).unwrap(),
                lower: Memristor::fixed(l).unwrap(),
                c_drain: 1.0e-15,
                r_on_upper: 1.0e3,
                r_on_lower: 1.0e3,
            })
            .collect();
        ApufInstance {
            stages,
            topology: Topology::SingleResponse,
            env_sensitivity: EnvSensitivity::default(),
            kappa: std::f64::consts::LN_2,
            metastability_window_s: 1.0e-12,
        }
    }

    /// Instance with uniformly random resistances and capacitances, no
    /// variation machinery involved.
    fn random_instance(n: usize, noise: &mut NoiseStream) -> ApufInstance {
        let mut inst = fixed_instance(&vec![1.0; n], &vec![1.0; n]);
        for stage in &mut inst.stages {
            let r = |noise: &mut NoiseStream| 1.0e4 + 9.9e5 * noise.next_uniform();
            stage.upper = Memristor::fixed(r(noise)).unwrap();
            stage.lower = Memristor::fixed(r(noise)).unwrap();
            stage.c_drain = 1.0e-15 * (0.9 + 0.2 * noise.next_uniform());
            stage.r_on_upper = 1.0e3 * (0.9 + 0.2 * noise.next_uniform());
            stage.r_on_lower = 1.0e3 * (0.9 + 0.2 * noise.next_uniform());
        }
        inst
    }

    #[test]
    fn phi_vector_examples() {
        assert_eq!(phi_vector(4).unwrap(), vec![4, 3, 2, 1]);
        assert_eq!(phi_vector(1).unwrap(), vec![1]);
        assert_eq!(phi_vector(8).unwrap(), vec![8, 7, 6, 5, 4, 3, 2, 1]);
        assert!(phi_vector(0).is_err());
    }

    #[test]
    fn phi_vector_is_strictly_decreasing_and_positive() {
        for n in 1..=32 {
            let phi = phi_vector(n).unwrap();
            assert_eq!(phi.len(), n);
            assert!(phi.iter().all(|&p| p >= 1));
            assert!(phi.windows(2).all(|w| w[0] > w[1]));
        }
    }

    #[test]
    fn challenge_bit_string_round_trip() {
        let c = Challenge::from_index(8, 0b0000_0001).unwrap();
        // Stage 0 carries the 1, and renders last (MSB-first).
        assert_eq!(c.to_bit_string(), "00000001");
        assert!(c.bit(0));
        assert_eq!(Challenge::from_bit_string("00000001").unwrap(), c);
        assert!(Challenge::from_bit_string("01x").is_err());
        assert!(Challenge::enumerate_all(17).is_err());
        assert_eq!(Challenge::enumerate_all(8).unwrap().len(), 256);
    }

    #[test]
    fn weight_vector_zero_for_identical_lines() {
        let inst = fixed_instance(&[10e3, 20e3, 5e3], &[10e3, 20e3, 5e3]);
        for c in Challenge::enumerate_all(3).unwrap() {
            let w = weight_vector(&inst, &c).unwrap();
            assert!(w.iter().all(|&x| x == 0.0));
        }
    }

    #[test]
    fn weight_vector_hand_example() {
        // Upper 10 kΩ / 20 kΩ, lower 12 kΩ / 20 kΩ, c = 1 fF, challenge 00:
        // w = (c·(10k−12k), c·(20k−20k)) = (−2·10³·10⁻¹⁵, 0) s.
        let inst = fixed_instance(&[10e3, 20e3], &[12e3, 20e3]);
        let c = Challenge::new(vec![false, false]).unwrap();
        let w = weight_vector(&inst, &c).unwrap();
        assert!((w[0] - (-2.0e3 * 1.0e-15)).abs() < 1e-24);
        assert_eq!(w[1], 0.0);
    }

    #[test]
    fn weight_vector_scales_with_c_drain() {
        let mut inst = fixed_instance(&[10e3, 20e3], &[12e3, 15e3]);
        let c = Challenge::new(vec![true, false]).unwrap();
        let w1 = weight_vector(&inst, &c).unwrap();
        for stage in &mut inst.stages {
            stage.c_drain *= 3.0;
        }
        let w3 = weight_vector(&inst, &c).unwrap();
        for (a, b) in w1.iter().zip(&w3) {
            assert!((b - 3.0 * a).abs() <= 1e-12 * a.abs().max(1e-30));
        }
    }

    #[test]
    fn weight_vector_dimension_mismatch() {
        let inst = fixed_instance(&[10e3, 20e3], &[12e3, 20e3]);
        let c = Challenge::new(vec![true]).unwrap();
        assert!(matches!(
            weight_vector(&inst, &c),
            Err(Error::Dimension {
                expected: 2,
                got: 1
            })
        ));
    }

    #[test]
    fn analytic_sign_forced_and_odd() {
        // Every ΔM > 0 under challenge 00 → wᵀΦ > 0 → bipolar −1 (logic 0).
        let inst = fixed_instance(&[12e3, 21e3], &[10e3, 20e3]);
        let c = Challenge::new(vec![false, false]).unwrap();
        let bit = analytic_response(&inst, &c).unwrap();
        assert_eq!(bit.bipolar(), -1);
        assert!(!bit.logic);
        // Swapping every pair flips the response.
        let swapped = inst.with_swapped_lines();
        let bit2 = analytic_response(&swapped, &c).unwrap();
        assert_eq!(bit2.bipolar(), 1);
    }

    #[test]
    fn analytic_two_stage_truth_table() {
        // Upper (10k, 20k), lower (12k, 15k), c = 1 fF, switch 1 kΩ.
        // By hand, with Φ = (2, 1) and shunted values
        //   10k∥1k = 909.0909…, 12k∥1k = 923.0769…  (ΔM₁ = −13.986…)
        //   20k∥1k = 952.3809…, 15k∥1k = 937.5      (ΔM₂ = +14.880…)
        // challenge 00: 2·(−2000) + (+5000) = +1000   → logic 0
        // challenge 01 (stage0 shunted): 2·(−13.99) + 5000 > 0 → logic 0
        // challenge 10 (stage1 shunted): 2·(−2000) + 14.88 < 0 → logic 1
        // challenge 11: 2·(−13.99) + 14.88 < 0            → logic 1
        let inst = fixed_instance(&[10e3, 20e3], &[12e3, 15e3]);
        let expect = [
            (vec![false, false], false),
            (vec![true, false], false),
            (vec![false, true], true),
            (vec![true, true], true),
        ];
        for (bits, logic) in expect {
            let c = Challenge::new(bits.clone()).unwrap();
            let got = analytic_response(&inst, &c).unwrap();
            assert_eq!(got.logic, logic, "challenge {bits:?}");
        }
    }

    #[test]
    fn structural_symmetric_instance_is_metastable_zero() {
        let inst = fixed_instance(&[10e3, 20e3, 30e3], &[10e3, 20e3, 30e3]);
        for c in Challenge::enumerate_all(3).unwrap() {
            let word = structural_response(&inst, &c, &Environment::nominal()).unwrap();
            assert_eq!(word.margins_s, vec![0.0]);
            assert!(word.bits[0].metastable);
            assert!(!word.bits[0].logic);
        }
    }

    #[test]
    fn structural_agrees_with_analytic_exhaustively() {
        let mut noise = NoiseStream::from_seed(0x5eed);
        for n in [2usize, 4, 6, 8] {
            for _ in 0..10 {
                let inst = random_instance(n, &mut noise);
                for c in Challenge::enumerate_all(n).unwrap() {
                    let a = analytic_response(&inst, &c).unwrap();
                    let s = structural_response(&inst, &c, &Environment::nominal()).unwrap();
                    assert_eq!(
                        a.logic,
                        s.bits[0].logic,
                        "disagreement at n={n}, challenge {}",
                        c.to_bit_string()
                    );
                }
            }
        }
    }

    #[test]
    fn structural_is_deterministic() {
        let mut noise = NoiseStream::from_seed(11);
        let inst = random_instance(6, &mut noise);
        let env = Environment {
            temp_cmos_c: 60.0,
            temp_mem_c: 10.0,
            supply_v: 4.6,
        };
        let c = Challenge::from_index(6, 0b101101).unwrap();
        let w1 = structural_response(&inst, &c, &env).unwrap();
        let w2 = structural_response(&inst, &c, &env).unwrap();
        assert_eq!(w1, w2);
        assert_eq!(w1.margins_s[0].to_bits(), w2.margins_s[0].to_bits());
    }

    #[test]
    fn structural_swap_lines_negates_margin() {
        let mut noise = NoiseStream::from_seed(12);
        let inst = random_instance(5, &mut noise);
        let swapped = inst.with_swapped_lines();
        for c in Challenge::enumerate_all(5).unwrap() {
            let a = structural_response(&inst, &c, &Environment::nominal()).unwrap();
            let b = structural_response(&swapped, &c, &Environment::nominal()).unwrap();
            assert_eq!(a.margins_s[0], -b.margins_s[0]);
            if a.margins_s[0] != 0.0 {
                assert_eq!(a.bits[0].bipolar(), -b.bits[0].bipolar());
            }
        }
    }

    #[test]
    fn multi_response_final_tap_matches_single() {
        let mut noise = NoiseStream::from_seed(13);
        let mut inst = random_instance(8, &mut noise);
        let single: Vec<ResponseBit> = Challenge::enumerate_all(8)
            .unwrap()
            .iter()
            .map(|c| {
                structural_response(&inst, c, &Environment::nominal())
                    .unwrap()
                    .bits[0]
            })
            .collect();
        inst.topology = Topology::MultiResponse {
            taps: vec![7],
            invert: vec![false],
        };
        let multi: Vec<ResponseBit> = Challenge::enumerate_all(8)
            .unwrap()
            .iter()
            .map(|c| {
                structural_response(&inst, c, &Environment::nominal())
                    .unwrap()
                    .bits[0]
            })
            .collect();
        assert_eq!(single, multi);
    }

    #[test]
    fn multi_response_word_shape() {
        let mut noise = NoiseStream::from_seed(14);
        let mut inst = random_instance(8, &mut noise);
        inst.topology = Topology::multi_every(8, 2).unwrap();
        assert_eq!(inst.topology.taps(8), vec![1, 3, 5, 7]);
        let c = Challenge::from_index(8, 0xA5).unwrap();
        let word = structural_response(&inst, &c, &Environment::nominal()).unwrap();
        assert_eq!(word.bits.len(), 4);
        assert_eq!(word.margins_s.len(), 4);
        assert_eq!(word.to_bit_string().len(), 4);
    }

    #[test]
    fn tap_validation() {
        assert!(Topology::multi_every(8, 3).is_err());
        let mut inst = fixed_instance(&[1e4, 2e4], &[1.5e4, 2.5e4]);
        inst.topology = Topology::MultiResponse {
            taps: vec![0],
            invert: vec![false],
        };
        assert!(inst.validate().is_err(), "last tap must be final stage");
        inst.topology = Topology::MultiResponse {
            taps: vec![1, 1],
            invert: vec![false, false],
        };
        assert!(inst.validate().is_err(), "taps must strictly increase");
    }

    #[test]
    fn evaluate_crp_set_batch() {
        let mut noise = NoiseStream::from_seed(15);
        let inst = random_instance(8, &mut noise);
        let challenges = Challenge::enumerate_all(8).unwrap();
        let set = evaluate_crp_set(&inst, &challenges, &Environment::nominal()).unwrap();
        assert_eq!(set.records.len(), 256);
        assert_eq!(set.n_challenge_bits, 8);
        assert_eq!(set.n_response_bits, 1);
        assert!(set.flagged.is_empty());
        assert!(evaluate_crp_set(&inst, &[], &Environment::nominal()).is_err());
        let ragged = vec![
            Challenge::from_index(8, 0).unwrap(),
            Challenge::from_index(7, 0).unwrap(),
        ];
        assert!(evaluate_crp_set(&inst, &ragged, &Environment::nominal()).is_err());
        let set2 = evaluate_crp_set(&inst, &challenges, &Environment::nominal()).unwrap();
        assert_eq!(set, set2);
    }

    #[test]
    fn environment_factors_shift_shunted_stages_asymmetrically() {
        // A hot switch changes the two parallel combinations by different
        // amounts when the memristors differ, so margins move relative to
        // each other rather than by a common factor.
        let inst = fixed_instance(&[10e3, 20e3], &[12e3, 15e3]);
        let c = Challenge::new(vec![true, true]).unwrap();
        let nominal = structural_response(&inst, &c, &Environment::nominal()).unwrap();
        let hot = Environment {
            temp_cmos_c: 120.0,
            ..Environment::nominal()
        };
        let hot_word = structural_response(&inst, &c, &hot).unwrap();
        let ratio = hot_word.margins_s[0] / nominal.margins_s[0];
        let global = inst.env_sensitivity.cmos_factor(&hot).unwrap();
        assert!(
            (ratio - global).abs() > 1e-6,
            "margin must not scale by the global factor alone (ratio {ratio}, global {global})"
        );
    }
}
