//! Behavioral simulation and evaluation toolkit for memristor-based
//! arbiter PUFs.
//!
//! The crate is organized around the experiment pipeline:
//!
//! * [`device`] — memristive device models: a linear ion-drift baseline and
//!   a bipolar RRAM model with stochastic gap/radius evolution.
//! * [`apuf`] — the 1T1M arbiter PUF delay line: challenge/response data
//!   model, the analytic sign-of-scalar-product response, and the
//!   structural arrival-time race.
//! * [`variation`] — process-variation and operating-environment sampling
//!   used to create chip populations.
//! * [`montecarlo`] — the deterministic, parallel Monte Carlo experiment
//!   engine with counter-based noise streams.
//! * [`metrics`] — PUF quality metrics (uniqueness, reliability,
//!   uniformity, bit-aliasing) computed with exact rational arithmetic.
//! * [`config`], [`crpfile`], [`report`] — the flat key-value
//!   configuration format, challenge-response dataset persistence, and
//!   report rendering shared with the CLI.
//!
//! Everything is a pure function of explicit inputs plus seeded
//! [`rng::NoiseStream`]s, so identical seeds reproduce identical outputs
//! regardless of thread count.
//!
//! Sampling a small population and scoring its uniqueness:
//!
//! ```
//! use pufbench_core::apuf::{evaluate_crp_set, ApufDesign, Challenge};
//! use pufbench_core::metrics::{uniqueness, ResponseMatrix};
//! use pufbench_core::montecarlo::derive_stream;
//! use pufbench_core::variation::{sample_instance, Environment, VariationSpec};
//!
//! let design = ApufDesign::default();
//! let profile = VariationSpec::paper_shape_defaults();
//! let challenges = Challenge::enumerate_all(8)?;
//! let rows: Vec<Vec<bool>> = (0..8)
//!     .map(|chip| {
//!         let inst = sample_instance(&design, &profile, &derive_stream(1, chip)).unwrap();
//!         evaluate_crp_set(&inst, &challenges, &Environment::nominal())
//!             .unwrap()
//!             .records
//!             .iter()
//!             .flat_map(|r| r.word.bits.iter().map(|b| b.logic))
//!             .collect()
//!     })
//!     .collect();
//! let u = uniqueness(&ResponseMatrix::new(rows, "demo")?)?;
//! assert!((u.value() - 50.0).abs() < 15.0);
//! # Ok::<(), pufbench_core::Error>(())
//! ```

// `!(x > 0.0)` is the NaN-rejecting validation form; `x <= 0.0` would wave
// NaN through.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod apuf;
pub mod config;
pub mod crpfile;
pub mod device;
mod error;
pub mod metrics;
pub mod montecarlo;
pub mod report;
pub mod rng;
pub mod variation;

pub use error::{Error, Result};
