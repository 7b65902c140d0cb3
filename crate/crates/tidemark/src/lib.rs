//! Watermark embedding and detection toolkit.
//!
//! The crate models the classic watermarking game: a length-`n` covertext is
//! published either untouched (hypothesis H0) or carrying an embedded
//! watermark (hypothesis H1), and a detector with access only to empirical
//! statistics of the received sequence must decide which, with a guaranteed
//! false-positive exponent `λ`. Modules are layered bottom-up:
//!
//! - [`empirical`]: typed histograms, entropies, divergences, and exact
//!   type-class machinery over small finite alphabets;
//! - [`detect`]: acceptance regions for discrete sequences and the matching
//!   distortion-constrained embedder;
//! - [`gaussian`]: scalar sufficient statistics, closed-form optimal
//!   embedding coefficients, and threshold detectors for real-valued data;
//! - [`exponents`]: analytic false-negative exponents for the standard
//!   embedder family;
//! - [`attacks`]: attack channels between embedder and detector, the
//!   distortion-limited worst-case channel, and robust acceptance regions;
//! - [`sim`]: a deterministic Monte Carlo harness tying the pieces together.
//!
//! All information quantities are in nats. The crate is `no_std`-compatible
//! (with `alloc`); the companion CLI crate carries IO and file formats.

#![cfg_attr(not(feature = "std"), no_std)]

extern crate alloc;

pub mod attacks;
pub mod detect;
pub mod empirical;
mod error;
pub mod exponents;
pub mod gaussian;
pub mod sim;

pub use attacks::{AttackBudget, AttackEmbed, MemorylessAttack};
pub use detect::{Decision, DetectorConfig, EmbedConstraint, Variant};
pub use empirical::{Alphabet, Distortion, EmpiricalJoint, Given, MemorylessSource, Sym};
pub use error::{Error, Result};
pub use exponents::{ExponentCurve, ExponentQuery};
pub use gaussian::{EmbedSpec, EmbedStats, EmbedderKind};
pub use sim::{
    CellResult, DetectorKind, ExponentFit, FalsePositiveReport, Hypothesis, SimConfig, SimResult,
};
