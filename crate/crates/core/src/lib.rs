//! Quantized phase and modulus observables built from the positive discrete
//! series of SO↑(1,2) and its covering groups.
//!
//! The crate works with finite compressions of the infinite-dimensional
//! operators in the number basis `|k,n⟩`, the eigenbasis of the compact
//! generator `K₃`:
//!
//! - [`specfun`]: log-Gamma and modified Bessel functions `I_ν`, `K_ν`.
//! - [`repalg`]: truncated generator matrices `K₃`, `K±`, `K₁`, `K₂` and
//!   algebra checks on the interior window.
//! - [`phaseops`]: the self-adjoint `cos φ` / `sin φ` operators, their
//!   diagonal identities and spectra.
//! - [`bgstates`]: Barut–Girardello coherent states and the spectral-bound
//!   scan over the Bargmann index `k`.
//! - [`fockreal`]: bosonic Fock-space realizations (Holstein–Primakoff,
//!   squared boson, two-mode) and the Dirac / Susskind–Glogower operators.
//! - [`nfm`]: classical interference observables and their quantum
//!   reconstruction from intensity readings.
//!
//! Supporting numerics live in [`quad`] (adaptive Gauss–Kronrod) and
//! [`tridiag`] (symmetric tridiagonal eigenvalues); [`export`] writes CSV and
//! JSON, and [`verify`] runs the invariant self-checks.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bgstates;
pub mod error;
pub mod export;
pub mod fockreal;
pub mod nfm;
pub mod phaseops;
pub mod quad;
pub mod repalg;
pub mod specfun;
pub mod tridiag;
pub mod verify;

pub use bgstates::{BgState, ScanResult, Verdict};
pub use error::{Error, Result};
pub use fockreal::{FockOperator, Realization, TwoModeBasisIndex};
pub use nfm::{ClassicalConfig, InterferenceReading, ReconstructionResult};
pub use num_complex::Complex64;
pub use phaseops::PhaseOperatorPair;
pub use repalg::{GroupTag, NumberState, RepLabel, TruncatedOperator};
pub use specfun::EvalPolicy;
