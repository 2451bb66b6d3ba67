//! Spectral and equilibration engine for the SU(2), d = 2 bosonic matrix
//! model in its local three-register form.
//!
//! The model lives on `L²(ℝ⁺) ⊗ L²(ℝ⁺) ⊗ l²`: two radial half-line registers
//! and one angular-momentum register. This crate builds the truncated
//! Hamiltonian `4H`, the conserved SO(2) charge `Q`, and the size observable
//! as matrix-free Kronecker-term operators, solves for low-lying and full
//! spectra, classifies states by charge sector, fits Regge/Chew-Frautschi
//! trajectories, and evaluates equilibration bounds (effective dimensions,
//! micro-canonical Haar statistics, slow observables, subsystem trace-norm
//! bounds). A brute-force construction in the original six-coordinate
//! oscillator basis with explicit gauge-singlet projection serves as an
//! independent cross-check of the whole reduction.
//!
//! The crate is `no_std` (with `alloc`); all floating-point math goes through
//! `libm`. File formats, plotting and the command-line driver live in the
//! companion crate `ymqm-cli`.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod basis;
pub mod eigen;
pub mod equilibration;
pub mod error;
pub mod linalg;
pub mod model;
pub mod oracle;
pub mod quadrature;
pub mod rng;
pub mod spectrum;
pub mod tensor;

mod math;

pub use error::{Error, Result};
