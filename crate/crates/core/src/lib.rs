//! Numerical pluripotential theory at desk scale.
//!
//! The crate computes pluricomplex Green's functions with prescribed
//! holomorphic singularities on model domains in C^1 and C^2, certifies the
//! supporting blow-up geometry (exceptional-divisor metrics, positivity
//! thresholds), and keeps Monge-Ampere mass / Lelong-number ledgers.
//!
//! Everything here is deterministic and allocation-only (`no_std` + `alloc`);
//! IO, configuration and the command line live in the companion CLI crate.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod blowup;
pub mod fft;
pub mod grid;
pub mod hermitian;
pub mod jet;
pub mod measure;
pub mod poly;
pub mod ray;
pub mod rng;
pub mod singularity;
pub mod solve;
pub mod stencil;
pub mod torus;

pub use grid::{ComplexGrid, DomainKind, DomainSpec, HermitianField, NodeMask};
pub use hermitian::Hermitian;
pub use singularity::{BackgroundSpec, CutoffProfile, Pole, SingularityData};
pub use solve::{Backend, GreenProblem, SolveError, SolveReport};

pub type C64 = num_complex::Complex64;
