//! Simulation and analysis of periodically kicked spin-1/2 chains with
//! power-law `1/r^α` couplings.
//!
//! The crate covers the whole pipeline from a spin coherent state to the
//! quantities used to diagnose Floquet thermalization:
//!
//! - [`spin`]: parameters, basis conventions, coherent states and collective
//!   spin operators on raw state vectors.
//! - [`floquet`]: the one-period evolution operator, applied in place in
//!   `O(N·2^N)` through Walsh–Hadamard conjugation, or materialized densely.
//! - [`observables`]: half-chain entanglement entropy, time averages and
//!   random-state reference values.
//! - [`symmetry`]: Z-parity and bit-reversal sectors.
//! - [`spectral`]: eigenphases, level-spacing ratios and the effective
//!   dimension of an initial state.
//! - [`fermion`]: a Jordan–Wigner free-fermion solution of the
//!   nearest-neighbour (kicked Ising) limit, used as an independent oracle.
//! - [`lab`]: experiment configuration, sweeps and CSV/JSON output.
//!
//! # Basis convention
//!
//! A state on `N` spins is a vector of `2^N` amplitudes. Bit `b` of a basis
//! index describes spin `b + 1` (site 1 is the least significant bit), and a
//! cleared bit is the `σᶻ = +1` state `|0⟩`.
//!
//! # Parallelism
//!
//! With the default `parallel` feature the hot kernels run on rayon. Every
//! kernel also has a sequential path selected through [`Exec`]; results are
//! bit-identical between the two because reductions are always combined in a
//! fixed chunk order.

pub mod error;
pub mod exec;
pub mod fermion;
pub mod floquet;
pub mod lab;
pub mod linalg;
pub mod observables;
pub mod spectral;
pub mod spin;
pub mod symmetry;
pub mod wht;

pub use error::{Error, Result};
pub use exec::Exec;
pub use num_complex::Complex64;
