//! Two-level dynamics lab.
//!
//! Simulates a driven two-level (spin-1/2) system in three equivalent
//! representations and cross-validates them:
//!
//! * [`quantum`]: the two-component Schrodinger equation `i dPsi/dt = H(t) Psi`
//!   with `H(t) = -B(t) . sigma / 2`, plus the second-order reduction of the
//!   components and restoration of `psi2` from `psi1`.
//! * [`bloch`]: the density-matrix decomposition and the precession equation
//!   `dQ/dt = -Omega x Q` for the Bloch vector.
//! * [`classical`]: the two canonical charts on the unit sphere in which the
//!   precession is Hamiltonian, the Howland autonomization of periodically and
//!   quasi-periodically driven cases, and Poincare sections.
//!
//! Drive profiles (constant, tanh step, sech pulse, periodic, quasi-periodic)
//! live in [`fields`]. For the tanh and sech pulses, [`exact`] provides
//! closed-form solutions built on the Gauss hypergeometric machinery of
//! [`special`], including scattering amplitudes and transition probabilities.
//! [`ode`] is the shared embedded Runge-Kutta integrator with dense output.
//!
//! The `examples/` directory is the guided tour; the `tldl` binary exposes the
//! same capabilities as a batch CLI with reproducible CSV/JSON output.

pub mod bloch;
pub mod classical;
pub mod cli;
pub mod exact;
pub mod fields;
pub mod ode;
pub mod quantum;
pub mod special;
