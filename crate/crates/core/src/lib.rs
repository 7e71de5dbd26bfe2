//! Pseudospectral toolkit for travelling waves of the generalized Benjamin
//! equation `u_t + ∂ₓ((D−1)²u + ωu − N(u)) = 0`.
//!
//! The pipeline runs grid → profile solve → scalar functionals → linearized
//! operator → KdV-type spectrum → time evolution cross-checks.

pub mod error;
pub mod evolution;
pub mod functionals;
pub mod grid;
pub mod io;
pub mod linearized;
pub mod solver;
pub mod stability;
pub mod symbols;

pub use error::{Error, Result};
pub use evolution::{
    evolve, perturbation_experiment, EvolveConfig, EvolveResult, GrowthReport, HaltReason,
    PerturbationMode, Stepper,
};
pub use functionals::{
    gn_quotient, instability_margin, invariants, omega_from_alpha, physical_to_normalized,
    pohozaev_residuals, sobolev_quotient, Invariants, Nonlinearity, PhysicalParams,
    PohozaevResiduals, WaveParams,
};
pub use grid::{Field, Grid};
pub use linearized::{
    assemble_lplus, dprime, eta_test, kernel_residual, morse_index, EtaReport, GroundStateReport,
    OperatorMatrix,
};
pub use solver::{
    decay_constant, maximize_quotient, solve_profile, sweep_alpha, DecayReport, InitialGuess,
    MaximizerReport, Problem, Route, SolverConfig, SweepTable, WaveProfile,
};
pub use stability::{
    index_count, kdv_spectrum, verdict, IndexReport, SpectrumReport, UnstableMode, Verdict,
    VerdictReport,
};
pub use symbols::{apply_symbol, greens_function, spectral_bump, SymbolKind};
