//! Simulation of closed-system quantum annealing on random long-range Ising
//! spin glasses, comparing the transverse-field annealer with variants that
//! add ferromagnetic, antiferromagnetic or mixed-sign `σˣσˣ` driver terms.

pub mod dynamics;
pub mod ensemble;
pub mod error;
pub mod instance;
pub mod lanczos;
pub mod linalg;
pub mod operators;
pub mod rng;
pub mod spectrum;

pub use dynamics::{
    convergence_study, initial_state, propagate, success_probability, PropagationResult,
};
pub use ensemble::{
    build_report, classify_affected, enhancement_ratio, enhancement_values, percentile, EnsembleReport,
    InstanceId, RunRecord, RunStatus,
};
pub use error::{AnnealError, Result};
pub use instance::{
    brute_force_ground, classical_energy, generate_instance, parse_instance, parse_instances,
    serialize_instance, ClassicalSolution, ProblemInstance,
};
pub use operators::{
    apply_hamiltonian, build_dense, is_stoquastic, schedule_coeffs, AnnealSpec, AnnealingHamiltonian,
    Driver, DriverKind, Gauge, MixedSigns, ScheduleCoeffs, StateVector, StoquasticVerdict,
};
pub use spectrum::{
    count_anticrossings, lowest_eigs, min_gap, trace_spectrum, GapStats, SpectrumTrace,
};
