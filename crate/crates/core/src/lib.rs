//! Simulation of the EPR "Bell telephone": polarization instruments, the
//! multiport device and its single-beamsplitter equivalent, joint statistics
//! on a shared `Φ+` pair, and audits showing Bob's outcomes carry no
//! information about Alice's choices.

pub mod epr;
pub mod instruments;
pub mod linalg;
pub mod nosignal;
pub mod polarization;
pub mod rng;

pub use epr::{
    bob_outcome_mixture, conditional_bob_state, joint_statistics, phi_plus, phi_plus_vector,
    BipartiteState, EprError, JointDistribution,
};
pub use instruments::{
    all_pairings, apply_instrument, coarse_grain, ideal_michalski, identity_instrument,
    instrument_distance, same_label_pairing, simplified_analyzer, worst_case_leak, zeno_cascade,
    Branch, CascadeParams, InstrumentError, OutcomeDistribution, OutcomeLabel, OutcomeRecord,
    QuantumInstrument,
};
pub use linalg::{
    partial_trace, tensor_product, trace_distance, validate_density, DensityOperator,
    DensityReport, LinalgError, LinearObject, LinearOperator, Party, StateVector, C64,
};
pub use nosignal::{
    marginal_invariance_audit, mutual_information, run_telephone, simulate_telephone, AuditReport,
    NoSignalError, SignalingProtocol, Verdict,
};
pub use polarization::{
    half_wave_plate, jones_vector, linear_state, pbs_instrument, rotation_operator, JonesVector,
    PolarizationAngle,
};
