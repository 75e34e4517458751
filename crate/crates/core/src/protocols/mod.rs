//! Quantum information protocols over W-class resources.

pub mod distill;
pub mod keys;
pub mod teleport;

pub use distill::{distill_gate, distill_w, distill_with, wiring_search, DistillOutcome, Wiring};
pub use keys::{
    exact_success_rate, joint_probabilities, qkd_simulate, qss_reconstruction_errors,
    qss_simulate, qss_single_party_information, Basis, Protocol, ProtocolTranscript, Round,
    TranscriptSummary, E91_QUBITS_PER_BIT, E91_SUCCESS,
};
pub use teleport::{
    bell_like_basis, bell_like_decomposition, decompose_with, dense_coding_overlap, local_encodings,
    pairing_search, teleport, w_channel, w_channel_unitary, BellLikeDecomposition, Branch,
    Channel, Pairing, Recovery, TeleportResult,
};
