//! Constructors for the gates, bases and template states used by the protocols.

mod brickwork;
mod broadcast;
pub mod gates;
mod graph;
mod pauli;
mod trine;

pub use brickwork::{brickwork_block, BlockWires};
pub use broadcast::{make_broadcast_state, receiver_label, sender_label, BroadcastSpec, DiagonalPhaseGate};
pub use gates::{
    controlled_shift, correction_gate, dicke_state, fourier_basis, rotated_x_basis, sender_phase_gate,
};
pub use graph::{graph_state, vertex_label, Graph};
pub use pauli::{Pauli, PauliString, StabilizerSet};
pub use trine::{trine_angle, trine_states, TrineSet};
