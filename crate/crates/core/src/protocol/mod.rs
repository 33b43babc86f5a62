mod broadcast;
mod common;
mod graph;
mod keys;
mod phase;
mod session;

pub use broadcast::{
    add_sender, add_then_delete, cz_entangler, delete_sender, rotated_template, run_bbp, run_bbp_rotated,
    run_graph_dist_phase, run_multisender,
};
pub use common::OVERLAP_BOUND;
pub use graph::{
    ghz_generators, ghz_state, run_ghz_ring, run_ghz_star, run_graph_reduction, run_stabilizer_broadcast, stabilizer_state,
    teleport_phase_gate,
};
pub use keys::{
    binomial_sigma, hop_bit, pbc_sift, round_seed, run_authentication, run_qkd_pbc, AuthReport, AuthRound, BobStrategy,
    QkdReport, QkdRound,
};
pub use phase::{
    approximate_encoding_fidelity, approximate_receiver_state, encoding_state, encoding_tail, general_target, send_phase_general,
    send_phase_restricted, upper_projector, GeneralVariant, NOISE_CONSTANT,
};
pub use session::{
    party_rng, BranchRecord, Comparison, Event, LiveBranch, Mode, OutcomeId, Party, ProtocolTranscript, PrunedBranch,
    Recipient, Role, Session, Verdict,
};
