//! Event-level Monte Carlo of the optical system.

pub mod detect;
pub mod fiber;
pub mod info;
pub mod predict;
pub mod pulse;
pub mod rng;
pub mod session;
pub mod sift;

pub use detect::{click_probabilities, detect, DetectionOutcome, DetectionResult, Receiver};
pub use fiber::{transmit, FiberModel};
pub use info::{empirical_mutual_info, JointCounts, MiEstimate};
pub use predict::{predict, Prediction};
pub use pulse::{
    emit_pulse, AliceChoice, Basis, Encoding, Origin, Polarization, PulseFrame, ReferenceMode,
    Source,
};
pub use rng::{PulseRng, StreamSeed};
pub use session::{run_session, AttackedAgreement, ProtocolConfig, SessionCounts, SessionReport};
pub use sift::{empirical_qber, sift, QberEstimate, SiftRecord, SiftedKey};
