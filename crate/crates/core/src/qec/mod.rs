//! Bit-flip repetition-code memory: circuits, X-frame sampling and chain matching.

mod circuit;
mod decoder;
mod frame;
mod spacetime;

pub use circuit::{build_repcode_circuit, matched_distances, ChannelKind, ChannelModel, DepolarizingReading, NoisyCircuit, Op};
pub use decoder::{brute_force_weight, decode, decode_round, Correction};
pub use frame::{exhaustive_logical_error, run_shot, sample_defects, sample_logical_error, DefectRecord, LogicalErrorEstimate};
pub use spacetime::{DecoderKind, PreparedDecoder, SpaceTimeDecoder};
