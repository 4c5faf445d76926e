//! Encoder side: scrambled block Hadamard sensing, uniform quantization and
//! arithmetic coding, plus the decoder-side view of a packet.

pub mod arith;
mod hadamard;
mod packet;
mod prng;
mod quantizer;

pub use hadamard::{measurement_count, SensingOperator, SensingSpec};
pub use packet::{MeasurementPacket, Observation, HEADER_BYTES, MAGIC, VERSION};
pub use prng::PermutationRng;
pub use quantizer::{QuantizerSpec, MAX_BITS, RANGE_SIGMAS};
