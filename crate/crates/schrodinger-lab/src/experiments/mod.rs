//! The two extremal constructions and the named scaling experiments.

mod focusing;
mod packets;
mod scaling;

pub use focusing::{build_sparse_focusing, FocusingParams, SparseFocusingExample, DEFAULT_LAMBDA};
pub use packets::{build_packet_spread, PacketSpreadExample, PACKET_KAPPA};
pub use scaling::{run_scaling_experiment, Experiment, ScalingGrid, ScalingOutcome, ScalingRow};
