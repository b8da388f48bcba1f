//! Pattern-based functional testing for quantum memories.
//!
//! Stress patterns are compiled into pseudo-identity circuits
//! ([`circuit`]), executed on a Lindblad density-matrix reference backend
//! ([`simulator`]) or replayed from recorded counts ([`runner`]), and turned
//! into fidelity series, parameter fits, failure maps and collision reports
//! ([`analysis`]).

pub mod analysis;
pub mod circuit;
pub mod device_file;
pub mod error;
pub mod par;
pub mod runner;
pub mod seed;
pub mod simulator;
pub mod topology;

pub use circuit::{
    build_pattern, invert, BellKind, Circuit, Gate, GateDurations, GateKind, PartitionInput,
    PatternSpec, Side,
};
pub use error::{Error, Result};
pub use par::ExecPolicy;
pub use simulator::{run_circuit, CountsRecord, DeviceModel};
pub use topology::{
    bell_pairs, bipartition, load_topology, random_chains, triplet_cover, triplet_cover_seeded,
    Bipartition, ChipTopology, PairLayout, Triplet, TripletCover,
};
