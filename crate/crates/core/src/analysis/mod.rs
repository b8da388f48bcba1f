//! Fidelities, fits, failure maps, collision screening and GHZ statistics.

pub mod collisions;
pub mod fidelity;
pub mod fit;
pub mod ghz;
pub mod maps;

pub use collisions::{detect_collisions, Collision, CollisionReport, CollisionThresholds, CollisionType};
pub use fidelity::{estimate_fidelity, FidelityPoint, FidelitySeries};
pub use fit::{fit_exponential, fit_zz_oscillation, zz_model, ExpFit, ZzFit};
pub use ghz::{ghz_statistics, GhzStats};
pub use maps::{bell_delta_map, delta_map, product_fidelity, FailureMap};
