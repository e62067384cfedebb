//! Seedable bird's-eye-view intersection simulator.

mod scenario;
mod world;

pub(crate) use scenario::toml_error;
pub use scenario::{
    Building, DoorModel, MovingObstacle, Randomize, Scenario, SemanticSampling, SensorNoise, TargetSpawn, Waypoint,
    DEFAULT_SCENARIO,
};
pub use world::{
    build_birth_context, simulate, ContextConfig, RangeBearing, Scan, Target, TargetState, TruthState, World,
};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The per-trial random stream.
pub fn trial_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
