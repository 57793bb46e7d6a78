//! Energy-efficient resource allocation and trajectory search for UAV relays
//! that serve D2D and relayed user pairs.

pub mod bandwidth;
pub mod channel;
pub mod cli;
pub mod energy;
pub mod error;
pub mod geometry;
pub mod numeric;
pub mod power;
pub mod problem;
pub mod rates;
pub mod rng;
pub mod rus;
pub mod scenario;
pub mod sim;

pub use error::{Error, Result};
pub use geometry::Vec3;

