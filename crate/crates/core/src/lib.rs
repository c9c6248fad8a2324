pub mod circle;
pub mod entropy;
pub mod error;
pub mod hubbard;
pub mod itinerary;
pub mod lamination;
pub mod scan;
pub mod survivor;
pub mod tuning;
pub mod verify;

pub use circle::{Angle, BinaryWords, OrbitInfo};
pub use error::{Error, Result};
