pub mod dynamics;
pub mod error;
pub mod homoclinic;
pub mod melnikov;
pub mod model;
pub mod numerics;
pub mod presets;
pub mod regimes;
pub mod retmap;
pub mod section;

pub use error::{Error, Result};
