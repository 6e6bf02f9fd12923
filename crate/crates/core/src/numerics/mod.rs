pub mod ode;
pub mod quad;
pub mod roots;

pub use ode::{integrate, integrate_to_section, Direction, Dopri5, Event, EventHit, SectionEvent, Step, Trajectory};
pub use quad::{quad, quad_with, QuadSettings};
pub use roots::find_root;
