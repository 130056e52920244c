//! Sphere-assembly micro-swimmers in a half-space bounded by a no-slip plane wall.
//!
//! The wall is the plane `y = 0`, the fluid fills `y > 0`. Modules:
//!
//! * [`greens`]: Stokeslet and Blake image tensor.
//! * [`swimmer`]: three- and four-sphere geometry, resistance assembly, control fields.
//! * [`series`]: closed-form far-wall, small-sphere expansions of the three-sphere fields and brackets.
//! * [`liealg`]: finite-difference Lie brackets and numerical rank of the bracket span.
//! * [`sim`]: RK4 integration of strokes.
//! * [`planner`]: local shooting planner built from bracket loops.
//! * [`cli`]: JSON-configured batch front end used by the `wallstokes` binary.

pub mod cli;
pub mod error;
pub mod greens;
pub mod liealg;
pub mod planner;
pub mod series;
pub mod sim;
pub mod swimmer;

pub use error::{Error, Result};
