//! Average and fine-grained reliability of V2V links near suburban corners and
//! urban intersections.
//!
//! * [`scene`]: geometry, radio constants, traffic and path-loss models.
//! * [`specfun`]: the `g` and `h` integrals behind the closed forms.
//! * [`analytic`]: closed-form success probability and its quadrature oracle.
//! * [`design`]: Aloha transmit probability meeting a reliability target.
//! * [`montecarlo`]: point-process sampling and the meta distribution.

pub mod analytic;
pub mod design;
pub mod error;
pub mod montecarlo;
pub mod par;
pub mod quad;
pub mod scene;
pub mod specfun;

pub use error::{Error, Result};
pub use par::Execution;
pub use scene::{ChannelParams, Link, Position, RadioParams, RoadNetwork, Scenario};
