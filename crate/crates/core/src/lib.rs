//! Complex powers of finite-dimensional linear relations with a regularized resolvent.

pub mod cli;
pub mod contour;
pub mod error;
pub mod fracderiv;
pub mod instance;
pub mod linalg;
pub mod linrel;
pub mod powers;
pub mod quad;
pub mod resolvent;
pub mod semigroup;
pub mod verify;

pub use error::{Error, ResolventFailure, Result};
pub use linrel::{LinearRelation, SubspaceQuad};
