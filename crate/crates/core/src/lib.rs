//! Computational tools for SU(2) moduli spaces of punctured surfaces.
//!
//! * [`su2`]: unit-quaternion arithmetic, the alcove, and the adjoint action.
//! * [`frames`]: weighted frames (the four-sphere model of the imploded double).
//! * [`moduli`]: points of the extended moduli space, glueing and twist flows.
//! * [`trinion`]: the three-punctured sphere and its tetrahedron of angles.
//! * [`verlinde`]: pants decompositions, moment polytopes and lattice counts.
//! * [`sheaves`]: framed parabolic sheaves on the three-pointed projective line.

pub mod error;
pub mod frames;
pub mod moduli;
pub mod sheaves;
pub mod su2;
pub mod trinion;
pub mod verlinde;

pub use error::{Error, Result};
