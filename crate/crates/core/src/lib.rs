//! Finite-gap reflectionless canonical systems at the level of their Weyl
//! functions: evaluation, measure data, group actions, normal forms, and
//! Jacobi coefficient recovery.

pub mod error;
pub mod ext;
pub mod gapset;
pub mod jacobi;
pub mod orbits;
pub mod quad;
pub mod sampling;
pub mod sphere;
pub mod systems;
pub mod verify;

pub use error::{CoreError, Result};
pub use ext::ExtReal;
pub use gapset::{Divisor, FiniteGapSet, GapPoint, SetCase};
pub use sphere::{HerglotzMap, MoebiusElement, SpherePoint};
pub use systems::{AnySystem, Normalization, ReflectionlessSystem, Side, SingularSystem};
