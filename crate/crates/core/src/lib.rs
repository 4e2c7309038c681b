//! Dynamical, arithmetic and spectral machinery for counting in Schottky
//! semigroups of SO(n,1) and continued-fractions semigroups of SL₂:
//! exact word enumeration in norm balls, transfer-operator pressure and the
//! Bowen root, congruence quotients with their twisted operators and Cayley
//! spectral gaps, renewal-equation counting functions, and the bounded
//! partial-quotient denominator sets.
//!
//! ```
//! use congcount::{GaussInt, SemigroupSpec};
//!
//! // the {1, 2} continued-fractions semigroup with the auto-found trim
//! let spec = SemigroupSpec::cf(vec![GaussInt::from(1), GaussInt::from(2)], None)?;
//! assert!(congcount::semigroup::validate_ping_pong(&spec).ok);
//!
//! // critical exponent via the Bowen root of the pressure
//! let delta = congcount::thermo::bowen_delta(&spec, 1e-8, 6)?.delta_hat;
//! assert!((delta - 0.5312805).abs() < 1e-4);
//! # Ok::<(), congcount::Error>(())
//! ```

pub mod arith;
pub mod congruence;
pub mod counting;
pub mod dynamics;
pub mod error;
pub mod groups;
pub mod linalg;
pub mod report;
pub mod semigroup;
pub mod thermo;

pub use arith::GaussInt;
pub use error::{Error, Result};
pub use groups::{BoundaryPoint, ExactPoint, GroupElement, Setting};
pub use semigroup::{SemigroupSpec, Word};
