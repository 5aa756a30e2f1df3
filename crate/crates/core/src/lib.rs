pub mod analysis;
pub mod challenge;
pub mod error;
pub mod exponent;
pub mod kex;
pub mod matrix;
pub mod orbit;
pub mod perm;
pub mod ring;
mod spectral;
pub mod stats;
pub mod structured;

pub use challenge::ChallengeSet;
pub use error::{Error, Result};
pub use exponent::Exponent;
pub use kex::{BaseKind, KexParams, KexSession};
pub use matrix::{FixedBase, MatrixGR};
pub use perm::{MultTable, Permutation};
pub use ring::{GroupRingElement, RingContext, SignImage};
