//! Exponential sums over small multiplicative subgroups of F_p, made
//! computational.
//!
//! The crate builds the objects of the additive-combinatorics argument for
//! cancellation in `sum_{x in H} e^{2 pi i x xi / p}`: subgroup measures and
//! their convolution powers, large-spectrum sets, the set-extraction pipeline
//! that turns a stable measure into a set with small sum and product sets,
//! and the incomplete-sum variant over geometric segments. Every inequality
//! along the way is evaluated on concrete primes and recorded.

pub mod bgs;
pub mod checks;
pub mod error;
pub mod expsum;
pub mod field;
pub mod harness;
pub mod measure;
pub mod par;
pub mod pipeline;
pub mod rational;
pub mod spectrum;

pub use error::{Error, Result};
pub use field::{FieldContext, SubgroupKind, SubgroupSpec};
pub use measure::{Measure, PhiFunction};
