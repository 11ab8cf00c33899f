//! Numerical calculus for Caratheodory-type functions of bounded boundary
//! rotation.
//!
//! Everything is built on [`TruncatedSeries`], a truncated complex power
//! series about the origin. On top of it:
//!
//! - [`caratheodory`] constructs members of `P(β)` and `P_k(β)` from finite
//!   signed Herglotz measures, including the two-atom extremal function `H`.
//! - [`transform`] implements the iterated integral transforms `φ^j_{σ,n}` as
//!   coefficient multipliers, an independent quadrature evaluation of the
//!   integral definition, the positivity radius `r(k, β)` and the sharp lower
//!   bounds for the transformed classes.
//! - [`univalent`] builds normalized functions of the classes `T_n^σ(k, β)`
//!   and `B_n^σ(k, β)` and the Salagean / convolution operators acting on them.
//! - [`verify`] sweeps parameter grids and checks every identity and bound,
//!   producing a deterministic JSON-lines report.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod caratheodory;
pub mod error;
pub mod series;
pub mod transform;
pub mod univalent;
pub mod verify;

pub use caratheodory::{AtomicMeasure, ClassParams};
pub use error::{Error, Result};
pub use num_complex::Complex64;
pub use series::TruncatedSeries;
pub use transform::{RadiusReport, TransformFamily, TransformSpec};
pub use univalent::NormalizedFunction;
