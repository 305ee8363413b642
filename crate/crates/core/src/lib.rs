//! Convergence acceleration for infinite series and products whose terms
//! have asymptotic expansions in powers of `n^(1/m)`.
//!
//! The crate fits the model
//!
//! ```text
//! A_{R_l} = S + R_l^σ a_{R_l} Σ_{i<n} β_i R_l^(-i/m),    l = j, ..., j+n
//! ```
//!
//! to partial sums sampled at indices `R_0 < R_1 < ...` and reads off `S`,
//! which is the limit of a convergent series or the antilimit of a divergent
//! one. The triangle of approximations is produced by a divided-difference
//! recursion that also yields the stability indicators Γ and Λ; multiplied by
//! the roundoff unit these estimate the attainable accuracy of each entry.
//!
//! ```no_run
//! use fracsum::{builtin, numerics::Precision, sampling::Schedule, transform};
//!
//! let p = Precision::QUAD;
//! let problem = builtin("ex5_2").unwrap();
//! let schedule = Schedule::aps_int(1, 1).unwrap();
//! let result = transform::accelerate(&problem, &schedule, 28, p).unwrap();
//! println!("{} (est. rel. error {})", result.value, result.est_rel_error.to_sci(3));
//! ```

pub mod classify;
pub mod error;
pub mod expr;
pub mod numerics;
pub mod problem_file;
pub mod sampling;
pub mod series_model;
pub mod transform;
pub mod w_algorithm;

pub use error::{Error, Result};
pub use series_model::{builtin, builtin_ids, SeriesProblem};
