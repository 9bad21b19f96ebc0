//! Computation and verification of the vector-valued modular forms of
//! penumbral moonshine: the index-m Weil representation, theta series and
//! their Eichler-Zagier symmetries, Rademacher sums for the McKay-Thompson
//! series at D0 = -3, and the verification suite (coefficient tables,
//! congruences, multiplicative relations, Sturm-bound accounting) driven by
//! the embedded data files.

pub mod arith;
pub mod dataio;
pub mod jacobi;
pub mod moonshine;
pub mod qseries;
pub mod rademacher;
pub mod weil;
