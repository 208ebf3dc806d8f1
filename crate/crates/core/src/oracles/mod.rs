//! Slow, direct reference computations used to cross-check the library in
//! tests. Nothing in the synthesis path calls into this module.
//!
//! Everything here is written from definitions (path sums, brute-force
//! enumeration, plain Gauss-Jordan elimination) and shares no numerical code
//! with the modules it checks.

pub mod belief;
pub mod lp;
pub mod ltl;
pub mod markov;
pub mod random;
