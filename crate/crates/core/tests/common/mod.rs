//! Shared test oracles, independent of the library's implementation paths.

pub mod brute_assign;
pub mod eig;
pub mod reference_eval;
