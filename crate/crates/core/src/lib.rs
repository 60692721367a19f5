//! Exact symbolic engine for relative differential varieties, their
//! prolongations, and differential algebraic groups over a differential
//! field with a split set of derivations.

pub mod coeffield;
pub mod dgroup;
pub mod diffpoly;
pub mod dvariety;
pub mod expr;
pub mod kolchin;
pub mod poly;
pub mod prolong;
pub mod reduce;
