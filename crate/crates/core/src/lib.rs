//! Reduction from binary linear systems to sums of rational linear
//! functions over asymptotic linear programs, with exact tooling around it.

pub mod alp;
pub mod analyzer;
pub mod instance;
pub mod kfield;
pub mod normalizer;
pub mod reducer;
pub mod simplex;
