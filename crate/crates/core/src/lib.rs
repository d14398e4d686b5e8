//! Round-bounded verification of distributed algorithms on rings.
//!
//! Algorithms are synchronous programs over pid-valued registers. Specifications
//! are DataPDL formulas over runs. A specification is checked for every ring size
//! up to a round bound by compiling both into LCPDL over finite tables and deciding
//! emptiness, with an explicit-state oracle as ground truth for small rings.

pub mod compile;
pub mod corpus;
pub mod dataspec;
pub mod decide;
pub mod model;
pub mod oracle;
pub mod rel;
pub mod table;
