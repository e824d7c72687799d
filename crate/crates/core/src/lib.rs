//! Wright architecture descriptions to CSPM, with an embedded
//! failures-divergences refinement checker for the generated assertions.

pub mod alphabet;
pub mod analyzer;
pub mod diag;
pub mod model;
pub mod parser;
pub mod codegen;
pub mod transform;
pub mod engine;
pub mod pipeline;
