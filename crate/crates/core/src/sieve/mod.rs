//! Prime tables, multiplicative functions and their exact partial sums.

mod function;
mod spec;
mod tables;

pub use function::*;
pub use spec::*;
pub use tables::*;
