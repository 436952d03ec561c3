//! Exact Ward h-differential calculus on truncated formal power series.
//!
//! Coefficients live in Q with arbitrary-precision integers; every value
//! carries an explicit truncation and every operation tracks how many
//! coefficients remain determined.

pub mod catalog;
pub mod cli;
pub mod error;
pub mod operators;
pub mod rat;
pub mod riordan;
pub mod series;
pub mod sheffer;
pub mod solver;

pub use error::{ParseError, WardError};
pub use operators::{HSeries, SeriesOperator};
pub use rat::Rat;
pub use riordan::RiordanPair;
pub use series::{Distance, Order, Series};
