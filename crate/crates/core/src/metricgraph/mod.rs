//! Metric graphs, divisors and piecewise-linear functions with exact
//! rational arithmetic.

pub mod divisor;
pub mod equivalence;
pub mod graph;
pub mod plfunction;
pub mod rational;

pub use divisor::Divisor;
pub use equivalence::linear_equivalent;
pub use graph::{refine_model, simple_model, Direction, Edge, GraphError, GraphPoint, MetricGraph, Refinement};
pub use plfunction::{PLError, PLFunction};
pub use rational::{q, qi, Q};
