//! Limit linear series on metric graphs: ranked hypercubes, permutation
//! arrays, slope structures and tropical semimodules of piecewise-linear
//! functions.

pub mod hypercube;
pub mod matroidcomplex;
pub mod permarray;
pub mod metricgraph;
pub mod slopes;
pub mod series;
pub mod examples;
pub mod io;
