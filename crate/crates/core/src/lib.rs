pub mod admissibility;
pub mod cli;
pub mod grid;
pub mod kernel;
pub mod propagator;
pub mod quad;
pub mod solver;
pub mod specfun;
