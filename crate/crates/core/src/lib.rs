//! Roof graph reconstruction: planar roof graphs, their duals, planarity
//! energies, an embedding solver, local editing and adjacency resolution.

pub mod adjacency;
pub mod cli;
pub mod dual;
pub mod editing;
pub mod eigen;
pub mod energy;
pub mod fixtures;
pub mod geom;
pub mod graph;
pub mod io;
pub mod lbfgs;
pub mod lift;
pub mod preprocess;
pub mod service;
pub mod solver;
pub mod spectral;
pub mod validity;
