//! Network Laplacians on finite truncations of infinite weighted graphs:
//! energy forms, dipoles and monopoles, free and wired effective resistance,
//! spectral measures and gaps, lattice torus integrals and random walks.

pub mod error;
pub mod lattice;
pub mod network;
pub mod operators;
pub mod resistance;
pub mod solvers;
pub mod sparse;
pub mod spectral;
pub mod verify;
pub mod walk;

pub use error::{Error, Result};
pub use network::{
    build_network, Edge, Exhaustion, ExhaustionSpec, Network, VertexFunction, VertexId,
    WiredCollapse,
};
pub use operators::{apply_laplacian, energy, gram_matrix, laplacian, phi_map, GroundedSystem};
pub use resistance::{free_resistance, resistance_bracket, wired_resistance_at_depth, ResistanceBracket};
pub use solvers::{cg_solve, dense_eig, lanczos_smallest, CgConfig};
pub use spectral::{spectral_measure, spectral_resistance, DiscreteSpectralMeasure};
pub use walk::{hitting_probability_exact, hitting_probability_mc, WalkEstimate};
