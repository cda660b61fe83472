//! Exact verification kernel for multi-Hamiltonian Toda-type lattices.
//!
//! The crate certifies Poisson tensors, master symmetries, Lenard chains,
//! Casimirs, Dirac reductions, and isospectral flows for four systems:
//! the classical nonperiodic Toda lattice, the relativistic Toda lattice,
//! the Bn Toda chain, and the full Kostant-Toda lattice.
//!
//! Identity checks run over seeded rational sample points in exact
//! arithmetic; only eigenvalue/ODE work and the canonical (q,p) charts
//! (which carry exponentials) use floats.

pub mod checks;
pub mod dual;
pub mod exact;
pub mod floatcanon;
pub mod geom;
pub mod laxode;
pub mod poly;
pub mod scalar;
pub mod systems;

pub use checks::{IdentityReport, Residual, SamplerConfig};
pub use exact::{rat, ratq, Rat};
pub use geom::{
    Bivector, Chart, ChartRef, GeomError, PhasePoint, PolyMap, Predicate, ScalarField,
    VectorField,
};
pub use poly::{Poly, RatFn};
