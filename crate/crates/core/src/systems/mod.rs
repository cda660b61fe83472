//! System catalogs: each module registers the charts, brackets, invariants,
//! master symmetries, and flows of one Toda-type lattice.

pub mod kostant;
pub mod toda_an;
pub mod toda_lie;
pub mod toda_rel;
