//! Comparison methods: linear osmosis and Poisson editing.

mod krylov;
mod osmosis;
mod poisson;

pub use krylov::{bicgstab, conjugate_gradient, SolveStats, SolverConfig};
pub use osmosis::{
    evolve_channel, linear_osmosis, osmosis_fuse, osmosis_fuse_from, osmosis_matrix_apply, FaceDrift,
    OsmosisEvolutionConfig, OsmosisRun, StepRecord, TimeScheme,
};
pub use poisson::{poisson_edit, Mask, PoissonResult, POISSON_DEFAULT};
