//! Backward induction on a simplex grid, quadrature for the expected future cost,
//! threshold extraction and concavity checks.

mod grid;
mod quadrature;
mod solve;
mod structure;
mod table;

pub use grid::{build_grid, build_grid_capped, build_grid_step, BeliefGrid, GRID_CAP};
pub use quadrature::{build_channel, gauss_hermite, qmc_normals, ObservationChannel, QuadratureSpec};
pub use solve::{
    backward_induction, expected_future_cost, expected_with_channel, DpOptions, DpSolution, Interpolation,
};
pub use structure::{
    check_concavity, check_concavity_values, compress_intervals, extract_thresholds, ConcavityReport, Threshold,
    ThresholdReport, CONCAVITY_TOL,
};
pub use table::{interpolate_value, Interpolated, PolicyTable, ValueTable};
