//! Long-run numerical characterization of the pendulum.

mod classify;
mod lyapunov;
mod orbit;
mod scan;

pub use classify::{
    classify_attractor, classify_with_window, AttractorClass, Classification, CHAOS_THRESHOLD,
    EQUILIBRIUM_BASIN_RADIUS, EQUILIBRIUM_TOL,
};
pub use lyapunov::{max_lyapunov, LyapunovResult, MIN_LYAPUNOV_PERIODS};
pub use orbit::{
    poincare_map, rotation_number, snap_rational, strobe_window, Budget, Ratio, StrobeWindow,
    CLOSURE_TOL, DEFAULT_EXTENSION_PERIODS, MAX_DENOMINATOR, MAX_PERIOD, MIN_TRANSIENT_PERIODS,
    MIN_WINDOW_PERIODS, SNAP_TOL,
};
pub use scan::{
    basin_scan, basin_theta_grid, bifurcation_sweep, parameter_map, write_bifurcation_csv,
    AttractorEntry, AttractorIdentity, BasinCell, BasinGrid, BifurcationStep, BifurcationSweep,
    Branch, BranchResult, IcPolicy, MapMetric, ParameterMap, BIFURCATION_SAMPLES,
};
