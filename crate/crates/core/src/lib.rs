//! Periodic billiard paths in the unit square as lawn-mower routes.
//!
//! * [`exact`]: rationals, points, segments.
//! * [`trajectory`]: `γ(a, p/q)`, classification, bounce points, and the orbit
//!   built by simulation or by grid symmetry.
//! * [`covering`]: closed-form covering radius and a grid oracle for it.
//! * [`planner`]: shortest covering path for a given blade radius.
//! * [`render`]: SVG figures.
//!
//! Lifting a square billiard path to the flat torus `ℝ²/2ℤ²` turns it into a
//! closed geodesic, and the covering radius here is half the radius at which
//! that geodesic's neighbourhood covers the torus.

pub mod covering;
pub mod exact;
pub mod parallel;
pub mod planner;
pub mod render;
pub mod trajectory;

pub use covering::{
    class_min_radius, covering_radius, covers, grid_oracle_radius, grid_oracle_radius_with,
    parallelogram_cover_radius, ClassMinimum, CoverReport, ExactRadius, OracleEstimate,
    ParallelogramSpec,
};
pub use exact::{Point, Rational, Segment};
pub use parallel::Execution;
pub use planner::{
    all_primitive_representations, cornacchia, is_properly_representable, path_length,
    plan_shortest_cover, ExactLength, Plan, PlannerError, TrajectoryClass,
};
pub use render::{render_orbit, RenderError, RenderOptions};
pub use trajectory::{
    bounce_points, bounce_points_bottom, build_orbit_by_symmetry, cell_decomposition, classify,
    simulate_orbit, unfold_project, BouncePoints, Classification, Orbit, Parallelogram, SlopedSpec,
    TrajectoryError, TrajectorySpec, UnfoldedPoint,
};
