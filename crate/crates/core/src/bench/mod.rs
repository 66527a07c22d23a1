//! Validation oracle, PRM baseline, fixtures and the scaling harness.

pub mod fixtures;
pub mod prm;
pub mod scaling;
pub mod validate;

pub use prm::{prm_build, PrmParams, PrmRoadmap};
pub use scaling::{build_offline, format_table, results_toml, scaling_suite, Offline, ScalingConfig, ScalingRow};
pub use validate::{body_pieces, penetration_depth, pose_penetration, validate_plan, validate_steps, validate_waypoints, Pose, ValidationReport};
