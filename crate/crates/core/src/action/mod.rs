//! One-step action kernels, min-plus powers, the Peierls barrier, the
//! projected Aubry set and Mather classes.

pub mod aubry;
pub mod barrier;
pub mod kernel;
pub mod minplus;

pub use aubry::{
    aubry_report, aubry_set, default_eps_aubry, default_eps_class, mather_classes, AubryReport,
};
pub use barrier::{
    default_window, fixed_point_residual, minplus_power, peierls_barrier, triangle_defect,
    triangle_violation, BarrierMatrix, BarrierSidecar, Horizon,
};
pub use kernel::{build_kernel, verify_subsolution, ActionKernel};
pub use minplus::MinPlusMatrix;
