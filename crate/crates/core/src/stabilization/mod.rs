//! Add-one costs, swap differences and finite-window stabilization radii.

mod cost;
mod local;
mod radius;

pub use cost::{add_one_cost, persistent_betti_of, swap_difference, window_b_n, SwapDifferenceRecord};
pub use local::{cycle_stats, CycleStats};
pub use radius::{strong_radius_estimate, weak_radius, RadiusEstimate, RadiusSetup, StabilizationTrace, WeakRadius};
