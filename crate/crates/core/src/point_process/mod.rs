//! Poisson, binomial, blocked and coupled point processes on boxes.

mod cloud;
mod density;
mod sample;

pub use cloud::{dist, sq_dist, PointCloud, Window};
pub use density::{BlockedDensity, Density, DensitySpec};
pub use sample::{
    in_unit_cell, sample_binomial, sample_poisson_homogeneous, sample_poisson_inhomogeneous, swap_window,
    REJECTION_CAP,
};
pub(crate) use sample::draw_from_density;
