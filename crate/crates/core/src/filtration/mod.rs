//! Čech and Vietoris-Rips filtered complexes with radius and dimension caps.

mod complex;
mod miniball;
mod neighbors;

pub use complex::{
    build, build_cech, build_rips, build_with, count_new_simplices, restrict, Cell, FilteredComplex, FiltrationKind,
    Simplex, TieBreak,
};
pub use miniball::{miniball, miniball_radius, Ball, MINIBALL_EPS};
pub use neighbors::forward_neighbors;
