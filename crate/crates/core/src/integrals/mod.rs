//! Boundary integrals of basis-function products.

mod gram;
mod quadrature;
mod residue;

pub use gram::{assemble_gram, perimeter, GramData};
pub use quadrature::{adaptive_simpson, quad_arc, quad_arc_points, QuadratureSettings};
pub use residue::{circle_mean_integral, circle_pair_integral};
