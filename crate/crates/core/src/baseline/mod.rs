//! Reference solvers used to certify the linear-proximal solutions.

pub mod grid;
pub mod pgd;
pub mod qp;

pub use grid::grid_oracle_2tx;
pub use pgd::{crb_gradient, pgd_multistart, pgd_solve, PgdConfig};
pub use qp::subproblem_qp_oracle;
