//! Linear solves, generalized eigensolvers and the scalarized sup over `mu`.

pub mod cholesky;
pub mod dirichlet;
pub mod eigen;
pub mod scalarized;

pub use cholesky::{solve_csr, solve_spd, EnvelopeCholesky};
pub use dirichlet::solve_dirichlet;
pub use eigen::{
    gen_eig_dense, gen_eig_max, pencil_dense, pencil_max, pencil_max_dense, DenseSpectrum, EigOptions, EigResult,
};
pub use scalarized::{
    direct_ratio, lambda_at_mu, scalarized_denominator, scalarized_sup, ScalarizedOptions, ScalarizedResult,
};
