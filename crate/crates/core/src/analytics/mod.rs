//! Closed-form laws and equation solving: the excursion-maximum law and
//! its size-biased relatives, excursion-measure tails, dislocation
//! measures, limit Laplace transforms, and the Φ fixed-point solver.

pub mod closed_forms;
pub mod dislocation;
pub mod kennedy;
pub mod phi_solver;
pub mod quad;
pub mod special;

pub use closed_forms::{
    brownian_dislocation_density, excursion_tail_hmax, excursion_tail_sigma,
    laplace_last_fragment_brownian, laplace_total_mass_brownian, phi_closed_form,
    phi_from_nu_brownian,
};
pub use dislocation::{stable_dislocation_expectation, stable_tagged_exponent_mc, McEstimate};
pub use kennedy::{
    kennedy_batch, kennedy_cdf, kennedy_moment, kennedy_quantile, kennedy_sample, kennedy_tail,
    size_biased_batch, size_biased_sample,
};
pub use phi_solver::{
    phi_residual_with_density, solve_phi_fixed_point, solve_phi_fixed_point_with_mean, PhiTable,
};
