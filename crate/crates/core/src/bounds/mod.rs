//! Deviation and risk bounds and the convergence-rate functions.

mod deviation;
mod rate;
mod report;
mod risk;
mod tau;

pub use deviation::{
    chernoff_min, deviation_bound_closed, deviation_bound_integral, integrated_tau_inverse,
    ln_deviation_bound_closed, QUADRATURE_TOL,
};
pub use rate::{
    big_gamma, closed_risk_exponent_per_sample, find_xhat, gamma_exponent,
    gamma_exponent_derivative, risk_shape_argument, sup_deviation_radius, SupRadius, XHat,
    VANISHING_RADIUS_THRESHOLD, XHAT_SEARCH, XHAT_TOL,
};
pub use report::{write_reports_csv, write_reports_json, BoundMethod, BoundReport};
pub use risk::{
    check_symmetrization, risk_bound_closed, risk_bound_integral, SYMMETRIZATION_CONDITION,
    TAU_RANGE_CONDITION,
};
pub use tau::{TauContext, EDGE_GAP};
