//! Covering-number risk bounds for `sup_f |E_N f - E f|` over a class of
//! `lambda`-Lipschitz functions with range `[A, B]`.
//!
//! Both forms multiply a deviation bound at radius `N xi / 8` by twice the
//! expected covering number at radius `xi / 8`; the caller supplies the log
//! of that expectation as `ln_cov`. Both require `N xi² >= 32 max{A², B²}`.

use super::deviation::{integrated_tau_inverse, ln_deviation_bound_closed};
use super::report::{BoundMethod, BoundReport};
use super::tau::TauContext;
use crate::error::{Error, Result};

pub const SYMMETRIZATION_CONDITION: &str = "Nξ² ≥ 32 max{A², B²}";
pub const TAU_RANGE_CONDITION: &str = "0 < Nξ/8 < τ((M/λ)⁻)";

/// Checks `N xi² >= 32 max{A², B²}`.
pub fn check_symmetrization(n: u64, xi: f64, a: f64, b: f64) -> Result<()> {
    let lhs = n as f64 * xi * xi;
    let rhs = 32.0 * (a * a).max(b * b);
    if xi > 0.0 && lhs >= rhs {
        Ok(())
    } else {
        Err(Error::Precondition {
            condition: SYMMETRIZATION_CONDITION,
            detail: format!("N ξ² = {lhs}, 32 max{{A², B²}} = {rhs}"),
        })
    }
}

pub fn risk_bound_integral(
    ctx: &TauContext,
    xi: f64,
    ln_cov: f64,
    a: f64,
    b: f64,
) -> Result<BoundReport> {
    check_symmetrization(ctx.n(), xi, a, b)?;
    let radius = ctx.n() as f64 * xi / 8.0;
    let limit = ctx.tau_limit();
    if !(radius > 0.0 && radius < limit) {
        return Err(Error::Precondition {
            condition: TAU_RANGE_CONDITION,
            detail: format!("Nξ/8 = {radius}, τ((M/λ)⁻) = {limit}"),
        });
    }
    let integral = integrated_tau_inverse(ctx, radius)?;
    let m = ctx.measure();
    Ok(BoundReport {
        xi,
        value: 2.0 * (ln_cov - integral).exp(),
        method: BoundMethod::RiskIntegral,
        n: ctx.n(),
        lambda: ctx.lambda(),
        v: m.second_moment(),
        r: m.support_radius(),
        ln_cov: Some(ln_cov),
    })
}

/// `2 exp(ln_cov) exp((N V / R²) Γ(xi R / (8 λ V)))`.
#[allow(clippy::too_many_arguments)]
pub fn risk_bound_closed(
    xi: f64,
    n: u64,
    ln_cov: f64,
    v: f64,
    r: f64,
    lambda: f64,
    a: f64,
    b: f64,
) -> Result<BoundReport> {
    check_symmetrization(n, xi, a, b)?;
    // The closed deviation form at radius N xi / 8 has exactly this exponent.
    let exponent = ln_deviation_bound_closed(n as f64 * xi / 8.0, v, r, lambda, n)?;
    Ok(BoundReport {
        xi,
        value: 2.0 * (ln_cov + exponent).exp(),
        method: BoundMethod::RiskClosed,
        n,
        lambda,
        v,
        r,
        ln_cov: Some(ln_cov),
    })
}
