//! Deviation bounds for `F = Σ_n f(z_n)` with `f` `lambda`-Lipschitz:
//!
//! ```text
//! Pr{|F - EF| > xi} <= exp(-∫_0^xi tau^-1(s) ds)                       (integral)
//! Pr{|F - EF| > xi} <= exp((N V / R²) Γ(xi R / (N lambda V)))            (closed)
//! ```
//!
//! The closed form needs bounded support and dominates the integral form. It
//! is the `(N W / (lambda R)²) Γ(xi lambda R / (N W))` shape with
//! `W = lambda² V`, the second moment of the jumps of `f`.

use super::rate::big_gamma;
use super::report::{BoundMethod, BoundReport};
use super::tau::TauContext;
use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;

/// Local error target of the quadrature of `tau^-1`.
pub const QUADRATURE_TOL: f64 = 1e-12;

fn check_xi(xi: f64) -> Result<()> {
    if xi >= 0.0 && xi.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "xi",
            value: xi,
            domain: "[0, inf)".into(),
        })
    }
}

/// `∫_0^xi tau^-1(s) ds` by adaptive Simpson.
pub fn integrated_tau_inverse(ctx: &TauContext, xi: f64) -> Result<f64> {
    check_xi(xi)?;
    if xi == 0.0 {
        return Ok(0.0);
    }
    let limit = ctx.tau_limit();
    if xi >= limit {
        return Err(Error::TauRange { value: xi, limit });
    }
    // every s in [0, xi] is inside the range, so inversion cannot fail
    Ok(adaptive_simpson(
        |s| ctx.tau_inverse(s).unwrap_or(f64::NAN),
        0.0,
        xi,
        QUADRATURE_TOL,
    ))
}

pub fn deviation_bound_integral(ctx: &TauContext, xi: f64) -> Result<BoundReport> {
    let integral = integrated_tau_inverse(ctx, xi)?;
    let m = ctx.measure();
    Ok(BoundReport {
        xi,
        value: (-integral).exp(),
        method: BoundMethod::Integral,
        n: ctx.n(),
        lambda: ctx.lambda(),
        v: m.second_moment(),
        r: m.support_radius(),
        ln_cov: None,
    })
}

/// Logarithm of the closed-form bound; kept separate so callers working on
/// the log scale avoid underflow.
pub fn ln_deviation_bound_closed(xi: f64, v: f64, r: f64, lambda: f64, n: u64) -> Result<f64> {
    check_xi(xi)?;
    if r.is_infinite() {
        return Err(Error::Inapplicable(
            "bounded support required: R is infinite, use the integral bound",
        ));
    }
    if !(r > 0.0) {
        return Err(Error::invalid("R", "must be strictly positive"));
    }
    if !(v > 0.0 && v.is_finite()) {
        return Err(Error::invalid("V", "must be strictly positive and finite"));
    }
    if !(lambda > 0.0 && lambda.is_finite()) {
        return Err(Error::invalid(
            "lambda",
            "must be strictly positive and finite",
        ));
    }
    if n == 0 {
        return Err(Error::invalid("N", "must be at least 1"));
    }
    let lr = lambda * r;
    let nw = n as f64 * lambda * lambda * v;
    Ok(nw / (lr * lr) * big_gamma(xi * lr / nw))
}

pub fn deviation_bound_closed(xi: f64, v: f64, r: f64, lambda: f64, n: u64) -> Result<BoundReport> {
    let ln = ln_deviation_bound_closed(xi, v, r, lambda, n)?;
    Ok(BoundReport {
        xi,
        value: ln.exp(),
        method: BoundMethod::Closed,
        n,
        lambda,
        v,
        r,
        ln_cov: None,
    })
}

/// `min_t {phi(t) - t xi}`, attained where `tau(t) = xi`.
pub fn chernoff_min(ctx: &TauContext, xi: f64) -> Result<f64> {
    check_xi(xi)?;
    let t = ctx.tau_inverse(xi)?;
    Ok(ctx.phi_unchecked(t) - t * xi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{Atom, AtomicLevyMeasure, ExpIntensityMeasure, LevyMeasure};
    use std::f64::consts::E;

    fn atomic(atoms: &[(f64, f64)], lambda: f64, n: u64) -> TauContext {
        let m = AtomicLevyMeasure::new(atoms.iter().map(|&(u, w)| Atom::scalar(u, w)).collect())
            .unwrap();
        TauContext::new(LevyMeasure::Atomic(m), lambda, n).unwrap()
    }

    // exp(1 - 2 ln 2), computed independently to 30 digits
    const SINGLE_ATOM_AT_ONE: f64 = 0.679_570_457_114_761_3;

    #[test]
    fn integral_bound_examples() {
        let c = atomic(&[(1.0, 1.0)], 1.0, 1);
        assert_eq!(deviation_bound_integral(&c, 0.0).unwrap().value, 1.0);
        let r = deviation_bound_integral(&c, 1.0).unwrap();
        assert!((r.value - SINGLE_ATOM_AT_ONE).abs() < 1e-11, "{}", r.value);
        assert_eq!(r.method, BoundMethod::Integral);
    }

    #[test]
    fn integral_bound_exp_intensity_matches_antiderivative() {
        // ∫_0^xi s β² / (λ(Nλα + sβ)) ds = (β/λ)(xi - c ln((xi + c)/c)), c = Nλα/β
        let (alpha, beta, lam, n) = (1.0, 2.0, 1.0, 1u64);
        let ctx = TauContext::new(
            LevyMeasure::ExpIntensity(ExpIntensityMeasure::new(alpha, beta).unwrap()),
            lam,
            n,
        )
        .unwrap();
        let xi = 0.5;
        let c = n as f64 * lam * alpha / beta;
        let oracle = (beta / lam) * (xi - c * ((xi + c) / c).ln());
        let got = deviation_bound_integral(&ctx, xi).unwrap().value;
        assert!((got - (-oracle).exp()).abs() < 1e-11);
        assert!((got - 0.735_758_882_342_884_7).abs() < 1e-11);
    }

    #[test]
    fn integral_bound_rejects_out_of_range() {
        let ctx = TauContext::new(
            LevyMeasure::ExpIntensity(ExpIntensityMeasure::new(1.0, 2.0).unwrap()),
            1.0,
            1,
        )
        .unwrap();
        assert!(matches!(
            deviation_bound_integral(&ctx, 1e12),
            Err(Error::TauRange { .. })
        ));
        assert!(matches!(
            deviation_bound_integral(&ctx, -1.0),
            Err(Error::Domain { .. })
        ));
    }

    #[test]
    fn closed_bound_examples() {
        assert_eq!(
            deviation_bound_closed(0.0, 1.0, 1.0, 1.0, 1).unwrap().value,
            1.0
        );
        let v = deviation_bound_closed(1.0, 1.0, 1.0, 1.0, 1).unwrap().value;
        assert!((v - SINGLE_ATOM_AT_ONE).abs() < 1e-15);
        // exp(2 - 3 ln 3)
        let v = deviation_bound_closed(2.0, 1.0, 1.0, 1.0, 1).unwrap().value;
        assert!((v - 0.273_668_744_404_838_9).abs() < 1e-15);
        assert!((v - (2.0 - 3.0 * 3f64.ln()).exp()).abs() < 1e-15);
    }

    #[test]
    fn closed_bound_scales_variance_by_lipschitz_constant() {
        // single atom (u = 1.5, w = 0.4), λ = 2.5, N = 3: both forms reduce to
        // exp(N w Γ(xi / (N w λ u)))
        let (u, w, lam, n) = (1.5, 0.4, 2.5, 3u64);
        let ctx = atomic(&[(u, w)], lam, n);
        for &xi in &[0.05, 1.0, 7.0] {
            let want = (n as f64 * w * big_gamma(xi / (n as f64 * w * lam * u))).exp();
            let closed = deviation_bound_closed(xi, w * u * u, u, lam, n)
                .unwrap()
                .value;
            let int = deviation_bound_integral(&ctx, xi).unwrap().value;
            assert!((closed - want).abs() < 1e-14);
            assert!((int - want).abs() < 1e-10);
        }
    }

    #[test]
    fn closed_bound_needs_finite_radius() {
        assert!(matches!(
            deviation_bound_closed(1.0, 1.0, f64::INFINITY, 1.0, 1),
            Err(Error::Inapplicable(_))
        ));
    }

    #[test]
    fn chernoff_min_examples() {
        let c = atomic(&[(1.0, 1.0)], 1.0, 1);
        assert_eq!(chernoff_min(&c, 0.0).unwrap(), 0.0);
        assert!((chernoff_min(&c, 1.0).unwrap() - (1.0 - 2.0 * 2f64.ln())).abs() < 1e-14);
        let c = atomic(&[(1.0, 2.0)], 1.0, 3);
        assert!((chernoff_min(&c, 6.0 * (E - 1.0)).unwrap() + 6.0).abs() < 1e-12);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn bounded_ctx() -> impl Strategy<Value = TauContext> {
            (
                prop::collection::vec(
                    (prop_oneof![-3.0..-0.05f64, 0.05..3.0f64], 0.05..4.0f64),
                    1..4,
                ),
                0.2..3.0f64,
                1u64..40,
            )
                .prop_map(|(atoms, lam, n)| atomic(&atoms, lam, n))
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(64))]

            #[test]
            fn chernoff_identity(ctx in bounded_ctx(), xi in 0.01..30.0f64) {
                let lhs = chernoff_min(&ctx, xi).unwrap();
                let rhs = integrated_tau_inverse(&ctx, xi).unwrap();
                prop_assert!((lhs + rhs).abs() <= 1e-8, "{} vs {}", lhs, rhs);
            }

            #[test]
            fn closed_dominates_integral(ctx in bounded_ctx(), xi in 0.01..30.0f64) {
                let m = ctx.measure();
                let int = deviation_bound_integral(&ctx, xi).unwrap().value;
                let closed = deviation_bound_closed(xi, m.second_moment(), m.support_radius(), ctx.lambda(), ctx.n()).unwrap().value;
                prop_assert!(int <= closed + 1e-10, "{} > {}", int, closed);
            }

            #[test]
            fn single_atom_equality(u in 0.1..3.0f64, w in 0.1..4.0f64, lam in 0.2..3.0f64, n in 1u64..20, xi in 0.01..20.0f64) {
                let ctx = atomic(&[(u, w)], lam, n);
                let m = ctx.measure();
                let int = deviation_bound_integral(&ctx, xi).unwrap().value;
                let closed = deviation_bound_closed(xi, m.second_moment(), m.support_radius(), lam, n).unwrap().value;
                prop_assert!((int - closed).abs() <= 1e-9);
            }

            #[test]
            fn bounds_in_unit_interval_and_monotone(ctx in bounded_ctx(), xi in 0.01..20.0f64, dxi in 0.001..5.0f64) {
                let m = ctx.measure();
                let (v, r) = (m.second_moment(), m.support_radius());
                let a = deviation_bound_integral(&ctx, xi).unwrap().value;
                let b = deviation_bound_integral(&ctx, xi + dxi).unwrap().value;
                prop_assert!((0.0..=1.0).contains(&a) && b <= a);
                let a = deviation_bound_closed(xi, v, r, ctx.lambda(), ctx.n()).unwrap().value;
                let b = deviation_bound_closed(xi + dxi, v, r, ctx.lambda(), ctx.n()).unwrap().value;
                prop_assert!((0.0..=1.0).contains(&a) && b <= a);
            }
        }
    }
}
