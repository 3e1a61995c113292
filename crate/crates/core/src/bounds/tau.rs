//! The cumulant-rate function `tau`, its primitive `phi` and its inverse.
//!
//! For a `lambda`-Lipschitz statistic of `N` draws,
//!
//! ```text
//! tau(t) = N ∫ lambda |u| (exp(t lambda |u|) - 1) nu(du)
//! phi(t) = N ∫ (exp(t lambda |u|) - t lambda |u| - 1) nu(du)
//! ```
//!
//! on `0 < t < M / lambda`. `phi' = tau` and `tau' > 0`, so `tau` is a
//! strictly increasing bijection onto `(0, tau((M/lambda)^-))`.

use crate::error::{Error, Result};
use crate::levy::LevyMeasure;
use crate::numeric::newton_bracketed;

/// Relative gap kept from a finite domain edge; `tau` is treated as ending
/// at `domain_limit * (1 - EDGE_GAP)`.
pub const EDGE_GAP: f64 = 1e-9;

const INVERSE_REL_TOL: f64 = 1e-14;

/// `exp(x) - 1 - x` without cancellation for small `x`.
pub(crate) fn exp_minus_linear(x: f64) -> f64 {
    if x.abs() < 0.1 {
        let mut term = x * x / 2.0;
        let mut sum = term;
        for k in 3..=14 {
            term *= x / k as f64;
            sum += term;
        }
        sum
    } else {
        x.exp_m1() - x
    }
}

/// `-y - ln(1 - y)` for `0 <= y < 1`, series near zero.
fn neg_log_minus_linear(y: f64) -> f64 {
    if y < 0.1 {
        let mut pow = y * y;
        let mut sum = 0.0;
        for k in 2..=24 {
            sum += pow / k as f64;
            pow *= y;
        }
        sum
    } else {
        -y - (-y).ln_1p()
    }
}

/// Everything `tau` depends on: the measure, the Lipschitz constant and the
/// number of summands.
#[derive(Debug, Clone)]
pub struct TauContext {
    measure: LevyMeasure,
    lambda: f64,
    n: u64,
    domain_limit: f64,
}

impl TauContext {
    pub fn new(measure: LevyMeasure, lambda: f64, n: u64) -> Result<Self> {
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::invalid(
                "lambda",
                "must be strictly positive and finite",
            ));
        }
        if n == 0 {
            return Err(Error::invalid("N", "must be at least 1"));
        }
        let domain_limit = measure.exp_moment_radius() / lambda;
        Ok(TauContext {
            measure,
            lambda,
            n,
            domain_limit,
        })
    }

    pub fn measure(&self) -> &LevyMeasure {
        &self.measure
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// `M / lambda`.
    pub fn domain_limit(&self) -> f64 {
        self.domain_limit
    }

    /// Copy with a different sample count.
    pub fn with_n(&self, n: u64) -> Result<Self> {
        TauContext::new(self.measure.clone(), self.lambda, n)
    }

    fn check_t(&self, t: f64) -> Result<()> {
        if t >= 0.0 && t < self.domain_limit {
            Ok(())
        } else {
            Err(Error::Domain {
                what: "t",
                value: t,
                domain: format!("[0, M/lambda) = [0, {})", self.domain_limit),
            })
        }
    }

    pub fn tau(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.tau_unchecked(t))
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        self.check_t(t)?;
        Ok(self.phi_unchecked(t))
    }

    pub(crate) fn tau_unchecked(&self, t: f64) -> f64 {
        let (n, lam) = (self.n as f64, self.lambda);
        match &self.measure {
            LevyMeasure::Atomic(m) => {
                n * m
                    .atoms()
                    .iter()
                    .map(|a| {
                        let r = lam * a.norm();
                        a.mass * r * (t * r).exp_m1()
                    })
                    .sum::<f64>()
            }
            LevyMeasure::ExpIntensity(e) => {
                n * lam * lam * e.alpha * t / (e.beta * (e.beta - lam * t))
            }
        }
    }

    /// `tau'(t) = N ∫ lambda² |u|² exp(t lambda |u|) nu(du)`.
    pub(crate) fn tau_derivative(&self, t: f64) -> f64 {
        let (n, lam) = (self.n as f64, self.lambda);
        match &self.measure {
            LevyMeasure::Atomic(m) => {
                n * m
                    .atoms()
                    .iter()
                    .map(|a| {
                        let r = lam * a.norm();
                        a.mass * r * r * (t * r).exp()
                    })
                    .sum::<f64>()
            }
            LevyMeasure::ExpIntensity(e) => {
                let gap = e.beta - lam * t;
                n * lam * lam * e.alpha / (gap * gap)
            }
        }
    }

    pub(crate) fn phi_unchecked(&self, t: f64) -> f64 {
        let (n, lam) = (self.n as f64, self.lambda);
        match &self.measure {
            LevyMeasure::Atomic(m) => {
                n * m
                    .atoms()
                    .iter()
                    .map(|a| a.mass * exp_minus_linear(t * lam * a.norm()))
                    .sum::<f64>()
            }
            LevyMeasure::ExpIntensity(e) => n * e.alpha * neg_log_minus_linear(lam * t / e.beta),
        }
    }

    /// Largest `t` at which `tau` is evaluated.
    pub fn t_cap(&self) -> f64 {
        if self.domain_limit.is_finite() {
            self.domain_limit * (1.0 - EDGE_GAP)
        } else {
            f64::INFINITY
        }
    }

    /// `tau((M/lambda)^-)`: infinite for an unbounded domain, otherwise tau
    /// at [`TauContext::t_cap`].
    pub fn tau_limit(&self) -> f64 {
        let cap = self.t_cap();
        if cap.is_finite() {
            self.tau_unchecked(cap)
        } else {
            f64::INFINITY
        }
    }

    /// The unique `t` with `tau(t) = s`.
    pub fn tau_inverse(&self, s: f64) -> Result<f64> {
        if !(s >= 0.0) {
            return Err(Error::Domain {
                what: "s",
                value: s,
                domain: "[0, tau((M/lambda)^-))".into(),
            });
        }
        if s == 0.0 {
            return Ok(0.0);
        }
        let limit = self.tau_limit();
        if s >= limit {
            return Err(Error::TauRange { value: s, limit });
        }
        let cap = self.t_cap();
        let mut hi = 1.0f64.min(cap);
        while self.tau_unchecked(hi) <= s {
            if hi >= cap {
                return Err(Error::TauRange { value: s, limit });
            }
            hi = (2.0 * hi).min(cap);
        }
        Ok(newton_bracketed(
            |t| self.tau_unchecked(t) - s,
            |t| self.tau_derivative(t),
            0.0,
            hi,
            INVERSE_REL_TOL,
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levy::{Atom, AtomicLevyMeasure, ExpIntensityMeasure};
    use std::f64::consts::E;

    fn atomic(atoms: &[(f64, f64)], lambda: f64, n: u64) -> TauContext {
        let m = AtomicLevyMeasure::new(atoms.iter().map(|&(u, w)| Atom::scalar(u, w)).collect())
            .unwrap();
        TauContext::new(LevyMeasure::Atomic(m), lambda, n).unwrap()
    }

    fn exp_ctx(alpha: f64, beta: f64, lambda: f64, n: u64) -> TauContext {
        TauContext::new(
            LevyMeasure::ExpIntensity(ExpIntensityMeasure::new(alpha, beta).unwrap()),
            lambda,
            n,
        )
        .unwrap()
    }

    #[test]
    fn tau_examples() {
        let c = atomic(&[(1.0, 2.0)], 1.0, 3);
        assert!((c.tau(1.0).unwrap() - 6.0 * (E - 1.0)).abs() < 1e-13);
        assert!((c.tau(1.0).unwrap() - 10.30969).abs() < 1e-5);
        assert_eq!(c.tau(0.0).unwrap(), 0.0);
        assert!(c.tau(1e-300).unwrap() < 1e-290);
        let e = exp_ctx(1.0, 2.0, 1.0, 1);
        assert!((e.tau(1.0).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn tau_domain_errors() {
        let e = exp_ctx(1.0, 2.0, 1.0, 1);
        assert!(matches!(e.tau(2.0), Err(Error::Domain { .. })));
        assert!(matches!(e.tau(-0.1), Err(Error::Domain { .. })));
        assert!(matches!(e.phi(3.0), Err(Error::Domain { .. })));
    }

    #[test]
    fn phi_examples() {
        let c = atomic(&[(1.0, 1.0)], 1.0, 1);
        assert!((c.phi(1.0).unwrap() - (E - 2.0)).abs() < 1e-15);
        assert_eq!(c.phi(0.0).unwrap(), 0.0);
        let c = atomic(&[(1.0, 2.0)], 1.0, 3);
        assert!((c.phi(1.0).unwrap() - 6.0 * (E - 2.0)).abs() < 1e-13);
        assert!((c.phi(1.0).unwrap() - 4.30969).abs() < 1e-5);
    }

    #[test]
    fn exp_intensity_phi_is_primitive_of_tau() {
        // Oracle: trapezoid-free check via the closed antiderivative of the
        // rational tau, N alpha (-y - ln(1 - y)) with y = lambda t / beta.
        let e = exp_ctx(1.3, 2.2, 0.7, 4);
        for &t in &[1e-6f64, 0.01, 0.5, 1.5, 3.0] {
            let h = 1e-6 * t.max(1e-3);
            let fd = (e.phi(t + h).unwrap() - e.phi(t - h).unwrap()) / (2.0 * h);
            let tau = e.tau(t).unwrap();
            assert!(
                (fd - tau).abs() <= 1e-6 * tau.max(1e-6),
                "t={t}: {fd} vs {tau}"
            );
        }
    }

    #[test]
    fn tau_inverse_examples() {
        let c = atomic(&[(1.0, 2.0)], 1.0, 3);
        assert_eq!(c.tau_inverse(0.0).unwrap(), 0.0);
        let t = c.tau_inverse(6.0 * (E - 1.0)).unwrap();
        assert!((t - 1.0).abs() < 1e-12);
        let e = exp_ctx(1.0, 2.0, 1.0, 1);
        assert!((e.tau_inverse(0.5).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn tau_inverse_closed_forms() {
        // atomic single atom: t = ln(1 + s / (N w lambda R)) / (lambda R)
        let c = atomic(&[(1.5, 0.8)], 2.0, 5);
        let r = 3.0f64;
        for &s in &[1e-9, 0.1, 1.0, 50.0, 1e4] {
            let want = (s / (5.0 * 0.8 * r)).ln_1p() / r;
            let got = c.tau_inverse(s).unwrap();
            assert!((got - want).abs() <= 1e-12 * want, "s={s}");
        }
        // exp intensity: t = s beta² / (lambda (N lambda alpha + s beta))
        let (alpha, beta, lam, n) = (0.6, 1.7, 0.9, 3u64);
        let e = exp_ctx(alpha, beta, lam, n);
        for &s in &[1e-9, 0.1, 1.0, 50.0, 1e4] {
            let want = s * beta * beta / (lam * (n as f64 * lam * alpha + s * beta));
            let got = e.tau_inverse(s).unwrap();
            assert!((got - want).abs() <= 1e-12 * want, "s={s}");
        }
    }

    #[test]
    fn tau_inverse_range_error_at_domain_edge() {
        let e = exp_ctx(1.0, 2.0, 1.0, 1);
        let limit = e.tau_limit();
        assert!(limit.is_finite() && limit > 1e8);
        match e.tau_inverse(2.0 * limit) {
            Err(Error::TauRange { limit: l, .. }) => assert_eq!(l, limit),
            other => panic!("expected range error, got {other:?}"),
        }
        assert!(matches!(e.tau_inverse(-1.0), Err(Error::Domain { .. })));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn any_ctx() -> impl Strategy<Value = TauContext> {
            prop_oneof![
                (
                    prop::collection::vec((0.05..3.0f64, 0.05..4.0f64), 1..4),
                    0.2..3.0f64,
                    1u64..50
                )
                    .prop_map(|(atoms, lam, n)| atomic(&atoms, lam, n)),
                (0.1..5.0f64, 0.5..5.0f64, 0.2..3.0f64, 1u64..50)
                    .prop_map(|(a, b, l, n)| exp_ctx(a, b, l, n)),
            ]
        }

        proptest! {
            #[test]
            fn tau_increasing_and_convex(ctx in any_ctx(), frac in 0.01..0.9f64) {
                let t = frac * ctx.domain_limit().min(2.0);
                let h = 1e-5;
                let (a, b, c) = (ctx.tau(t - h).unwrap(), ctx.tau(t).unwrap(), ctx.tau(t + h).unwrap());
                prop_assert!(a < b && b < c);
                prop_assert!(a + c - 2.0 * b >= -1e-12 * b);
            }

            #[test]
            fn tau_inverse_round_trip(ctx in any_ctx(), frac in 0.0..0.95f64) {
                let t = frac * ctx.domain_limit().min(3.0);
                let back = ctx.tau_inverse(ctx.tau(t).unwrap()).unwrap();
                prop_assert!((back - t).abs() <= 1e-9 * (1.0 + t), "t={} back={}", t, back);
            }
        }
    }
}
