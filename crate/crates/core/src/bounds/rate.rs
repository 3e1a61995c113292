//! Shape functions of the closed-form exponent and the convergence-rate
//! analysis built on them.
//!
//! `Γ(x) = x - (x+1) ln(x+1)` is the exponent shape. For `x > 1`, the rate
//! exponent `γ(x) = ln((x+1) ln(x+1) - x) / ln x` is the unique `γ` with
//! `Γ(x) = -x^γ`. It rises from `-inf` at `x = 1⁺`, peaks once at
//! `x̂ ≈ 69.85` with `γ(x̂) ≈ 1.2827`, then decays towards 1.
//!
//! `Γ` has no positive root (it is strictly decreasing from `Γ(0) = 0`), so
//! the closed-form risk exponent is negative for every radius `xi > 0`.

use crate::error::{Error, Result};
use crate::numeric::golden_section_max;

/// Search interval for [`find_xhat`].
pub const XHAT_SEARCH: (f64, f64) = (1.0, 1e6);
pub const XHAT_TOL: f64 = 1e-6;

/// `Γ(x) = x - (x+1) ln(x+1)`; power series below 0.1 to keep relative
/// accuracy where the two terms cancel.
pub fn big_gamma(x: f64) -> f64 {
    if x.abs() < 0.1 {
        // Γ(x) = Σ_{k>=2} (-1)^{k+1} x^k / (k (k-1))
        let mut pow = x * x;
        let mut sum = 0.0;
        let mut sign = -1.0;
        for k in 2..=30 {
            let kf = k as f64;
            sum += sign * pow / (kf * (kf - 1.0));
            pow *= x;
            sign = -sign;
        }
        sum
    } else {
        x - (x + 1.0) * x.ln_1p()
    }
}

fn check_gt_one(x: f64) -> Result<()> {
    if x > 1.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain {
            what: "x",
            value: x,
            domain: "(1, inf)".into(),
        })
    }
}

/// `γ(x)`, defined for `x > 1`.
pub fn gamma_exponent(x: f64) -> Result<f64> {
    check_gt_one(x)?;
    Ok(gamma_exponent_unchecked(x))
}

fn gamma_exponent_unchecked(x: f64) -> f64 {
    (-big_gamma(x)).ln() / x.ln()
}

/// `γ'(x)`, defined for `x > 1`.
pub fn gamma_exponent_derivative(x: f64) -> Result<f64> {
    check_gt_one(x)?;
    Ok(gamma_exponent_derivative_unchecked(x))
}

fn gamma_exponent_derivative_unchecked(x: f64) -> f64 {
    let lx = x.ln();
    let l1 = x.ln_1p();
    let g = -big_gamma(x);
    l1 / (lx * g) - g.ln() / (x * lx * lx)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct XHat {
    pub x: f64,
    pub gamma_max: f64,
}

/// Maximizer of `γ` over `(1, 10⁶)`.
///
/// Golden-section search brackets the peak to [`XHAT_TOL`]; the bracket is
/// then widened until `γ'` changes sign across it and polished by bisection,
/// because `γ` is too flat at the peak for function comparisons to locate it
/// much below `1e-5`.
pub fn find_xhat() -> XHat {
    let (lo, hi) = golden_section_max(
        |x| {
            if x > 1.0 {
                gamma_exponent_unchecked(x)
            } else {
                f64::NEG_INFINITY
            }
        },
        XHAT_SEARCH.0,
        XHAT_SEARCH.1,
        XHAT_TOL,
    );
    let d = gamma_exponent_derivative_unchecked;
    let (mut a, mut b) = (lo, hi);
    let mut step = XHAT_TOL;
    while d(a) <= 0.0 && a - step > XHAT_SEARCH.0 {
        a -= step;
        step *= 2.0;
    }
    step = XHAT_TOL;
    while d(b) >= 0.0 && b + step < XHAT_SEARCH.1 {
        b += step;
        step *= 2.0;
    }
    if d(a) > 0.0 && d(b) < 0.0 {
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if d(m) > 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
    }
    let x = 0.5 * (a + b);
    XHat {
        x,
        gamma_max: gamma_exponent_unchecked(x),
    }
}

/// Radius at confidence `1 - epsilon` from the rate form of the
/// closed-form risk bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SupRadius {
    pub xi: f64,
    /// `xi R / (8 lambda V)`, the argument of `Γ` at the returned radius.
    pub x: f64,
    /// Whether the radius satisfies its own side conditions: `x > 1` and
    /// `gamma <= γ(x)`.
    pub consistent: bool,
}

/// ```text
/// xi = ( 8 λ R (ln_cov - ln(ε/2)) / (N (λR/(8W))^(γ-1)) )^(1/γ),   W = λ² V
/// ```
///
/// When `gamma = γ(x)` at the returned `x`, the closed-form risk bound at
/// `xi` equals `epsilon` exactly.
#[allow(clippy::too_many_arguments)]
pub fn sup_deviation_radius(
    epsilon: f64,
    n: u64,
    ln_cov: f64,
    v: f64,
    r: f64,
    lambda: f64,
    gamma: f64,
) -> Result<SupRadius> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::Domain {
            what: "epsilon",
            value: epsilon,
            domain: "(0, 1)".into(),
        });
    }
    if !(gamma > 0.0 && gamma.is_finite()) {
        return Err(Error::Domain {
            what: "gamma",
            value: gamma,
            domain: "(0, inf)".into(),
        });
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Inapplicable(
            "bounded support required: R must be finite",
        ));
    }
    if !(v > 0.0) || !(lambda > 0.0) || n == 0 {
        return Err(Error::invalid("V, lambda, N", "must be strictly positive"));
    }
    let lr = lambda * r;
    let w = lambda * lambda * v;
    let numerator = 8.0 * lr * (ln_cov - (epsilon / 2.0).ln());
    let denominator = n as f64 * (lr / (8.0 * w)).powf(gamma - 1.0);
    let xi = (numerator / denominator).powf(1.0 / gamma);
    let x = risk_shape_argument(xi, v, r, lambda);
    let consistent = x > 1.0 && gamma <= gamma_exponent_unchecked(x) * (1.0 + 1e-12);
    Ok(SupRadius { xi, x, consistent })
}

/// `xi R / (8 λ V)`: where the closed-form risk bound evaluates `Γ`.
pub fn risk_shape_argument(xi: f64, v: f64, r: f64, lambda: f64) -> f64 {
    xi * r / (8.0 * lambda * v)
}

/// Per-sample exponent of the closed-form risk bound,
/// `(V / R²) Γ(xi R / (8 λ V))`. Negative for every `xi > 0`, so the
/// bound vanishes as `N → ∞` whenever `ln_cov / N → 0`.
pub fn closed_risk_exponent_per_sample(xi: f64, v: f64, r: f64, lambda: f64) -> f64 {
    v / (r * r) * big_gamma(risk_shape_argument(xi, v, r, lambda))
}

/// Smallest radius beyond which the closed-form risk bound is guaranteed to
/// vanish asymptotically. Always zero: `Γ(x) < 0` for all `x > 0`, so the
/// positive root of `Γ` that a threshold would be built from does not exist.
pub const VANISHING_RADIUS_THRESHOLD: f64 = 0.0;

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn big_gamma_examples() {
        assert_eq!(big_gamma(0.0), 0.0);
        assert!((big_gamma(1.0) - (1.0 - 2.0 * 2f64.ln())).abs() < 1e-15);
        assert!((big_gamma(1.0) + 0.386_294_361_119_890_6).abs() < 1e-15);
        assert!((big_gamma(E - 1.0) + 1.0).abs() < 1e-15);
    }

    #[test]
    fn big_gamma_series_matches_direct_form() {
        for &x in &[0.02f64, 0.05, 0.0999, 0.1, 0.2] {
            let direct = x - (x + 1.0) * x.ln_1p();
            assert!((big_gamma(x) - direct).abs() < 1e-14, "x={x}");
        }
        // small-x asymptote -x²/2 + x³/6
        let x = 1e-6f64;
        let series = -x * x / 2.0 + x * x * x / 6.0 - x.powi(4) / 12.0;
        assert!((big_gamma(x) - series).abs() < 1e-30);
    }

    #[test]
    fn gamma_exponent_examples() {
        assert!(gamma_exponent(E - 1.0).unwrap().abs() < 1e-15);
        assert!((gamma_exponent(2.0).unwrap() - 0.373_884_107_558_724_2).abs() < 1e-14);
        assert!((gamma_exponent(69.85).unwrap() - 1.282_698_033_474_671).abs() < 1e-12);
        assert!(matches!(gamma_exponent(1.0), Err(Error::Domain { .. })));
        assert!(matches!(gamma_exponent(0.5), Err(Error::Domain { .. })));
    }

    #[test]
    fn gamma_derivative_sign_examples() {
        assert!(gamma_exponent_derivative(2.0).unwrap() > 0.0);
        let far = gamma_exponent_derivative(1000.0).unwrap();
        assert!(far < 0.0 && far.abs() < 1e-2);
        let further = gamma_exponent_derivative(1e5).unwrap();
        assert!(further < 0.0 && further.abs() < far.abs());
        assert!(gamma_exponent_derivative(1.0).is_err());
    }

    #[test]
    fn derivative_matches_finite_differences() {
        let g = gamma_exponent_unchecked;
        for i in 0..=400 {
            let x = (1.1f64.ln() + i as f64 / 400.0 * (1e4f64.ln() - 1.1f64.ln())).exp();
            let h = 1e-4 * (x - 1.0).min(x);
            let fd =
                (-g(x + 2.0 * h) + 8.0 * g(x + h) - 8.0 * g(x - h) + g(x - 2.0 * h)) / (12.0 * h);
            let d = gamma_exponent_derivative(x).unwrap();
            assert!(
                (d - fd).abs() <= 1e-6 * fd.abs() + 1e-10,
                "x={x}: {d} vs {fd}"
            );
        }
    }

    #[test]
    fn xhat_values() {
        let h = find_xhat();
        assert!((h.x - 69.85).abs() <= 0.5, "x̂ = {}", h.x);
        assert!(h.gamma_max <= 1.3);
        // 30-digit reference 69.8517098109..., 1.2826980334793...
        assert!((h.x - 69.851_709_810_981_08).abs() < 1e-6);
        assert!((h.gamma_max - 1.282_698_033_479_313_5).abs() < 1e-13);
        assert!(gamma_exponent_derivative(h.x).unwrap().abs() < 1e-8);
        assert_eq!(find_xhat(), h);
    }

    #[test]
    fn sup_radius_examples() {
        let r = sup_deviation_radius(2.0 / E, 64, 0.0, 1.0, 8.0, 1.0, 1.0).unwrap();
        assert!((r.xi - 1.0).abs() < 1e-14);
        // γ = 1 collapses to 8λR(ln_cov - ln(ε/2))/N
        let r = sup_deviation_radius(0.05, 500, 1.3, 0.7, 2.0, 1.5, 1.0).unwrap();
        let want = 8.0 * 1.5 * 2.0 * (1.3 - (0.025f64).ln()) / 500.0;
        assert!((r.xi - want).abs() < 1e-14 * want);
        // γ = 2: four times the samples halves the radius
        let a = sup_deviation_radius(0.1, 100, 0.5, 1.0, 1.0, 1.0, 2.0)
            .unwrap()
            .xi;
        let b = sup_deviation_radius(0.1, 400, 0.5, 1.0, 1.0, 1.0, 2.0)
            .unwrap()
            .xi;
        assert!((a / b - 2.0).abs() < 1e-13);
        assert!(sup_deviation_radius(1.0, 1, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
        assert!(sup_deviation_radius(0.0, 1, 0.0, 1.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn radius_inverts_bound_with_lipschitz_scaling() {
        // ε defined by the closed-form risk bound at xi0 maps back to xi0
        // when γ = γ(x0)
        let (v, r, lam, ln_cov, n) = (0.6f64, 1.7, 2.3, 0.9, 40u64);
        let x0 = 20.0;
        let xi0 = 8.0 * lam * v * x0 / r;
        assert!((risk_shape_argument(xi0, v, r, lam) - x0).abs() < 1e-13);
        let eps = 2.0 * (ln_cov + n as f64 * closed_risk_exponent_per_sample(xi0, v, r, lam)).exp();
        let s =
            sup_deviation_radius(eps, n, ln_cov, v, r, lam, gamma_exponent(x0).unwrap()).unwrap();
        assert!((s.xi - xi0).abs() < 1e-10 * xi0, "{} vs {xi0}", s.xi);
        assert!(s.consistent);
    }

    #[test]
    fn consistent_radius_keeps_closed_bound_below_epsilon() {
        // Pick N so the radius lands just above x = 5 with γ = γ(5); γ is
        // increasing there, so the radius is consistent and Γ(x) <= -x^γ
        // forces the closed-form risk bound at the radius below ε.
        let (v, r, lam, ln_cov, eps) = (0.01f64, 1.0, 1.0, 0.4, 0.05);
        let g = gamma_exponent(5.0).unwrap();
        let target_xi = 8.0 * v * 5.0 / (lam * r);
        let n_real = 8.0 * lam * r * (ln_cov - (eps / 2.0f64).ln())
            / ((lam * r / (8.0 * v)).powf(g - 1.0) * target_xi.powf(g));
        let n = n_real.floor().max(1.0) as u64;
        let s = sup_deviation_radius(eps, n, ln_cov, v, r, lam, g).unwrap();
        assert!(s.x >= 5.0 && s.consistent);
        let exponent = n as f64 * closed_risk_exponent_per_sample(s.xi, v, r, lam);
        let bound = 2.0 * ln_cov.exp() * exponent.exp();
        assert!(bound <= eps * (1.0 + 1e-9), "bound {bound}");
        // exactly at x = 5 the bound would equal ε
        let exact = 2.0
            * ln_cov.exp()
            * (n_real * closed_risk_exponent_per_sample(target_xi, v, r, lam)).exp();
        assert!((exact - eps).abs() < 1e-12);
    }

    #[test]
    fn risk_exponent_negative_everywhere() {
        for &xi in &[1e-6, 0.01, 1.0, 100.0, 1e6] {
            assert!(closed_risk_exponent_per_sample(xi, 1.0, 2.0, 0.5) < 0.0);
        }
        assert_eq!(VANISHING_RADIUS_THRESHOLD, 0.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn big_gamma_negative_and_decreasing(x in 1e-6..1e6f64, dx in 1e-6..10.0f64) {
                prop_assert!(big_gamma(x) < 0.0);
                prop_assert!(big_gamma(x + dx) < big_gamma(x));
            }

            #[test]
            fn gamma_lower_envelope(x in 1.001..1e5f64, frac in 0.0..1.0f64) {
                let g = gamma_exponent(x).unwrap();
                prop_assume!(g > 0.0);
                let gt = g * frac.max(1e-6);
                prop_assert!(big_gamma(x) <= -x.powf(gt) * (1.0 - 1e-12));
                let equality = (big_gamma(x) + x.powf(g)).abs();
                prop_assert!(equality <= 1e-9 * x.powf(g).max(1.0));
            }
        }
    }
}
