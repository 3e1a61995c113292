//! Generating triplets `(a, 0, nu)` and their Lévy measures.
//!
//! Two measure families are supported:
//!
//! * [`AtomicLevyMeasure`]: finitely many weighted atoms. Finite activity, so
//!   the law is a drift plus a compensated compound Poisson sum and every
//!   integral against the measure is a finite sum.
//! * [`ExpIntensityMeasure`]: the one-dimensional density
//!   `alpha * u^-1 * exp(-beta u)` on `(0, inf)`. Infinite activity and
//!   unbounded support, but every quantity the bounds need has a closed form.
//!
//! Norms are Euclidean throughout.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::adaptive_simpson;

pub(crate) fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// A single jump location with its Poisson rate per unit time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    #[serde(rename = "u")]
    pub location: Vec<f64>,
    #[serde(rename = "w")]
    pub mass: f64,
}

impl Atom {
    pub fn new(location: Vec<f64>, mass: f64) -> Self {
        Atom { location, mass }
    }

    pub fn scalar(u: f64, w: f64) -> Self {
        Atom::new(vec![u], w)
    }

    pub fn norm(&self) -> f64 {
        norm(&self.location)
    }
}

/// Finite-activity Lévy measure: a non-empty list of atoms away from the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct AtomicLevyMeasure {
    atoms: Vec<Atom>,
    dim: usize,
}

impl AtomicLevyMeasure {
    pub fn new(atoms: Vec<Atom>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::invalid("measure.atoms", "must be non-empty"));
        }
        let dim = atoms[0].location.len();
        if dim == 0 {
            return Err(Error::invalid(
                "measure.atoms[0].u",
                "must have at least one coordinate",
            ));
        }
        for (i, atom) in atoms.iter().enumerate() {
            if atom.location.len() != dim {
                return Err(Error::invalid(
                    format!("measure.atoms[{i}].u"),
                    format!("has dimension {}, expected {dim}", atom.location.len()),
                ));
            }
            if atom.location.iter().any(|x| !x.is_finite()) {
                return Err(Error::invalid(
                    format!("measure.atoms[{i}].u"),
                    "must be finite",
                ));
            }
            if atom.norm() == 0.0 {
                return Err(Error::invalid(
                    format!("measure.atoms[{i}].u"),
                    "atom at the origin is not allowed",
                ));
            }
            if !(atom.mass > 0.0 && atom.mass.is_finite()) {
                return Err(Error::invalid(
                    format!("measure.atoms[{i}].w"),
                    "must be strictly positive and finite",
                ));
            }
        }
        let m = AtomicLevyMeasure { atoms, dim };
        debug_assert!(m.levy_integral().is_finite());
        Ok(m)
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum()
    }

    /// `∫ min{|u|², 1} nu(du)`, finite for every atomic measure.
    pub fn levy_integral(&self) -> f64 {
        self.atoms
            .iter()
            .map(|a| a.mass * (a.norm() * a.norm()).min(1.0))
            .sum()
    }

    /// Copy with every mass multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        AtomicLevyMeasure::new(
            self.atoms
                .iter()
                .map(|a| Atom::new(a.location.clone(), a.mass * factor))
                .collect(),
        )
    }
}

/// `alpha * u^-1 * exp(-beta u) du` on `(0, inf)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpIntensityMeasure {
    pub alpha: f64,
    pub beta: f64,
}

impl ExpIntensityMeasure {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::invalid(
                "measure.alpha",
                "must be strictly positive and finite",
            ));
        }
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::invalid(
                "measure.beta",
                "must be strictly positive and finite",
            ));
        }
        Ok(ExpIntensityMeasure { alpha, beta })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum LevyMeasure {
    Atomic(AtomicLevyMeasure),
    ExpIntensity(ExpIntensityMeasure),
}

impl LevyMeasure {
    pub fn dim(&self) -> usize {
        match self {
            LevyMeasure::Atomic(m) => m.dim(),
            LevyMeasure::ExpIntensity(_) => 1,
        }
    }

    /// `V = ∫ |u|² nu(du)`.
    pub fn second_moment(&self) -> f64 {
        match self {
            LevyMeasure::Atomic(m) => m
                .atoms
                .iter()
                .map(|a| a.mass * a.location.iter().map(|x| x * x).sum::<f64>())
                .sum(),
            LevyMeasure::ExpIntensity(e) => e.alpha / (e.beta * e.beta),
        }
    }

    /// `R`, the radius of the smallest ball carrying the measure.
    pub fn support_radius(&self) -> f64 {
        match self {
            LevyMeasure::Atomic(m) => m.atoms.iter().map(Atom::norm).fold(0.0, f64::max),
            LevyMeasure::ExpIntensity(_) => f64::INFINITY,
        }
    }

    /// `M = sup{t >= 0 : E exp(t|z|) < inf}`.
    ///
    /// Finite exactly when the large jumps have only exponential moments up
    /// to a point; for the exp-intensity density that point is `beta`.
    pub fn exp_moment_radius(&self) -> f64 {
        match self {
            LevyMeasure::Atomic(_) => f64::INFINITY,
            LevyMeasure::ExpIntensity(e) => e.beta,
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.support_radius().is_finite()
    }

    pub fn total_mass(&self) -> f64 {
        match self {
            LevyMeasure::Atomic(m) => m.total_mass(),
            LevyMeasure::ExpIntensity(_) => f64::INFINITY,
        }
    }

    pub fn as_atomic(&self) -> Option<&AtomicLevyMeasure> {
        match self {
            LevyMeasure::Atomic(m) => Some(m),
            LevyMeasure::ExpIntensity(_) => None,
        }
    }
}

pub fn second_moment_v(measure: &LevyMeasure) -> f64 {
    measure.second_moment()
}

pub fn support_radius_r(measure: &LevyMeasure) -> f64 {
    measure.support_radius()
}

pub fn exp_moment_radius_m(measure: &LevyMeasure) -> f64 {
    measure.exp_moment_radius()
}

/// Generating triplet with zero Gaussian component.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingTriplet {
    drift: Vec<f64>,
    measure: LevyMeasure,
}

impl GeneratingTriplet {
    pub fn new(drift: Vec<f64>, measure: LevyMeasure) -> Result<Self> {
        if drift.len() != measure.dim() {
            return Err(Error::invalid(
                "drift",
                format!(
                    "has dimension {}, measure has dimension {}",
                    drift.len(),
                    measure.dim()
                ),
            ));
        }
        if drift.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("drift", "must be finite"));
        }
        Ok(GeneratingTriplet { drift, measure })
    }

    /// Atomic triplet from `(location, mass)` pairs.
    pub fn atomic(drift: Vec<f64>, atoms: Vec<Atom>) -> Result<Self> {
        GeneratingTriplet::new(drift, LevyMeasure::Atomic(AtomicLevyMeasure::new(atoms)?))
    }

    pub fn exp_intensity(drift: f64, alpha: f64, beta: f64) -> Result<Self> {
        GeneratingTriplet::new(
            vec![drift],
            LevyMeasure::ExpIntensity(ExpIntensityMeasure::new(alpha, beta)?),
        )
    }

    pub fn drift(&self) -> &[f64] {
        &self.drift
    }

    pub fn measure(&self) -> &LevyMeasure {
        &self.measure
    }

    pub fn dim(&self) -> usize {
        self.drift.len()
    }

    /// The Gaussian component, which is identically zero for every triplet
    /// this crate represents.
    pub fn gaussian(&self) -> Vec<Vec<f64>> {
        vec![vec![0.0; self.dim()]; self.dim()]
    }

    /// Triplet of the `m`-th convolution root: drift and every mass divided
    /// by `m`. Only finite-activity triplets are supported.
    pub fn convolution_root(&self, m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::invalid("m", "must be at least 1"));
        }
        let atomic = self.measure.as_atomic().ok_or(Error::Unsupported(
            "convolution root of an infinite-activity measure",
        ))?;
        let k = m as f64;
        GeneratingTriplet::new(
            self.drift.iter().map(|a| a / k).collect(),
            LevyMeasure::Atomic(atomic.scaled(1.0 / k)?),
        )
    }

    /// Stable 64-bit fingerprint of the triplet parameters (FNV-1a over the
    /// IEEE bit patterns).
    pub fn fingerprint(&self) -> u64 {
        const PRIME: u64 = 0x0000_0100_0000_01b3;
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        let mut eat = |x: u64| {
            for b in x.to_le_bytes() {
                h ^= b as u64;
                h = h.wrapping_mul(PRIME);
            }
        };
        eat(self.drift.len() as u64);
        for a in &self.drift {
            eat(a.to_bits());
        }
        match &self.measure {
            LevyMeasure::Atomic(m) => {
                eat(1);
                for atom in &m.atoms {
                    for x in &atom.location {
                        eat(x.to_bits());
                    }
                    eat(atom.mass.to_bits());
                }
            }
            LevyMeasure::ExpIntensity(e) => {
                eat(2);
                eat(e.alpha.to_bits());
                eat(e.beta.to_bits());
            }
        }
        h
    }

    /// Mean of the law, `a + Σ_{|u|>1} w u`; small jumps are compensated
    /// and contribute nothing.
    pub fn mean_vector(&self) -> Result<Vec<f64>> {
        let atomic = self.measure.as_atomic().ok_or(Error::Unsupported(
            "mean vector of an infinite-activity measure",
        ))?;
        let mut mean = self.drift.clone();
        for atom in atomic.atoms.iter().filter(|a| a.norm() > 1.0) {
            for (m, u) in mean.iter_mut().zip(&atom.location) {
                *m += atom.mass * u;
            }
        }
        Ok(mean)
    }

    /// Characteristic exponent `ln E exp(i<theta, z>)`.
    ///
    /// Exact sum for atomic measures; for the exp-intensity density the
    /// jump integral is evaluated numerically on `(0, 1]` and `(1, U]` where
    /// `exp(-beta (U - 1)) = e^-40`.
    pub fn char_exponent(&self, theta: &[f64]) -> Result<Complex64> {
        if theta.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: theta.len(),
            });
        }
        let drift = Complex64::new(0.0, dot(&self.drift, theta));
        let jumps = match &self.measure {
            LevyMeasure::Atomic(m) => m
                .atoms
                .iter()
                .map(|a| {
                    let phase = dot(theta, &a.location);
                    let comp = if a.norm() <= 1.0 { phase } else { 0.0 };
                    a.mass * Complex64::new(phase.cos() - 1.0, phase.sin() - comp)
                })
                .sum(),
            LevyMeasure::ExpIntensity(e) => exp_intensity_jump_integral(e, theta[0]),
        };
        Ok(drift + jumps)
    }
}

fn exp_intensity_jump_integral(e: &ExpIntensityMeasure, theta: f64) -> Complex64 {
    let (alpha, beta) = (e.alpha, e.beta);
    let tol = 1e-13;
    // (e^{i th u} - 1 - i th u) / u, expanded near 0 to avoid cancellation
    let small_re = |u: f64| {
        let x = theta * u;
        let re = if x.abs() < 1e-4 {
            -x * x / 2.0 + x.powi(4) / 24.0
        } else {
            x.cos() - 1.0
        };
        alpha * re / u * (-beta * u).exp()
    };
    let small_im = |u: f64| {
        let x = theta * u;
        let im = if x.abs() < 1e-4 {
            -x.powi(3) / 6.0 + x.powi(5) / 120.0
        } else {
            x.sin() - x
        };
        alpha * im / u * (-beta * u).exp()
    };
    let upper = 1.0 + 40.0 / beta;
    let large_re = |u: f64| alpha * ((theta * u).cos() - 1.0) / u * (-beta * u).exp();
    let large_im = |u: f64| alpha * (theta * u).sin() / u * (-beta * u).exp();
    // The integrands vanish at u = 0 by continuity.
    let guard = |g: &dyn Fn(f64) -> f64, u: f64| if u == 0.0 { 0.0 } else { g(u) };
    let re = adaptive_simpson(|u| guard(&small_re, u), 0.0, 1.0, tol)
        + piecewise(&large_re, 1.0, upper, tol);
    let im = adaptive_simpson(|u| guard(&small_im, u), 0.0, 1.0, tol)
        + piecewise(&large_im, 1.0, upper, tol);
    Complex64::new(re, im)
}

// Splits long oscillatory ranges into unit panels so adaptive refinement
// sees every oscillation.
fn piecewise(g: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    let panels = ((b - a).ceil() as usize).clamp(1, 4096);
    let h = (b - a) / panels as f64;
    (0..panels)
        .map(|i| {
            let lo = a + i as f64 * h;
            adaptive_simpson(g, lo, lo + h, tol / panels as f64)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn single(u: f64, w: f64) -> GeneratingTriplet {
        GeneratingTriplet::atomic(vec![0.0], vec![Atom::scalar(u, w)]).unwrap()
    }

    #[test]
    fn second_moment_examples() {
        assert_eq!(single(1.0, 1.0).measure().second_moment(), 1.0);
        assert_eq!(single(2.0, 3.0).measure().second_moment(), 12.0);
        let e = GeneratingTriplet::exp_intensity(0.0, 1.0, 2.0).unwrap();
        assert_eq!(second_moment_v(e.measure()), 0.25);
    }

    #[test]
    fn support_radius_examples() {
        let t = GeneratingTriplet::atomic(
            vec![0.0],
            vec![Atom::scalar(1.0, 1.0), Atom::scalar(0.5, 2.0)],
        )
        .unwrap();
        assert_eq!(support_radius_r(t.measure()), 1.0);
        let t = GeneratingTriplet::atomic(vec![0.0, 0.0], vec![Atom::new(vec![3.0, 4.0], 1.0)])
            .unwrap();
        assert_eq!(support_radius_r(t.measure()), 5.0);
        let e = GeneratingTriplet::exp_intensity(0.0, 1.0, 1.0).unwrap();
        assert_eq!(support_radius_r(e.measure()), f64::INFINITY);
    }

    #[test]
    fn exp_moment_radius_examples() {
        assert_eq!(
            exp_moment_radius_m(single(1.0, 1.0).measure()),
            f64::INFINITY
        );
        let e = GeneratingTriplet::exp_intensity(0.0, 2.0, 3.0).unwrap();
        assert_eq!(exp_moment_radius_m(e.measure()), 3.0);
        let e = GeneratingTriplet::exp_intensity(0.0, 1.0, 0.5).unwrap();
        assert_eq!(exp_moment_radius_m(e.measure()), 0.5);
    }

    #[test]
    fn char_exponent_examples() {
        let t = single(1.0, 1.0);
        assert_eq!(t.char_exponent(&[0.0]).unwrap(), Complex64::new(0.0, 0.0));
        let z = t.char_exponent(&[PI]).unwrap();
        assert!((z.re + 2.0).abs() < 1e-15);
        assert!((z.im + PI).abs() < 1e-15);
        let t = GeneratingTriplet::atomic(vec![1.0], vec![Atom::scalar(2.0, 1.0)]).unwrap();
        assert_eq!(t.char_exponent(&[0.0]).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn char_exponent_dimension_mismatch() {
        let err = single(1.0, 1.0).char_exponent(&[1.0, 2.0]).unwrap_err();
        assert!(matches!(
            err,
            Error::DimensionMismatch {
                expected: 1,
                got: 2
            }
        ));
    }

    #[test]
    fn exp_intensity_exponent_matches_frullani_form() {
        // Oracle: alpha * (-ln(1 - i theta / beta)) - i theta alpha (1 - e^-beta) / beta
        for &(alpha, beta, drift) in &[(1.0, 2.0, 0.0), (0.5, 0.7, 1.5), (3.0, 5.0, -0.2)] {
            let t = GeneratingTriplet::exp_intensity(drift, alpha, beta).unwrap();
            for &theta in &[-3.0, -0.4, 0.0, 0.01, 1.0, 2.5, 7.0] {
                let got = t.char_exponent(&[theta]).unwrap();
                let frullani = -(Complex64::new(1.0, -theta / beta)).ln() * alpha;
                let comp = Complex64::new(0.0, theta * alpha * (1.0 - (-beta).exp()) / beta);
                let want = frullani - comp + Complex64::new(0.0, drift * theta);
                assert!(
                    (got - want).norm() < 1e-9,
                    "alpha={alpha} beta={beta} theta={theta}: {got} vs {want}"
                );
            }
        }
    }

    #[test]
    fn mean_vector_examples() {
        assert_eq!(single(1.0, 1.0).mean_vector().unwrap(), vec![0.0]);
        assert_eq!(single(2.0, 3.0).mean_vector().unwrap(), vec![6.0]);
        let t = GeneratingTriplet::atomic(vec![5.0], vec![Atom::scalar(0.5, 4.0)]).unwrap();
        assert_eq!(t.mean_vector().unwrap(), vec![5.0]);
        let e = GeneratingTriplet::exp_intensity(0.0, 1.0, 1.0).unwrap();
        assert!(matches!(e.mean_vector(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn rejects_invalid_measures() {
        assert!(matches!(
            AtomicLevyMeasure::new(vec![]),
            Err(Error::Invalid { ref key, .. }) if key == "measure.atoms"
        ));
        assert!(matches!(
            AtomicLevyMeasure::new(vec![Atom::scalar(1.0, 1.0), Atom::scalar(0.0, 1.0)]),
            Err(Error::Invalid { ref key, .. }) if key == "measure.atoms[1].u"
        ));
        assert!(matches!(
            AtomicLevyMeasure::new(vec![Atom::scalar(2.0, 0.0)]),
            Err(Error::Invalid { ref key, .. }) if key == "measure.atoms[0].w"
        ));
        assert!(ExpIntensityMeasure::new(0.0, 1.0).is_err());
        assert!(ExpIntensityMeasure::new(1.0, -1.0).is_err());
        assert!(GeneratingTriplet::atomic(vec![0.0, 0.0], vec![Atom::scalar(1.0, 1.0)]).is_err());
    }

    #[test]
    fn gaussian_component_is_zero() {
        let t = GeneratingTriplet::atomic(vec![0.0, 1.0], vec![Atom::new(vec![1.0, 1.0], 1.0)])
            .unwrap();
        assert!(t.gaussian().iter().flatten().all(|&x| x == 0.0));
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn atoms_1d() -> impl Strategy<Value = Vec<Atom>> {
            prop::collection::vec(
                (prop_oneof![-3.0..-0.01f64, 0.01..3.0f64], 0.01..5.0f64)
                    .prop_map(|(u, w)| Atom::scalar(u, w)),
                1..6,
            )
        }

        proptest! {
            #[test]
            fn summaries_invariant_under_reordering(atoms in atoms_1d(), rot in 0usize..6) {
                let a = LevyMeasure::Atomic(AtomicLevyMeasure::new(atoms.clone()).unwrap());
                let mut shuffled = atoms.clone();
                let k = rot % shuffled.len();
                shuffled.rotate_left(k);
                shuffled.reverse();
                let b = LevyMeasure::Atomic(AtomicLevyMeasure::new(shuffled).unwrap());
                prop_assert!((a.second_moment() - b.second_moment()).abs() <= 1e-12 * a.second_moment());
                prop_assert_eq!(a.support_radius(), b.support_radius());
                prop_assert_eq!(a.exp_moment_radius(), b.exp_moment_radius());
            }

            #[test]
            fn char_exponent_conjugate_symmetry(atoms in atoms_1d(), drift in -2.0..2.0f64, theta in -10.0..10.0f64) {
                let t = GeneratingTriplet::atomic(vec![drift], atoms).unwrap();
                let p = t.char_exponent(&[theta]).unwrap();
                let m = t.char_exponent(&[-theta]).unwrap();
                prop_assert!((p.conj() - m).norm() <= 1e-12 * (1.0 + p.norm()));
            }

            #[test]
            fn doubling_masses_doubles_jump_term(atoms in atoms_1d(), drift in -2.0..2.0f64, theta in -10.0..10.0f64) {
                let t = GeneratingTriplet::atomic(vec![drift], atoms.clone()).unwrap();
                let doubled: Vec<Atom> = atoms.iter().map(|a| Atom::new(a.location.clone(), 2.0 * a.mass)).collect();
                let t2 = GeneratingTriplet::atomic(vec![drift], doubled).unwrap();
                let drift_term = Complex64::new(0.0, drift * theta);
                let j1 = t.char_exponent(&[theta]).unwrap() - drift_term;
                let j2 = t2.char_exponent(&[theta]).unwrap() - drift_term;
                prop_assert!((j2 - 2.0 * j1).norm() <= 1e-12 * (1.0 + j1.norm()));
            }

            #[test]
            fn exp_moment_radius_is_beta(alpha in 0.01..50.0f64, beta in 0.01..50.0f64) {
                let e = LevyMeasure::ExpIntensity(ExpIntensityMeasure::new(alpha, beta).unwrap());
                prop_assert_eq!(e.exp_moment_radius(), beta);
            }
        }
    }
}
