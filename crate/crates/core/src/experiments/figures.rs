//! Curves of the rate exponent `γ` and its derivative `γ'`.

use serde::Serialize;

use crate::bounds::{gamma_exponent, gamma_exponent_derivative};
use crate::error::Result;

pub const FIGURE_RANGE: (f64, f64) = (1.05, 500.0);
pub const FIGURE_POINTS: usize = 2000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub x: f64,
    pub gamma: f64,
    pub gamma_prime: f64,
}

/// `γ` and `γ'` on a log-spaced grid of `points` values over `[lo, hi]`.
pub fn gamma_curves(lo: f64, hi: f64, points: usize) -> Result<Vec<CurvePoint>> {
    let (a, b) = (lo.ln(), hi.ln());
    (0..points)
        .map(|i| {
            let t = if points == 1 {
                0.0
            } else {
                i as f64 / (points - 1) as f64
            };
            let x = (a + t * (b - a)).exp();
            Ok(CurvePoint {
                x,
                gamma: gamma_exponent(x)?,
                gamma_prime: gamma_exponent_derivative(x)?,
            })
        })
        .collect()
}

pub fn default_gamma_curves() -> Vec<CurvePoint> {
    gamma_curves(FIGURE_RANGE.0, FIGURE_RANGE.1, FIGURE_POINTS)
        .expect("figure range lies in (1, inf)")
}

/// Number of strict sign changes, ignoring exact zeros.
pub fn sign_changes(values: &[f64]) -> usize {
    let signs: Vec<bool> = values
        .iter()
        .filter(|v| **v != 0.0)
        .map(|v| *v > 0.0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Index of the maximum when `values` rise strictly then fall strictly.
pub fn unimodal_peak(values: &[f64]) -> Option<usize> {
    let peak = values
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))?
        .0;
    let rising = values[..=peak].windows(2).all(|w| w[1] > w[0]);
    let falling = values[peak..].windows(2).all(|w| w[1] < w[0]);
    (rising && falling).then_some(peak)
}
