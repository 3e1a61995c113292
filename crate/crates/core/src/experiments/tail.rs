use rayon::prelude::*;
use serde::Serialize;
use statrs::function::beta::beta_reg;

use crate::bounds::{
    check_symmetrization, deviation_bound_closed, deviation_bound_integral, risk_bound_closed,
    risk_bound_integral, BoundReport, TauContext,
};
use crate::error::{Error, Result};
use crate::function_class::{
    empirical_risk, expected_risk, expected_risks, ln_expected_cover, LipschitzFn,
    LipschitzRampFamily, COVER_REPLICATES,
};
use crate::levy::GeneratingTriplet;
use crate::rng::{derive_seed, substream};
use crate::sampler::Sampler;

/// Two-sided confidence level of every interval reported here.
pub const CONFIDENCE: f64 = 0.95;

/// Monte-Carlo estimate of a tail probability `Pr{D > xi}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TailEstimate {
    pub xi: f64,
    pub trials: u64,
    pub hits: u64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl TailEstimate {
    pub fn new(xi: f64, hits: u64, trials: u64) -> Self {
        let (ci_low, ci_high) = clopper_pearson(hits, trials, CONFIDENCE);
        TailEstimate {
            xi,
            trials,
            hits,
            point: hits as f64 / trials as f64,
            ci_low,
            ci_high,
        }
    }

    /// Tail estimate from per-trial deviations: hits are `d > xi`.
    pub fn from_deviations(xi: f64, deviations: &[f64]) -> Self {
        let hits = deviations.iter().filter(|&&d| d > xi).count() as u64;
        TailEstimate::new(xi, hits, deviations.len() as u64)
    }

    pub fn contains(&self, p: f64) -> bool {
        self.ci_low <= p && p <= self.ci_high
    }
}

/// Exact binomial interval for `hits` successes in `trials`.
pub fn clopper_pearson(hits: u64, trials: u64, confidence: f64) -> (f64, f64) {
    assert!(trials > 0 && hits <= trials);
    let tail = (1.0 - confidence) / 2.0;
    let (k, n) = (hits as f64, trials as f64);
    let lo = if hits == 0 {
        0.0
    } else {
        beta_quantile(tail, k, n - k + 1.0)
    };
    let hi = if hits == trials {
        1.0
    } else {
        beta_quantile(1.0 - tail, k + 1.0, n - k)
    };
    (lo, hi)
}

/// Inverse of the regularized incomplete beta function by bisection.
fn beta_quantile(p: f64, a: f64, b: f64) -> f64 {
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if beta_reg(a, b, mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_trials(trials: u64) -> Result<()> {
    if trials == 0 {
        Err(Error::invalid("trials", "must be at least 1"))
    } else {
        Ok(())
    }
}

/// `|F - EF|` for `trials` independent sample sets of size `n`, where
/// `F = Σ f(z_n)`. Trial `i` draws from `substream(seed, i)`.
pub fn mc_abs_deviations<F: LipschitzFn + ?Sized>(
    triplet: &GeneratingTriplet,
    f: &F,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    check_trials(trials)?;
    if n == 0 {
        return Err(Error::invalid("N", "must be at least 1"));
    }
    let sampler = Sampler::new(triplet)?;
    let ef = n as f64 * expected_risk(f, triplet)?.value;
    let dim = triplet.dim();
    Ok((0..trials)
        .into_par_iter()
        .map_init(
            || vec![0.0; dim],
            |buf, i| {
                let mut rng = substream(seed, i);
                let mut total = 0.0;
                for _ in 0..n {
                    sampler.draw_into(&mut rng, buf);
                    total += f.eval(buf);
                }
                (total - ef).abs()
            },
        )
        .collect())
}

/// Fraction of sample sets with `|F - EF| > xi`, with its exact interval.
pub fn mc_tail_probability<F: LipschitzFn + ?Sized>(
    triplet: &GeneratingTriplet,
    f: &F,
    n: usize,
    xi: f64,
    trials: u64,
    seed: u64,
) -> Result<TailEstimate> {
    Ok(TailEstimate::from_deviations(
        xi,
        &mc_abs_deviations(triplet, f, n, trials, seed)?,
    ))
}

/// Monte-Carlo tail next to both deviation bounds at one radius.
#[derive(Debug, Clone, PartialEq)]
pub struct DominanceRow {
    pub tail: TailEstimate,
    pub integral: BoundReport,
    pub closed: BoundReport,
    /// Set when the interval's lower end exceeds either bound.
    pub violation: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DominanceRecord {
    pub xi: f64,
    pub trials: u64,
    pub hits: u64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub integral_bound: f64,
    pub closed_bound: f64,
    pub violation: bool,
}

impl DominanceRow {
    pub fn record(&self) -> DominanceRecord {
        let t = &self.tail;
        DominanceRecord {
            xi: t.xi,
            trials: t.trials,
            hits: t.hits,
            point: t.point,
            ci_low: t.ci_low,
            ci_high: t.ci_high,
            integral_bound: self.integral.value,
            closed_bound: self.closed.value,
            violation: self.violation,
        }
    }
}

/// Tail estimates over `xi_grid` from one shared set of trials, each paired
/// with the integral and closed-form deviation bounds.
pub fn bound_dominance_report<F: LipschitzFn + ?Sized>(
    triplet: &GeneratingTriplet,
    f: &F,
    n: usize,
    xi_grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<DominanceRow>> {
    let measure = triplet.measure();
    if !measure.is_bounded() {
        return Err(Error::Inapplicable(
            "bounded support required: the closed-form bound needs finite R",
        ));
    }
    let lambda = f.lipschitz();
    let ctx = TauContext::new(measure.clone(), lambda, n as u64)?;
    let (v, r) = (measure.second_moment(), measure.support_radius());
    let deviations = mc_abs_deviations(triplet, f, n, trials, seed)?;
    xi_grid
        .iter()
        .map(|&xi| {
            let tail = TailEstimate::from_deviations(xi, &deviations);
            let integral = deviation_bound_integral(&ctx, xi)?;
            let closed = deviation_bound_closed(xi, v, r, lambda, n as u64)?;
            let violation = tail.ci_low > integral.value || tail.ci_low > closed.value;
            Ok(DominanceRow {
                tail,
                integral,
                closed,
                violation,
            })
        })
        .collect()
}

/// `max_f |E_N f - E f|` for `trials` independent sample sets; trial `i`
/// draws from `substream(seed, i)`.
pub fn mc_sup_deviations(
    family: &LipschitzRampFamily,
    triplet: &GeneratingTriplet,
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    check_trials(trials)?;
    let expected = expected_risks(family, triplet)?;
    sup_deviations_with(family, triplet, &expected, n, trials, seed)
}

pub(crate) fn sup_deviations_with(
    family: &LipschitzRampFamily,
    triplet: &GeneratingTriplet,
    expected: &[f64],
    n: usize,
    trials: u64,
    seed: u64,
) -> Result<Vec<f64>> {
    if n == 0 {
        return Err(Error::invalid("N", "must be at least 1"));
    }
    let sampler = Sampler::new(triplet)?;
    let members = family.members();
    Ok((0..trials)
        .into_par_iter()
        .map(|i| {
            let set = sampler.sample_set_serial(n, derive_seed(seed, i));
            members
                .iter()
                .zip(expected)
                .map(|(f, e)| (empirical_risk(f, &set) - e).abs())
                .fold(0.0, f64::max)
        })
        .collect())
}

/// Both sides of the symmetrization inequality
/// `Pr{sup|Ef - E_N f| > xi} <= 2 Pr{sup|E'_N f - E_N f| > xi/2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SymmetrizationCheck {
    pub lhs: TailEstimate,
    /// Estimate of `Pr{sup|E'_N f - E_N f| > xi/2}`, before doubling.
    pub rhs: TailEstimate,
    /// `lhs.ci_low <= min(1, 2 rhs.ci_high)`.
    pub holds: bool,
}

/// Trial `i` draws one double sample of size `2n` from
/// `derive_seed(seed, i)`; its first half is `Z`, its second `Z'`.
pub fn symmetrization_check(
    triplet: &GeneratingTriplet,
    family: &LipschitzRampFamily,
    n: usize,
    xi: f64,
    trials: u64,
    seed: u64,
) -> Result<SymmetrizationCheck> {
    check_trials(trials)?;
    let (a, b) = family.range();
    check_symmetrization(n as u64, xi, a, b)?;
    let expected = expected_risks(family, triplet)?;
    let sampler = Sampler::new(triplet)?;
    let members = family.members();
    let (lhs_hits, rhs_hits) = (0..trials)
        .into_par_iter()
        .map(|i| {
            let set = sampler.sample_set_serial(2 * n, derive_seed(seed, i));
            let (mut sup_true, mut sup_ghost) = (0.0f64, 0.0f64);
            for (f, e) in members.iter().zip(&expected) {
                let first: f64 = (0..n).map(|k| f.eval(set.point(k))).sum::<f64>() / n as f64;
                let second: f64 = (n..2 * n).map(|k| f.eval(set.point(k))).sum::<f64>() / n as f64;
                sup_true = sup_true.max((e - first).abs());
                sup_ghost = sup_ghost.max((second - first).abs());
            }
            ((sup_true > xi) as u64, (sup_ghost > xi / 2.0) as u64)
        })
        .reduce(|| (0, 0), |x, y| (x.0 + y.0, x.1 + y.1));
    let lhs = TailEstimate::new(xi, lhs_hits, trials);
    let rhs = TailEstimate::new(xi / 2.0, rhs_hits, trials);
    let holds = lhs.ci_low <= (2.0 * rhs.ci_high).min(1.0);
    Ok(SymmetrizationCheck { lhs, rhs, holds })
}

/// Monte-Carlo sup-deviation tail next to the covering-number risk bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct RiskDominanceRow {
    pub tail: TailEstimate,
    /// `ln E N(F, xi/8, L1(Z_1^{2N}))` used by both bounds.
    pub ln_cov: f64,
    pub integral: BoundReport,
    pub closed: BoundReport,
    /// Whether the closed-form bound is informative (at most 1).
    pub informative: bool,
    /// Set when informative and the interval's lower end exceeds it.
    pub violation: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct RiskDominanceRecord {
    pub xi: f64,
    pub trials: u64,
    pub hits: u64,
    pub point: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub ln_cov: f64,
    pub risk_integral: f64,
    pub risk_closed: f64,
    pub informative: bool,
    pub violation: bool,
}

impl RiskDominanceRow {
    pub fn record(&self) -> RiskDominanceRecord {
        let t = &self.tail;
        RiskDominanceRecord {
            xi: t.xi,
            trials: t.trials,
            hits: t.hits,
            point: t.point,
            ci_low: t.ci_low,
            ci_high: t.ci_high,
            ln_cov: self.ln_cov,
            risk_integral: self.integral.value,
            risk_closed: self.closed.value,
            informative: self.informative,
            violation: self.violation,
        }
    }
}

/// For each radius: the sup-deviation tail over `trials` sample sets of
/// size `n`, and both risk bounds with `ln_cov` estimated from
/// [`COVER_REPLICATES`] double samples at radius `xi / 8`.
pub fn risk_dominance_report(
    triplet: &GeneratingTriplet,
    family: &LipschitzRampFamily,
    n: usize,
    xi_grid: &[f64],
    trials: u64,
    seed: u64,
) -> Result<Vec<RiskDominanceRow>> {
    let measure = triplet.measure();
    if !measure.is_bounded() {
        return Err(Error::Inapplicable(
            "bounded support required: the closed-form bound needs finite R",
        ));
    }
    let lambda = family.lambda();
    let (a, b) = family.range();
    let (v, r) = (measure.second_moment(), measure.support_radius());
    let ctx = TauContext::new(measure.clone(), lambda, n as u64)?;
    let sups = mc_sup_deviations(family, triplet, n, trials, seed)?;
    xi_grid
        .iter()
        .enumerate()
        .map(|(i, &xi)| {
            let ln_cov = ln_expected_cover(
                family,
                triplet,
                n,
                xi / 8.0,
                COVER_REPLICATES,
                derive_seed(seed ^ 0xC0DE, i as u64),
            )?;
            let integral = risk_bound_integral(&ctx, xi, ln_cov, a, b)?;
            let closed = risk_bound_closed(xi, n as u64, ln_cov, v, r, lambda, a, b)?;
            let tail = TailEstimate::from_deviations(xi, &sups);
            let informative = closed.value <= 1.0;
            let violation = informative && tail.ci_low > closed.value;
            Ok(RiskDominanceRow {
                tail,
                ln_cov,
                integral,
                closed,
                informative,
                violation,
            })
        })
        .collect()
}
