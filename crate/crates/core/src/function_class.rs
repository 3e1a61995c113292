//! Lipschitz function families, their empirical and expected risks, and
//! empirical `L1` covering numbers.
//!
//! The standard family is a finite grid of ramps
//! `f_θ(z) = λ · clamp(z - θ, 0, c)`, each `λ`-Lipschitz with range `[0, λc]`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::levy::GeneratingTriplet;
use crate::rng::{derive_seed, substream, DEFAULT_SEED};
use crate::sampler::{SampleSet, Sampler};

/// Residual probability mass dropped when enumerating a lattice law.
pub const LATTICE_TAIL_MASS: f64 = 1e-12;
/// Largest number of count vectors enumerated before falling back to MC.
const MAX_LATTICE_POINTS: usize = 2_000_000;
/// Draws used by the Monte-Carlo fallback of [`expected_risk`].
pub const MC_RISK_DRAWS: usize = 10_000_000;
/// Double samples averaged by [`ln_expected_cover`] by default.
pub const COVER_REPLICATES: usize = 200;
/// Families up to this size also get an exhaustive minimum cover.
pub const EXACT_COVER_MAX_MEMBERS: usize = 20;

/// A real function on `R^K` with a known Lipschitz constant.
pub trait LipschitzFn: Sync {
    fn eval(&self, z: &[f64]) -> f64;

    fn lipschitz(&self) -> f64;

    /// `[A, B]`; unbounded functions return infinite ends.
    fn range(&self) -> (f64, f64);

    /// Closed-form expectation under `triplet`, when one exists.
    fn exact_mean(&self, _triplet: &GeneratingTriplet) -> Option<f64> {
        None
    }
}

/// `f(z) = z_k`: the coordinate projection, 1-Lipschitz.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Coordinate(pub usize);

impl LipschitzFn for Coordinate {
    fn eval(&self, z: &[f64]) -> f64 {
        z[self.0]
    }

    fn lipschitz(&self) -> f64 {
        1.0
    }

    fn range(&self) -> (f64, f64) {
        (f64::NEG_INFINITY, f64::INFINITY)
    }

    fn exact_mean(&self, triplet: &GeneratingTriplet) -> Option<f64> {
        triplet.mean_vector().ok().map(|m| m[self.0])
    }
}

/// `λ · clamp(z_0 - θ, 0, c)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Ramp {
    pub theta: f64,
    pub slope: f64,
    pub cap: f64,
}

impl LipschitzFn for Ramp {
    fn eval(&self, z: &[f64]) -> f64 {
        self.slope * (z[0] - self.theta).clamp(0.0, self.cap)
    }

    fn lipschitz(&self) -> f64 {
        self.slope
    }

    fn range(&self) -> (f64, f64) {
        (0.0, self.slope * self.cap)
    }
}

/// Finite family of ramps sharing slope and cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LipschitzRampFamily {
    thetas: Vec<f64>,
    #[serde(rename = "lambda")]
    slope: f64,
    cap: f64,
}

impl LipschitzRampFamily {
    pub fn new(thetas: Vec<f64>, slope: f64, cap: f64) -> Result<Self> {
        if thetas.is_empty() {
            return Err(Error::invalid("family.thetas", "must be non-empty"));
        }
        if let Some(i) = thetas.iter().position(|t| !t.is_finite()) {
            return Err(Error::invalid(
                format!("family.thetas[{i}]"),
                "must be finite",
            ));
        }
        if let Some(i) = thetas.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::invalid(
                format!("family.thetas[{}]", i + 1),
                "thresholds must be strictly increasing",
            ));
        }
        if !(slope > 0.0 && slope.is_finite()) {
            return Err(Error::invalid(
                "family.lambda",
                "must be strictly positive and finite",
            ));
        }
        if !(cap > 0.0 && cap.is_finite()) {
            return Err(Error::invalid(
                "family.cap",
                "must be strictly positive and finite",
            ));
        }
        Ok(LipschitzRampFamily { thetas, slope, cap })
    }

    /// The five-member family used by the standard experiments:
    /// thresholds `-1, -0.5, 0, 0.5, 1`, slope 1, cap 1.
    pub fn standard() -> Self {
        LipschitzRampFamily::new(vec![-1.0, -0.5, 0.0, 0.5, 1.0], 1.0, 1.0)
            .expect("valid standard family")
    }

    pub fn thetas(&self) -> &[f64] {
        &self.thetas
    }

    pub fn lambda(&self) -> f64 {
        self.slope
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn len(&self) -> usize {
        self.thetas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.thetas.is_empty()
    }

    /// `[A, B] = [0, λc]`.
    pub fn range(&self) -> (f64, f64) {
        (0.0, self.slope * self.cap)
    }

    pub fn member(&self, i: usize) -> Ramp {
        Ramp {
            theta: self.thetas[i],
            slope: self.slope,
            cap: self.cap,
        }
    }

    pub fn members(&self) -> Vec<Ramp> {
        (0..self.len()).map(|i| self.member(i)).collect()
    }
}

/// `E_N f`.
pub fn empirical_risk<F: LipschitzFn + ?Sized>(f: &F, samples: &SampleSet) -> f64 {
    samples.points().map(|z| f.eval(z)).sum::<f64>() / samples.len() as f64
}

/// Finite-support approximation of an atomic triplet's law: every jump-count
/// vector whose probability survives truncation, with its point and mass.
#[derive(Debug, Clone)]
pub struct LatticeLaw {
    points: Vec<f64>,
    probs: Vec<f64>,
    dim: usize,
}

impl LatticeLaw {
    /// Enumerates the law, truncating each atom's Poisson count where its
    /// upper tail drops below `LATTICE_TAIL_MASS / #atoms`. Returns `None`
    /// when the count grid exceeds the enumeration budget.
    pub fn from_triplet(triplet: &GeneratingTriplet) -> Result<Option<Self>> {
        let measure = triplet.measure().as_atomic().ok_or(Error::Unsupported(
            "lattice law of an infinite-activity measure",
        ))?;
        let atoms = measure.atoms();
        let per_atom_tol = LATTICE_TAIL_MASS / atoms.len() as f64;
        let mut pmfs: Vec<Vec<f64>> = Vec::with_capacity(atoms.len());
        let mut size = 1usize;
        for atom in atoms {
            let pmf = truncated_poisson_pmf(atom.mass, per_atom_tol);
            size = size.saturating_mul(pmf.len());
            if size > MAX_LATTICE_POINTS {
                return Ok(None);
            }
            pmfs.push(pmf);
        }

        let dim = triplet.dim();
        let mut base = triplet.drift().to_vec();
        for atom in atoms.iter().filter(|a| a.norm() <= 1.0) {
            for (b, u) in base.iter_mut().zip(&atom.location) {
                *b -= atom.mass * u;
            }
        }

        let mut points = Vec::with_capacity(size * dim);
        let mut probs = Vec::with_capacity(size);
        let mut counts = vec![0usize; atoms.len()];
        loop {
            let mut p = 1.0;
            let start = points.len();
            points.extend_from_slice(&base);
            for (i, &k) in counts.iter().enumerate() {
                p *= pmfs[i][k];
                if k > 0 {
                    for (d, u) in atoms[i].location.iter().enumerate() {
                        points[start + d] += k as f64 * u;
                    }
                }
            }
            probs.push(p);
            // odometer increment over the count grid
            let mut i = 0;
            loop {
                if i == counts.len() {
                    return Ok(Some(LatticeLaw { points, probs, dim }));
                }
                counts[i] += 1;
                if counts[i] < pmfs[i].len() {
                    break;
                }
                counts[i] = 0;
                i += 1;
            }
        }
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    /// Retained probability mass; at least `1 - LATTICE_TAIL_MASS`.
    pub fn total_mass(&self) -> f64 {
        self.probs.iter().sum()
    }

    pub fn expectation<G: Fn(&[f64]) -> f64>(&self, g: G) -> f64 {
        self.points
            .chunks_exact(self.dim)
            .zip(&self.probs)
            .map(|(z, p)| p * g(z))
            .sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[f64], f64)> + '_ {
        self.points
            .chunks_exact(self.dim)
            .zip(self.probs.iter().copied())
    }
}

/// Poisson(rate) probabilities `0..=k_max`, where the mass above `k_max` is
/// below `tail`.
fn truncated_poisson_pmf(rate: f64, tail: f64) -> Vec<f64> {
    let ln_rate = rate.ln();
    let pmf = |k: f64| (-rate + k * ln_rate - ln_gamma(k + 1.0)).exp();
    let mut out = Vec::new();
    let mut cdf = 0.0;
    let mut k = 0usize;
    loop {
        let p = pmf(k as f64);
        out.push(p);
        cdf += p;
        // past the mode, the remaining tail is below p / (1 - rate/(k+2))
        let kk = k as f64 + 1.0;
        if kk > rate {
            let ratio = rate / (kk + 1.0);
            let tail_bound = p * ratio / (1.0 - ratio);
            if tail_bound < tail && 1.0 - cdf < tail.max(4.0 * f64::EPSILON) {
                break;
            }
        }
        k += 1;
    }
    out
}

/// Expected risk `E f` with its provenance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskEstimate {
    pub value: f64,
    /// Zero for exact values; the Monte-Carlo standard error otherwise.
    pub std_error: f64,
    pub exact: bool,
}

/// `E f` under `triplet`: closed form if `f` has one, exact lattice
/// enumeration if the law is small enough, otherwise a 10⁷-draw
/// Monte-Carlo estimate.
pub fn expected_risk<F: LipschitzFn + ?Sized>(
    f: &F,
    triplet: &GeneratingTriplet,
) -> Result<RiskEstimate> {
    if let Some(m) = f.exact_mean(triplet) {
        return Ok(RiskEstimate {
            value: m,
            std_error: 0.0,
            exact: true,
        });
    }
    match LatticeLaw::from_triplet(triplet)? {
        Some(law) => Ok(RiskEstimate {
            value: law.expectation(|z| f.eval(z)),
            std_error: 0.0,
            exact: true,
        }),
        None => Ok(mc_expected_risk(f, triplet, MC_RISK_DRAWS, DEFAULT_SEED)?),
    }
}

/// Plain Monte-Carlo estimate of `E f` from `draws` samples.
pub fn mc_expected_risk<F: LipschitzFn + ?Sized>(
    f: &F,
    triplet: &GeneratingTriplet,
    draws: usize,
    seed: u64,
) -> Result<RiskEstimate> {
    let set = Sampler::new(triplet)?.sample_set(draws, seed);
    let values: Vec<f64> = set.points().map(|z| f.eval(z)).collect();
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    Ok(RiskEstimate {
        value: mean,
        std_error: (var / n).sqrt(),
        exact: false,
    })
}

/// Expected risks of every member, sharing one lattice enumeration.
pub fn expected_risks(
    family: &LipschitzRampFamily,
    triplet: &GeneratingTriplet,
) -> Result<Vec<f64>> {
    let members = family.members();
    match LatticeLaw::from_triplet(triplet)? {
        Some(law) => Ok(members
            .iter()
            .map(|f| law.expectation(|z| f.eval(z)))
            .collect()),
        None => members
            .iter()
            .map(|f| mc_expected_risk(f, triplet, MC_RISK_DRAWS, DEFAULT_SEED).map(|r| r.value))
            .collect(),
    }
}

/// `max_f |E_N f - E f|` given precomputed expected risks.
pub fn sup_deviation_with(
    family: &LipschitzRampFamily,
    samples: &SampleSet,
    expected: &[f64],
) -> f64 {
    family
        .members()
        .iter()
        .zip(expected)
        .map(|(f, e)| (empirical_risk(f, samples) - e).abs())
        .fold(0.0, f64::max)
}

pub fn sup_deviation(
    family: &LipschitzRampFamily,
    samples: &SampleSet,
    triplet: &GeneratingTriplet,
) -> Result<f64> {
    let expected = expected_risks(family, triplet)?;
    Ok(sup_deviation_with(family, samples, &expected))
}

/// Pairwise empirical `L1` distances `(1/N) Σ |f_i(z_n) - f_j(z_n)|`.
pub fn l1_distances<F: LipschitzFn>(members: &[F], samples: &SampleSet) -> Vec<Vec<f64>> {
    let values: Vec<Vec<f64>> = members
        .iter()
        .map(|f| samples.points().map(|z| f.eval(z)).collect())
        .collect();
    let n = samples.len() as f64;
    let m = members.len();
    let mut d = vec![vec![0.0; m]; m];
    for i in 0..m {
        for j in (i + 1)..m {
            let s = values[i]
                .iter()
                .zip(&values[j])
                .map(|(a, b)| (a - b).abs())
                .sum::<f64>()
                / n;
            d[i][j] = s;
            d[j][i] = s;
        }
    }
    d
}

/// Size of a greedy cover at `radius`: centers are members; each step picks
/// the member whose closed ball holds the most still-uncovered members.
pub fn greedy_cover_size(dist: &[Vec<f64>], radius: f64) -> usize {
    let m = dist.len();
    let mut covered = vec![false; m];
    let mut remaining = m;
    let mut size = 0;
    while remaining > 0 {
        let (best, _) = (0..m)
            .map(|c| {
                (
                    c,
                    (0..m)
                        .filter(|&j| !covered[j] && dist[c][j] <= radius)
                        .count(),
                )
            })
            .fold((0, 0), |acc, x| if x.1 > acc.1 { x } else { acc });
        for j in 0..m {
            if dist[best][j] <= radius && !covered[j] {
                covered[j] = true;
                remaining -= 1;
            }
        }
        size += 1;
    }
    size
}

/// Minimum cover size by exhaustive search over center subsets of
/// increasing size. Only for `m <= 20` members.
pub fn exact_cover_size(dist: &[Vec<f64>], radius: f64) -> usize {
    let m = dist.len();
    assert!(
        m <= EXACT_COVER_MAX_MEMBERS,
        "exhaustive cover limited to {EXACT_COVER_MAX_MEMBERS} members"
    );
    if m == 0 {
        return 0;
    }
    let balls: Vec<u32> = (0..m)
        .map(|c| {
            (0..m)
                .filter(|&j| dist[c][j] <= radius)
                .fold(0u32, |acc, j| acc | (1 << j))
        })
        .collect();
    let full: u32 = if m == 32 { u32::MAX } else { (1u32 << m) - 1 };
    for k in 1..=m {
        if any_cover_of_size(&balls, full, k, 0, 0) {
            return k;
        }
    }
    m
}

fn any_cover_of_size(balls: &[u32], full: u32, k: usize, start: usize, acc: u32) -> bool {
    if acc == full {
        return true;
    }
    if k == 0 {
        return false;
    }
    (start..balls.len()).any(|c| any_cover_of_size(balls, full, k - 1, c + 1, acc | balls[c]))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CoverSize {
    /// Greedy upper bound on the covering number; the reported value.
    pub greedy: usize,
    /// Exhaustive minimum, for families of at most 20 members.
    pub exact: Option<usize>,
}

/// `N(F, xi, L1(Z))` of the family on the given sample.
pub fn covering_number_l1(
    family: &LipschitzRampFamily,
    xi: f64,
    samples: &SampleSet,
) -> Result<CoverSize> {
    if !(xi >= 0.0) {
        return Err(Error::Domain {
            what: "xi",
            value: xi,
            domain: "[0, inf)".into(),
        });
    }
    if samples.is_empty() {
        return Err(Error::invalid("samples", "must be non-empty"));
    }
    let dist = l1_distances(&family.members(), samples);
    let greedy = greedy_cover_size(&dist, xi);
    let exact = (family.len() <= EXACT_COVER_MAX_MEMBERS).then(|| exact_cover_size(&dist, xi));
    Ok(CoverSize { greedy, exact })
}

/// `ln E N(F, radius, L1(Z_1^{2N}))`, estimated as the log of the mean
/// greedy cover size over `replicates` independent double samples of size
/// `2n`. Replicate `r` draws from seed `derive_seed(seed, r)`.
pub fn ln_expected_cover(
    family: &LipschitzRampFamily,
    triplet: &GeneratingTriplet,
    n: usize,
    radius: f64,
    replicates: usize,
    seed: u64,
) -> Result<f64> {
    if replicates == 0 {
        return Err(Error::invalid("replicates", "must be at least 1"));
    }
    let sampler = Sampler::new(triplet)?;
    let members = family.members();
    let total: usize = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let set = sampler.sample_set_serial(2 * n, derive_seed(seed, r as u64));
            greedy_cover_size(&l1_distances(&members, &set), radius)
        })
        .sum();
    Ok((total as f64 / replicates as f64).ln())
}

/// Counts Lipschitz violations `|f(z) - f(z')| > λ|z - z'|` over random
/// scalar pairs in `[-scale, scale]`.
pub fn lipschitz_violations<F: LipschitzFn>(f: &F, pairs: usize, scale: f64, seed: u64) -> usize {
    use rand::Rng;
    let mut rng = substream(seed, 0);
    let lam = f.lipschitz();
    (0..pairs)
        .filter(|_| {
            let a = rng.random_range(-scale..scale);
            let b = rng.random_range(-scale..scale);
            (f.eval(&[a]) - f.eval(&[b])).abs() > lam * (a - b).abs() * (1.0 + 1e-12) + 1e-15
        })
        .count()
}
