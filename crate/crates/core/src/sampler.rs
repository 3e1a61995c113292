//! Exact draws from finite-activity triplets.
//!
//! A draw is `a - Σ_{|u_i| <= 1} w_i u_i + Σ_i k_i u_i` with independent
//! `k_i ~ Poisson(w_i)`. The deterministic shift is the compensator of the
//! small jumps, so the sampler and [`GeneratingTriplet::char_exponent`]
//! describe the same law.

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::levy::{dot, AtomicLevyMeasure, GeneratingTriplet};
use crate::poisson::sample_poisson;
use crate::rng::substream;

/// An ordered list of i.i.d. draws, reproducible from `(triplet, seed, N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleSet {
    dim: usize,
    data: Vec<f64>,
    pub seed: u64,
    /// [`GeneratingTriplet::fingerprint`] of the generating triplet; zero for
    /// sets imported from files.
    pub triplet_id: u64,
}

impl SampleSet {
    pub fn from_points(points: &[Vec<f64>], seed: u64, triplet_id: u64) -> Result<Self> {
        let dim = points.first().map(Vec::len).unwrap_or(0);
        let mut data = Vec::with_capacity(points.len() * dim);
        for p in points {
            if p.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: p.len(),
                });
            }
            data.extend_from_slice(p);
        }
        Ok(SampleSet {
            dim,
            data,
            seed,
            triplet_id,
        })
    }

    /// Scalar sample set (K = 1).
    pub fn from_scalars(values: Vec<f64>, seed: u64) -> Self {
        SampleSet {
            dim: 1,
            data: values,
            seed,
            triplet_id: 0,
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.data.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn point(&self, n: usize) -> &[f64] {
        &self.data[n * self.dim..(n + 1) * self.dim]
    }

    pub fn points(&self) -> impl ExactSizeIterator<Item = &[f64]> + '_ {
        self.data.chunks_exact(self.dim.max(1))
    }

    /// First coordinate of every point; the natural view for K = 1.
    pub fn first_coords(&self) -> impl Iterator<Item = f64> + '_ {
        self.points().map(|p| p[0])
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record((0..self.dim).map(|k| format!("z_{k}")))?;
        for p in self.points() {
            wtr.write_record(p.iter().map(|x| x.to_string()))?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(r: R) -> Result<Self> {
        let mut rdr = csv::Reader::from_reader(r);
        let headers = rdr.headers()?.clone();
        for (k, h) in headers.iter().enumerate() {
            if h != format!("z_{k}") {
                return Err(Error::invalid(
                    format!("header[{k}]"),
                    format!("expected z_{k}, found {h}"),
                ));
            }
        }
        let dim = headers.len();
        let mut data = Vec::new();
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            for (k, field) in rec.iter().enumerate() {
                let x: f64 = field.trim().parse().map_err(|_| {
                    Error::invalid(
                        format!("row {row}, z_{k}"),
                        format!("not a number: {field}"),
                    )
                })?;
                data.push(x);
            }
        }
        Ok(SampleSet {
            dim,
            data,
            seed: 0,
            triplet_id: 0,
        })
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::io::BufWriter::new(std::fs::File::create(path)?))
    }

    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_csv(std::io::BufReader::new(std::fs::File::open(path)?))
    }
}

/// Precomputed per-triplet sampling plan: the compensated base point and the
/// atoms. Building it once avoids re-deriving the shift per draw.
#[derive(Debug, Clone)]
pub struct Sampler<'a> {
    measure: &'a AtomicLevyMeasure,
    base: Vec<f64>,
    triplet_id: u64,
}

impl<'a> Sampler<'a> {
    pub fn new(triplet: &'a GeneratingTriplet) -> Result<Self> {
        let measure = triplet.measure().as_atomic().ok_or(Error::Unsupported(
            "exact sampling needs a finite-activity (atomic) measure",
        ))?;
        let mut base = triplet.drift().to_vec();
        for atom in measure.atoms().iter().filter(|a| a.norm() <= 1.0) {
            for (b, u) in base.iter_mut().zip(&atom.location) {
                *b -= atom.mass * u;
            }
        }
        Ok(Sampler {
            measure,
            base,
            triplet_id: triplet.fingerprint(),
        })
    }

    pub fn dim(&self) -> usize {
        self.base.len()
    }

    /// Writes one draw into `out`.
    pub fn draw_into<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        out.copy_from_slice(&self.base);
        for atom in self.measure.atoms() {
            let k = sample_poisson(atom.mass, rng);
            if k > 0 {
                let k = k as f64;
                for (o, u) in out.iter_mut().zip(&atom.location) {
                    *o += k * u;
                }
            }
        }
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let mut out = vec![0.0; self.dim()];
        self.draw_into(rng, &mut out);
        out
    }

    /// `n` draws, draw `i` from substream `i` of `seed`.
    pub fn sample_set(&self, n: usize, seed: u64) -> SampleSet {
        let dim = self.dim();
        let mut data = vec![0.0; n * dim];
        data.par_chunks_mut(dim).enumerate().for_each(|(i, out)| {
            let mut rng = substream(seed, i as u64);
            self.draw_into(&mut rng, out);
        });
        SampleSet {
            dim,
            data,
            seed,
            triplet_id: self.triplet_id,
        }
    }

    /// Sequential variant of [`Sampler::sample_set`] for use inside already
    /// parallel loops; produces the identical set.
    pub fn sample_set_serial(&self, n: usize, seed: u64) -> SampleSet {
        let dim = self.dim();
        let mut data = vec![0.0; n * dim];
        for (i, out) in data.chunks_exact_mut(dim).enumerate() {
            let mut rng = substream(seed, i as u64);
            self.draw_into(&mut rng, out);
        }
        SampleSet {
            dim,
            data,
            seed,
            triplet_id: self.triplet_id,
        }
    }
}

/// One draw; advances `rng`.
pub fn sample_one<R: Rng + ?Sized>(triplet: &GeneratingTriplet, rng: &mut R) -> Result<Vec<f64>> {
    Ok(Sampler::new(triplet)?.draw(rng))
}

pub fn sample_set(triplet: &GeneratingTriplet, n: usize, seed: u64) -> Result<SampleSet> {
    if n == 0 {
        return Err(Error::invalid("N", "must be at least 1"));
    }
    Ok(Sampler::new(triplet)?.sample_set(n, seed))
}

/// `(1/N) Σ exp(i<theta, z_n>)`.
pub fn empirical_char_function(samples: &SampleSet, theta: &[f64]) -> Result<Complex64> {
    if samples.is_empty() {
        return Err(Error::invalid("samples", "must be non-empty"));
    }
    if theta.len() != samples.dim() {
        return Err(Error::DimensionMismatch {
            expected: samples.dim(),
            got: theta.len(),
        });
    }
    let (re, im) = samples
        .points()
        .map(|z| {
            let phase = dot(theta, z);
            (phase.cos(), phase.sin())
        })
        .fold((0.0, 0.0), |(a, b), (c, s)| (a + c, b + s));
    let n = samples.len() as f64;
    Ok(Complex64::new(re / n, im / n))
}

/// Sum of `m` independent draws from the `m`-th convolution root of the
/// triplet, one per index. Its law equals that of a single draw from the
/// original triplet.
pub fn divided_sample_set(
    triplet: &GeneratingTriplet,
    m: u32,
    n: usize,
    seed: u64,
) -> Result<SampleSet> {
    let root = triplet.convolution_root(m)?;
    let sampler = Sampler::new(&root)?;
    let dim = sampler.dim();
    let mut data = vec![0.0; n * dim];
    data.par_chunks_mut(dim).enumerate().for_each(|(i, out)| {
        let mut rng = substream(seed, i as u64);
        let mut piece = vec![0.0; dim];
        for _ in 0..m {
            sampler.draw_into(&mut rng, &mut piece);
            for (o, p) in out.iter_mut().zip(&piece) {
                *o += p;
            }
        }
    });
    Ok(SampleSet {
        dim,
        data,
        seed,
        triplet_id: triplet.fingerprint(),
    })
}
