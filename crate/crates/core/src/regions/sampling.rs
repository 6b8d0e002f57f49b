//! Deterministic planar and spatial samplers.
//!
//! Monte Carlo points are drawn chunk by chunk; chunk `c` uses a ChaCha
//! stream `c` keyed by the master seed, so the point set does not depend on
//! how many workers evaluate it. Reductions are sequential over the ordered
//! sample values.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const CHUNK_SIZE: usize = 4096;

/// How to integrate over a planar rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Sampler {
    /// Midpoint rule with `n` cells per axis.
    Grid { n: usize },
    MonteCarlo { samples: usize, seed: u64 },
}

impl Sampler {
    pub fn budget(&self) -> usize {
        match *self {
            Sampler::Grid { n } => n * n,
            Sampler::MonteCarlo { samples, .. } => samples,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match *self {
            Sampler::Grid { .. } => None,
            Sampler::MonteCarlo { seed, .. } => Some(seed),
        }
    }

    /// Sample points in `rect = [[x0, x1], [y0, y1]]`, in a fixed order.
    pub fn points(&self, rect: [[f64; 2]; 2]) -> Vec<[f64; 2]> {
        let [[x0, x1], [y0, y1]] = rect;
        match *self {
            Sampler::Grid { n } => {
                let (hx, hy) = ((x1 - x0) / n as f64, (y1 - y0) / n as f64);
                let mut pts = Vec::with_capacity(n * n);
                for i in 0..n {
                    for j in 0..n {
                        pts.push([x0 + (i as f64 + 0.5) * hx, y0 + (j as f64 + 0.5) * hy]);
                    }
                }
                pts
            }
            Sampler::MonteCarlo { samples, seed } => uniform_points(samples, seed, |rng| {
                [x0 + (x1 - x0) * rng.random::<f64>(), y0 + (y1 - y0) * rng.random::<f64>()]
            }),
        }
    }
}

fn chunk_rng(seed: u64, chunk: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(chunk as u64);
    rng
}

/// `samples` draws of `draw`, generated in independent per-chunk streams.
pub fn uniform_points<T, F>(samples: usize, seed: u64, draw: F) -> Vec<T>
where
    T: Send,
    F: Fn(&mut ChaCha8Rng) -> T + Sync,
{
    let chunks = samples.div_ceil(CHUNK_SIZE);
    (0..chunks)
        .into_par_iter()
        .flat_map_iter(|c| {
            let mut rng = chunk_rng(seed, c);
            let len = CHUNK_SIZE.min(samples - c * CHUNK_SIZE);
            (0..len).map(|_| draw(&mut rng)).collect::<Vec<_>>()
        })
        .collect()
}

/// Uniform points in the box `[lo, hi]`.
pub fn uniform_points_3d(samples: usize, seed: u64, lo: [f64; 3], hi: [f64; 3]) -> Vec<[f64; 3]> {
    uniform_points(samples, seed, |rng| {
        std::array::from_fn(|k| lo[k] + (hi[k] - lo[k]) * rng.random::<f64>())
    })
}

/// Result of a sampled integral.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub samples: usize,
    pub failures: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
}

impl SampleEstimate {
    /// Whether `target` lies within `k` standard errors.
    pub fn agrees_with(&self, target: f64, k: f64) -> bool {
        (self.estimate - target).abs() <= k * self.std_error
    }
}

/// `measure · mean(values)` with the Monte Carlo standard error when
/// `stochastic`, failed evaluations excluded and counted.
pub fn reduce_samples(
    values: &[Result<f64>],
    measure: f64,
    stochastic: bool,
    max_failure_fraction: f64,
    seed: Option<u64>,
) -> Result<SampleEstimate> {
    let mut n = 0usize;
    let mut sum = 0.0;
    let mut failures = 0usize;
    let mut first_failure = None;
    for v in values {
        match v {
            Ok(x) => {
                n += 1;
                sum += x;
            }
            Err(e) => {
                failures += 1;
                first_failure.get_or_insert_with(|| e.to_string());
            }
        }
    }
    if failures as f64 > max_failure_fraction * values.len() as f64 || n == 0 {
        return Err(Error::Geometry(format!(
            "{failures} of {} samples failed (first: {})",
            values.len(),
            first_failure.unwrap_or_default()
        )));
    }
    let mean = sum / n as f64;
    let std_error = if stochastic && n > 1 {
        let ss: f64 = values.iter().filter_map(|v| v.as_ref().ok()).map(|x| (x - mean).powi(2)).sum();
        measure * (ss / (n - 1) as f64 / n as f64).sqrt()
    } else {
        0.0
    };
    Ok(SampleEstimate { estimate: measure * mean, std_error, samples: values.len(), failures, seed })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn monte_carlo_points_are_reproducible() {
        let s = Sampler::MonteCarlo { samples: 10_000, seed: 7 };
        let rect = [[0.0, 1.0], [-2.0, 2.0]];
        let a = s.points(rect);
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| s.points(rect));
        assert_eq!(a, b);
        assert_eq!(a.len(), 10_000);
        assert!(a.iter().all(|p| (0.0..1.0).contains(&p[0]) && (-2.0..2.0).contains(&p[1])));
        let c = Sampler::MonteCarlo { samples: 10_000, seed: 8 }.points(rect);
        assert_ne!(a, c);
    }

    #[test]
    fn grid_points_are_midpoints() {
        let pts = Sampler::Grid { n: 2 }.points([[0.0, 1.0], [0.0, 2.0]]);
        assert_eq!(pts, vec![[0.25, 0.5], [0.25, 1.5], [0.75, 0.5], [0.75, 1.5]]);
    }

    #[test]
    fn reduction_counts_failures() {
        let mut values: Vec<Result<f64>> = (0..999).map(|_| Ok(1.0)).collect();
        values.push(Err(Error::Geometry("x".into())));
        let e = reduce_samples(&values, 2.0, true, 1e-2, None).unwrap();
        assert_eq!(e.estimate, 2.0);
        assert_eq!(e.failures, 1);
        assert!(reduce_samples(&values, 2.0, true, 1e-4, None).is_err());
    }
}
