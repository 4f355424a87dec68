//! Sample-point generation over coordinate boxes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::Vector;

#[derive(Debug, Clone, PartialEq)]
pub enum SamplingStrategy {
    /// Tensor grid with `k` points per axis, `k` the smallest integer with `k^dim >= count`.
    Grid,
    Uniform { seed: u64 },
    Explicit(Vec<Vec<f64>>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sampling {
    pub strategy: SamplingStrategy,
    /// Closed interval per coordinate.
    pub region: Vec<(f64, f64)>,
    pub count: usize,
}

impl Sampling {
    pub fn grid(region: Vec<(f64, f64)>, count: usize) -> Self {
        Self {
            strategy: SamplingStrategy::Grid,
            region,
            count,
        }
    }

    pub fn uniform(region: Vec<(f64, f64)>, count: usize, seed: u64) -> Self {
        Self {
            strategy: SamplingStrategy::Uniform { seed },
            region,
            count,
        }
    }

    pub fn explicit(points: Vec<Vec<f64>>) -> Self {
        let count = points.len();
        Self {
            strategy: SamplingStrategy::Explicit(points),
            region: Vec::new(),
            count,
        }
    }

    pub fn seed(&self) -> Option<u64> {
        match self.strategy {
            SamplingStrategy::Uniform { seed } => Some(seed),
            _ => None,
        }
    }

    /// Points in deterministic order, each of length `dim`.
    pub fn points(&self, dim: usize) -> Result<Vec<Vector>> {
        if let SamplingStrategy::Explicit(points) = &self.strategy {
            if points.is_empty() {
                return Err(Error::InsufficientSamples { needed: 1, found: 0 });
            }
            return points
                .iter()
                .map(|p| {
                    if p.len() == dim {
                        Ok(Vector::from_column_slice(p))
                    } else {
                        Err(Error::Dimension {
                            what: "sample point",
                            expected: dim,
                            found: p.len(),
                        })
                    }
                })
                .collect();
        }
        if self.region.len() != dim {
            return Err(Error::Dimension {
                what: "sampling region",
                expected: dim,
                found: self.region.len(),
            });
        }
        if self.count == 0 {
            return Err(Error::InsufficientSamples { needed: 1, found: 0 });
        }
        if let Some((a, b)) = self.region.iter().find(|(a, b)| !(a <= b) || !a.is_finite() || !b.is_finite()) {
            return Err(Error::InvalidSpec(format!("bad sampling interval [{a}, {b}]")));
        }
        match self.strategy {
            SamplingStrategy::Grid => Ok(self.grid_points()),
            SamplingStrategy::Uniform { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..self.count)
                    .map(|_| {
                        Vector::from_iterator(
                            dim,
                            self.region.iter().map(|&(a, b)| a + rng.random::<f64>() * (b - a)),
                        )
                    })
                    .collect())
            }
            SamplingStrategy::Explicit(_) => unreachable!(),
        }
    }

    fn grid_points(&self) -> Vec<Vector> {
        let dim = self.region.len();
        let mut k = 1usize;
        while k.checked_pow(dim as u32).is_some_and(|t| t < self.count) {
            k += 1;
        }
        let axes: Vec<Vec<f64>> = self
            .region
            .iter()
            .map(|&(a, b)| {
                if k == 1 {
                    vec![0.5 * (a + b)]
                } else {
                    (0..k).map(|i| a + (b - a) * i as f64 / (k - 1) as f64).collect()
                }
            })
            .collect();
        let total = k.pow(dim as u32);
        (0..total)
            .map(|mut idx| {
                let mut x = Vector::zeros(dim);
                for d in (0..dim).rev() {
                    x[d] = axes[d][idx % k];
                    idx /= k;
                }
                x
            })
            .collect()
    }
}

/// Applies `f` to every item in parallel, keeping input order. The first error
/// in input order wins, so failures are reproducible too.
pub fn map_samples<I, T, F>(items: &[I], f: F) -> Result<Vec<T>>
where
    I: Sync,
    T: Send,
    F: Fn(&I) -> Result<T> + Sync,
{
    let results: Vec<Result<T>> = items.par_iter().map(&f).collect();
    results.into_iter().collect()
}
