//! Streaming Monte Carlo statistics and the deterministic parallel ensemble
//! driver built on them.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::RandomStream;

/// Trajectories folded sequentially into one leaf summary before the
/// tree merge. Fixed, so the reduction order never depends on the pool.
pub const BLOCK: usize = 64;

/// Count, mean and sum of squared deviations of a sample.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunSummary {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl RunSummary {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn from_values<I: IntoIterator<Item = f64>>(values: I) -> Self {
        let mut s = Self::empty();
        values.into_iter().for_each(|x| s.push(x));
        s
    }

    /// Welford update.
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Pooled summary. Written so that `merge(a, b)` and `merge(b, a)` are
    /// bitwise equal.
    pub fn merge(&self, other: &Self) -> Self {
        if self.count == 0 {
            return *other;
        }
        if other.count == 0 {
            return *self;
        }
        let (na, nb) = (self.count as f64, other.count as f64);
        let n = na + nb;
        let d = other.mean - self.mean;
        Self {
            count: self.count + other.count,
            mean: (na * self.mean + nb * other.mean) / n,
            m2: (self.m2 + other.m2) + d * d * (na * nb / n),
        }
    }

    /// Sample variance (n − 1 denominator); 0 below two samples.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    pub fn standard_error(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

pub fn merge_summaries(a: &RunSummary, b: &RunSummary) -> RunSummary {
    a.merge(b)
}

/// Pairwise merge of `items` in index order: `((0,1),(2,3)),...`.
pub fn tree_reduce<T: Clone>(items: &[T], empty: T, merge: impl Fn(&T, &T) -> T + Copy) -> T {
    match items.len() {
        0 => empty,
        1 => items[0].clone(),
        n => {
            let mid = n.next_power_of_two() / 2;
            let left = tree_reduce(&items[..mid], empty.clone(), merge);
            let right = tree_reduce(&items[mid..], empty, merge);
            merge(&left, &right)
        }
    }
}

fn merge_rows(a: &[RunSummary], b: &[RunSummary]) -> Vec<RunSummary> {
    a.iter().zip(b).map(|(x, y)| x.merge(y)).collect()
}

/// Runs trajectories `0..count` in parallel, trajectory `i` drawing from
/// stream `i` of `seed` and writing `width` observables into its output row.
/// Returns one summary per observable.
///
/// Trajectories are folded in blocks of [`BLOCK`] and the blocks are merged
/// by [`tree_reduce`], so the result is bit-identical for any thread count.
/// The first failing trajectory (lowest index) is reported.
pub fn ensemble_summaries<F>(count: usize, seed: u64, width: usize, f: F) -> Result<Vec<RunSummary>>
where
    F: Fn(&mut RandomStream, &mut [f64]) -> Result<()> + Sync,
{
    let blocks = count.div_ceil(BLOCK);
    let leaves: Vec<Result<Vec<RunSummary>>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = vec![RunSummary::empty(); width];
            let mut row = vec![0.0; width];
            for i in b * BLOCK..((b + 1) * BLOCK).min(count) {
                let mut rng = RandomStream::new(seed, i as u64);
                f(&mut rng, &mut row).map_err(|e| Error::Trajectory {
                    index: i as u64,
                    source: Box::new(e),
                })?;
                for (s, &x) in acc.iter_mut().zip(&row) {
                    if !x.is_finite() {
                        return Err(Error::Trajectory {
                            index: i as u64,
                            source: Box::new(Error::NonFinite("observable".into())),
                        });
                    }
                    s.push(x);
                }
            }
            Ok(acc)
        })
        .collect();
    let leaves = leaves.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(tree_reduce(
        &leaves,
        vec![RunSummary::empty(); width],
        |a, b| merge_rows(a, b),
    ))
}

/// Single-observable convenience wrapper around [`ensemble_summaries`].
pub fn ensemble_summary<F>(count: usize, seed: u64, f: F) -> Result<RunSummary>
where
    F: Fn(&mut RandomStream) -> Result<f64> + Sync,
{
    Ok(ensemble_summaries(count, seed, 1, |rng, out| {
        out[0] = f(rng)?;
        Ok(())
    })?[0])
}
