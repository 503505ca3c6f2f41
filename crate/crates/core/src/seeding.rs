//! Per-replica random streams and deterministic parallel aggregation.
//!
//! Replica `i` of a run with master seed `s` draws from `ChaCha8Rng::seed_from_u64(s)`
//! on stream `i`. Replicas are grouped into fixed blocks of [`BLOCK`]; blocks run in
//! parallel and are merged in block order, so results do not depend on thread count.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::Result;

pub const BLOCK: u64 = 1024;

pub fn replica_rng(seed: u64, replica: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replica);
    rng
}

pub trait Merge {
    fn merge(&mut self, other: Self);
}

/// Runs `body(acc, replica)` for every replica in `0..reps` and merges block results in order.
pub fn run_replicas<A, I, F>(reps: u64, init: I, body: F) -> Result<A>
where
    A: Merge + Send,
    I: Fn() -> A + Sync,
    F: Fn(&mut A, u64) -> Result<()> + Sync,
{
    let blocks = reps.div_ceil(BLOCK);
    let partial: Vec<Result<A>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let mut acc = init();
            for r in b * BLOCK..((b + 1) * BLOCK).min(reps) {
                body(&mut acc, r)?;
            }
            Ok(acc)
        })
        .collect();
    let mut total = init();
    for p in partial {
        total.merge(p?);
    }
    Ok(total)
}

/// Running count, mean and centered second moment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize)]
pub struct Moments {
    pub count: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let delta = x - self.mean;
        self.mean += delta / self.count as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            self.m2 / (self.count - 1) as f64
        }
    }

    /// Standard error of the mean.
    pub fn stderr(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            (self.variance() / self.count as f64).sqrt()
        }
    }
}

impl Merge for Moments {
    fn merge(&mut self, other: Self) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = other;
            return;
        }
        let n = (self.count + other.count) as f64;
        let delta = other.mean - self.mean;
        self.mean += delta * other.count as f64 / n;
        self.m2 += other.m2 + delta * delta * self.count as f64 * other.count as f64 / n;
        self.count += other.count;
    }
}

impl<T: Merge> Merge for Vec<T> {
    fn merge(&mut self, other: Self) {
        for (a, b) in self.iter_mut().zip(other) {
            a.merge(b);
        }
    }
}

impl Merge for u64 {
    fn merge(&mut self, other: Self) {
        *self += other;
    }
}
