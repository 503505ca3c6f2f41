//! Range of the held walk `Zbar + f` and of the additively perturbed walk `Z - phi`.
//!
//! `Zbar` jumps at even times only: `Zbar_{2k+1} = Zbar_{2k}` and
//! `Zbar_{2k+2} = Zbar_{2k+1} + xi_{k+1}`, so `n` time steps contain `floor(n / 2)` jumps.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::IncrementPmf;
use crate::lattice::Site;
use crate::numeric::Value;
use crate::perturb::InsertionPath;
use crate::seeding::{replica_rng, run_replicas, Merge, Moments};

pub const ENUMERATION_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct RangeEstimate {
    pub n: usize,
    pub reps: u64,
    pub seed: u64,
    pub mean: f64,
    pub stderr: f64,
}

fn check_dims(pmf: &IncrementPmf, f: &InsertionPath) -> Result<()> {
    if pmf.dim() != f.dim() {
        return Err(Error::Dimension(format!("f has d = {} but the pmf has d = {}", f.dim(), pmf.dim())));
    }
    Ok(())
}

/// Sample mean of `|R_n(Zbar + f)|` with `Zbar_0 = 0`.
pub fn mc_range(pmf: &IncrementPmf, f: &InsertionPath, n: usize, reps: u64, seed: u64) -> Result<RangeEstimate> {
    check_dims(pmf, f)?;
    if reps == 0 {
        return Err(Error::validation("reps must be at least 1"));
    }
    let f = f.prefix(n)?;
    let sampler = pmf.sampler();
    let m = run_replicas(reps, Moments::default, |acc, r| {
        let mut rng = replica_rng(seed, r);
        let mut z = Site::ORIGIN;
        let mut visited = Vec::with_capacity(n + 1);
        for (i, fi) in f.values().iter().enumerate() {
            if i > 0 && i % 2 == 0 {
                z = z + sampler.sample(&mut rng);
            }
            visited.push(z + *fi);
        }
        visited.sort_unstable();
        visited.dedup();
        acc.push(visited.len() as f64);
        Ok(())
    })?;
    Ok(RangeEstimate { n, reps, seed, mean: m.mean, stderr: m.stderr() })
}

/// Exact `E|R_n(Zbar + f)|` by enumerating every jump sequence.
pub fn enumerate_range(pmf: &IncrementPmf, f: &InsertionPath, n: usize) -> Result<Value> {
    check_dims(pmf, f)?;
    let f = f.prefix(n)?;
    let jumps = (n / 2) as u32;
    let steps = pmf.scalar_weights::<BigInt>();
    let width = steps.len() as u64;
    width
        .checked_pow(jumps)
        .filter(|&p| p <= ENUMERATION_BUDGET)
        .ok_or_else(|| Error::Resource(format!("{width}^{jumps} paths exceed the budget of {ENUMERATION_BUDGET}")))?;

    struct Walk<'a> {
        f: &'a [Site],
        steps: &'a [(Site, BigInt)],
        counts: HashMap<Site, u32>,
        distinct: u64,
        total: BigInt,
    }

    impl Walk<'_> {
        fn visit(&mut self, s: Site) {
            let c = self.counts.entry(s).or_insert(0);
            *c += 1;
            self.distinct += u64::from(*c == 1);
        }

        fn leave(&mut self, s: Site) {
            let c = self.counts.get_mut(&s).expect("visited before");
            *c -= 1;
            self.distinct -= u64::from(*c == 0);
        }

        /// Extends a path that has covered times `0..i` with `Zbar_{i-1} = z`.
        fn extend(&mut self, i: usize, z: Site, weight: &BigInt) {
            if i == self.f.len() {
                self.total += weight * BigInt::from(self.distinct);
                return;
            }
            if i % 2 == 1 {
                let s = z + self.f[i];
                self.visit(s);
                self.extend(i + 1, z, weight);
                self.leave(s);
                return;
            }
            for k in 0..self.steps.len() {
                let (step, w) = self.steps[k].clone();
                let next = z + step;
                let s = next + self.f[i];
                self.visit(s);
                self.extend(i + 1, next, &(weight * w));
                self.leave(s);
            }
        }
    }

    let mut walk = Walk { f: f.values(), steps: &steps, counts: HashMap::new(), distinct: 0, total: BigInt::from(0) };
    walk.visit(f.values()[0]);
    walk.extend(1, Site::ORIGIN, &BigInt::from(1));
    let scale = pmf.denominator().pow(jumps);
    Ok(Value::Exact(BigRational::new(walk.total, scale)))
}

#[derive(Clone, Debug, Default)]
struct RatioTally {
    ratio: Moments,
    odd_sites: u64,
    min_ratio: f64,
    max_ratio: f64,
}

impl Merge for RatioTally {
    fn merge(&mut self, other: Self) {
        if other.ratio.count > 0 {
            if self.ratio.count == 0 {
                (self.min_ratio, self.max_ratio) = (other.min_ratio, other.max_ratio);
            } else {
                self.min_ratio = self.min_ratio.min(other.min_ratio);
                self.max_ratio = self.max_ratio.max(other.max_ratio);
            }
        }
        self.ratio.merge(other.ratio);
        self.odd_sites += other.odd_sites;
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CounterexampleReport {
    pub n: usize,
    pub reps: u64,
    pub seed: u64,
    /// Mean of `|R_n(Z - phi)| / |R_n(Z)|`.
    pub mean_ratio: f64,
    pub stderr: f64,
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Every site visited by `Z - phi` was even.
    pub all_even: bool,
}

/// Distinct values in a slice of integers lying in `[-n - 1, n + 1]`.
fn distinct_1d(values: &[i64], n: usize, seen: &mut [bool]) -> usize {
    let offset = n as i64 + 1;
    let mut count = 0;
    for &v in values {
        let slot = &mut seen[(v + offset) as usize];
        count += usize::from(!*slot);
        *slot = true;
    }
    for &v in values {
        seen[(v + offset) as usize] = false;
    }
    count
}

/// Simple random walk `Z` in one dimension against `Z - phi` with `phi` alternating `0, 1`.
pub fn counterexample_ratio(n: usize, reps: u64, seed: u64) -> Result<CounterexampleReport> {
    if reps == 0 {
        return Err(Error::validation("reps must be at least 1"));
    }
    let tally = run_replicas(reps, RatioTally::default, |acc, r| {
        let mut rng = replica_rng(seed, r);
        let mut z = 0i64;
        let mut plain = Vec::with_capacity(n + 1);
        let mut shifted = Vec::with_capacity(n + 1);
        for i in 0..=n {
            if i > 0 {
                z += if rand::Rng::random::<bool>(&mut rng) { 1 } else { -1 };
            }
            plain.push(z);
            shifted.push(z - (i % 2) as i64);
        }
        let odd = shifted.iter().filter(|v| v.rem_euclid(2) == 1).count() as u64;
        let mut seen = vec![false; 2 * n + 3];
        let ratio = distinct_1d(&shifted, n, &mut seen) as f64 / distinct_1d(&plain, n, &mut seen) as f64;
        if acc.ratio.count == 0 {
            (acc.min_ratio, acc.max_ratio) = (ratio, ratio);
        }
        acc.min_ratio = acc.min_ratio.min(ratio);
        acc.max_ratio = acc.max_ratio.max(ratio);
        acc.ratio.push(ratio);
        acc.odd_sites += odd;
        Ok(())
    })?;
    if tally.odd_sites > 0 {
        return Err(Error::Invariant(format!("Z - phi visited {} odd sites", tally.odd_sites)));
    }
    Ok(CounterexampleReport {
        n,
        reps,
        seed,
        mean_ratio: tally.ratio.mean,
        stderr: tally.ratio.stderr(),
        min_ratio: tally.min_ratio,
        max_ratio: tally.max_ratio,
        all_even: true,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{range_via_hits, EngineOptions};

    fn q(n: i64, d: i64) -> Value {
        Value::Exact(BigRational::new(n.into(), d.into()))
    }

    fn path(v: &[i64]) -> InsertionPath {
        InsertionPath::new(1, v.iter().map(|&x| Site::unit(0, x)).collect()).unwrap()
    }

    #[test]
    fn trivial_horizons() {
        let pmf = IncrementPmf::simple(1).unwrap();
        let zero = InsertionPath::zero(1, 10);
        assert_eq!(enumerate_range(&pmf, &zero, 0).unwrap(), q(1, 1));
        assert_eq!(enumerate_range(&pmf, &zero, 1).unwrap(), q(1, 1));
        assert_eq!(enumerate_range(&pmf, &zero, 2).unwrap(), q(2, 1));
        let e = mc_range(&pmf, &zero, 0, 50, 1).unwrap();
        assert_eq!((e.mean, e.stderr), (1.0, 0.0));
        let e = mc_range(&pmf, &zero, 2, 50, 1).unwrap();
        assert_eq!((e.mean, e.stderr), (2.0, 0.0));
    }

    #[test]
    fn four_steps_by_hand() {
        // two jumps: ++ and -- give 3 sites, +- and -+ give 2
        let pmf = IncrementPmf::simple(1).unwrap();
        assert_eq!(enumerate_range(&pmf, &InsertionPath::zero(1, 5), 4).unwrap(), q(5, 2));
    }

    #[test]
    fn inserted_jump_increases_range() {
        let pmf = IncrementPmf::simple(1).unwrap();
        let f = path(&[0, 1, 1, 1, 1]);
        let base = enumerate_range(&pmf, &InsertionPath::zero(1, 5), 2).unwrap();
        let with_f = enumerate_range(&pmf, &f, 2).unwrap();
        assert!(with_f.sub(&base).is_nonnegative());
    }

    #[test]
    fn enumeration_matches_hits() {
        let pmf = IncrementPmf::simple(1).unwrap();
        for seed in 0..3 {
            let f = InsertionPath::random(seed, 10, &IncrementPmf::cube(1).unwrap());
            for n in 0..=9 {
                assert_eq!(
                    enumerate_range(&pmf, &f, n).unwrap(),
                    range_via_hits(&pmf, &f, n, EngineOptions::exact()).unwrap(),
                    "seed {seed} n {n}"
                );
            }
        }
        let pmf = IncrementPmf::uniform3();
        let f = InsertionPath::random(4, 8, &IncrementPmf::cube(1).unwrap());
        assert_eq!(
            enumerate_range(&pmf, &f, 7).unwrap(),
            range_via_hits(&pmf, &f, 7, EngineOptions::exact()).unwrap()
        );
    }

    #[test]
    fn mc_agrees_with_enumeration() {
        let pmf = IncrementPmf::simple(2).unwrap();
        let f = InsertionPath::random(2, 13, &IncrementPmf::cube(2).unwrap());
        let exact = enumerate_range(&pmf, &f, 12).unwrap().to_f64();
        let e = mc_range(&pmf, &f, 12, 20_000, 5).unwrap();
        assert!((e.mean - exact).abs() <= 3.0 * e.stderr, "{} vs {exact}", e.mean);
    }

    #[test]
    fn budget_is_enforced() {
        let pmf = IncrementPmf::cube(2).unwrap();
        let f = InsertionPath::zero(2, 41);
        assert!(matches!(enumerate_range(&pmf, &f, 40), Err(Error::Resource(_))));
    }

    #[test]
    fn counterexample_small() {
        let r = counterexample_ratio(0, 10, 1).unwrap();
        assert_eq!(r.mean_ratio, 1.0);
        let r = counterexample_ratio(2000, 200, 3).unwrap();
        assert!(r.all_even);
        assert!(r.mean_ratio > 0.4 && r.mean_ratio < 0.6, "{}", r.mean_ratio);
    }
}
