use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use num_rational::BigRational;
use num_traits::Zero;
use serde::Serialize;

use crate::error::{Error, Result};

use super::pmf::IncrementPmf;

/// Table of `F_k(z) = sum_{|y + z| >= k} p(y)` for a one-dimensional pmf.
#[derive(Clone, Debug, Serialize)]
pub struct TailSum {
    pub k: u64,
    #[serde(serialize_with = "serialize_table")]
    pub table: BTreeMap<i64, BigRational>,
    /// `F_1` nondecreasing on `z >= 1`, or `F_k` (k >= 2) nondecreasing on `z >= 0`,
    /// over the tabulated range. Always true for `k = 0`.
    pub monotone: bool,
}

impl TailSum {
    pub fn at(&self, z: i64) -> Option<&BigRational> {
        self.table.get(&z)
    }
}

fn serialize_table<S: serde::Serializer>(
    table: &BTreeMap<i64, BigRational>,
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    s.collect_map(table.iter().map(|(z, v)| (z, v.to_string())))
}

/// `F_k(z)` exactly; the support is finite so the sum is finite.
pub fn tail_value(pmf: &IncrementPmf, k: u64, z: i64) -> BigRational {
    pmf.support()
        .filter(|(y, _)| (y.0[0] + z).unsigned_abs() >= k)
        .map(|(_, w)| w.clone())
        .fold(BigRational::zero(), |a, b| a + b)
}

pub fn tail_sum(pmf: &IncrementPmf, k: u64, z_range: RangeInclusive<i64>) -> Result<TailSum> {
    if pmf.dim() != 1 {
        return Err(Error::Dimension(format!("tail sums need d = 1, got d = {}", pmf.dim())));
    }
    let table: BTreeMap<i64, BigRational> = z_range.map(|z| (z, tail_value(pmf, k, z))).collect();
    let from = match k {
        0 => i64::MAX,
        1 => 1,
        _ => 0,
    };
    let monotone = table
        .iter()
        .zip(table.iter().skip(1))
        .filter(|((z, _), _)| **z >= from)
        .all(|((_, a), (_, b))| b >= a);
    Ok(TailSum { k, table, monotone })
}
