//! Symmetric domination of one-dimensional survival fields.
//!
//! `v` dominates `w` when `sum_{|x| >= k} w(x) <= sum_{|x| >= k} v(x0 + x)` for all
//! `k >= 0` and all shifts `x0`.
//!
//! Only `0 <= k <= R` and `|x0| <= 2R` are checked, `R` the common window radius.
//! Both fields vanish outside `[-R, R]`. For `k > R` the left side is zero. For
//! `|x0| > 2R` and `k <= R` the block `|x| < k` around `x0` misses `[-R, R]`
//! entirely, so the right side is the full total of `v`, which is the `k = 0` case.

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::IncrementPmf;
use crate::lattice::Site;
use crate::numeric::{Precision, Scalar, Value};
use crate::perturb::TrapTrajectory;

use super::survival::{evolve_with, resolve_precision, window_radius, EngineOptions, SurvivalField, TrapModel};

#[derive(Clone, Debug, Serialize)]
pub struct DominationVerdict {
    pub n: usize,
    pub pass: bool,
    /// Smallest `rhs - lhs` over the checked range.
    pub min_slack: Value,
    pub witness_k: i64,
    pub witness_x0: i64,
    pub k_max: i64,
    pub x_max: i64,
}

/// Prefix sums `P(a) = sum_{x <= a} v(x)` of a field on `[-R, R]`.
struct Prefix<T> {
    radius: i64,
    sums: Vec<T>,
}

impl<T: Scalar> Prefix<T> {
    fn new(field: &SurvivalField<T>) -> Self {
        let radius = field.radius();
        let mut acc = T::zero();
        let sums = (-radius..=radius)
            .map(|x| {
                acc.add_assign(&field.numerator(&Site::unit(0, x)));
                acc.clone()
            })
            .collect();
        Prefix { radius, sums }
    }

    fn at(&self, a: i64) -> T {
        if a < -self.radius {
            T::zero()
        } else {
            self.sums[(a.min(self.radius) + self.radius) as usize].clone()
        }
    }

    /// `sum_{|x| >= k} v(x0 + x)`.
    fn tail(&self, k: i64, x0: i64) -> T {
        let mut t = self.at(self.radius);
        if k > 0 {
            t.sub_assign(&self.at(x0 + k - 1));
            t.add_assign(&self.at(x0 - k));
        }
        t
    }
}

pub fn check_sym_domination<T: Scalar>(v_phi: &SurvivalField<T>, v_zero: &SurvivalField<T>) -> Result<DominationVerdict> {
    if v_phi.dim() != 1 || v_zero.dim() != 1 {
        return Err(Error::Dimension("symmetric domination is checked in d = 1 only".into()));
    }
    if v_phi.n != v_zero.n {
        return Err(Error::validation(format!("fields at different times {} and {}", v_phi.n, v_zero.n)));
    }
    let radius = v_phi.radius().max(v_zero.radius());
    let (k_max, x_max) = (radius, 2 * radius);
    let (pv, pw) = (Prefix::new(v_phi), Prefix::new(v_zero));
    let (sv, sw) = (v_phi.scale(), v_zero.scale());

    let mut best: Option<(T, i64, i64)> = None;
    for k in 0..=k_max {
        let lhs = pw.tail(k, 0).mul(sv);
        for x0 in -x_max..=x_max {
            let mut slack = pv.tail(k, x0).mul(sw);
            slack.sub_assign(&lhs);
            if best.as_ref().is_none_or(|(b, _, _)| slack < *b) {
                best = Some((slack, k, x0));
            }
        }
    }
    let (slack, witness_k, witness_x0) = best.expect("k = 0 is always checked");
    let min_slack = T::to_value(&slack, &sv.mul(sw));
    Ok(DominationVerdict {
        n: v_phi.n,
        pass: min_slack.is_nonnegative(),
        min_slack,
        witness_k,
        witness_x0,
        k_max,
        x_max,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DominationReport {
    pub pmf: String,
    pub precision: Precision,
    pub horizon: usize,
    pub pass: bool,
    pub first_failure: Option<usize>,
    pub rows: Vec<DominationVerdict>,
}

/// Domination of `v^phi_n` over `v^0_n` for each `n <= horizon`, on one shared window.
pub fn domination_chain(
    pmf: &IncrementPmf,
    phi: &TrapTrajectory,
    horizon: usize,
    opts: EngineOptions,
) -> Result<DominationReport> {
    let zero = TrapTrajectory::zero(pmf.dim(), 1);
    let precision = resolve_precision(pmf, phi, horizon, TrapModel::TwoTrap, opts);
    let rows = match precision {
        Precision::Float => chain::<f64>(pmf, phi, &zero, horizon, opts.cell_budget)?,
        _ => chain::<BigInt>(pmf, phi, &zero, horizon, opts.cell_budget)?,
    };
    let first_failure = rows.iter().find(|r| !r.pass).map(|r| r.n);
    Ok(DominationReport {
        pmf: pmf.name().to_string(),
        precision,
        horizon,
        pass: first_failure.is_none(),
        first_failure,
        rows,
    })
}

fn chain<T: Scalar>(
    pmf: &IncrementPmf,
    phi: &TrapTrajectory,
    zero: &TrapTrajectory,
    horizon: usize,
    budget: usize,
) -> Result<Vec<DominationVerdict>> {
    let radius = window_radius(pmf, phi, horizon, TrapModel::TwoTrap)
        .max(window_radius(pmf, zero, horizon, TrapModel::TwoTrap));
    let with_phi = evolve_with::<T>(pmf, phi, horizon, TrapModel::TwoTrap, budget, Some(radius))?;
    let without = evolve_with::<T>(pmf, zero, horizon, TrapModel::TwoTrap, budget, Some(radius))?;
    with_phi
        .fields
        .iter()
        .zip(&without.fields)
        .map(|(a, b)| check_sym_domination(a, b))
        .collect()
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;

    use super::*;
    use crate::perturb::{alternating_phi, random_phi};

    fn brute_min_slack(v: &SurvivalField<BigInt>, w: &SurvivalField<BigInt>, k_max: i64, x_max: i64) -> BigRational {
        let val = |f: &SurvivalField<BigInt>, x: i64| f.value(&Site::unit(0, x)).as_exact().unwrap().clone();
        let r = v.radius().max(w.radius());
        let tail = |f: &SurvivalField<BigInt>, k: i64, x0: i64| {
            (-3 * r..=3 * r)
                .filter(|x: &i64| x.abs() >= k)
                .map(|x| val(f, x0 + x))
                .fold(BigRational::from_integer(0.into()), |a, b| a + b)
        };
        let mut best: Option<BigRational> = None;
        for k in 0..=k_max {
            for x0 in -x_max..=x_max {
                let s = tail(v, k, x0) - tail(w, k, 0);
                if best.as_ref().is_none_or(|b| s < *b) {
                    best = Some(s);
                }
            }
        }
        best.unwrap()
    }

    #[test]
    fn identical_fields_have_zero_slack() {
        let pmf = IncrementPmf::simple(1).unwrap();
        let zero = TrapTrajectory::zero(1, 1);
        let r = domination_chain(&pmf, &zero, 6, EngineOptions::exact()).unwrap();
        assert!(r.pass);
        assert!(r.rows.iter().all(|v| v.min_slack == Value::zero(true)));
    }

    #[test]
    fn two_traps_beat_one_at_time_zero() {
        let pmf = IncrementPmf::simple(1).unwrap();
        let r = domination_chain(&pmf, &alternating_phi(3), 0, EngineOptions::exact()).unwrap();
        assert!(r.pass);
        assert_eq!(r.rows[0].k_max, r.rows[0].x_max / 2);
    }

    #[test]
    fn random_chain_passes_for_class_one_laws() {
        for pmf in [IncrementPmf::simple(1).unwrap(), IncrementPmf::uniform3()] {
            for seed in 0..5 {
                let phi = random_phi(seed, 13, &IncrementPmf::cube(1).unwrap());
                let r = domination_chain(&pmf, &phi, 12, EngineOptions::exact()).unwrap();
                assert!(r.pass, "{} seed {seed} fails at {:?}", pmf.name(), r.first_failure);
            }
        }
    }

    #[test]
    fn prefix_sums_match_direct_tails() {
        let pmf = IncrementPmf::simple(1).unwrap();
        let phi = random_phi(9, 7, &IncrementPmf::cube(1).unwrap());
        let zero = TrapTrajectory::zero(1, 1);
        let radius = window_radius(&pmf, &phi, 6, TrapModel::TwoTrap);
        let a = evolve_with::<BigInt>(&pmf, &phi, 6, TrapModel::TwoTrap, 1 << 20, Some(radius)).unwrap();
        let b = evolve_with::<BigInt>(&pmf, &zero, 6, TrapModel::TwoTrap, 1 << 20, Some(radius)).unwrap();
        for n in [0, 3, 6] {
            let v = check_sym_domination(a.field(n), b.field(n)).unwrap();
            let brute = brute_min_slack(a.field(n), b.field(n), v.k_max, v.x_max);
            assert_eq!(v.min_slack, Value::Exact(brute));
        }
    }

    #[test]
    fn float_chain_agrees() {
        let pmf = IncrementPmf::simple(1).unwrap();
        let phi = random_phi(4, 11, &IncrementPmf::cube(1).unwrap());
        let e = domination_chain(&pmf, &phi, 10, EngineOptions::exact()).unwrap();
        let f = domination_chain(&pmf, &phi, 10, EngineOptions::float()).unwrap();
        for (x, y) in e.rows.iter().zip(&f.rows) {
            assert!((x.min_slack.to_f64() - y.min_slack.to_f64()).abs() < 1e-12);
        }
    }

    #[test]
    fn rejects_higher_dimension() {
        let pmf = IncrementPmf::simple(2).unwrap();
        let zero = TrapTrajectory::zero(2, 1);
        assert!(matches!(domination_chain(&pmf, &zero, 2, EngineOptions::exact()), Err(Error::Dimension(_))));
    }
}
