//! First-passage decompositions of the pinned endpoint and the recursion they give
//! for the hit-mass margin.
//!
//! Summing over all starting points, `Z_n = phi_n` forces a first kill at some
//! `i <= n` at a site `s` of `{phi_i, phi_{i+1}}`, and `Z_{n-1} = phi_n` forces one at
//! `i <= n - 1`. Hence for every `n`
//!
//! ```text
//! sum_{i<=n} sum_s h_i(s) p_{n-i}(phi_n - s)   = 1
//! sum_{i<=n} sum_s h_i(s) p_{n-1-i}(phi_n - s) = 1 if n >= 1, 0 if n = 0
//! ```
//!
//! with `p_{-1} = 0`.

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::Result;
use crate::kernels::{check_mono_conditions, kernel_series, IncrementPmf, StepKernel};
use crate::lattice::Site;
use crate::numeric::{Precision, Scalar, Value};
use crate::perturb::TrapTrajectory;

use super::pascal::verify_pascal;
use super::survival::{covering_trajectory, evolve_with, resolve_precision, EngineOptions, TrapModel};

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionRow {
    pub n: usize,
    /// `sum_i sum_s h_i(s) p_{n-i}(phi_n - s)`.
    pub at_time: Value,
    /// `sum_i sum_s h_i(s) p_{n-1-i}(phi_n - s)`.
    pub before: Value,
    pub combined: Value,
    pub target: Value,
    pub residual: Value,
    /// `sum_x p_n(phi_n - x)`, which is `1`.
    pub kernel_mass: Value,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub pmf: String,
    pub precision: Precision,
    pub horizon: usize,
    pub pass: bool,
    pub first_failure: Option<usize>,
    pub rows: Vec<DecompositionRow>,
}

pub fn verify_decomposition(
    pmf: &IncrementPmf,
    phi: &TrapTrajectory,
    horizon: usize,
    opts: EngineOptions,
) -> Result<DecompositionReport> {
    let precision = resolve_precision(pmf, phi, horizon, TrapModel::TwoTrap, opts);
    let rows = match precision {
        Precision::Float => decompose::<f64>(pmf, phi, horizon, opts.cell_budget)?,
        _ => decompose::<BigInt>(pmf, phi, horizon, opts.cell_budget)?,
    };
    let first_failure = rows.iter().find(|r| !r.ok).map(|r| r.n);
    Ok(DecompositionReport {
        pmf: pmf.name().to_string(),
        precision,
        horizon,
        pass: first_failure.is_none(),
        first_failure,
        rows,
    })
}

fn kernel_at<T: Scalar>(series: &[StepKernel<T>], j: i64, x: &Site) -> Value {
    series[(j + 1) as usize].value(x)
}

fn decompose<T: Scalar>(
    pmf: &IncrementPmf,
    phi: &TrapTrajectory,
    horizon: usize,
    budget: usize,
) -> Result<Vec<DecompositionRow>> {
    let run = evolve_with::<T>(pmf, phi, horizon, TrapModel::TwoTrap, budget, None)?;
    let series = kernel_series::<T>(pmf, horizon as i64, budget)?;
    let phi = covering_trajectory(phi, horizon, TrapModel::TwoTrap);
    let zero = Value::zero(T::EXACT);
    let one = Value::one(T::EXACT);

    let rows = (0..=horizon)
        .map(|n| {
            let target_n = phi.at(n);
            let (mut at_time, mut before) = (zero.clone(), zero.clone());
            for killed in &run.killed[..=n] {
                let i = killed.time as i64;
                for (s, h) in killed.sites() {
                    let gap = target_n - s;
                    at_time = at_time.add(&h.mul(&kernel_at(&series, n as i64 - i, &gap)));
                    before = before.add(&h.mul(&kernel_at(&series, n as i64 - 1 - i, &gap)));
                }
            }
            let combined = at_time.add(&before);
            let before_target = if n == 0 { zero.clone() } else { one.clone() };
            let target = one.add(&before_target);
            let residual = combined.sub(&target);
            let kernel_mass = series[n + 1].total();
            let ok = residual.is_zero_within_tolerance()
                && at_time.sub(&one).is_zero_within_tolerance()
                && before.sub(&before_target).is_zero_within_tolerance()
                && kernel_mass.sub(&one).is_zero_within_tolerance();
            DecompositionRow { n, at_time, before, combined, target, residual, kernel_mass, ok }
        })
        .collect();
    Ok(rows)
}

#[derive(Clone, Debug, Serialize)]
pub struct WRecursionRow {
    pub n: usize,
    /// `W_phi(n) - W_0(n)`.
    pub margin: Value,
    /// `sum_{i<n} c_{n-i-1} (W_phi(i) - W_0(i))` with `c_j = p_{j-1,j}(0) - p_{j,j+1}(0)`.
    pub bound: Value,
    pub slack: Value,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct WRecursionReport {
    pub pmf: String,
    pub precision: Precision,
    pub horizon: usize,
    /// Whether the paired kernel conditions hold up to the horizon.
    pub proved_regime: bool,
    pub pass: bool,
    pub first_failure: Option<usize>,
    pub rows: Vec<WRecursionRow>,
}

pub fn verify_w_recursion(
    pmf: &IncrementPmf,
    phi: &TrapTrajectory,
    horizon: usize,
    opts: EngineOptions,
) -> Result<WRecursionReport> {
    let pascal = verify_pascal(pmf, phi, horizon, opts)?;
    let precision = pascal.precision;
    let origin: Vec<Value> = match precision {
        Precision::Float => origin_values::<f64>(pmf, horizon, opts.cell_budget)?,
        _ => origin_values::<BigInt>(pmf, horizon, opts.cell_budget)?,
    };
    // origin[j + 1] = p_j(0); paired(j) = p_j(0) + p_{j+1}(0)
    let paired = |j: i64| origin[(j + 1) as usize].add(&origin[(j + 2) as usize]);
    let coeff = |j: i64| paired(j - 1).sub(&paired(j));

    let margins: Vec<Value> = pascal.rows.iter().map(|r| r.margin.clone()).collect();
    let rows: Vec<WRecursionRow> = (0..=horizon)
        .map(|n| {
            let bound = (0..n).fold(Value::zero(precision == Precision::Exact), |acc, i| {
                acc.add(&coeff((n - i - 1) as i64).mul(&margins[i]))
            });
            let slack = margins[n].sub(&bound);
            WRecursionRow { n, margin: margins[n].clone(), ok: slack.is_nonnegative(), bound, slack }
        })
        .collect();
    let first_failure = rows.iter().find(|r| !r.ok).map(|r| r.n);
    Ok(WRecursionReport {
        pmf: pmf.name().to_string(),
        precision,
        horizon,
        proved_regime: check_mono_conditions(pmf, horizon as i64)?.holds,
        pass: first_failure.is_none(),
        first_failure,
        rows,
    })
}

/// `p_j(0)` for `-1 <= j <= horizon`.
fn origin_values<T: Scalar>(pmf: &IncrementPmf, horizon: usize, budget: usize) -> Result<Vec<Value>> {
    let series = kernel_series::<T>(pmf, horizon as i64, budget)?;
    Ok(series.iter().map(|k| k.value(&Site::ORIGIN)).collect())
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;

    use super::*;
    use crate::perturb::{alternating_phi, random_phi};

    fn q(n: i64, d: i64) -> Value {
        Value::Exact(BigRational::new(n.into(), d.into()))
    }

    #[test]
    fn static_srw_first_rows() {
        let pmf = IncrementPmf::simple(1).unwrap();
        let r = verify_decomposition(&pmf, &TrapTrajectory::zero(1, 1), 4, EngineOptions::exact()).unwrap();
        assert!(r.pass);
        assert_eq!(r.rows[0].combined, q(1, 1));
        assert_eq!(r.rows[1].combined, q(2, 1));
        assert!(r.rows.iter().all(|row| row.residual == q(0, 1)));
    }

    #[test]
    fn time_zero_with_two_sites() {
        let pmf = IncrementPmf::uniform3();
        let r = verify_decomposition(&pmf, &alternating_phi(2), 0, EngineOptions::exact()).unwrap();
        assert_eq!(r.rows[0].at_time, q(1, 1));
        assert_eq!(r.rows[0].before, q(0, 1));
        assert!(r.pass);
    }

    #[test]
    fn random_two_dim_residuals_vanish() {
        let pmf = IncrementPmf::simple(2).unwrap();
        for seed in 0..3 {
            let phi = random_phi(seed, 10, &IncrementPmf::cube(2).unwrap());
            let r = verify_decomposition(&pmf, &phi, 9, EngineOptions::exact()).unwrap();
            assert!(r.pass, "seed {seed}: {:?}", r.first_failure);
        }
    }

    #[test]
    fn float_residuals_small() {
        let pmf = IncrementPmf::lazy(1).unwrap();
        let phi = random_phi(3, 15, &IncrementPmf::cube(1).unwrap());
        let r = verify_decomposition(&pmf, &phi, 14, EngineOptions::float()).unwrap();
        assert!(r.pass);
        assert_eq!(r.precision, Precision::Float);
    }

    #[test]
    fn w_recursion_static_is_zero() {
        let pmf = IncrementPmf::simple(1).unwrap();
        let r = verify_w_recursion(&pmf, &TrapTrajectory::zero(1, 1), 8, EngineOptions::exact()).unwrap();
        assert!(r.pass && r.proved_regime);
        assert!(r.rows.iter().all(|row| row.margin == q(0, 1) && row.bound == q(0, 1)));
    }

    #[test]
    fn w_recursion_alternating_srw() {
        let pmf = IncrementPmf::simple(1).unwrap();
        let r = verify_w_recursion(&pmf, &alternating_phi(17), 16, EngineOptions::exact()).unwrap();
        assert!(r.pass, "{:?}", r.first_failure);
    }

    #[test]
    fn w_recursion_coefficients_for_srw() {
        // c_0 = p_{-1,0}(0) - p_{0,1}(0) = 0 and c_1 = p_{0,1}(0) - p_{1,2}(0) = 1/2
        let pmf = IncrementPmf::simple(1).unwrap();
        let r = verify_w_recursion(&pmf, &alternating_phi(3), 2, EngineOptions::exact()).unwrap();
        let m = |n: usize| r.rows[n].margin.clone();
        assert_eq!(r.rows[1].bound, q(0, 1));
        assert_eq!(r.rows[2].bound, q(1, 2).mul(&m(0)));
    }
}
