//! Monotonicity conditions on transition kernels.
//!
//! Two families are checked over `-1 <= n <= N` (paired) or `0 <= n <= N` (single):
//!
//! * paired: `p_{n,n+1}(0) >= p_{n+1,n+2}(0)` and `p_{n,n+1}(0) >= p_{n,n+1}(x)`;
//! * single: `p_n(0) >= p_{n+1}(0)` and `p_n(0) >= p_n(x)`.
//!
//! The paired family is what the two-trap comparison needs; the single family
//! fails for periodic walks such as the simple random walk.

use std::collections::VecDeque;

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::Result;
use crate::lattice::{window_cells, Site};
use crate::numeric::{Precision, Scalar, Value, DEFAULT_CELL_BUDGET};

use super::kernel::{KernelStepper, StepKernel};
use super::pmf::IncrementPmf;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionMode {
    /// Conditions on `p_{n,n+1} = p_n + p_{n+1}`.
    Paired,
    /// Conditions on `p_n` alone.
    Moreau,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Condition {
    /// Return probability to the origin is nonincreasing in time.
    TimeMonotone,
    /// The origin carries the largest mass at each time.
    OriginPeak,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionWitness {
    pub n: i64,
    pub condition: Condition,
    /// Competing site for `OriginPeak`.
    pub site: Option<Vec<i64>>,
    pub slack: Value,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionRow {
    pub n: i64,
    pub time_slack: Value,
    pub peak_slack: Value,
    pub peak_site: Option<Vec<i64>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionReport {
    pub mode: ConditionMode,
    pub pmf: String,
    pub horizon: i64,
    pub precision: Precision,
    pub holds: bool,
    pub min_slack: ConditionWitness,
    pub first_violation: Option<ConditionWitness>,
    pub rows: Vec<ConditionRow>,
}

pub fn check_mono_conditions(pmf: &IncrementPmf, horizon: i64) -> Result<ConditionReport> {
    check_conditions(pmf, horizon, ConditionMode::Paired, Precision::Auto, DEFAULT_CELL_BUDGET)
}

pub fn check_moreau_conditions(pmf: &IncrementPmf, horizon: i64) -> Result<ConditionReport> {
    check_conditions(pmf, horizon, ConditionMode::Moreau, Precision::Auto, DEFAULT_CELL_BUDGET)
}

pub fn check_conditions(
    pmf: &IncrementPmf,
    horizon: i64,
    mode: ConditionMode,
    precision: Precision,
    budget: usize,
) -> Result<ConditionReport> {
    let horizon = horizon.max(0);
    let radius = (horizon + 2) * pmf.support_radius();
    let cells = window_cells(pmf.dim(), radius).unwrap_or(usize::MAX);
    match precision.resolve(cells) {
        Precision::Float => run::<f64>(pmf, horizon, mode, radius, budget, Precision::Float),
        _ => run::<BigInt>(pmf, horizon, mode, radius, budget, Precision::Exact),
    }
}

/// Value of `p_n + p_{n+1}` at `x` (when `paired`) or `p_n(x)`, at the scale of the later kernel.
struct Combined<'a, T> {
    /// Earlier kernel with the factor lifting it to the later kernel's scale.
    first: Option<(&'a StepKernel<T>, T)>,
    second: &'a StepKernel<T>,
}

impl<T: Scalar> Combined<'_, T> {
    fn numerator(&self, x: &Site) -> T {
        let mut v = self.second.numerator(x);
        if let Some((k, lift)) = &self.first {
            v.add_assign(&k.numerator(x).mul(lift));
        }
        v
    }

    fn scale(&self) -> &T {
        self.second.scale()
    }

    fn value(&self, x: &Site) -> Value {
        T::to_value(&self.numerator(x), self.scale())
    }

    /// Largest value away from the origin.
    fn peak_off_origin(&self) -> (Option<Site>, Value) {
        let grid = self.second.grid();
        let mut best: Option<(Site, T)> = None;
        for idx in 0..grid.len() {
            let x = grid.site(idx);
            if x.is_origin() {
                continue;
            }
            let v = self.numerator(&x);
            if v.is_zero() {
                continue;
            }
            if best.as_ref().is_none_or(|(_, b)| v > *b) {
                best = Some((x, v));
            }
        }
        match best {
            Some((x, v)) => (Some(x), T::to_value(&v, self.scale())),
            None => (None, Value::zero(T::EXACT)),
        }
    }
}

fn run<T: Scalar>(
    pmf: &IncrementPmf,
    horizon: i64,
    mode: ConditionMode,
    radius: i64,
    budget: usize,
    precision: Precision,
) -> Result<ConditionReport> {
    let step_scale = T::step_scale(pmf.denominator());
    let one = T::from_u64(1);
    let mut stepper = KernelStepper::<T>::new(pmf, radius, budget)?;
    // window of consecutive kernels p_m, p_{m+1}, ...
    let mut window: VecDeque<StepKernel<T>> = VecDeque::new();
    let (start, depth) = match mode {
        ConditionMode::Paired => (-1, 3),
        ConditionMode::Moreau => {
            stepper.advance();
            (0, 2)
        }
    };
    window.push_back(stepper.current().clone());
    while window.len() < depth {
        window.push_back(stepper.advance().clone());
    }

    let dim = pmf.dim();
    let mut rows = Vec::new();
    let mut min_slack: Option<ConditionWitness> = None;
    let mut first_violation = None;
    let lift_for = |k: &StepKernel<T>| if k.n() < 0 { one.clone() } else { step_scale.clone() };

    for n in start..=horizon {
        let (now, next) = match mode {
            ConditionMode::Paired => (
                Combined { first: Some((&window[0], lift_for(&window[0]))), second: &window[1] },
                Combined { first: Some((&window[1], lift_for(&window[1]))), second: &window[2] },
            ),
            ConditionMode::Moreau => {
                (Combined { first: None, second: &window[0] }, Combined { first: None, second: &window[1] })
            }
        };
        let at_origin = now.value(&Site::ORIGIN);
        let time_slack = at_origin.sub(&next.value(&Site::ORIGIN));
        let (peak_site, peak) = now.peak_off_origin();
        let peak_slack = at_origin.sub(&peak);
        let peak_site = peak_site.map(|x| x.coords(dim).to_vec());

        let candidates = [
            ConditionWitness { n, condition: Condition::TimeMonotone, site: None, slack: time_slack.clone() },
            ConditionWitness {
                n,
                condition: Condition::OriginPeak,
                site: peak_site.clone(),
                slack: peak_slack.clone(),
            },
        ];
        for w in candidates {
            if first_violation.is_none() && !w.slack.is_nonnegative() {
                first_violation = Some(w.clone());
            }
            if min_slack.as_ref().is_none_or(|m| w.slack.lt(&m.slack)) {
                min_slack = Some(w);
            }
        }
        rows.push(ConditionRow { n, time_slack, peak_slack, peak_site });

        if n < horizon {
            window.pop_front();
            window.push_back(stepper.advance().clone());
        }
    }

    Ok(ConditionReport {
        mode,
        pmf: pmf.name().to_string(),
        horizon,
        precision,
        holds: first_violation.is_none(),
        min_slack: min_slack.expect("at least one row"),
        first_violation,
        rows,
    })
}
