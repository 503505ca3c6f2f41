use serde::Serialize;

use crate::error::Result;
use crate::kernels::{validate_class, IncrementPmf, WalkClass};
use crate::numeric::{Precision, Value};
use crate::perturb::{contract_for_range, InsertionPath, TrapTrajectory};

use super::survival::{
    hit_series, resolve_precision, EngineOptions, HitSeries, TrapModel,
};

#[derive(Clone, Debug, Serialize)]
pub struct PascalRow {
    pub n: usize,
    pub w_phi: Value,
    pub w_zero: Value,
    pub margin: Value,
    pub ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct PascalReport {
    pub pmf: String,
    pub class: WalkClass,
    /// False when the law is outside the proved classes; margins are still computed.
    pub proved_regime: bool,
    pub precision: Precision,
    pub horizon: usize,
    pub pass: bool,
    pub min_margin: Value,
    pub first_failure: Option<usize>,
    pub rows: Vec<PascalRow>,
}

/// Margins `W_phi(n) - W_0(n)` of the two-trap hit mass against the static trap.
pub fn verify_pascal(
    pmf: &IncrementPmf,
    phi: &TrapTrajectory,
    horizon: usize,
    opts: EngineOptions,
) -> Result<PascalReport> {
    let zero = TrapTrajectory::zero(pmf.dim(), 1);
    let precision = resolve_precision(pmf, phi, horizon, TrapModel::TwoTrap, opts);
    let opts = EngineOptions { precision, ..opts };
    let with_phi = hit_series(pmf, phi, horizon, TrapModel::TwoTrap, opts)?;
    let without = hit_series(pmf, &zero, horizon, TrapModel::TwoTrap, opts)?;
    Ok(compare_series(pmf, precision, horizon, &with_phi, &without))
}

fn compare_series(
    pmf: &IncrementPmf,
    precision: Precision,
    horizon: usize,
    with_phi: &HitSeries,
    without: &HitSeries,
) -> PascalReport {
    let rows: Vec<PascalRow> = with_phi
        .values
        .iter()
        .zip(&without.values)
        .enumerate()
        .map(|(n, (a, b))| {
            let margin = a.sub(b);
            PascalRow { n, w_phi: a.clone(), w_zero: b.clone(), ok: margin.is_nonnegative(), margin }
        })
        .collect();
    let first_failure = rows.iter().find(|r| !r.ok).map(|r| r.n);
    let min_margin = rows
        .iter()
        .map(|r| r.margin.clone())
        .reduce(|a, b| if b.lt(&a) { b } else { a })
        .expect("horizon 0 still has one row");
    let class = validate_class(pmf);
    PascalReport {
        pmf: pmf.name().to_string(),
        proved_regime: class.is_proved(),
        class,
        precision,
        horizon,
        pass: first_failure.is_none(),
        min_margin,
        first_failure,
        rows,
    }
}

/// `E|R_n(Zbar + f)|` as the two-trap hit mass of the contracted trajectory.
pub fn range_via_hits(pmf: &IncrementPmf, f: &InsertionPath, n: usize, opts: EngineOptions) -> Result<Value> {
    let (phi, m) = contract_for_range(f, n)?;
    let series = hit_series(pmf, &phi, m, TrapModel::TwoTrap, opts)?;
    Ok(series.at(m).clone())
}
