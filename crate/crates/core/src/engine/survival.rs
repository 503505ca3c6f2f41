//! Killed-particle fields for a trap trajectory.
//!
//! One particle starts at every site and dies on first meeting the trap set.
//! `v_n(x)` is one minus the expected number of particles alive at `x` at time
//! `n`; it vanishes away from the traps' reach, so it is held on a finite window.
//! With trap sets `T_n` the recursion is
//!
//! ```text
//! v_0     = 1 on T_0, 0 elsewhere
//! v_{n+1} = 1 on T_{n+1}, sum_y v_n(y) p(x - y) elsewhere
//! ```
//!
//! For the two-trap field `T_n = {phi_n, phi_{n+1}}` we have `v_n(phi_{n+1}) = 1`,
//! so the second line equals `p(x - phi_{n+1}) + sum_{y != phi_{n+1}} v_n(y) p(x - y)`.

use num_bigint::BigInt;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::IncrementPmf;
use crate::lattice::{window_cells, Grid, Site};
use crate::numeric::{Precision, Scalar, Value, DEFAULT_CELL_BUDGET};
use crate::perturb::{trap_sites, TrapTrajectory};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrapModel {
    /// Trap set `{phi_n, phi_{n+1}}` at time `n`.
    TwoTrap,
    /// Trap set `{phi_n}` at time `n`.
    SingleTrap,
}

#[derive(Clone, Copy, Debug)]
pub struct EngineOptions {
    pub precision: Precision,
    pub cell_budget: usize,
}

impl Default for EngineOptions {
    fn default() -> Self {
        EngineOptions { precision: Precision::Auto, cell_budget: DEFAULT_CELL_BUDGET }
    }
}

impl EngineOptions {
    pub fn exact() -> Self {
        EngineOptions { precision: Precision::Exact, ..Default::default() }
    }

    pub fn float() -> Self {
        EngineOptions { precision: Precision::Float, ..Default::default() }
    }
}

/// `v_n` on a hypercube window; `numerator / scale` is the value.
#[derive(Clone, Debug)]
pub struct SurvivalField<T> {
    pub n: usize,
    scale: T,
    grid: Grid<T>,
}

impl<T: Scalar> SurvivalField<T> {
    pub fn scale(&self) -> &T {
        &self.scale
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn radius(&self) -> i64 {
        self.grid.radius()
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn numerator(&self, x: &Site) -> T {
        self.grid.value(x)
    }

    pub fn value(&self, x: &Site) -> Value {
        T::to_value(&self.grid.value(x), &self.scale)
    }

    /// `sum_x v_n(x)` over the finite support.
    pub fn total(&self) -> Value {
        T::to_value(&self.grid.total(), &self.scale)
    }
}

/// Mass `h_n(s)` of particles first killed at time `n` at trap site `s`.
#[derive(Clone, Debug)]
pub struct KilledMass<T> {
    pub time: usize,
    scale: T,
    masses: Vec<(Site, T)>,
}

impl<T: Scalar> KilledMass<T> {
    pub fn sites(&self) -> impl Iterator<Item = (Site, Value)> + '_ {
        self.masses.iter().map(|(s, m)| (*s, T::to_value(m, &self.scale)))
    }

    pub fn total(&self) -> Value {
        let mut acc = T::zero();
        for (_, m) in &self.masses {
            acc.add_assign(m);
        }
        T::to_value(&acc, &self.scale)
    }
}

/// Output of one survival-field run over times `0..=horizon`.
#[derive(Clone, Debug)]
pub struct SurvivalRun<T> {
    pub model: TrapModel,
    pub horizon: usize,
    pub fields: Vec<SurvivalField<T>>,
    pub killed: Vec<KilledMass<T>>,
}

impl<T: Scalar> SurvivalRun<T> {
    pub fn field(&self, n: usize) -> &SurvivalField<T> {
        &self.fields[n]
    }

    pub fn radius(&self) -> i64 {
        self.fields[0].radius()
    }
}

/// Trajectory padded (by holding its final value) to cover every trap set up to `horizon`.
pub fn covering_trajectory(phi: &TrapTrajectory, horizon: usize, model: TrapModel) -> TrapTrajectory {
    let needed = match model {
        TrapModel::TwoTrap => horizon + 2,
        TrapModel::SingleTrap => horizon + 1,
    };
    phi.held_to(needed)
}

/// Window radius `N * r + extent(phi) + 1`; `v` never reaches beyond it.
pub fn window_radius(pmf: &IncrementPmf, phi: &TrapTrajectory, horizon: usize, model: TrapModel) -> i64 {
    let phi = covering_trajectory(phi, horizon, model);
    horizon as i64 * pmf.support_radius() + phi.extent() + 1
}

/// Precision a run would use under `opts`.
pub fn resolve_precision(
    pmf: &IncrementPmf,
    phi: &TrapTrajectory,
    horizon: usize,
    model: TrapModel,
    opts: EngineOptions,
) -> Precision {
    let cells = window_cells(pmf.dim(), window_radius(pmf, phi, horizon, model)).unwrap_or(usize::MAX);
    opts.precision.resolve(cells)
}

fn trap_set(phi: &TrapTrajectory, i: usize, model: TrapModel) -> Vec<Site> {
    match model {
        TrapModel::TwoTrap => trap_sites(phi, i),
        TrapModel::SingleTrap => vec![phi.at(i)],
    }
}

/// Exact two-trap run.
pub fn evolve_survival(pmf: &IncrementPmf, phi: &TrapTrajectory, horizon: usize) -> Result<SurvivalRun<BigInt>> {
    evolve_with(pmf, phi, horizon, TrapModel::TwoTrap, DEFAULT_CELL_BUDGET, None)
}

/// Run on a window of at least `min_radius` (used to align fields that are compared cell by cell).
pub fn evolve_with<T: Scalar>(
    pmf: &IncrementPmf,
    phi: &TrapTrajectory,
    horizon: usize,
    model: TrapModel,
    budget: usize,
    min_radius: Option<i64>,
) -> Result<SurvivalRun<T>> {
    if phi.dim() != pmf.dim() {
        return Err(Error::Dimension(format!(
            "trajectory has d = {} but the pmf has d = {}",
            phi.dim(),
            pmf.dim()
        )));
    }
    let radius = window_radius(pmf, phi, horizon, model).max(min_radius.unwrap_or(0));
    evolve_in_window(pmf, phi, horizon, model, budget, radius)
}

fn evolve_in_window<T: Scalar>(
    pmf: &IncrementPmf,
    phi: &TrapTrajectory,
    horizon: usize,
    model: TrapModel,
    budget: usize,
    radius: i64,
) -> Result<SurvivalRun<T>> {
    let phi = covering_trajectory(phi, horizon, model);
    let weights = pmf.scalar_weights::<T>();
    let step = T::step_scale(pmf.denominator());
    let one = T::from_u64(1);

    let mut grid = Grid::<T>::zeros(pmf.dim(), radius, budget)?;
    let traps = trap_set(&phi, 0, model);
    for s in &traps {
        grid.set(s, one.clone())?;
    }
    let mut fields = vec![SurvivalField { n: 0, scale: one.clone(), grid }];
    let mut killed = vec![KilledMass {
        time: 0,
        scale: one.clone(),
        masses: traps.into_iter().map(|s| (s, one.clone())).collect(),
    }];

    for n in 0..horizon {
        let prev = &fields[n];
        let scale = prev.scale.mul(&step);
        let mut next = prev.grid.convolve(&weights);
        check_no_leak(&prev.grid, &next, &step, n)?;
        let mut masses = Vec::new();
        for s in trap_set(&phi, n + 1, model) {
            let mut h = scale.clone();
            h.sub_assign(&next.value(&s));
            next.set(&s, scale.clone())?;
            masses.push((s, h));
        }
        check_range(&next, &scale, n + 1, pmf.dim())?;
        fields.push(SurvivalField { n: n + 1, scale: scale.clone(), grid: next });
        killed.push(KilledMass { time: n + 1, scale, masses });
    }
    Ok(SurvivalRun { model, horizon, fields, killed })
}

/// Convolution conserves total mass unless some of it left the window.
fn check_no_leak<T: Scalar>(prev: &Grid<T>, next: &Grid<T>, step: &T, n: usize) -> Result<()> {
    let before = prev.total().mul(step);
    let after = next.total();
    let leaked = if T::EXACT {
        before != after
    } else {
        let (b, a) = (T::to_value(&before, step).to_f64(), T::to_value(&after, step).to_f64());
        (b - a).abs() > 1e-9 * b.abs().max(1.0)
    };
    if leaked {
        return Err(Error::Resource(format!(
            "survival field leaked out of the window of radius {} at step {n}",
            prev.radius()
        )));
    }
    Ok(())
}

fn check_range<T: Scalar>(grid: &Grid<T>, scale: &T, n: usize, dim: usize) -> Result<()> {
    let zero = T::zero();
    for (x, v) in grid.nonzero() {
        let ok = if T::EXACT {
            *v >= zero && *v <= *scale
        } else {
            let f = T::to_value(v, scale).to_f64();
            f > -1e-12 && f < 1.0 + 1e-12
        };
        if !ok {
            return Err(Error::Invariant(format!(
                "v_{n}({}) = {} outside [0, 1]",
                x.display(dim),
                T::to_value(v, scale)
            )));
        }
    }
    Ok(())
}

/// Cumulative hit mass `W(n) = sum_x v_n(x)` with `W(-1) = 0` implied.
#[derive(Clone, Debug, Serialize)]
pub struct HitSeries {
    pub model: TrapModel,
    pub values: Vec<Value>,
}

impl HitSeries {
    pub fn at(&self, n: usize) -> &Value {
        &self.values[n]
    }

    /// `W(n) - W(n-1)` for each `n`.
    pub fn increments(&self) -> Vec<Value> {
        let mut prev = Value::zero(self.values.first().is_none_or(Value::is_exact));
        self.values
            .iter()
            .map(|v| {
                let d = v.sub(&prev);
                prev = v.clone();
                d
            })
            .collect()
    }

    pub fn is_nondecreasing(&self) -> bool {
        self.increments().iter().all(Value::is_nonnegative)
    }
}

pub fn hit_mass<T: Scalar>(run: &SurvivalRun<T>) -> HitSeries {
    HitSeries { model: run.model, values: run.fields.iter().map(SurvivalField::total).collect() }
}

/// Hit series for `model` with automatic precision.
pub fn hit_series(
    pmf: &IncrementPmf,
    phi: &TrapTrajectory,
    horizon: usize,
    model: TrapModel,
    opts: EngineOptions,
) -> Result<HitSeries> {
    match resolve_precision(pmf, phi, horizon, model, opts) {
        Precision::Float => Ok(hit_mass(&evolve_with::<f64>(pmf, phi, horizon, model, opts.cell_budget, None)?)),
        _ => Ok(hit_mass(&evolve_with::<BigInt>(pmf, phi, horizon, model, opts.cell_budget, None)?)),
    }
}

/// Single-trap hit series `W_phi` for comparison with the two-trap field.
pub fn moreau_engine(pmf: &IncrementPmf, phi: &TrapTrajectory, horizon: usize) -> Result<HitSeries> {
    hit_series(pmf, phi, horizon, TrapModel::SingleTrap, EngineOptions::default())
}

#[cfg(test)]
mod tests {
    use std::collections::HashMap;

    use num_rational::BigRational;
    use num_traits::{One, Zero};

    use super::*;
    use crate::perturb::{alternating_phi, random_phi};

    fn q(n: i64, d: i64) -> Value {
        Value::Exact(BigRational::new(n.into(), d.into()))
    }

    fn s1(x: i64) -> Site {
        Site::unit(0, x)
    }

    /// Literal form of the two-trap recursion, on exact rationals over a sparse map.
    fn literal_recursion(pmf: &IncrementPmf, phi: &TrapTrajectory, horizon: usize) -> Vec<HashMap<Site, BigRational>> {
        let phi = phi.held_to(horizon + 2);
        let mut v: HashMap<Site, BigRational> = HashMap::new();
        v.insert(phi.at(0), BigRational::one());
        v.insert(phi.at(1), BigRational::one());
        let mut out = vec![v.clone()];
        for n in 0..horizon {
            let hub = phi.at(n + 1);
            let mut next: HashMap<Site, BigRational> = HashMap::new();
            let candidates: Vec<Site> = v
                .keys()
                .chain(std::iter::once(&hub))
                .flat_map(|y| pmf.support().map(move |(w, _)| *y + *w))
                .collect();
            for x in candidates {
                let mut acc = pmf.weight(&(x - hub));
                for (y, vy) in &v {
                    if *y != hub {
                        acc += vy * pmf.weight(&(x - *y));
                    }
                }
                if !acc.is_zero() {
                    next.insert(x, acc);
                }
            }
            next.insert(phi.at(n + 1), BigRational::one());
            next.insert(phi.at(n + 2), BigRational::one());
            v = next;
            out.push(v.clone());
        }
        out
    }

    #[test]
    fn srw_static_trap_first_steps() {
        let pmf = IncrementPmf::simple(1).unwrap();
        let run = evolve_survival(&pmf, &TrapTrajectory::zero(1, 1), 1).unwrap();
        assert_eq!(run.field(0).value(&Site::ORIGIN), q(1, 1));
        assert_eq!(run.field(0).total(), q(1, 1));
        assert_eq!(run.field(1).value(&s1(1)), q(1, 2));
        assert_eq!(run.field(1).value(&s1(-1)), q(1, 2));
        let hits = hit_mass(&run);
        assert_eq!(hits.values, vec![q(1, 1), q(2, 1)]);
    }

    #[test]
    fn time_zero_totals() {
        let pmf = IncrementPmf::lazy(2).unwrap();
        assert_eq!(hit_mass(&evolve_survival(&pmf, &TrapTrajectory::zero(2, 3), 0).unwrap()).values, vec![q(1, 1)]);
        let pmf = IncrementPmf::simple(1).unwrap();
        let alt = hit_mass(&evolve_survival(&pmf, &alternating_phi(4), 0).unwrap());
        assert_eq!(alt.values, vec![q(2, 1)]);
    }

    #[test]
    fn matches_literal_recursion() {
        for (pmf, seed) in [(IncrementPmf::simple(1).unwrap(), 1), (IncrementPmf::uniform3(), 2), (IncrementPmf::simple(2).unwrap(), 3)] {
            let phi = random_phi(seed, 9, &IncrementPmf::cube(pmf.dim()).unwrap());
            let run = evolve_survival(&pmf, &phi, 7).unwrap();
            let literal = literal_recursion(&pmf, &phi, 7);
            for (n, lit) in literal.iter().enumerate() {
                let field = run.field(n);
                for (x, v) in lit {
                    assert_eq!(field.value(x), Value::Exact(v.clone()), "n={n} x={x:?}");
                }
                assert_eq!(field.grid().nonzero().count(), lit.len());
            }
        }
    }

    #[test]
    fn killed_mass_telescopes() {
        let pmf = IncrementPmf::simple(2).unwrap();
        let phi = random_phi(5, 12, &IncrementPmf::cube(2).unwrap());
        let run = evolve_survival(&pmf, &phi, 10).unwrap();
        let inc = hit_mass(&run).increments();
        for (h, d) in run.killed.iter().zip(&inc) {
            assert_eq!(&h.total(), d);
            assert!(h.sites().all(|(_, m)| m.is_nonnegative()));
        }
        assert!(hit_mass(&run).is_nondecreasing());
    }

    #[test]
    fn trap_sites_stay_at_one() {
        let pmf = IncrementPmf::uniform3();
        let phi = random_phi(8, 12, &IncrementPmf::cube(1).unwrap());
        let run = evolve_survival(&pmf, &phi, 10).unwrap();
        for n in 0..=10 {
            assert_eq!(run.field(n).value(&phi.at(n)), q(1, 1));
            assert_eq!(run.field(n).value(&phi.at(n + 1)), q(1, 1));
        }
    }

    #[test]
    fn single_trap_on_static_phi_matches_two_trap() {
        let pmf = IncrementPmf::simple(2).unwrap();
        let zero = TrapTrajectory::zero(2, 1);
        let two = hit_series(&pmf, &zero, 8, TrapModel::TwoTrap, EngineOptions::exact()).unwrap();
        let one = moreau_engine(&pmf, &zero, 8).unwrap();
        assert_eq!(two.values, one.values);
    }

    #[test]
    fn two_trap_dominates_single_trap() {
        for seed in 0..6 {
            let pmf = IncrementPmf::simple(1).unwrap();
            let phi = random_phi(seed, 14, &IncrementPmf::cube(1).unwrap());
            let two = hit_series(&pmf, &phi, 12, TrapModel::TwoTrap, EngineOptions::exact()).unwrap();
            let one = moreau_engine(&pmf, &phi, 12).unwrap();
            for (a, b) in two.values.iter().zip(&one.values) {
                assert!(a.sub(b).is_nonnegative());
            }
        }
    }

    #[test]
    fn float_matches_exact() {
        let pmf = IncrementPmf::simple(2).unwrap();
        let phi = random_phi(11, 10, &IncrementPmf::cube(2).unwrap());
        let exact = hit_series(&pmf, &phi, 8, TrapModel::TwoTrap, EngineOptions::exact()).unwrap();
        let float = hit_series(&pmf, &phi, 8, TrapModel::TwoTrap, EngineOptions::float()).unwrap();
        for (a, b) in exact.values.iter().zip(&float.values) {
            assert!((a.to_f64() - b.to_f64()).abs() < 1e-10);
            assert!(!b.is_exact());
        }
    }

    #[test]
    fn dimension_mismatch() {
        let err = evolve_survival(&IncrementPmf::simple(2).unwrap(), &alternating_phi(3), 2).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
    }

    #[test]
    fn small_window_leak_is_reported() {
        let pmf = IncrementPmf::simple(1).unwrap();
        let phi = TrapTrajectory::zero(1, 1);
        let err = evolve_in_window::<BigInt>(&pmf, &phi, 3, TrapModel::TwoTrap, 100, 2).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }

    /// `sum_x P_x(tau <= n)` by enumerating all `2^n` paths from every start in reach.
    fn enumerate_hits(phi: &TrapTrajectory, n: usize) -> BigRational {
        let phi = phi.held_to(n + 2);
        let reach = n as i64 + phi.extent() + 1;
        let mut hits = 0u64;
        for x in -reach..=reach {
            for mask in 0u32..(1 << n) {
                let mut z = x;
                let mut hit = false;
                for i in 0..=n {
                    if i > 0 {
                        z += if mask >> (i - 1) & 1 == 1 { 1 } else { -1 };
                    }
                    if trap_sites(&phi, i).contains(&s1(z)) {
                        hit = true;
                        break;
                    }
                }
                hits += hit as u64;
            }
        }
        BigRational::new(hits.into(), (1u64 << n).into())
    }

    #[test]
    fn matches_path_enumeration() {
        let pmf = IncrementPmf::simple(1).unwrap();
        for seed in 0..4 {
            let phi = random_phi(seed, 10, &IncrementPmf::cube(1).unwrap());
            let hits = hit_series(&pmf, &phi, 8, TrapModel::TwoTrap, EngineOptions::exact()).unwrap();
            for n in 0..=8 {
                assert_eq!(hits.at(n), &Value::Exact(enumerate_hits(&phi, n)), "seed {seed} n {n}");
            }
        }
    }
}
