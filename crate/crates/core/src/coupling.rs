//! Coordinate coupling of a simple random walk `X` from `x` with one `Y` from `e_1`,
//! for `|x|_1` odd, such that `X_n = 0` forces `Y_n = 0`.
//!
//! Coordinates are normalized so that `x >= 0` and the odd coordinates come first
//! (there are `2m - 1` of them); the coordinates `2..=2m-1` are paired as
//! `(2, 3), (4, 5), ...`. When `X` jumps along `e_i`:
//!
//! * (a) `X_i = Y_i`: `Y` makes the same jump;
//! * (b) `X_i != Y_i` with equal parity: `Y` makes the opposite jump;
//! * (c) parities differ: `Y` jumps along the partner `e_{i'}` with the same sign.
//!
//! The invariants checked after every step are
//! (1) `|X_i| >= |Y_i|`, (2) equal coordinates stay equal, (3) equal parities stay
//! equal, (4) `X_i + Y_i` has the same parity on both members of each pair.

use rayon::prelude::*;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::{n_step_kernel, IncrementPmf};
use crate::lattice::{window_sites, Site, MAX_DIM};
use crate::numeric::Value;
use crate::seeding::{replica_rng, run_replicas, Merge};

/// Transform taking the raw start to its normalized form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Normalization {
    pub original: Vec<i64>,
    pub normalized: Vec<i64>,
    /// `permutation[j]` is the 1-based raw coordinate placed at position `j + 1`.
    pub permutation: Vec<usize>,
    /// Raw coordinates whose sign was flipped.
    pub flipped: Vec<bool>,
    pub m: usize,
}

impl Normalization {
    /// Maps a point of the normalized frame back to raw coordinates.
    pub fn to_raw(&self, p: &Site) -> Vec<i64> {
        let mut raw = vec![0; self.original.len()];
        for (j, &src) in self.permutation.iter().enumerate() {
            let v = p.0[j];
            raw[src - 1] = if self.flipped[src - 1] { -v } else { v };
        }
        raw
    }
}

pub fn normalize_start(x: &[i64]) -> Result<Normalization> {
    if x.is_empty() || x.len() > MAX_DIM {
        return Err(Error::Dimension(format!("start has {} coordinates; supported 1..={MAX_DIM}", x.len())));
    }
    let l1: i64 = x.iter().map(|c| c.abs()).sum();
    if l1 % 2 == 0 {
        return Err(Error::validation(format!("|x|_1 = {l1} is even; the coupling needs it odd")));
    }
    let flipped: Vec<bool> = x.iter().map(|&c| c < 0).collect();
    let mut permutation: Vec<usize> = (1..=x.len()).filter(|&i| x[i - 1] % 2 != 0).collect();
    let odd = permutation.len();
    permutation.extend((1..=x.len()).filter(|&i| x[i - 1] % 2 == 0));
    let normalized = permutation.iter().map(|&i| x[i - 1].abs()).collect();
    Ok(Normalization { original: x.to_vec(), normalized, permutation, flipped, m: odd.div_ceil(2) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Rule {
    Same,
    Mirror,
    Swap,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CoupledState {
    pub k: usize,
    pub dim: usize,
    pub m: usize,
    pub x: Site,
    pub y: Site,
}

impl CoupledState {
    /// `X` at the normalized start, `Y` at `e_1`.
    pub fn start(norm: &Normalization) -> Result<Self> {
        let state = CoupledState {
            k: 0,
            dim: norm.normalized.len(),
            m: norm.m,
            x: Site::from_slice(&norm.normalized)?,
            y: Site::unit(0, 1),
        };
        check_invariants(None, &state)?;
        Ok(state)
    }

    fn describe(&self) -> String {
        format!("k={} X={} Y={}", self.k, self.x.display(self.dim), self.y.display(self.dim))
    }

    /// Partner of 0-based coordinate `i` within its pair, if it has one.
    fn partner(&self, i: usize) -> Option<usize> {
        // pairs (2j, 2j+1), 1-based, for 1 <= j <= m - 1
        (1..=2 * self.m.saturating_sub(1)).contains(&i).then(|| if i % 2 == 1 { i + 1 } else { i - 1 })
    }
}

fn same_parity(a: i64, b: i64) -> bool {
    (a - b).rem_euclid(2) == 0
}

fn check_invariants(prev: Option<&CoupledState>, s: &CoupledState) -> Result<()> {
    let fail = |what: String| {
        let before = prev.map(|p| format!("{} -> ", p.describe())).unwrap_or_default();
        Err(Error::Invariant(format!("{what} at {before}{}", s.describe())))
    };
    for i in 0..s.dim {
        let (x, y) = (s.x.0[i], s.y.0[i]);
        if x.abs() < y.abs() {
            return fail(format!("(1) |X_{0}| < |Y_{0}|", i + 1));
        }
        if let Some(p) = prev {
            if p.x.0[i] == p.y.0[i] && x != y {
                return fail(format!("(2) coordinate {} came unglued", i + 1));
            }
            if same_parity(p.x.0[i], p.y.0[i]) && !same_parity(x, y) {
                return fail(format!("(3) parity of coordinate {} split", i + 1));
            }
        }
        if s.partner(i).is_none() && !same_parity(x, y) {
            return fail(format!("unpaired coordinate {} has mismatched parity", i + 1));
        }
    }
    for j in 1..s.m {
        let (a, b) = (2 * j - 1, 2 * j);
        if !same_parity(s.x.0[a] + s.y.0[a], s.x.0[b] + s.y.0[b]) {
            return fail(format!("(4) pair ({}, {}) out of step", a + 1, b + 1));
        }
    }
    Ok(())
}

/// Decodes a unit step into its 0-based axis and sign.
fn axis_of(step: &Site, dim: usize) -> Result<(usize, i64)> {
    let nz: Vec<usize> = (0..dim).filter(|&i| step.0[i] != 0).collect();
    match nz.as_slice() {
        [i] if step.0[*i].abs() == 1 && step.0[dim..].iter().all(|&c| c == 0) => Ok((*i, step.0[*i])),
        _ => Err(Error::validation(format!("{} is not a unit step", step.display(dim)))),
    }
}

/// Advances `X` by `xstep` and `Y` by the matching rule, then rechecks the invariants.
pub fn coupled_step(state: &CoupledState, xstep: &Site) -> Result<(CoupledState, Rule)> {
    let (i, sign) = axis_of(xstep, state.dim)?;
    let (xi, yi) = (state.x.0[i], state.y.0[i]);
    let (rule, ystep) = if xi == yi {
        (Rule::Same, *xstep)
    } else if same_parity(xi, yi) {
        (Rule::Mirror, -*xstep)
    } else {
        let partner = state.partner(i).ok_or_else(|| {
            Error::Invariant(format!("coordinate {} has mismatched parity but no partner at {}", i + 1, state.describe()))
        })?;
        (Rule::Swap, Site::unit(partner, sign))
    };
    let next = CoupledState { k: state.k + 1, x: state.x + *xstep, y: state.y + ystep, ..state.clone() };
    check_invariants(Some(state), &next)?;
    Ok((next, rule))
}

/// Signed unit steps in the fixed order `+e_1, -e_1, +e_2, ...`.
pub fn unit_steps(dim: usize) -> Vec<Site> {
    (0..dim).flat_map(|i| [Site::unit(i, 1), Site::unit(i, -1)]).collect()
}

fn step_code(step: &Site, dim: usize) -> usize {
    let (i, sign) = axis_of(step, dim).expect("coupled steps are unit steps");
    2 * i + usize::from(sign < 0)
}

fn check_odd(n: usize) -> Result<()> {
    if n.is_multiple_of(2) {
        return Err(Error::validation(format!("horizon n = {n} must be odd")));
    }
    Ok(())
}

/// Follows one driving sequence and returns the final state with the `Y` step codes.
fn drive(start: &CoupledState, codes: impl Iterator<Item = usize>, steps: &[Site]) -> Result<(CoupledState, Vec<usize>)> {
    let mut trace = vec![start.clone()];
    let mut ycodes = Vec::new();
    let render = |trace: &[CoupledState]| trace.iter().map(CoupledState::describe).collect::<Vec<_>>().join(" | ");
    for c in codes {
        let state = trace.last().expect("trace starts nonempty");
        let next = match coupled_step(state, &steps[c]) {
            Ok((s, _)) => s,
            Err(e) => return Err(Error::Invariant(format!("{e}; trace: {}", render(&trace)))),
        };
        ycodes.push(step_code(&(next.y - state.y), next.dim));
        trace.push(next);
    }
    let state = trace.pop().expect("trace starts nonempty");
    if state.x.is_origin() && !state.y.is_origin() {
        trace.push(state);
        return Err(Error::Invariant(format!("X_n = 0 but Y_n != 0; trace: {}", render(&trace))));
    }
    Ok((state, ycodes))
}

#[derive(Clone, Debug, Default)]
struct CouplingTally {
    x_hits: u64,
    y_hits: u64,
    y_steps: Vec<u64>,
}

impl Merge for CouplingTally {
    fn merge(&mut self, other: Self) {
        self.x_hits += other.x_hits;
        self.y_hits += other.y_hits;
        self.y_steps.merge(other.y_steps);
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CouplingReport {
    pub normalization: Normalization,
    pub n: usize,
    pub reps: u64,
    pub seed: u64,
    /// Coupled steps whose invariants were checked; any breach aborts the run.
    pub steps_checked: u64,
    pub p_x_hat: f64,
    pub p_y_hat: f64,
    pub stderr_x: f64,
    pub stderr_y: f64,
    /// Exact `p_n(x)` and `p_n(e_1)`.
    pub p_x_exact: Value,
    pub p_y_exact: Value,
    /// Empirical frequency of each `Y` step, in the order `+e_1, -e_1, +e_2, ...`.
    pub y_step_freq: Vec<f64>,
    /// `P(X_n = 0) <= P(Y_n = 0)` within three combined standard errors.
    pub ordered: bool,
}

pub fn run_coupling(x: &[i64], n: usize, reps: u64, seed: u64) -> Result<CouplingReport> {
    let norm = normalize_start(x)?;
    check_odd(n)?;
    let start = CoupledState::start(&norm)?;
    let dim = start.dim;
    let steps = unit_steps(dim);
    let init = || CouplingTally { y_steps: vec![0; 2 * dim], ..Default::default() };
    let tally = run_replicas(reps, init, |acc, r| {
        let mut rng = replica_rng(seed, r);
        let codes: Vec<usize> = (0..n).map(|_| rng.random_range(0..2 * dim)).collect();
        let (end, ycodes) = drive(&start, codes.into_iter(), &steps)?;
        acc.x_hits += u64::from(end.x.is_origin());
        acc.y_hits += u64::from(end.y.is_origin());
        for c in ycodes {
            acc.y_steps[c] += 1;
        }
        Ok(())
    })?;

    let freq = |h: u64| h as f64 / reps as f64;
    let se = |p: f64| (p * (1.0 - p) / reps as f64).sqrt();
    let (px, py) = (freq(tally.x_hits), freq(tally.y_hits));
    let total_steps = (reps * n as u64) as f64;
    let pmf = IncrementPmf::simple(dim)?;
    let kernel = n_step_kernel(&pmf, n as i64)?;
    Ok(CouplingReport {
        p_x_exact: Value::Exact(kernel.probability(&start.x)),
        p_y_exact: Value::Exact(kernel.probability(&start.y)),
        normalization: norm,
        n,
        reps,
        seed,
        steps_checked: reps * n as u64,
        ordered: px <= py + 3.0 * (se(px).powi(2) + se(py).powi(2)).sqrt(),
        p_x_hat: px,
        p_y_hat: py,
        stderr_x: se(px),
        stderr_y: se(py),
        y_step_freq: tally.y_steps.iter().map(|&c| c as f64 / total_steps).collect(),
    })
}

pub const ORACLE_BUDGET: u64 = 10_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct OracleReport {
    pub normalization: Normalization,
    pub n: usize,
    pub paths: u64,
    /// Every driving sequence kept the invariants and the implication.
    pub invariants_hold: bool,
    /// Distinct `Y` step sequences produced; equals `paths` exactly when the map is a bijection.
    pub distinct_y_paths: u64,
    pub y_uniform: bool,
    pub x_hits: u64,
    pub y_hits: u64,
    /// `x_hits / paths` equals the exact kernel `p_n(x)`.
    pub kernel_agrees: bool,
    pub pass: bool,
}

/// Runs the coupling on every `X` driving sequence of length `n`.
pub fn exhaustive_coupling_oracle(x: &[i64], n: usize) -> Result<OracleReport> {
    let norm = normalize_start(x)?;
    let start = CoupledState::start(&norm)?;
    let dim = start.dim;
    let base = 2 * dim as u64;
    let paths = base
        .checked_pow(n as u32)
        .filter(|&p| p <= ORACLE_BUDGET)
        .ok_or_else(|| Error::Resource(format!("(2d)^n = {base}^{n} exceeds the budget of {ORACLE_BUDGET}")))?;
    let steps = unit_steps(dim);
    let digits = |mut idx: u64| {
        (0..n).map(move |_| {
            let d = (idx % base) as usize;
            idx /= base;
            d
        })
    };
    let encode = |codes: &[usize]| codes.iter().rev().fold(0u64, |acc, &c| acc * base + c as u64);

    let chunk = 4096u64;
    let parts: Vec<Result<(Vec<u64>, u64, u64)>> = (0..paths.div_ceil(chunk))
        .into_par_iter()
        .map(|c| {
            let mut ys = Vec::new();
            let (mut xh, mut yh) = (0u64, 0u64);
            for idx in c * chunk..((c + 1) * chunk).min(paths) {
                let (end, ycodes) = drive(&start, digits(idx), &steps)?;
                xh += u64::from(end.x.is_origin());
                yh += u64::from(end.y.is_origin());
                ys.push(encode(&ycodes));
            }
            Ok((ys, xh, yh))
        })
        .collect();
    let mut ys = Vec::with_capacity(paths as usize);
    let (mut x_hits, mut y_hits) = (0, 0);
    for p in parts {
        let (part, xh, yh) = p?;
        ys.extend(part);
        x_hits += xh;
        y_hits += yh;
    }
    ys.sort_unstable();
    ys.dedup();
    let distinct = ys.len() as u64;

    let pmf = IncrementPmf::simple(dim)?;
    let kernel = n_step_kernel(&pmf, n as i64)?;
    let kernel_agrees = kernel.probability(&start.x) == num_rational::BigRational::new(x_hits.into(), paths.into());
    let y_uniform = distinct == paths;
    Ok(OracleReport {
        normalization: norm,
        n,
        paths,
        invariants_hold: true,
        distinct_y_paths: distinct,
        y_uniform,
        x_hits,
        y_hits,
        kernel_agrees,
        pass: y_uniform && kernel_agrees && x_hits <= y_hits,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct PnxoddReport {
    pub dim: usize,
    pub n: usize,
    pub radius: i64,
    pub checked: usize,
    pub p_e1: Value,
    /// Site with the largest `p_n(x)` among odd-`|x|_1` sites other than `+-e_i`.
    pub worst_site: Option<Vec<i64>>,
    pub worst_value: Option<Value>,
    pub pass: bool,
}

/// Checks `p_n(x) <= p_n(e_1)` for every `x` with `|x|_1` odd and `|x|_inf <= radius`.
pub fn verify_pnxodd_exact(dim: usize, n: usize, radius: i64) -> Result<PnxoddReport> {
    check_odd(n)?;
    let pmf = IncrementPmf::simple(dim)?;
    let kernel = n_step_kernel(&pmf, n as i64)?;
    let e1 = Site::unit(0, 1);
    let p_e1 = kernel.probability(&e1);
    let window = window_sites(dim, radius)?;
    let mut checked = 0;
    let mut pass = true;
    let mut worst: Option<(Site, num_rational::BigRational)> = None;
    for x in window.filter(|x| x.l1_norm() % 2 == 1) {
        checked += 1;
        let p = kernel.probability(&x);
        pass &= p <= p_e1;
        if x.l1_norm() != 1 && worst.as_ref().is_none_or(|(_, w)| p > *w) {
            worst = Some((x, p));
        }
    }
    Ok(PnxoddReport {
        dim,
        n,
        radius,
        checked,
        p_e1: Value::Exact(p_e1),
        worst_site: worst.as_ref().map(|(s, _)| s.coords(dim).to_vec()),
        worst_value: worst.map(|(_, p)| Value::Exact(p)),
        pass,
    })
}

#[cfg(test)]
mod tests {
    use num_rational::BigRational;
    use proptest::prelude::*;

    use super::*;

    fn state(x: &[i64], y: &[i64], m: usize) -> CoupledState {
        CoupledState { k: 0, dim: x.len(), m, x: Site::from_slice(x).unwrap(), y: Site::from_slice(y).unwrap() }
    }

    #[test]
    fn normalization_examples() {
        let n = normalize_start(&[-3]).unwrap();
        assert_eq!((n.normalized.clone(), n.flipped.clone(), n.m), (vec![3], vec![true], 1));
        assert!(normalize_start(&[2, 1, 1]).is_err());
        let n = normalize_start(&[1, 1, 1]).unwrap();
        assert_eq!((n.normalized.clone(), n.m), (vec![1, 1, 1], 2));
        let n = normalize_start(&[2, -1]).unwrap();
        assert_eq!((n.normalized.clone(), n.permutation.clone(), n.m), (vec![1, 2], vec![2, 1], 1));
        assert_eq!(n.to_raw(&Site::from_slice(&[1, 2]).unwrap()), vec![2, -1]);
        assert!(normalize_start(&[2, 0]).is_err());
    }

    #[test]
    fn rule_examples() {
        let (s, r) = coupled_step(&state(&[3], &[1], 1), &Site::unit(0, -1)).unwrap();
        assert_eq!((s.x.0[0], s.y.0[0], r), (2, 2, Rule::Mirror));
        let (s, r) = coupled_step(&state(&[2], &[2], 1), &Site::unit(0, -1)).unwrap();
        assert_eq!((s.x.0[0], s.y.0[0], r), (1, 1, Rule::Same));
        let (s, r) = coupled_step(&state(&[0, 2, 1], &[0, 1, 0], 2), &Site::unit(1, 1)).unwrap();
        assert_eq!((s.y, r), (Site::from_slice(&[0, 1, 1]).unwrap(), Rule::Swap));
    }

    #[test]
    fn deterministic_path_glues() {
        let start = CoupledState::start(&normalize_start(&[3]).unwrap()).unwrap();
        let steps = unit_steps(1);
        let (end, _) = drive(&start, [1, 1, 1].into_iter(), &steps).unwrap();
        assert!(end.x.is_origin() && end.y.is_origin());
    }

    #[test]
    fn broken_state_is_reported() {
        // (1) already fails: |X_1| < |Y_1|
        let err = coupled_step(&state(&[1], &[3], 1), &Site::unit(0, -1)).unwrap_err();
        assert!(matches!(err, Error::Invariant(_)));
        assert!(coupled_step(&state(&[1], &[1], 1), &Site::unit(0, 2)).is_err());
    }

    #[test]
    fn identical_starts_stay_together() {
        let start = CoupledState::start(&normalize_start(&[1, 0]).unwrap()).unwrap();
        let steps = unit_steps(2);
        let mut s = start;
        for c in [0, 2, 3, 1, 1, 3, 2] {
            let (next, rule) = coupled_step(&s, &steps[c]).unwrap();
            assert_eq!(rule, Rule::Same);
            assert_eq!(next.x, next.y);
            s = next;
        }
    }

    #[test]
    fn oracle_small_cases() {
        let r = exhaustive_coupling_oracle(&[3], 5).unwrap();
        assert!(r.pass);
        assert_eq!((r.paths, r.distinct_y_paths), (32, 32));
        let r = exhaustive_coupling_oracle(&[1, 0], 1).unwrap();
        assert!(r.pass && r.paths == 4);
        assert!(exhaustive_coupling_oracle(&[1, 1, 1], 10).is_err());
    }

    #[test]
    fn oracle_three_dims() {
        let r = exhaustive_coupling_oracle(&[1, 1, 1], 5).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn pnxodd_examples() {
        let r = verify_pnxodd_exact(1, 3, 3).unwrap();
        assert!(r.pass);
        assert_eq!(r.p_e1, Value::Exact(BigRational::new(3.into(), 8.into())));
        assert_eq!(r.worst_value, Some(Value::Exact(BigRational::new(1.into(), 8.into()))));
        let r = verify_pnxodd_exact(1, 1, 1).unwrap();
        assert!(r.pass && r.worst_site.is_none());
        assert!(verify_pnxodd_exact(2, 7, 7).unwrap().pass);
    }

    #[test]
    fn run_matches_kernel() {
        let r = run_coupling(&[2, 1], 5, 20_000, 7).unwrap();
        assert!(r.ordered);
        let px = r.p_x_exact.to_f64();
        assert!((r.p_x_hat - px).abs() <= 4.0 * r.stderr_x.max(1e-3));
        assert!(r.y_step_freq.iter().all(|f| (f - 0.25).abs() < 0.01));
        assert!(run_coupling(&[2, 0], 5, 10, 1).is_err());
        assert!(run_coupling(&[3], 4, 10, 1).is_err());
    }

    #[test]
    fn run_is_seed_deterministic() {
        let a = run_coupling(&[1, 1, 1], 7, 3000, 11).unwrap();
        let b = run_coupling(&[1, 1, 1], 7, 3000, 11).unwrap();
        assert_eq!((a.p_x_hat, a.p_y_hat), (b.p_x_hat, b.p_y_hat));
    }

    proptest! {
        #[test]
        fn step_map_is_a_bijection(x in prop::collection::vec(-5i64..=5, 1..=3), prefix in prop::collection::vec(0usize..6, 0..6)) {
            prop_assume!(x.iter().map(|c| c.abs()).sum::<i64>() % 2 == 1);
            let start = CoupledState::start(&normalize_start(&x).unwrap()).unwrap();
            let steps = unit_steps(start.dim);
            let codes: Vec<usize> = prefix.iter().map(|c| c % steps.len()).collect();
            let (s, _) = drive(&start, codes.into_iter(), &steps).unwrap();
            let mut images: Vec<usize> = steps
                .iter()
                .map(|st| {
                    let (next, _) = coupled_step(&s, st).unwrap();
                    step_code(&(next.y - s.y), s.dim)
                })
                .collect();
            images.sort_unstable();
            prop_assert_eq!(images, (0..steps.len()).collect::<Vec<_>>());
        }
    }
}
