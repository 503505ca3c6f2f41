//! Insertion paths, their contraction to trap trajectories, and the two-trap field.
//!
//! A walk that jumps at even times and holds at odd times, shifted by an
//! insertion path `f` with `f_{2k-1} = f_{2k}`, visits site `x` exactly when a
//! walk started from `x` meets `-f`. Contracting each interval `[2k, 2k+1]`
//! turns `-f` into a trajectory `phi_i = -f_{2i}` whose trap set at time `i`
//! is `{phi_i, phi_{i+1}}`.

use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::kernels::IncrementPmf;
use crate::lattice::Site;

/// Deterministic path `f_0, ..., f_N` with `f_{2k-1} = f_{2k}` for `1 <= k`, `2k <= N`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InsertionPath {
    dim: usize,
    values: Vec<Site>,
}

impl InsertionPath {
    pub fn new(dim: usize, values: Vec<Site>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation("insertion path is empty"));
        }
        for k in 1..=(values.len() - 1) / 2 {
            if values[2 * k - 1] != values[2 * k] {
                return Err(Error::validation_at(
                    format!("index {}", 2 * k),
                    format!(
                        "insertion path needs f[{}] = f[{}], got {} and {}",
                        2 * k - 1,
                        2 * k,
                        values[2 * k - 1].display(dim),
                        values[2 * k].display(dim)
                    ),
                ));
            }
        }
        Ok(InsertionPath { dim, values })
    }

    /// The zero path of the given length.
    pub fn zero(dim: usize, len: usize) -> Self {
        InsertionPath { dim, values: vec![Site::ORIGIN; len.max(1)] }
    }

    /// Random insertion path: `f_0 = 0` and each free value `f_{2k+1}` is `f_{2k}` plus a step.
    pub fn random(seed: u64, len: usize, step_law: &IncrementPmf) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sampler = step_law.sampler();
        let mut values = vec![Site::ORIGIN];
        while values.len() < len.max(1) {
            let last = *values.last().expect("nonempty");
            if values.len() % 2 == 1 {
                values.push(last + sampler.sample(&mut rng));
            } else {
                values.push(last);
            }
        }
        InsertionPath { dim: step_law.dim(), values }
    }

    /// Parses `zero:N` or `random:SEED:N` (steps uniform on `{-1,0,1}^d`) into `f_0, ..., f_N`.
    pub fn from_spec(spec: &str, dim: usize) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |s: &str| -> Result<u64> {
            s.parse().map_err(|_| Error::Parse(format!("bad number '{s}' in insertion path spec '{spec}'")))
        };
        match parts.as_slice() {
            ["zero", n] => Ok(InsertionPath::zero(dim, num(n)? as usize + 1)),
            ["random", seed, n] => Ok(InsertionPath::random(num(seed)?, num(n)? as usize + 1, &IncrementPmf::cube(dim)?)),
            _ => Err(Error::Parse(format!("insertion path spec '{spec}' is not zero:N or random:SEED:N"))),
        }
    }

    pub fn from_file(path: &Path, dim: usize) -> Result<Self> {
        let values = read_sites(&std::fs::read_to_string(path)?, dim)?;
        Self::new(dim, values)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Site] {
        &self.values
    }

    /// `f_0, ..., f_n`, failing if the path is shorter.
    pub fn prefix(&self, n: usize) -> Result<InsertionPath> {
        if n >= self.values.len() {
            return Err(Error::Horizon { requested: n, available: self.values.len() - 1 });
        }
        Ok(InsertionPath { dim: self.dim, values: self.values[..=n].to_vec() })
    }
}

/// Arbitrary lattice path `phi_0, ..., phi_M`, stored by absolute position.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrapTrajectory {
    dim: usize,
    values: Vec<Site>,
}

impl TrapTrajectory {
    pub fn new(dim: usize, values: Vec<Site>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::validation("trap trajectory is empty"));
        }
        Ok(TrapTrajectory { dim, values })
    }

    /// `phi = 0` of length `len`.
    pub fn zero(dim: usize, len: usize) -> Self {
        TrapTrajectory { dim, values: vec![Site::ORIGIN; len.max(1)] }
    }

    /// Parses `alternating:N`, `random:SEED:N` (steps uniform on `{-1,0,1}^d`) or `zero:N`.
    pub fn from_spec(spec: &str, dim: usize) -> Result<Self> {
        let parts: Vec<&str> = spec.split(':').collect();
        let num = |s: &str| -> Result<u64> {
            s.parse().map_err(|_| Error::Parse(format!("bad number '{s}' in trajectory spec '{spec}'")))
        };
        match parts.as_slice() {
            ["alternating", n] => {
                if dim != 1 {
                    return Err(Error::Dimension("alternating trajectory needs d = 1".into()));
                }
                Ok(alternating_phi(num(n)? as usize))
            }
            ["random", seed, n] => Ok(random_phi(num(seed)?, num(n)? as usize, &IncrementPmf::cube(dim)?)),
            ["zero", n] => Ok(TrapTrajectory::zero(dim, num(n)? as usize + 1)),
            _ => Err(Error::Parse(format!(
                "trajectory spec '{spec}' is not alternating:N, random:SEED:N or zero:N"
            ))),
        }
    }

    pub fn from_file(path: &Path, dim: usize) -> Result<Self> {
        Self::new(dim, read_sites(&std::fs::read_to_string(path)?, dim)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[Site] {
        &self.values
    }

    pub fn at(&self, i: usize) -> Site {
        self.values[i]
    }

    /// Largest sup-norm over the trajectory.
    pub fn extent(&self) -> i64 {
        self.values.iter().map(Site::sup_norm).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(Site::is_origin)
    }

    /// Copy of length at least `len`, padded by holding the final value.
    pub fn held_to(&self, len: usize) -> TrapTrajectory {
        let mut values = self.values.clone();
        let last = *values.last().expect("nonempty");
        values.resize(len.max(values.len()), last);
        TrapTrajectory { dim: self.dim, values }
    }

    /// Copy truncated to `phi_0, ..., phi_{len-1}`.
    pub fn truncated(&self, len: usize) -> TrapTrajectory {
        TrapTrajectory { dim: self.dim, values: self.values[..len.clamp(1, self.values.len())].to_vec() }
    }

    /// One line per time step with `d` integers.
    pub fn to_text(&self) -> String {
        self.values
            .iter()
            .map(|s| s.coords(self.dim).iter().map(i64::to_string).collect::<Vec<_>>().join(" ") + "\n")
            .collect()
    }
}

fn read_sites(text: &str, dim: usize) -> Result<Vec<Site>> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty())
        .map(|(i, l)| {
            let coords = l
                .split_whitespace()
                .map(str::parse::<i64>)
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", i + 1)))?;
            if coords.len() != dim {
                return Err(Error::Parse(format!(
                    "line {}: expected {dim} coordinates, found {}",
                    i + 1,
                    coords.len()
                )));
            }
            Site::from_slice(&coords)
        })
        .collect()
}

/// `phi_i = -f_{2i}`, after extending an even-length `f` by repeating its last value.
///
/// Output length is `floor(len / 2) + 1`.
pub fn contract(f: &InsertionPath) -> TrapTrajectory {
    let mut values: Vec<Site> = f.values.iter().step_by(2).map(|s| -*s).collect();
    if f.values.len().is_multiple_of(2) {
        values.push(-*f.values.last().expect("nonempty"));
    }
    TrapTrajectory { dim: f.dim, values }
}

/// Contracted trajectory and horizon `m` such that `E|R_n(Zbar + f)|` equals the
/// two-trap hit mass at time `m`. Even `n` is first raised to `n + 1` with `f_{n+1} = f_n`,
/// which leaves the range unchanged.
pub fn contract_for_range(f: &InsertionPath, n: usize) -> Result<(TrapTrajectory, usize)> {
    let mut prefix = f.prefix(n)?;
    if n.is_multiple_of(2) {
        let last = *prefix.values.last().expect("nonempty");
        prefix.values.push(last);
    }
    let odd = prefix.values.len() - 1;
    Ok((contract(&prefix), (odd - 1) / 2))
}

/// Trap sites active at one time: `{phi_i, phi_{i+1}}`, one site when they coincide.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TrapSet {
    pub time: usize,
    pub sites: Vec<Site>,
}

pub fn trap_sites(phi: &TrapTrajectory, i: usize) -> Vec<Site> {
    let (a, b) = (phi.values[i], phi.values[i + 1]);
    if a == b {
        vec![a]
    } else {
        vec![a, b]
    }
}

/// Two-trap field over times `0..=n`; needs `phi_0, ..., phi_{n+1}`.
pub fn trap_field(phi: &TrapTrajectory, n: usize) -> Result<Vec<TrapSet>> {
    if n + 1 >= phi.len() {
        return Err(Error::Horizon { requested: n + 1, available: phi.len() - 1 });
    }
    Ok((0..=n).map(|time| TrapSet { time, sites: trap_sites(phi, time) }).collect())
}

/// `phi_i = i mod 2` for `0 <= i <= n`, in one dimension.
pub fn alternating_phi(n: usize) -> TrapTrajectory {
    TrapTrajectory { dim: 1, values: (0..=n).map(|i| Site::unit(0, (i % 2) as i64)).collect() }
}

/// `phi_0 = 0` with i.i.d. increments from `step_law`; deterministic in `seed`.
pub fn random_phi(seed: u64, n: usize, step_law: &IncrementPmf) -> TrapTrajectory {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sampler = step_law.sampler();
    let mut values = Vec::with_capacity(n + 1);
    let mut pos = Site::ORIGIN;
    values.push(pos);
    for _ in 0..n {
        pos = pos + sampler.sample(&mut rng);
        values.push(pos);
    }
    TrapTrajectory { dim: step_law.dim(), values }
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;

    fn line(xs: &[i64]) -> Vec<Site> {
        xs.iter().map(|&x| Site::unit(0, x)).collect()
    }

    #[test]
    fn contract_zero_path() {
        let phi = contract(&InsertionPath::zero(1, 7));
        assert_eq!(phi.len(), 4);
        assert!(phi.is_zero());
    }

    #[test]
    fn contract_flips_and_subsamples() {
        let f = InsertionPath::new(1, line(&[0, 0, 1, 1, 1, 1, 2])).unwrap_err();
        // f_1 = 0 but f_2 = 1 violates the pairing, so use the valid form instead.
        assert!(matches!(f, Error::Validation { .. }));
        let f = InsertionPath::new(1, line(&[0, 1, 1, 1, 1, 2, 2])).unwrap();
        assert_eq!(contract(&f).values(), line(&[0, -1, -1, -2]).as_slice());
    }

    #[test]
    fn even_length_is_extended() {
        let f = InsertionPath::new(1, line(&[0, 1, 1, 3, 3, 5])).unwrap();
        let phi = contract(&f);
        assert_eq!(phi.values(), line(&[0, -1, -3, -5]).as_slice());
    }

    #[test]
    fn range_horizon_map() {
        let f = InsertionPath::zero(1, 10);
        assert_eq!(contract_for_range(&f, 0).unwrap().1, 0);
        assert_eq!(contract_for_range(&f, 1).unwrap().1, 0);
        assert_eq!(contract_for_range(&f, 2).unwrap().1, 1);
        assert_eq!(contract_for_range(&f, 7).unwrap().1, 3);
        let (phi, m) = contract_for_range(&f, 8).unwrap();
        assert_eq!((phi.len(), m), (6, 4));
        assert!(contract_for_range(&f, 10).is_err());
    }

    #[test]
    fn trap_field_examples() {
        let field = trap_field(&TrapTrajectory::zero(1, 5), 3).unwrap();
        assert!(field.iter().all(|t| t.sites == vec![Site::ORIGIN]));
        let phi = TrapTrajectory::new(1, line(&[0, 1, 0])).unwrap();
        assert_eq!(trap_field(&phi, 0).unwrap()[0].sites, line(&[0, 1]));
        let phi = TrapTrajectory::new(1, line(&[0, 0, 2])).unwrap();
        assert_eq!(trap_field(&phi, 1).unwrap()[1].sites, line(&[0, 2]));
        assert!(matches!(trap_field(&phi, 2), Err(Error::Horizon { .. })));
    }

    #[test]
    fn alternating() {
        assert_eq!(alternating_phi(3).values(), line(&[0, 1, 0, 1]).as_slice());
        assert_eq!(alternating_phi(0).values(), line(&[0]).as_slice());
        assert_eq!(alternating_phi(4).values(), line(&[0, 1, 0, 1, 0]).as_slice());
    }

    #[test]
    fn random_phi_contract() {
        let law = IncrementPmf::simple(2).unwrap();
        assert_eq!(random_phi(9, 0, &law).values(), &[Site::ORIGIN]);
        assert_eq!(random_phi(9, 30, &law), random_phi(9, 30, &law));
        assert_ne!(random_phi(9, 30, &law), random_phi(10, 30, &law));
        assert!(random_phi(3, 20, &IncrementPmf::point_mass(2).unwrap()).is_zero());
    }

    #[test]
    fn specs_and_files() {
        assert_eq!(TrapTrajectory::from_spec("alternating:3", 1).unwrap(), alternating_phi(3));
        assert_eq!(TrapTrajectory::from_spec("random:4:6", 2).unwrap().len(), 7);
        assert!(TrapTrajectory::from_spec("alternating:3", 2).is_err());
        assert!(TrapTrajectory::from_spec("spiral:3", 1).is_err());
        let phi = random_phi(1, 5, &IncrementPmf::cube(2).unwrap());
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("phi.txt");
        std::fs::write(&path, phi.to_text()).unwrap();
        assert_eq!(TrapTrajectory::from_file(&path, 2).unwrap(), phi);
        assert!(TrapTrajectory::from_file(&path, 1).is_err());
    }

    proptest! {
        #[test]
        fn contraction_length_and_trap_membership(seed in 0u64..1000, len in 1usize..40) {
            let f = InsertionPath::random(seed, len, &IncrementPmf::cube(2).unwrap());
            prop_assert!(InsertionPath::new(2, f.values().to_vec()).is_ok());
            let phi = contract(&f);
            prop_assert_eq!(phi.len(), len / 2 + 1);
            let fv = f.values();
            for i in 0..phi.len() - 1 {
                let sites = trap_sites(&phi, i);
                prop_assert!(sites.contains(&-fv[2 * i]));
                let odd = fv.get(2 * i + 1).copied().unwrap_or(fv[2 * i]);
                prop_assert!(sites.contains(&-odd));
            }
        }
    }

    #[test]
    fn insertion_specs() {
        assert_eq!(InsertionPath::from_spec("zero:4", 2).unwrap().len(), 5);
        let f = InsertionPath::from_spec("random:3:9", 1).unwrap();
        assert_eq!(f.len(), 10);
        assert!(InsertionPath::new(1, f.values().to_vec()).is_ok());
        assert!(InsertionPath::from_spec("walk:3", 1).is_err());
    }
}
