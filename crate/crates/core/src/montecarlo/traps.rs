//! Continuous-time trap field: Poisson numbers of traps per site, each trap a
//! continuous-time walk with i.i.d. holding times, killing a particle that
//! follows a deterministic piecewise-constant path.
//!
//! Positions are right-continuous. Events sharing a timestamp are applied trap
//! jumps first, then the particle jump, and co-location is tested on the state
//! after all of them; each such tie is counted.

use std::path::{Path, PathBuf};

use rand::Rng;
use rand_distr::{Distribution, Exp, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::{IncrementPmf, StepSampler};
use crate::lattice::{window_sites, Site};
use crate::seeding::{replica_rng, run_replicas, Merge, Moments};

/// Offset of the master seed used by the exponential-identity estimator.
const IDENTITY_SEED_OFFSET: u64 = 0x1d_e471_7e55;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum HoldingLaw {
    Exponential { rate: f64 },
    /// `P(H > s) = (scale / s)^shape` for `s >= scale`, sampled by inverse transform.
    Pareto { shape: f64, scale: f64 },
    /// Not a continuous law, so outside the ordering hypotheses.
    Deterministic { period: f64 },
}

impl HoldingLaw {
    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            HoldingLaw::Exponential { rate } => rate > 0.0 && rate.is_finite(),
            HoldingLaw::Pareto { shape, scale } => shape > 0.0 && scale > 0.0 && shape.is_finite() && scale.is_finite(),
            HoldingLaw::Deterministic { period } => period > 0.0 && period.is_finite(),
        };
        if ok {
            Ok(())
        } else {
            Err(Error::validation(format!("holding law {self:?} needs positive finite parameters")))
        }
    }

    pub fn is_continuous(&self) -> bool {
        !matches!(self, HoldingLaw::Deterministic { .. })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            HoldingLaw::Exponential { rate } => Exp::new(rate).expect("validated rate").sample(rng),
            HoldingLaw::Pareto { shape, scale } => {
                // 1 - U lies in (0, 1]
                let u: f64 = 1.0 - rng.random::<f64>();
                scale * u.powf(-1.0 / shape)
            }
            HoldingLaw::Deterministic { period } => period,
        }
    }

    /// Jump count used to size the default window: the mean for exponential
    /// holding, the hard bound `floor(t / min holding)` otherwise.
    pub fn jump_bound(&self, t: f64) -> f64 {
        match *self {
            HoldingLaw::Exponential { rate } => rate * t,
            HoldingLaw::Pareto { scale, .. } => (t / scale).floor(),
            HoldingLaw::Deterministic { period } => (t / period).floor(),
        }
    }
}

/// Piecewise-constant particle path: `start` on `[0, t_1)`, then `positions[j]` from `t_{j+1}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ParticlePath {
    pub dim: usize,
    pub start: Site,
    pub jumps: Vec<(f64, Site)>,
}

impl ParticlePath {
    pub fn new(dim: usize, start: Site, jumps: Vec<(f64, Site)>) -> Result<Self> {
        let mut last = 0.0;
        for (t, _) in &jumps {
            if !(t.is_finite() && *t > last) {
                return Err(Error::validation(format!("particle jump times must increase strictly from 0; got {t} after {last}")));
            }
            last = *t;
        }
        Ok(ParticlePath { dim, start, jumps })
    }

    pub fn fixed(dim: usize) -> Self {
        ParticlePath { dim, start: Site::ORIGIN, jumps: Vec::new() }
    }

    /// A single jump from the origin to `e_1` at time `at`.
    pub fn one_jump(dim: usize, at: f64) -> Self {
        ParticlePath { dim, start: Site::ORIGIN, jumps: vec![(at, Site::unit(0, 1))] }
    }

    /// Alternates between the origin and `e_1` every `period` up to `horizon`.
    pub fn zigzag(dim: usize, period: f64, horizon: f64) -> Self {
        let jumps = (1..)
            .map(|j| j as f64 * period)
            .take_while(|&t| t < horizon)
            .enumerate()
            .map(|(j, t)| (t, if j % 2 == 0 { Site::unit(0, 1) } else { Site::ORIGIN }))
            .collect();
        ParticlePath { dim, start: Site::ORIGIN, jumps }
    }

    /// Lines `time x_1 ... x_d`; a line at time 0 sets the start (default: origin).
    pub fn parse(text: &str, dim: usize) -> Result<Self> {
        let mut start = Site::ORIGIN;
        let mut jumps = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != dim + 1 {
                return Err(Error::Parse(format!("line {}: expected time and {dim} coordinates", i + 1)));
            }
            let t: f64 = fields[0].parse().map_err(|_| Error::Parse(format!("line {}: bad time '{}'", i + 1, fields[0])))?;
            let coords = fields[1..]
                .iter()
                .map(|f| f.parse::<i64>().map_err(|_| Error::Parse(format!("line {}: bad coordinate '{f}'", i + 1))))
                .collect::<Result<Vec<_>>>()?;
            let site = Site::from_slice(&coords)?;
            if t == 0.0 && jumps.is_empty() {
                start = site;
            } else {
                jumps.push((t, site));
            }
        }
        Self::new(dim, start, jumps)
    }

    pub fn from_file(path: &Path, dim: usize) -> Result<Self> {
        Self::parse(&std::fs::read_to_string(path)?, dim)
    }

    pub fn extent(&self) -> i64 {
        self.jumps.iter().map(|(_, s)| s.sup_norm()).chain([self.start.sup_norm()]).max().unwrap_or(0)
    }

    /// `(time, position)` events with the start at time 0.
    fn events(&self) -> Vec<(f64, Site)> {
        std::iter::once((0.0, self.start)).chain(self.jumps.iter().copied()).collect()
    }
}

/// Particle given inline or by file in a configuration.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum ParticleSpec {
    Named(String),
    Inline(Vec<Vec<f64>>),
}

/// On-disk form of [`TrapSimConfig`].
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ConfigFile {
    dim: usize,
    pmf: String,
    holding: HoldingLaw,
    horizon: f64,
    window: Option<i64>,
    intensity: Option<f64>,
    reps: u64,
    seed: u64,
    particle: Option<ParticleSpec>,
    particle_file: Option<PathBuf>,
    curve_points: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrapSimConfig {
    pub dim: usize,
    #[serde(serialize_with = "serialize_pmf")]
    pub pmf: IncrementPmf,
    pub holding: HoldingLaw,
    pub horizon: f64,
    /// Sup-norm radius of the region where traps are placed.
    pub window: i64,
    /// Mean number of traps per site.
    pub intensity: f64,
    pub particle: ParticlePath,
    pub reps: u64,
    pub seed: u64,
    /// Number of grid times for the survival curve.
    pub curve_points: usize,
}

fn serialize_pmf<S: serde::Serializer>(pmf: &IncrementPmf, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(pmf.name())
}

impl TrapSimConfig {
    /// Config with the default window for the given horizon and unit intensity.
    pub fn new(pmf: IncrementPmf, holding: HoldingLaw, horizon: f64, particle: ParticlePath, reps: u64, seed: u64) -> Result<Self> {
        let window = default_window(&pmf, &holding, horizon, &particle);
        let config = TrapSimConfig {
            dim: pmf.dim(),
            pmf,
            holding,
            horizon,
            window,
            intensity: 1.0,
            particle,
            reps,
            seed,
            curve_points: 11,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn with_window(mut self, window: i64) -> Result<Self> {
        self.window = window;
        self.validate()?;
        Ok(self)
    }

    pub fn with_particle(mut self, particle: ParticlePath) -> Result<Self> {
        self.particle = particle;
        self.validate()?;
        Ok(self)
    }

    /// Reads a TOML configuration; relative particle files resolve against its directory.
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_toml(&text, path.parent())
    }

    pub fn from_toml(text: &str, base: Option<&Path>) -> Result<Self> {
        let file: ConfigFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let pmf = IncrementPmf::from_spec(&file.pmf)?;
        if pmf.dim() != file.dim {
            return Err(Error::Dimension(format!("config has dim = {} but pmf '{}' has d = {}", file.dim, file.pmf, pmf.dim())));
        }
        let particle = match (&file.particle, &file.particle_file) {
            (Some(_), Some(_)) => return Err(Error::validation("give either particle or particle_file, not both")),
            (None, Some(p)) => ParticlePath::from_file(&base.map(|b| b.join(p)).unwrap_or_else(|| p.clone()), file.dim)?,
            (Some(ParticleSpec::Named(name)), None) => named_particle(name, file.dim, file.horizon)?,
            (Some(ParticleSpec::Inline(rows)), None) => {
                let text: String = rows
                    .iter()
                    .map(|r| r.iter().map(f64::to_string).collect::<Vec<_>>().join(" ") + "\n")
                    .collect();
                ParticlePath::parse(&text, file.dim)?
            }
            (None, None) => ParticlePath::fixed(file.dim),
        };
        let mut config = TrapSimConfig::new(pmf, file.holding, file.horizon, particle, file.reps, file.seed)?;
        if let Some(w) = file.window {
            config.window = w;
        }
        config.intensity = file.intensity.unwrap_or(1.0);
        config.curve_points = file.curve_points.unwrap_or(11);
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        self.holding.validate()?;
        if self.particle.dim != self.dim || self.pmf.dim() != self.dim {
            return Err(Error::Dimension("pmf, particle and config dimensions differ".into()));
        }
        if !(self.horizon >= 0.0 && self.horizon.is_finite()) {
            return Err(Error::validation(format!("horizon {} must be finite and >= 0", self.horizon)));
        }
        if self.window < 1 {
            return Err(Error::validation(format!("window {} must be >= 1", self.window)));
        }
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(Error::validation(format!("intensity {} must be finite and >= 0", self.intensity)));
        }
        if self.reps == 0 {
            return Err(Error::validation("reps must be at least 1"));
        }
        Ok(())
    }

    fn fixed(&self) -> ParticlePath {
        ParticlePath::fixed(self.dim)
    }
}

/// `fixed`, `one-jump` (to `e_1` at mid-horizon) or `zigzag` (period 1/2).
pub fn named_particle(name: &str, dim: usize, horizon: f64) -> Result<ParticlePath> {
    match name {
        "fixed" | "static" => Ok(ParticlePath::fixed(dim)),
        "one-jump" => Ok(ParticlePath::one_jump(dim, horizon / 2.0)),
        "zigzag" => Ok(ParticlePath::zigzag(dim, 0.5, horizon)),
        _ => Err(Error::Parse(format!("unknown particle '{name}'; use fixed, one-jump or zigzag"))),
    }
}

/// `ceil(4 * jumps * r) + extent`, at least 1.
pub fn default_window(pmf: &IncrementPmf, holding: &HoldingLaw, horizon: f64, particle: &ParticlePath) -> i64 {
    let reach = (4.0 * holding.jump_bound(horizon).max(1.0) * pmf.support_radius() as f64).ceil() as i64;
    (reach + particle.extent()).max(1)
}

/// Jump events `(time, position)` of one trap from `y` up to `horizon`, starting with `(0, y)`.
fn trap_path<R: Rng + ?Sized>(y: Site, holding: &HoldingLaw, steps: &StepSampler, horizon: f64, rng: &mut R) -> Vec<(f64, Site)> {
    let mut path = vec![(0.0, y)];
    let (mut t, mut pos) = (0.0, y);
    loop {
        t += holding.sample(rng);
        if t > horizon {
            return path;
        }
        pos = pos + steps.sample(rng);
        path.push((t, pos));
    }
}

/// First time in `[0, horizon]` the two right-continuous paths share a site, and the tie count.
fn first_meeting(trap: &[(f64, Site)], particle: &[(f64, Site)], horizon: f64) -> (Option<f64>, u64) {
    let (mut i, mut j) = (0, 0);
    let mut ties = 0;
    loop {
        if trap[i].1 == particle[j].1 {
            let t = trap[i].0.max(particle[j].0);
            return ((t <= horizon).then_some(t), ties);
        }
        let next_trap = trap.get(i + 1).map(|e| e.0);
        let next_particle = particle.get(j + 1).map(|e| e.0).filter(|&t| t <= horizon);
        match (next_trap, next_particle) {
            (None, None) => return (None, ties),
            (Some(a), Some(b)) if a == b => {
                ties += 1;
                i += 1;
                j += 1;
            }
            (Some(a), Some(b)) if a < b => i += 1,
            (Some(_), None) => i += 1,
            _ => j += 1,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct SurvivalEstimate {
    pub estimate: f64,
    pub stderr: f64,
    pub reps: u64,
    pub method: &'static str,
}

#[derive(Clone, Debug, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    pub moving: f64,
    pub fixed: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TrapReport {
    pub config: TrapSimConfig,
    /// `S_t(X)`.
    pub moving: SurvivalEstimate,
    /// `S_t(0)` on the same trap realizations.
    pub fixed: SurvivalEstimate,
    /// Mean and standard error of `1{X survives} - 1{0 survives}`.
    pub paired_difference: f64,
    pub paired_stderr: f64,
    /// `S_t(X) <= S_t(0) + 3 sqrt(se_X^2 + se_0^2)`.
    pub pascal_ok: bool,
    /// Holding law is continuous.
    pub within_hypotheses: bool,
    pub curve: Vec<CurvePoint>,
    /// Killing traps that started in the outer quarter of the window.
    pub truncation_events: u64,
    pub default_window: i64,
    /// Window below the default size for this horizon.
    pub window_flagged: bool,
    pub tie_events: u64,
}

#[derive(Clone, Debug, Default)]
struct FieldTally {
    moving: Moments,
    fixed: Moments,
    diff: Moments,
    curve_moving: Vec<u64>,
    curve_fixed: Vec<u64>,
    truncation: u64,
    ties: u64,
}

impl Merge for FieldTally {
    fn merge(&mut self, other: Self) {
        self.moving.merge(other.moving);
        self.fixed.merge(other.fixed);
        self.diff.merge(other.diff);
        self.curve_moving.merge(other.curve_moving);
        self.curve_fixed.merge(other.curve_fixed);
        self.truncation += other.truncation;
        self.ties += other.ties;
    }
}

fn curve_times(config: &TrapSimConfig) -> Vec<f64> {
    let k = config.curve_points.max(1);
    if k == 1 {
        return vec![config.horizon];
    }
    (0..k).map(|i| config.horizon * i as f64 / (k - 1) as f64).collect()
}

fn band_start(window: i64) -> i64 {
    window - (window + 3) / 4
}

/// Direct simulation of the trap field against `X` and against the fixed origin.
pub fn simulate_trap_field(config: &TrapSimConfig) -> Result<TrapReport> {
    config.validate()?;
    let sites: Vec<Site> = window_sites(config.dim, config.window)?.collect();
    let poisson = (config.intensity > 0.0).then(|| Poisson::new(config.intensity).expect("validated intensity"));
    let steps = config.pmf.sampler();
    let moving = config.particle.events();
    let fixed = config.fixed().events();
    let times = curve_times(config);
    let band = band_start(config.window);
    let init = || FieldTally {
        curve_moving: vec![0; times.len()],
        curve_fixed: vec![0; times.len()],
        ..Default::default()
    };

    let tally = run_replicas(config.reps, init, |acc, r| {
        let mut rng = replica_rng(config.seed, r);
        let (mut kill_moving, mut kill_fixed) = (f64::INFINITY, f64::INFINITY);
        if let Some(poisson) = &poisson {
            for &y in &sites {
                let count = poisson.sample(&mut rng) as u64;
                for _ in 0..count {
                    let path = trap_path(y, &config.holding, &steps, config.horizon, &mut rng);
                    let (a, ta) = first_meeting(&path, &moving, config.horizon);
                    let (b, tb) = first_meeting(&path, &fixed, config.horizon);
                    acc.ties += ta + tb;
                    if (a.is_some() || b.is_some()) && y.sup_norm() > band {
                        acc.truncation += 1;
                    }
                    kill_moving = kill_moving.min(a.unwrap_or(f64::INFINITY));
                    kill_fixed = kill_fixed.min(b.unwrap_or(f64::INFINITY));
                }
            }
        }
        for (k, &t) in times.iter().enumerate() {
            acc.curve_moving[k] += u64::from(kill_moving > t);
            acc.curve_fixed[k] += u64::from(kill_fixed > t);
        }
        let (sm, sf) = (f64::from(u8::from(kill_moving.is_infinite())), f64::from(u8::from(kill_fixed.is_infinite())));
        acc.moving.push(sm);
        acc.fixed.push(sf);
        acc.diff.push(sm - sf);
        Ok(())
    })?;

    let estimate = |m: &Moments| SurvivalEstimate { estimate: m.mean, stderr: m.stderr(), reps: m.count, method: "direct-field" };
    let (moving_est, fixed_est) = (estimate(&tally.moving), estimate(&tally.fixed));
    let combined = (moving_est.stderr.powi(2) + fixed_est.stderr.powi(2)).sqrt();
    let reps = config.reps as f64;
    let default = default_window(&config.pmf, &config.holding, config.horizon, &config.particle);
    Ok(TrapReport {
        pascal_ok: moving_est.estimate <= fixed_est.estimate + 3.0 * combined,
        moving: moving_est,
        fixed: fixed_est,
        paired_difference: tally.diff.mean,
        paired_stderr: tally.diff.stderr(),
        within_hypotheses: config.holding.is_continuous(),
        curve: times
            .iter()
            .enumerate()
            .map(|(k, &t)| CurvePoint {
                t,
                moving: tally.curve_moving[k] as f64 / reps,
                fixed: tally.curve_fixed[k] as f64 / reps,
            })
            .collect(),
        truncation_events: tally.truncation,
        default_window: default,
        window_flagged: config.window < default,
        tie_events: tally.ties,
        config: config.clone(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub moving: SurvivalEstimate,
    pub fixed: SurvivalEstimate,
    /// `sum_y h_X(y)` and `sum_y h_0(y)`.
    pub hit_sum_moving: f64,
    pub hit_sum_fixed: f64,
    pub hit_sum_stderr_moving: f64,
    pub hit_sum_stderr_fixed: f64,
    pub reps_per_site: u64,
    pub sites: usize,
}

/// `exp(-intensity * sum_y h(y))` with `h(y)` the chance a single trap from `y` meets the particle by the horizon.
///
/// Each site runs `config.reps` single traps, compared against `X` and the fixed origin on
/// the same realization. The standard error follows from the delta method.
pub fn survival_via_identity(config: &TrapSimConfig) -> Result<IdentityReport> {
    config.validate()?;
    let sites: Vec<Site> = window_sites(config.dim, config.window)?.collect();
    let steps = config.pmf.sampler();
    let moving = config.particle.events();
    let fixed = config.fixed().events();
    let seed = config.seed.wrapping_add(IDENTITY_SEED_OFFSET);
    let reps = config.reps;

    let per_site: Vec<(u64, u64)> = sites
        .par_iter()
        .enumerate()
        .map(|(k, &y)| {
            let mut rng = replica_rng(seed, k as u64);
            let (mut hm, mut hf) = (0, 0);
            for _ in 0..reps {
                let path = trap_path(y, &config.holding, &steps, config.horizon, &mut rng);
                hm += u64::from(first_meeting(&path, &moving, config.horizon).0.is_some());
                hf += u64::from(first_meeting(&path, &fixed, config.horizon).0.is_some());
            }
            (hm, hf)
        })
        .collect();

    let n = reps as f64;
    let summarize = |pick: fn(&(u64, u64)) -> u64| {
        let (mut sum, mut var) = (0.0, 0.0);
        for c in &per_site {
            let h = pick(c) as f64 / n;
            sum += h;
            var += h * (1.0 - h) / n;
        }
        (sum, var.sqrt())
    };
    let (sm, se_m) = summarize(|c| c.0);
    let (sf, se_f) = summarize(|c| c.1);
    let estimate = |sum: f64, se: f64| {
        let s = (-config.intensity * sum).exp();
        SurvivalEstimate { estimate: s, stderr: s * config.intensity * se, reps, method: "exp-identity" }
    };
    Ok(IdentityReport {
        moving: estimate(sm, se_m),
        fixed: estimate(sf, se_f),
        hit_sum_moving: sm,
        hit_sum_fixed: sf,
        hit_sum_stderr_moving: se_m,
        hit_sum_stderr_fixed: se_f,
        reps_per_site: reps,
        sites: sites.len(),
    })
}
