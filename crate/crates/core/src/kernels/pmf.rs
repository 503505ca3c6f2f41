//! Finite-support symmetric increment laws.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::lattice::{Site, MAX_DIM};
use crate::numeric::Scalar;

/// Symmetric probability mass function on `Z^d` with exact rational weights.
#[derive(Clone, Debug, PartialEq)]
pub struct IncrementPmf {
    dim: usize,
    weights: BTreeMap<Site, BigRational>,
    support_radius: i64,
    denominator: BigInt,
    name: String,
}

impl IncrementPmf {
    /// Builds a pmf, rejecting negative weights, duplicates, asymmetry and bad normalization.
    /// Zero weights are dropped from the stored support.
    pub fn new<I>(dim: usize, entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Site, BigRational)>,
    {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Dimension(format!("lattice dimension {dim} outside 1..={MAX_DIM}")));
        }
        let mut weights = BTreeMap::new();
        for (site, w) in entries {
            if site.0[dim..].iter().any(|&c| c != 0) {
                return Err(Error::validation_at(
                    site.display(MAX_DIM),
                    format!("site has more than {dim} coordinates"),
                ));
            }
            if w.is_negative() {
                return Err(Error::validation_at(site.display(dim), format!("negative weight {w}")));
            }
            if w.is_zero() {
                continue;
            }
            if weights.insert(site, w).is_some() {
                return Err(Error::validation_at(site.display(dim), "duplicate support point"));
            }
        }
        if weights.is_empty() {
            return Err(Error::validation("empty support"));
        }
        for (site, w) in &weights {
            let mirror = weights.get(&-*site);
            if mirror != Some(w) {
                return Err(Error::validation_at(
                    site.display(dim),
                    format!(
                        "asymmetric: p(x) = {w} but p(-x) = {}",
                        mirror.cloned().unwrap_or_else(BigRational::zero)
                    ),
                ));
            }
        }
        let total: BigRational = weights.values().sum();
        if !total.is_one() {
            let last = weights.keys().next_back().copied().unwrap_or_default();
            return Err(Error::validation_at(
                last.display(dim),
                format!("weights sum to {total}, not 1"),
            ));
        }
        let support_radius = weights.keys().map(Site::sup_norm).max().unwrap_or(0);
        let denominator = weights.values().fold(BigInt::one(), |acc, w| acc.lcm(w.denom()));
        Ok(IncrementPmf { dim, weights, support_radius, denominator, name: "custom".into() })
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// Simple symmetric random walk: mass `1/(2d)` on each `±e_i`.
    pub fn simple(dim: usize) -> Result<Self> {
        let w = BigRational::new(BigInt::one(), BigInt::from(2 * dim));
        let entries = (0..dim.min(MAX_DIM))
            .flat_map(|i| [(Site::unit(i, 1), w.clone()), (Site::unit(i, -1), w.clone())]);
        Ok(Self::new(dim, entries)?.with_name(format!("srw:{dim}")))
    }

    /// Lazy walk: mass `1/2` at the origin and `1/(4d)` on each `±e_i`.
    pub fn lazy(dim: usize) -> Result<Self> {
        let w = BigRational::new(BigInt::one(), BigInt::from(4 * dim));
        let entries = (0..dim.min(MAX_DIM))
            .flat_map(|i| [(Site::unit(i, 1), w.clone()), (Site::unit(i, -1), w.clone())])
            .chain(std::iter::once((Site::ORIGIN, BigRational::new(1.into(), 2.into()))));
        Ok(Self::new(dim, entries)?.with_name(format!("lazy:{dim}")))
    }

    /// Uniform law on `{-1, 0, 1}` in one dimension.
    pub fn uniform3() -> Self {
        let w = BigRational::new(BigInt::one(), BigInt::from(3));
        Self::new(1, [-1, 0, 1].map(|x| (Site::unit(0, x), w.clone())))
            .expect("uniform3 is a valid pmf")
            .with_name("uniform3:1")
    }

    /// Uniform law on the cube `{-1, 0, 1}^d`.
    pub fn cube(dim: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Dimension(format!("lattice dimension {dim} outside 1..={MAX_DIM}")));
        }
        let count = 3usize.pow(dim as u32);
        let w = BigRational::new(BigInt::one(), BigInt::from(count));
        let entries = (0..count).map(|mut code| {
            let mut c = [0i64; MAX_DIM];
            for slot in c.iter_mut().take(dim) {
                *slot = (code % 3) as i64 - 1;
                code /= 3;
            }
            (Site(c), w.clone())
        });
        Ok(Self::new(dim, entries)?.with_name(format!("cube:{dim}")))
    }

    /// Point mass at the origin.
    pub fn point_mass(dim: usize) -> Result<Self> {
        Ok(Self::new(dim, [(Site::ORIGIN, BigRational::one())])?.with_name(format!("delta:{dim}")))
    }

    /// Resolves `srw:d`, `lazy:d`, `uniform3` (or `uniform3:1`), `cube:d`, `delta:d` or `file:PATH`.
    pub fn from_spec(spec: &str) -> Result<Self> {
        if spec == "uniform3" {
            return Ok(Self::uniform3());
        }
        let (kind, arg) = spec
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("pmf spec '{spec}' is not of the form kind:arg")))?;
        if kind == "file" {
            return Self::from_file(Path::new(arg));
        }
        let dim: usize = arg
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension '{arg}' in pmf spec '{spec}'")))?;
        match kind {
            "srw" => Self::simple(dim),
            "lazy" => Self::lazy(dim),
            "cube" => Self::cube(dim),
            "delta" => Self::point_mass(dim),
            "uniform3" if dim == 1 => Ok(Self::uniform3()),
            "uniform3" => Err(Error::Dimension("uniform3 is defined for d = 1 only".into())),
            _ => Err(Error::Parse(format!("unknown pmf kind '{kind}'"))),
        }
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(Self::parse(&text)?.with_name(format!("file:{}", path.display())))
    }

    /// Parses lines `x_1 ... x_d num/den`. Blank lines and `#` comments are ignored.
    pub fn parse(text: &str) -> Result<Self> {
        let mut dim = None;
        let mut entries = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let d = tokens.len() - 1;
            if d == 0 {
                return Err(Error::Parse(format!("line {}: missing coordinates", lineno + 1)));
            }
            match dim {
                None => dim = Some(d),
                Some(prev) if prev != d => {
                    return Err(Error::Parse(format!(
                        "line {}: expected {prev} coordinates, found {d}",
                        lineno + 1
                    )))
                }
                _ => {}
            }
            let coords = tokens[..d]
                .iter()
                .map(|t| t.parse::<i64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?;
            let weight = parse_rational(tokens[d])
                .ok_or_else(|| Error::Parse(format!("line {}: bad weight '{}'", lineno + 1, tokens[d])))?;
            entries.push((Site::from_slice(&coords)?, weight));
        }
        let dim = dim.ok_or_else(|| Error::Parse("empty pmf file".into()))?;
        Self::new(dim, entries)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn support_radius(&self) -> i64 {
        self.support_radius
    }

    /// Least common denominator of all weights.
    pub fn denominator(&self) -> &BigInt {
        &self.denominator
    }

    pub fn weight(&self, x: &Site) -> BigRational {
        self.weights.get(x).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn support(&self) -> impl Iterator<Item = (&Site, &BigRational)> {
        self.weights.iter()
    }

    pub fn support_len(&self) -> usize {
        self.weights.len()
    }

    /// Weights in the representation used by scalar backend `T`.
    pub fn scalar_weights<T: Scalar>(&self) -> Vec<(Site, T)> {
        self.weights
            .iter()
            .map(|(s, w)| (*s, T::from_probability(w, &self.denominator)))
            .collect()
    }

    /// Weight at the integer `k` for a one-dimensional pmf.
    pub(crate) fn weight_1d(&self, k: i64) -> BigRational {
        self.weight(&Site::unit(0, k))
    }

    pub fn sampler(&self) -> StepSampler {
        let (sites, probs): (Vec<Site>, Vec<f64>) = self
            .weights
            .iter()
            .map(|(s, w)| (*s, w.to_f64().unwrap_or(0.0)))
            .unzip();
        StepSampler { sites, index: WeightedIndex::new(probs).expect("positive finite weights") }
    }

    /// Serializable listing of the support.
    pub fn describe(&self) -> PmfDescription {
        PmfDescription {
            name: self.name.clone(),
            dim: self.dim,
            support: self
                .weights
                .iter()
                .map(|(s, w)| (s.coords(self.dim).to_vec(), w.to_string()))
                .collect(),
        }
    }
}

impl fmt::Display for IncrementPmf {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.name)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PmfDescription {
    pub name: String,
    pub dim: usize,
    pub support: Vec<(Vec<i64>, String)>,
}

fn parse_rational(tok: &str) -> Option<BigRational> {
    match tok.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.parse().ok()?;
            let d: BigInt = d.parse().ok()?;
            (!Zero::is_zero(&d)).then(|| BigRational::new(n, d))
        }
        None => tok.parse::<BigInt>().ok().map(BigRational::from_integer),
    }
}

/// Draws increments from a pmf.
#[derive(Clone, Debug)]
pub struct StepSampler {
    sites: Vec<Site>,
    index: WeightedIndex<f64>,
}

impl StepSampler {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Site {
        self.sites[self.index.sample(rng)]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum ClassTag {
    SimpleSymmetric,
    ClassI,
    LazyHalf,
    Unclassified,
}

/// Classification against the three hypotheses under which range monotonicity is proved.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WalkClass {
    pub dim: usize,
    /// Most specific tag under the precedence `SimpleSymmetric > ClassI > LazyHalf`.
    pub tag: ClassTag,
    /// Every satisfied tag, in precedence order.
    pub satisfied: Vec<ClassTag>,
}

impl WalkClass {
    /// Whether one of the proved classes covers this law.
    pub fn is_proved(&self) -> bool {
        self.tag != ClassTag::Unclassified
    }
}

pub fn validate_class(pmf: &IncrementPmf) -> WalkClass {
    let mut satisfied = Vec::new();
    if is_simple_symmetric(pmf) {
        satisfied.push(ClassTag::SimpleSymmetric);
    }
    if pmf.dim == 1 && is_class_one(pmf) {
        satisfied.push(ClassTag::ClassI);
    }
    if pmf.weight(&Site::ORIGIN) >= BigRational::new(1.into(), 2.into()) {
        satisfied.push(ClassTag::LazyHalf);
    }
    let tag = satisfied.first().copied().unwrap_or(ClassTag::Unclassified);
    WalkClass { dim: pmf.dim, tag, satisfied }
}

fn is_simple_symmetric(pmf: &IncrementPmf) -> bool {
    let w = BigRational::new(BigInt::one(), BigInt::from(2 * pmf.dim));
    pmf.weights.len() == 2 * pmf.dim
        && pmf.weights.iter().all(|(s, p)| s.l1_norm() == 1 && *p == w)
}

/// `p(k) >= p(k+1)` for all `k >= 1` and `p(0) >= p(3)`.
fn is_class_one(pmf: &IncrementPmf) -> bool {
    let tail_monotone =
        (1..=pmf.support_radius).all(|k| pmf.weight_1d(k) >= pmf.weight_1d(k + 1));
    tail_monotone && pmf.weight_1d(0) >= pmf.weight_1d(3)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn site1(x: i64) -> Site {
        Site::unit(0, x)
    }

    #[test]
    fn srw_one_dim_is_simple_and_class_one() {
        let c = validate_class(&IncrementPmf::simple(1).unwrap());
        assert_eq!(c.tag, ClassTag::SimpleSymmetric);
        assert_eq!(c.satisfied, vec![ClassTag::SimpleSymmetric, ClassTag::ClassI]);
    }

    #[test]
    fn uniform3_is_class_one() {
        let c = validate_class(&IncrementPmf::uniform3());
        assert_eq!(c.tag, ClassTag::ClassI);
        assert_eq!(c.satisfied, vec![ClassTag::ClassI]);
    }

    #[test]
    fn lazy_two_dim_meets_bound_exactly() {
        let pmf = IncrementPmf::lazy(2).unwrap();
        assert_eq!(pmf.weight(&Site::ORIGIN), q(1, 2));
        assert_eq!(pmf.weight(&Site::unit(1, -1)), q(1, 8));
        let c = validate_class(&pmf);
        assert_eq!(c.tag, ClassTag::LazyHalf);
        assert_eq!(c.satisfied, vec![ClassTag::LazyHalf]);
    }

    #[test]
    fn srw_in_higher_dim_is_not_class_one() {
        let c = validate_class(&IncrementPmf::simple(3).unwrap());
        assert_eq!(c.satisfied, vec![ClassTag::SimpleSymmetric]);
    }

    #[test]
    fn unclassified_law() {
        // p(1) < p(2): the tail is not monotone, and p(0) < 1/2.
        let pmf = IncrementPmf::new(
            1,
            [(site1(1), q(1, 10)), (site1(-1), q(1, 10)), (site1(2), q(2, 5)), (site1(-2), q(2, 5))],
        )
        .unwrap();
        assert_eq!(validate_class(&pmf).tag, ClassTag::Unclassified);
    }

    #[test]
    fn class_one_needs_p0_at_least_p3() {
        let pmf = IncrementPmf::new(
            1,
            [1, 2, 3].into_iter().flat_map(|k| [(site1(k), q(1, 6)), (site1(-k), q(1, 6))]),
        )
        .unwrap();
        assert!(!validate_class(&pmf).satisfied.contains(&ClassTag::ClassI));
    }

    #[test]
    fn rejects_asymmetric_with_site() {
        let err = IncrementPmf::new(1, [(site1(1), q(1, 2)), (site1(0), q(1, 2))]).unwrap_err();
        match err {
            Error::Validation { site: Some(s), reason } => {
                assert_eq!(s, "(1)");
                assert!(reason.contains("asymmetric"));
            }
            e => panic!("unexpected {e:?}"),
        }
    }

    #[test]
    fn rejects_non_normalized() {
        let err = IncrementPmf::new(1, [(site1(1), q(1, 3)), (site1(-1), q(1, 3))]).unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
        assert!(err.to_string().contains("sum to 2/3"));
    }

    #[test]
    fn parses_text_format() {
        let pmf = IncrementPmf::parse("# lazy\n0 0 1/2\n1 0 1/8\n-1 0 1/8\n0 1 1/8\n0 -1 1/8\n").unwrap();
        assert_eq!(pmf.dim(), 2);
        assert_eq!(pmf.denominator(), &BigInt::from(8));
        assert_eq!(validate_class(&pmf).tag, ClassTag::LazyHalf);
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(IncrementPmf::parse("1 1/2\n0 0 1/2\n"), Err(Error::Parse(_))));
        assert!(matches!(IncrementPmf::parse(""), Err(Error::Parse(_))));
        assert!(matches!(IncrementPmf::parse("1 x\n"), Err(Error::Parse(_))));
    }

    #[test]
    fn builtin_specs() {
        assert_eq!(IncrementPmf::from_spec("srw:2").unwrap().support_len(), 4);
        assert_eq!(IncrementPmf::from_spec("cube:2").unwrap().support_len(), 9);
        assert_eq!(IncrementPmf::from_spec("uniform3:1").unwrap().support_len(), 3);
        assert_eq!(IncrementPmf::from_spec("uniform3").unwrap().support_len(), 3);
        assert!(IncrementPmf::from_spec("uniform3:2").is_err());
        assert!(IncrementPmf::from_spec("srw:5").is_err());
        assert!(IncrementPmf::from_spec("bogus").is_err());
    }
}
