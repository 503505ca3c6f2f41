//! Exact `n`-step transition kernels by iterated convolution.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::One;

use crate::error::{Error, Result};
use crate::lattice::{Grid, Site};
use crate::numeric::{Scalar, Value, DEFAULT_CELL_BUDGET};

use super::pmf::IncrementPmf;

/// `p_n` on a hypercube window; `value / scale` is the probability.
///
/// `n = -1` is the zero kernel.
#[derive(Clone, Debug)]
pub struct StepKernel<T> {
    n: i64,
    scale: T,
    grid: Grid<T>,
}

impl<T: Scalar> StepKernel<T> {
    pub fn n(&self) -> i64 {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.grid.dim()
    }

    pub fn scale(&self) -> &T {
        &self.scale
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    /// Scaled numerator at `x`; zero outside the window.
    pub fn numerator(&self, x: &Site) -> T {
        self.grid.value(x)
    }

    pub fn value(&self, x: &Site) -> Value {
        T::to_value(&self.grid.value(x), &self.scale)
    }

    pub fn total(&self) -> Value {
        T::to_value(&self.grid.total(), &self.scale)
    }

    pub fn support(&self) -> impl Iterator<Item = (Site, Value)> + '_ {
        self.grid.nonzero().map(move |(s, v)| (s, T::to_value(v, &self.scale)))
    }
}

impl StepKernel<BigInt> {
    pub fn probability(&self, x: &Site) -> BigRational {
        BigRational::new(self.grid.value(x), self.scale.clone())
    }
}

/// Produces `p_{-1}, p_0, p_1, ...` on a fixed window.
pub struct KernelStepper<T> {
    weights: Vec<(Site, T)>,
    step_scale: T,
    current: StepKernel<T>,
}

impl<T: Scalar> KernelStepper<T> {
    /// Starts at `p_{-1}` on the window of the given radius.
    pub fn new(pmf: &IncrementPmf, radius: i64, budget: usize) -> Result<Self> {
        let grid = Grid::zeros(pmf.dim(), radius, budget)?;
        Ok(KernelStepper {
            weights: pmf.scalar_weights(),
            step_scale: T::step_scale(pmf.denominator()),
            current: StepKernel { n: -1, scale: T::from_u64(1), grid },
        })
    }

    pub fn current(&self) -> &StepKernel<T> {
        &self.current
    }

    /// Moves to the next kernel and returns it.
    pub fn advance(&mut self) -> &StepKernel<T> {
        let next = if self.current.n < 0 {
            let mut grid = self.current.grid.clone();
            grid.set(&Site::ORIGIN, T::from_u64(1)).expect("origin lies in every window");
            StepKernel { n: 0, scale: T::from_u64(1), grid }
        } else {
            StepKernel {
                n: self.current.n + 1,
                scale: self.current.scale.mul(&self.step_scale),
                grid: self.current.grid.convolve(&self.weights),
            }
        };
        self.current = next;
        &self.current
    }
}

/// All kernels `p_{-1}, ..., p_{max_n}` on the window of radius `max(max_n, 0) * support_radius`.
pub fn kernel_series<T: Scalar>(pmf: &IncrementPmf, max_n: i64, budget: usize) -> Result<Vec<StepKernel<T>>> {
    let radius = max_n.max(0) * pmf.support_radius();
    kernel_series_in(pmf, max_n, radius, budget)
}

/// All kernels `p_{-1}, ..., p_{max_n}` on a window of the given radius.
pub fn kernel_series_in<T: Scalar>(
    pmf: &IncrementPmf,
    max_n: i64,
    radius: i64,
    budget: usize,
) -> Result<Vec<StepKernel<T>>> {
    if max_n < -1 {
        return Err(Error::validation(format!("kernel index {max_n} below -1")));
    }
    let mut stepper = KernelStepper::new(pmf, radius, budget)?;
    let mut out = vec![stepper.current().clone()];
    for _ in -1..max_n {
        out.push(stepper.advance().clone());
    }
    Ok(out)
}

/// Exact `p_n` on the window of radius `n * support_radius`.
pub fn n_step_kernel(pmf: &IncrementPmf, n: i64) -> Result<StepKernel<BigInt>> {
    n_step_kernel_with(pmf, n, DEFAULT_CELL_BUDGET)
}

pub fn n_step_kernel_with<T: Scalar>(pmf: &IncrementPmf, n: i64, budget: usize) -> Result<StepKernel<T>> {
    if n < -1 {
        return Err(Error::validation(format!("kernel index {n} below -1")));
    }
    let mut stepper = KernelStepper::new(pmf, n.max(0) * pmf.support_radius(), budget)?;
    for _ in -1..n {
        stepper.advance();
    }
    Ok(stepper.current)
}

/// `p_n(x) + p_{n+1}(x)`, exact.
pub fn paired_kernel(pmf: &IncrementPmf, n: i64, x: &Site) -> Result<BigRational> {
    let series = kernel_series::<BigInt>(pmf, n + 1, DEFAULT_CELL_BUDGET)?;
    let at = |m: i64| series[(m + 1) as usize].probability(x);
    Ok(at(n) + at(n + 1))
}

/// Convolution of two exact kernels, `(p_m * p_n)(x) = sum_y p_m(y) p_n(x - y)`.
pub fn compose(a: &StepKernel<BigInt>, b: &StepKernel<BigInt>) -> BTreeKernel {
    let mut out = std::collections::BTreeMap::new();
    for (y, va) in a.grid.nonzero() {
        for (z, vb) in b.grid.nonzero() {
            *out.entry(y + z).or_insert_with(|| BigRational::from_integer(0.into())) +=
                BigRational::new(va * vb, &a.scale * &b.scale);
        }
    }
    out
}

pub type BTreeKernel = std::collections::BTreeMap<Site, BigRational>;

/// Checks normalization (`1` for `n >= 0`, `0` for `n = -1`) and symmetry.
pub fn check_kernel(k: &StepKernel<BigInt>) -> Result<()> {
    let total = BigRational::new(k.grid.total(), k.scale.clone());
    let expected = if k.n >= 0 { BigRational::one() } else { BigRational::from_integer(0.into()) };
    if total != expected {
        return Err(Error::Invariant(format!("p_{} sums to {total}", k.n)));
    }
    for (x, v) in k.grid.nonzero() {
        if k.grid.value(&-x) != *v {
            return Err(Error::Invariant(format!(
                "p_{} asymmetric at {}",
                k.n,
                x.display(k.dim())
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn s1(x: i64) -> Site {
        Site::unit(0, x)
    }

    /// Path-enumeration oracle: probability that an n-step walk from 0 ends at x.
    fn enumerate_endpoint(pmf: &IncrementPmf, n: usize) -> BTreeKernel {
        let steps: Vec<(Site, BigRational)> = pmf.support().map(|(s, w)| (*s, w.clone())).collect();
        let mut out = BTreeKernel::new();
        let total = steps.len().pow(n as u32);
        for mut code in 0..total {
            let mut pos = Site::ORIGIN;
            let mut w = BigRational::one();
            for _ in 0..n {
                let (s, p) = &steps[code % steps.len()];
                code /= steps.len();
                pos = pos + *s;
                w *= p;
            }
            *out.entry(pos).or_insert_with(|| q(0, 1)) += w;
        }
        out
    }

    #[test]
    fn srw_two_steps() {
        let pmf = IncrementPmf::simple(1).unwrap();
        let k = n_step_kernel(&pmf, 2).unwrap();
        assert_eq!(k.probability(&s1(-2)), q(1, 4));
        assert_eq!(k.probability(&s1(0)), q(1, 2));
        assert_eq!(k.probability(&s1(2)), q(1, 4));
        assert_eq!(k.probability(&s1(1)), q(0, 1));
    }

    #[test]
    fn srw_three_steps_at_one() {
        let pmf = IncrementPmf::simple(1).unwrap();
        assert_eq!(n_step_kernel(&pmf, 3).unwrap().probability(&s1(1)), q(3, 8));
    }

    #[test]
    fn zero_steps_is_point_mass_and_minus_one_is_zero() {
        for pmf in [IncrementPmf::lazy(2).unwrap(), IncrementPmf::uniform3()] {
            let k0 = n_step_kernel(&pmf, 0).unwrap();
            assert_eq!(k0.probability(&Site::ORIGIN), q(1, 1));
            check_kernel(&k0).unwrap();
            let km = n_step_kernel(&pmf, -1).unwrap();
            assert_eq!(km.total(), Value::Exact(q(0, 1)));
            check_kernel(&km).unwrap();
        }
        assert!(n_step_kernel(&IncrementPmf::uniform3(), -2).is_err());
    }

    #[test]
    fn matches_path_enumeration() {
        for (pmf, n) in [
            (IncrementPmf::simple(1).unwrap(), 6),
            (IncrementPmf::simple(2).unwrap(), 5),
            (IncrementPmf::uniform3(), 5),
            (IncrementPmf::lazy(2).unwrap(), 4),
        ] {
            let k = n_step_kernel(&pmf, n).unwrap();
            let oracle = enumerate_endpoint(&pmf, n as usize);
            for (x, p) in &oracle {
                assert_eq!(&k.probability(x), p, "{} n={n} x={x:?}", pmf.name());
            }
            assert_eq!(k.support().count(), oracle.len());
        }
    }

    #[test]
    fn paired_kernel_examples() {
        let pmf = IncrementPmf::simple(1).unwrap();
        assert_eq!(paired_kernel(&pmf, -1, &Site::ORIGIN).unwrap(), q(1, 1));
        assert_eq!(paired_kernel(&pmf, 1, &Site::ORIGIN).unwrap(), q(1, 2));
        assert_eq!(paired_kernel(&pmf, 1, &s1(1)).unwrap(), q(1, 2));
    }

    #[test]
    fn support_radius_bound() {
        let pmf = IncrementPmf::cube(2).unwrap();
        let k = n_step_kernel(&pmf, 4).unwrap();
        assert!(k.support().all(|(x, _)| x.sup_norm() <= 4));
    }

    #[test]
    fn resource_error_on_budget() {
        let pmf = IncrementPmf::simple(4).unwrap();
        let err = n_step_kernel_with::<f64>(&pmf, 30, 1000).unwrap_err();
        assert!(matches!(err, Error::Resource(_)));
    }
}
