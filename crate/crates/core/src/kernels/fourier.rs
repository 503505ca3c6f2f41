//! Transition kernels on the discrete torus via powers of the characteristic function.
//!
//! With frequencies `k_j = 2*pi*j/L`, `p_n(x) = L^{-d} sum_j exp(-i k_j . x) psi(k_j)^n`,
//! which equals the lattice kernel when `L > 2 n r + 1` (no wrap-around).

use std::f64::consts::PI;

use num_bigint::BigInt;
use num_traits::ToPrimitive;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::lattice::{Site, MAX_DIM};

use super::kernel::n_step_kernel;
use super::pmf::IncrementPmf;

/// `p_n` sampled on the torus `(Z / L Z)^d`.
#[derive(Clone, Debug)]
pub struct TorusKernel {
    dim: usize,
    size: usize,
    values: Vec<f64>,
}

impl TorusKernel {
    pub fn size(&self) -> usize {
        self.size
    }

    /// Value at the torus class of `x`.
    pub fn value(&self, x: &Site) -> f64 {
        let l = self.size as i64;
        let mut idx = 0usize;
        for i in (0..self.dim).rev() {
            idx = idx * self.size + x.0[i].rem_euclid(l) as usize;
        }
        self.values[idx]
    }

    /// Torus cells with their centered lattice representatives.
    pub fn sites(&self) -> impl Iterator<Item = Site> + '_ {
        let l = self.size;
        (0..self.values.len()).map(move |mut idx| {
            let mut c = [0i64; MAX_DIM];
            for slot in c.iter_mut().take(self.dim) {
                let j = idx % l;
                idx /= l;
                *slot = if j <= l / 2 { j as i64 } else { j as i64 - l as i64 };
            }
            Site(c)
        })
    }
}

/// Characteristic function `psi(k) = sum_y p(y) cos(k . y)` (real for symmetric laws).
pub fn characteristic(pmf: &IncrementPmf, k: &[f64]) -> f64 {
    pmf.support()
        .map(|(y, w)| {
            let phase: f64 = y.coords(pmf.dim()).iter().zip(k).map(|(&c, &ki)| c as f64 * ki).sum();
            w.to_f64().unwrap_or(0.0) * phase.cos()
        })
        .sum()
}

pub fn torus_kernel(pmf: &IncrementPmf, n: u32, size: usize) -> Result<TorusKernel> {
    let required = 2 * n as usize * pmf.support_radius() as usize + 1;
    if size <= required {
        return Err(Error::Aliasing { size, required });
    }
    let dim = pmf.dim();
    let total = size
        .checked_pow(dim as u32)
        .filter(|&t| t <= 1 << 26)
        .ok_or_else(|| Error::Resource(format!("torus of side {size} in d={dim} is too large")))?;

    let mut data: Vec<Complex<f64>> = (0..total)
        .map(|mut idx| {
            let mut k = [0.0; MAX_DIM];
            for slot in k.iter_mut().take(dim) {
                *slot = 2.0 * PI * (idx % size) as f64 / size as f64;
                idx /= size;
            }
            Complex::new(characteristic(pmf, &k[..dim]).powi(n as i32), 0.0)
        })
        .collect();

    // forward transform along each axis gives sum_j exp(-2 pi i j x / L) psi^n
    let fft = FftPlanner::new().plan_fft_forward(size);
    let mut line = vec![Complex::new(0.0, 0.0); size];
    for axis in 0..dim {
        let stride = size.pow(axis as u32);
        for base in 0..total {
            if !(base / stride).is_multiple_of(size) {
                continue;
            }
            for (j, slot) in line.iter_mut().enumerate() {
                *slot = data[base + j * stride];
            }
            fft.process(&mut line);
            for (j, v) in line.iter().enumerate() {
                data[base + j * stride] = *v;
            }
        }
    }
    let norm = total as f64;
    Ok(TorusKernel { dim, size, values: data.iter().map(|c| c.re / norm).collect() })
}

/// Largest absolute gap between the torus evaluation and the exact convolution kernel.
pub fn fourier_crosscheck(pmf: &IncrementPmf, n: u32, size: usize) -> Result<f64> {
    let torus = torus_kernel(pmf, n, size)?;
    let exact = n_step_kernel(pmf, n as i64)?;
    let scale = exact.scale().clone();
    let to_f64 = |v: BigInt| num_rational::BigRational::new(v, scale.clone()).to_f64().unwrap_or(f64::NAN);
    Ok(torus
        .sites()
        .map(|x| (torus.value(&x) - to_f64(exact.numerator(&x))).abs())
        .fold(0.0, f64::max))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn srw_one_dim_agrees() {
        let err = fourier_crosscheck(&IncrementPmf::simple(1).unwrap(), 6, 31).unwrap();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn srw_three_dim_agrees() {
        let err = fourier_crosscheck(&IncrementPmf::simple(3).unwrap(), 8, 19).unwrap();
        assert!(err < 1e-10, "{err}");
    }

    #[test]
    fn odd_steps_vanish_at_origin() {
        let t = torus_kernel(&IncrementPmf::simple(2).unwrap(), 5, 13).unwrap();
        assert!(t.value(&Site::ORIGIN).abs() < 1e-15);
    }

    #[test]
    fn lazy_law_agrees() {
        let err = fourier_crosscheck(&IncrementPmf::lazy(2).unwrap(), 7, 17).unwrap();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn small_torus_is_rejected() {
        let err = torus_kernel(&IncrementPmf::simple(1).unwrap(), 6, 13).unwrap_err();
        assert!(matches!(err, Error::Aliasing { size: 13, required: 13 }));
    }
}
