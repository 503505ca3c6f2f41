//! Lattice points and dense hypercube windows over `Z^d`.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Scalar;

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 4;

/// Point of `Z^d` for `d <= MAX_DIM`. Unused trailing coordinates are zero.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default, Serialize, Deserialize)]
pub struct Site(pub [i64; MAX_DIM]);

impl Site {
    pub const ORIGIN: Site = Site([0; MAX_DIM]);

    pub fn from_slice(coords: &[i64]) -> Result<Site> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::Dimension(format!(
                "lattice dimension {} outside 1..={MAX_DIM}",
                coords.len()
            )));
        }
        let mut c = [0; MAX_DIM];
        c[..coords.len()].copy_from_slice(coords);
        Ok(Site(c))
    }

    pub fn unit(axis: usize, sign: i64) -> Site {
        let mut c = [0; MAX_DIM];
        c[axis] = sign;
        Site(c)
    }

    pub fn coords(&self, dim: usize) -> &[i64] {
        &self.0[..dim]
    }

    pub fn sup_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).max().unwrap_or(0)
    }

    pub fn l1_norm(&self) -> i64 {
        self.0.iter().map(|c| c.abs()).sum()
    }

    pub fn is_origin(&self) -> bool {
        self.0 == [0; MAX_DIM]
    }

    /// Render with the first `dim` coordinates, e.g. `(1,-2)`.
    pub fn display(&self, dim: usize) -> String {
        let parts: Vec<String> = self.0[..dim].iter().map(i64::to_string).collect();
        format!("({})", parts.join(","))
    }
}

impl std::ops::Add for Site {
    type Output = Site;
    fn add(self, rhs: Site) -> Site {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(rhs.0) {
            *a += b;
        }
        Site(c)
    }
}

impl std::ops::Sub for Site {
    type Output = Site;
    fn sub(self, rhs: Site) -> Site {
        let mut c = self.0;
        for (a, b) in c.iter_mut().zip(rhs.0) {
            *a -= b;
        }
        Site(c)
    }
}

impl std::ops::Neg for Site {
    type Output = Site;
    fn neg(self) -> Site {
        Site(self.0.map(|c| -c))
    }
}

impl fmt::Debug for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

/// Number of cells of the hypercube `[-radius, radius]^dim`, or `None` on overflow.
pub fn window_cells(dim: usize, radius: i64) -> Option<usize> {
    let side = usize::try_from(2 * radius + 1).ok()?;
    (0..dim).try_fold(1usize, |acc, _| acc.checked_mul(side))
}

/// Sites of the hypercube `[-radius, radius]^dim`, first coordinate fastest.
pub fn window_sites(dim: usize, radius: i64) -> Result<impl Iterator<Item = Site>> {
    let cells = window_cells(dim, radius)
        .filter(|_| (1..=MAX_DIM).contains(&dim))
        .ok_or_else(|| Error::Dimension(format!("no window of radius {radius} in d={dim}")))?;
    let side = (2 * radius + 1) as usize;
    Ok((0..cells).map(move |mut idx| {
        let mut c = [0; MAX_DIM];
        for slot in c.iter_mut().take(dim) {
            *slot = (idx % side) as i64 - radius;
            idx /= side;
        }
        Site(c)
    }))
}

/// Dense field over the hypercube `[-radius, radius]^dim`. Values outside are zero.
#[derive(Clone, Debug)]
pub struct Grid<T> {
    dim: usize,
    radius: i64,
    side: i64,
    data: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    pub fn zeros(dim: usize, radius: i64, budget: usize) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::Dimension(format!("lattice dimension {dim} outside 1..={MAX_DIM}")));
        }
        let cells = window_cells(dim, radius)
            .filter(|&c| c <= budget)
            .ok_or_else(|| {
                Error::Resource(format!(
                    "window of radius {radius} in d={dim} exceeds the cell budget {budget}"
                ))
            })?;
        Ok(Grid { dim, radius, side: 2 * radius + 1, data: vec![T::zero(); cells] })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn radius(&self) -> i64 {
        self.radius
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn values(&self) -> &[T] {
        &self.data
    }

    pub fn contains(&self, x: &Site) -> bool {
        x.0[..self.dim].iter().all(|c| c.abs() <= self.radius)
            && x.0[self.dim..].iter().all(|&c| c == 0)
    }

    pub fn index(&self, x: &Site) -> Option<usize> {
        if !self.contains(x) {
            return None;
        }
        let mut idx = 0i64;
        for i in (0..self.dim).rev() {
            idx = idx * self.side + (x.0[i] + self.radius);
        }
        Some(idx as usize)
    }

    pub fn site(&self, mut idx: usize) -> Site {
        let mut c = [0; MAX_DIM];
        let side = self.side as usize;
        for slot in c.iter_mut().take(self.dim) {
            *slot = (idx % side) as i64 - self.radius;
            idx /= side;
        }
        Site(c)
    }

    pub fn get(&self, x: &Site) -> Option<&T> {
        self.index(x).map(|i| &self.data[i])
    }

    /// Value at `x`, zero outside the window.
    pub fn value(&self, x: &Site) -> T {
        self.get(x).cloned().unwrap_or_else(T::zero)
    }

    pub fn set(&mut self, x: &Site, v: T) -> Result<()> {
        let i = self.index(x).ok_or_else(|| {
            Error::Resource(format!(
                "site {} outside window of radius {}",
                x.display(self.dim),
                self.radius
            ))
        })?;
        self.data[i] = v;
        Ok(())
    }

    /// Sum of all cells.
    pub fn total(&self) -> T {
        let mut acc = T::zero();
        for v in &self.data {
            acc.add_assign(v);
        }
        acc
    }

    pub fn iter(&self) -> impl Iterator<Item = (Site, &T)> + '_ {
        self.data.iter().enumerate().map(|(i, v)| (self.site(i), v))
    }

    pub fn nonzero(&self) -> impl Iterator<Item = (Site, &T)> + '_ {
        self.iter().filter(|(_, v)| !v.is_zero())
    }

    /// Gather-form convolution `out(x) = sum_w src(x - w) * weight(w)` on the same window.
    ///
    /// Output cells are disjoint, so the parallel and sequential results agree bit for bit.
    pub fn convolve(&self, weights: &[(Site, T)]) -> Grid<T> {
        let cell = |idx: usize| -> T {
            let x = self.site(idx);
            let mut acc = T::zero();
            for (w, q) in weights {
                if let Some(v) = self.get(&(x - *w)) {
                    if !v.is_zero() {
                        acc.mul_add_assign(v, q);
                    }
                }
            }
            acc
        };
        let data: Vec<T> = if self.data.len() >= PARALLEL_CELLS {
            (0..self.data.len()).into_par_iter().map(cell).collect()
        } else {
            (0..self.data.len()).map(cell).collect()
        };
        Grid { dim: self.dim, radius: self.radius, side: self.side, data }
    }
}

const PARALLEL_CELLS: usize = 1 << 14;

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_round_trips_every_cell() {
        let g: Grid<f64> = Grid::zeros(3, 2, 1000).unwrap();
        for i in 0..g.len() {
            assert_eq!(g.index(&g.site(i)), Some(i));
        }
    }

    #[test]
    fn outside_window_reads_zero() {
        let g: Grid<f64> = Grid::zeros(2, 1, 100).unwrap();
        assert_eq!(g.value(&Site::from_slice(&[2, 0]).unwrap()), 0.0);
        assert!(g.get(&Site::from_slice(&[0, 0, 1]).unwrap()).is_none());
    }

    #[test]
    fn budget_is_enforced() {
        assert!(matches!(Grid::<f64>::zeros(4, 10, 1000), Err(Error::Resource(_))));
    }
}
