//! Uniform cell-centred grid over the extended box B = [-L, L]².

use crate::geometry::Vec2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub n: usize,
    pub half_width: f64,
}

impl Grid {
    pub fn new(n: usize, half_width: f64) -> Self {
        assert!(n >= 4, "grid needs at least 4 cells per direction");
        assert!(half_width > 0.0);
        Grid { n, half_width }
    }

    /// Cell width h = 2L/N.
    #[inline]
    pub fn h(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    #[inline]
    pub fn cell_area(&self) -> f64 {
        let h = self.h();
        h * h
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// Row-major index of cell (i, j): `i` along x, `j` along y.
    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn ij(&self, k: usize) -> (usize, usize) {
        (k % self.n, k / self.n)
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_width + (i as f64 + 0.5) * self.h()
    }

    #[inline]
    pub fn center(&self, k: usize) -> Vec2 {
        let (i, j) = self.ij(k);
        [self.coord(i), self.coord(j)]
    }

    /// Area of B.
    pub fn box_area(&self) -> f64 {
        4.0 * self.half_width * self.half_width
    }

    /// Midpoint-rule integral of a cell field.
    pub fn integrate(&self, field: &[f64]) -> f64 {
        crate::numerics::tree_sum(field.len(), |k| field[k]) * self.cell_area()
    }

    pub fn integrate_with(&self, f: impl Fn(usize) -> f64 + Sync) -> f64 {
        crate::numerics::tree_sum(self.len(), f) * self.cell_area()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centers_are_symmetric() {
        let g = Grid::new(8, 2.0);
        assert_eq!(g.h(), 0.5);
        assert_eq!(g.coord(0), -1.75);
        assert_eq!(g.coord(7), 1.75);
        let k = g.idx(3, 5);
        assert_eq!(g.ij(k), (3, 5));
        assert!((g.integrate(&vec![1.0; 64]) - 16.0).abs() < 1e-14);
    }
}
