//! Vertex-based viscous operator. Velocity gradients live at cell corners (ghost cells
//! mirror the no-slip wall), so uᵀAu = Σ_v h² S_v:∇u_v is a sum of non-negative local
//! dissipations and A is symmetric positive semi-definite by construction.

use rayon::prelude::*;

use crate::constitutive::{stress_with, viscous_dissipation, Mat2};
use crate::grid::Grid;

/// Gradient stencil: for each vertex the real cells it touches with their (∂x, ∂y)
/// coefficients, ghost reflections already folded in.
#[derive(Debug, Clone)]
pub struct ViscousTopology {
    pub grid: Grid,
    vertex_cells: Vec<Vec<(usize, [f64; 2])>>,
    /// Transpose: for each cell, (vertex, coefficient) pairs.
    cell_vertices: Vec<Vec<(usize, [f64; 2])>>,
    /// Number of real cells adjacent to each vertex.
    vertex_real: Vec<usize>,
}

impl ViscousTopology {
    pub fn new(grid: Grid) -> Self {
        let n = grid.n as i64;
        let h = grid.h();
        let nv = (grid.n + 1) * (grid.n + 1);
        let mut vertex_cells = Vec::with_capacity(nv);
        let mut vertex_real = Vec::with_capacity(nv);
        for jv in 0..=n {
            for iv in 0..=n {
                let mut entries: Vec<(usize, [f64; 2])> = Vec::with_capacity(4);
                let mut real = 0;
                for (di, dj) in [(-1i64, -1i64), (0, -1), (-1, 0), (0, 0)] {
                    let (i, j) = (iv + di, jv + dj);
                    let sx = if di == 0 { 1.0 } else { -1.0 };
                    let sy = if dj == 0 { 1.0 } else { -1.0 };
                    let (ri, fi) = reflect(i, n);
                    let (rj, fj) = reflect(j, n);
                    if !fi && !fj {
                        real += 1;
                    }
                    // Single reflection flips the sign (u = 0 on the wall); double reflection restores it.
                    let sign = if fi ^ fj { -1.0 } else { 1.0 };
                    let cell = grid.idx(ri as usize, rj as usize);
                    let coef = [sign * sx / (2.0 * h), sign * sy / (2.0 * h)];
                    match entries.iter_mut().find(|e| e.0 == cell) {
                        Some(e) => {
                            e.1[0] += coef[0];
                            e.1[1] += coef[1];
                        }
                        None => entries.push((cell, coef)),
                    }
                }
                entries.retain(|e| e.1 != [0.0, 0.0]);
                vertex_cells.push(entries);
                vertex_real.push(real);
            }
        }
        let mut cell_vertices = vec![Vec::new(); grid.len()];
        for (v, es) in vertex_cells.iter().enumerate() {
            for &(c, d) in es {
                cell_vertices[c].push((v, d));
            }
        }
        ViscousTopology { grid, vertex_cells, cell_vertices, vertex_real }
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_cells.len()
    }

    /// Real cells adjacent to vertex `v` (for splitting vertex quantities).
    fn adjacent_real(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        let n = self.grid.n;
        let (iv, jv) = (v % (n + 1), v / (n + 1));
        [(iv.wrapping_sub(1), jv.wrapping_sub(1)), (iv, jv.wrapping_sub(1)), (iv.wrapping_sub(1), jv), (iv, jv)]
            .into_iter()
            .filter(move |&(i, j)| i < n && j < n)
            .map(move |(i, j)| self.grid.idx(i, j))
    }

    /// Vertex coefficients as the average of a cell field over adjacent real cells.
    pub fn vertex_average(&self, cell_field: &[f64]) -> Vec<f64> {
        (0..self.vertex_count())
            .into_par_iter()
            .map(|v| {
                let r = self.vertex_real[v];
                if r == 0 {
                    return 0.0;
                }
                self.adjacent_real(v).map(|c| cell_field[c]).sum::<f64>() / r as f64
            })
            .collect()
    }

    /// ∇u at vertex `v` for the stacked velocity (ux, uy).
    #[inline]
    pub fn gradient(&self, v: usize, ux: &[f64], uy: &[f64]) -> Mat2 {
        let mut g = [[0.0; 2]; 2];
        for &(c, d) in &self.vertex_cells[v] {
            g[0][0] += d[0] * ux[c];
            g[0][1] += d[1] * ux[c];
            g[1][0] += d[0] * uy[c];
            g[1][1] += d[1] * uy[c];
        }
        g
    }

    /// (Au) for u = (ux, uy) stacked in one vector of length 2N².
    pub fn apply(&self, mu: &[f64], zeta: &[f64], u: &[f64], out: &mut [f64]) {
        let nc = self.grid.len();
        let (ux, uy) = u.split_at(nc);
        let h2 = self.grid.cell_area();
        let stress: Vec<Mat2> = (0..self.vertex_count())
            .into_par_iter()
            .map(|v| {
                let s = stress_with(mu[v], zeta[v], self.gradient(v, ux, uy));
                [[h2 * s[0][0], h2 * s[0][1]], [h2 * s[1][0], h2 * s[1][1]]]
            })
            .collect();
        let (ox, oy) = out.split_at_mut(nc);
        ox.par_iter_mut().zip(oy.par_iter_mut()).enumerate().for_each(|(c, (ax, ay))| {
            let mut sx = 0.0;
            let mut sy = 0.0;
            for &(v, d) in &self.cell_vertices[c] {
                let s = &stress[v];
                sx += s[0][0] * d[0] + s[0][1] * d[1];
                sy += s[1][0] * d[0] + s[1][1] * d[1];
            }
            *ax = sx;
            *ay = sy;
        });
    }

    /// Diagonal of A: the energy of each unit velocity.
    pub fn diagonal(&self, mu: &[f64], zeta: &[f64]) -> Vec<f64> {
        let nc = self.grid.len();
        let h2 = self.grid.cell_area();
        let mut diag = vec![0.0; 2 * nc];
        let (dx, dy) = diag.split_at_mut(nc);
        dx.par_iter_mut().zip(dy.par_iter_mut()).enumerate().for_each(|(c, (ax, ay))| {
            for &(v, d) in &self.cell_vertices[c] {
                *ax += h2 * viscous_dissipation(mu[v], zeta[v], [[d[0], d[1]], [0.0, 0.0]]);
                *ay += h2 * viscous_dissipation(mu[v], zeta[v], [[0.0, 0.0], [d[0], d[1]]]);
            }
        });
        diag
    }

    /// Per-cell dissipation density: each vertex's S:∇u split equally among its real cells.
    pub fn cell_dissipation(&self, mu: &[f64], zeta: &[f64], ux: &[f64], uy: &[f64]) -> Vec<f64> {
        let w: Vec<f64> = (0..self.vertex_count())
            .into_par_iter()
            .map(|v| {
                let r = self.vertex_real[v];
                if r == 0 {
                    0.0
                } else {
                    viscous_dissipation(mu[v], zeta[v], self.gradient(v, ux, uy)) / r as f64
                }
            })
            .collect();
        let n = self.grid.n;
        (0..self.grid.len())
            .into_par_iter()
            .map(|c| {
                let (i, j) = self.grid.ij(c);
                let verts = [j * (n + 1) + i, j * (n + 1) + i + 1, (j + 1) * (n + 1) + i, (j + 1) * (n + 1) + i + 1];
                verts.iter().map(|&v| w[v]).sum()
            })
            .collect()
    }
}

/// Maps an index possibly one outside [0, n) to its mirror, flagging reflection.
#[inline]
fn reflect(i: i64, n: i64) -> (i64, bool) {
    if i < 0 {
        (0, true)
    } else if i >= n {
        (n - 1, true)
    } else {
        (i, false)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadratic_form_matches_vertex_energy() {
        let grid = Grid::new(6, 1.0);
        let topo = ViscousTopology::new(grid);
        let nv = topo.vertex_count();
        let mu: Vec<f64> = (0..nv).map(|v| 1.0 + 0.1 * (v % 5) as f64).collect();
        let zeta: Vec<f64> = (0..nv).map(|v| 0.5 + 0.05 * (v % 3) as f64).collect();
        let nc = grid.len();
        let u: Vec<f64> = (0..2 * nc).map(|k| ((k * 37 % 11) as f64 - 5.0) / 7.0).collect();
        let mut au = vec![0.0; 2 * nc];
        topo.apply(&mu, &zeta, &u, &mut au);
        let quad: f64 = u.iter().zip(&au).map(|(a, b)| a * b).sum();
        let (ux, uy) = u.split_at(nc);
        let energy: f64 = (0..nv)
            .map(|v| grid.cell_area() * viscous_dissipation(mu[v], zeta[v], topo.gradient(v, ux, uy)))
            .sum();
        assert!((quad - energy).abs() < 1e-12 * energy.abs().max(1.0));
        let cells: f64 = topo.cell_dissipation(&mu, &zeta, ux, uy).iter().sum::<f64>() * grid.cell_area();
        assert!((cells - energy).abs() < 1e-12 * energy.abs().max(1.0));
    }

    #[test]
    fn diagonal_matches_unit_probes() {
        let grid = Grid::new(5, 1.0);
        let topo = ViscousTopology::new(grid);
        let nv = topo.vertex_count();
        let mu = vec![1.3; nv];
        let zeta = vec![0.7; nv];
        let diag = topo.diagonal(&mu, &zeta);
        let n = 2 * grid.len();
        for k in [0, 3, 12, 24, 25, 31, 49] {
            let mut e = vec![0.0; n];
            e[k] = 1.0;
            let mut out = vec![0.0; n];
            topo.apply(&mu, &zeta, &e, &mut out);
            assert!((out[k] - diag[k]).abs() < 1e-12 * diag[k]);
        }
    }
}
