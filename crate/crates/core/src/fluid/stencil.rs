//! Interface stencil: deformed Γ-nodes with a mollified penalty kernel (spread and
//! interpolate are exact transposes) and bilinear trace weights.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{DisplacementSample, ReferenceGeometry, Vec2};
use crate::grid::Grid;

use super::state::FluidState;

#[derive(Debug, Clone)]
pub struct InterfaceStencil {
    /// Deformed positions Φ_w(y_j).
    pub positions: Vec<Vec2>,
    /// Reference normals n(y_j); the kinematic target is ∂t w · n.
    pub normals: Vec<Vec2>,
    /// Area factors S^w(y_j).
    pub area: Vec<f64>,
    /// Trapezoid weight Δy = 1/N on Γ.
    pub dy: f64,
    /// Penalty-kernel weights per node (sum to 1).
    pub kernel: Vec<Vec<(usize, f64)>>,
    /// Transpose of `kernel`: for each cell, the (node, weight) pairs touching it.
    pub cell_nodes: Vec<Vec<(usize, f64)>>,
    /// Bilinear interpolation weights per node.
    pub bilinear: Vec<[(usize, f64); 4]>,
    pub grid: Grid,
}

/// 1D cosine kernel φ(r) = (1/2R)(1 + cos(πr/R)) for |r| < R (r in cell units).
#[inline]
pub fn cosine_kernel(r: f64, radius: f64) -> f64 {
    if r.abs() >= radius {
        0.0
    } else {
        (1.0 + (PI * r / radius).cos()) / (2.0 * radius)
    }
}

impl InterfaceStencil {
    /// A stencil with no interface nodes (no penalty coupling).
    pub fn empty(grid: Grid) -> Self {
        InterfaceStencil {
            positions: Vec::new(),
            normals: Vec::new(),
            area: Vec::new(),
            dy: 0.0,
            kernel: Vec::new(),
            cell_nodes: vec![Vec::new(); grid.len()],
            bilinear: Vec::new(),
            grid,
        }
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    /// Builds the stencil on the nodes y_j = j/N of `w`.
    pub fn build(geometry: &ReferenceGeometry, w: &DisplacementSample, grid: &Grid, kernel_radius: f64) -> Result<Self> {
        if !(kernel_radius >= 1.0) {
            return Err(Error::Validation(format!("kernel radius {kernel_radius} must be at least one cell")));
        }
        let n = w.len();
        let mut positions = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        let mut area = Vec::with_capacity(n);
        for j in 0..n {
            let y = w.node_position(j);
            let (_, s) = geometry.deformed_normal_and_area(w, y)?;
            positions.push(geometry.deformed_point(w, y));
            normals.push(geometry.chart.normal(y));
            area.push(s);
        }
        Self::from_points(grid, positions, normals, area, kernel_radius)
    }

    /// Builds the stencil from explicit node positions (Δy = 1/len).
    pub fn from_points(
        grid: &Grid,
        positions: Vec<Vec2>,
        normals: Vec<Vec2>,
        area: Vec<f64>,
        kernel_radius: f64,
    ) -> Result<Self> {
        let n = positions.len();
        let h = grid.h();
        let lim = grid.half_width - (kernel_radius + 1.0) * h;
        let mut kernel = Vec::with_capacity(n);
        let mut bilinear = Vec::with_capacity(n);
        for (j, x) in positions.iter().enumerate() {
            if x[0].abs() >= lim || x[1].abs() >= lim || !x[0].is_finite() || !x[1].is_finite() {
                return Err(Error::Degeneracy(format!(
                    "interface node {j} at ({}, {}) is too close to the box boundary",
                    x[0], x[1]
                )));
            }
            kernel.push(kernel_weights(grid, *x, kernel_radius));
            bilinear.push(bilinear_weights(grid, *x));
        }
        let mut cell_nodes = vec![Vec::new(); grid.len()];
        for (j, ws) in kernel.iter().enumerate() {
            for &(c, wt) in ws {
                cell_nodes[c].push((j, wt));
            }
        }
        Ok(InterfaceStencil {
            positions,
            normals,
            area,
            dy: if n > 0 { 1.0 / n as f64 } else { 0.0 },
            kernel,
            cell_nodes,
            bilinear,
            grid: *grid,
        })
    }

    /// Kernel interpolation ψ_j = Σ_c w_jc φ_c.
    pub fn interpolate(&self, field: &[f64]) -> Vec<f64> {
        self.kernel.iter().map(|ws| ws.iter().map(|&(c, w)| w * field[c]).sum()).collect()
    }

    /// Spread of a Γ-density: f_c = (Δy/h²) Σ_j w_jc g_j, so that
    /// Σ_c h² f_c φ_c = Δy Σ_j g_j (interp φ)_j.
    pub fn spread(&self, g: &[f64]) -> Vec<f64> {
        let scale = self.dy / self.grid.cell_area();
        self.cell_nodes
            .iter()
            .map(|nodes| scale * nodes.iter().map(|&(j, w)| w * g[j]).sum::<f64>())
            .collect()
    }

    /// Discrete Γ inner product Δy Σ_j a_j b_j.
    pub fn gamma_dot(&self, a: &[f64], b: &[f64]) -> f64 {
        self.dy * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
    }

    /// Bilinear interpolation at the deformed nodes.
    pub fn bilinear_interpolate(&self, field: &[f64]) -> Vec<f64> {
        self.bilinear.iter().map(|ws| ws.iter().map(|&(c, w)| w * field[c]).sum()).collect()
    }
}

fn kernel_weights(grid: &Grid, x: Vec2, radius: f64) -> Vec<(usize, f64)> {
    let h = grid.h();
    let fx = (x[0] + grid.half_width) / h - 0.5;
    let fy = (x[1] + grid.half_width) / h - 0.5;
    let r = radius.ceil() as i64;
    let (ci, cj) = (fx.floor() as i64, fy.floor() as i64);
    let mut out = Vec::new();
    let mut total = 0.0;
    for j in (cj - r)..=(cj + r + 1) {
        let wy = cosine_kernel(fy - j as f64, radius);
        if wy == 0.0 || j < 0 || j >= grid.n as i64 {
            continue;
        }
        for i in (ci - r)..=(ci + r + 1) {
            let wx = cosine_kernel(fx - i as f64, radius);
            if wx == 0.0 || i < 0 || i >= grid.n as i64 {
                continue;
            }
            out.push((grid.idx(i as usize, j as usize), wx * wy));
            total += wx * wy;
        }
    }
    for e in &mut out {
        e.1 /= total;
    }
    out
}

fn bilinear_weights(grid: &Grid, x: Vec2) -> [(usize, f64); 4] {
    let h = grid.h();
    let fx = (x[0] + grid.half_width) / h - 0.5;
    let fy = (x[1] + grid.half_width) / h - 0.5;
    let i0 = (fx.floor() as i64).clamp(0, grid.n as i64 - 2) as usize;
    let j0 = (fy.floor() as i64).clamp(0, grid.n as i64 - 2) as usize;
    let tx = fx - i0 as f64;
    let ty = fy - j0 as f64;
    [
        (grid.idx(i0, j0), (1.0 - tx) * (1.0 - ty)),
        (grid.idx(i0 + 1, j0), tx * (1.0 - ty)),
        (grid.idx(i0, j0 + 1), (1.0 - tx) * ty),
        (grid.idx(i0 + 1, j0 + 1), tx * ty),
    ]
}

/// Lagrangian traces at the deformed nodes by bilinear interpolation:
/// velocity `v_j = u(Φ_w(y_j))` and temperature `τ_j = ϑ(Φ_w(y_j))`.
pub fn compute_traces(state: &FluidState, stencil: &InterfaceStencil) -> (Vec<[f64; 2]>, Vec<f64>) {
    let vx = stencil.bilinear_interpolate(&state.ux);
    let vy = stencil.bilinear_interpolate(&state.uy);
    let tau = stencil.bilinear_interpolate(&state.theta);
    (vx.into_iter().zip(vy).map(|(a, b)| [a, b]).collect(), tau)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cosine_kernel_is_a_partition_of_unity_on_the_lattice() {
        for s in [0.0, 0.25, 0.5, 0.9] {
            let total: f64 = (-3..=3).map(|i| cosine_kernel(s - i as f64, 2.0)).sum();
            assert!((total - 1.0).abs() < 1e-14);
        }
    }
}
