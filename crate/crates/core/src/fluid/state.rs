use crate::constitutive::GasModel;
use crate::extension::{artificial_energy, ApproxParams};
use crate::grid::Grid;

/// Densities below this are treated as vacuum: momentum is zeroed and no velocity is
/// derived from m/ρ.
pub const VACUUM: f64 = 1e-12;

/// Cell-centred fluid state on the extended box.
#[derive(Debug, Clone, PartialEq)]
pub struct FluidState {
    pub grid: Grid,
    pub rho: Vec<f64>,
    pub mx: Vec<f64>,
    pub my: Vec<f64>,
    pub theta: Vec<f64>,
    /// Velocity from the last momentum solve (defined in vacuum cells too).
    pub ux: Vec<f64>,
    pub uy: Vec<f64>,
    /// Radiation weight χ_η with which `theta` was recovered from the energy.
    pub chi: Vec<f64>,
}

impl FluidState {
    pub fn new(grid: Grid, rho: Vec<f64>, mx: Vec<f64>, my: Vec<f64>, theta: Vec<f64>) -> Self {
        let n = grid.len();
        assert!(rho.len() == n && mx.len() == n && my.len() == n && theta.len() == n);
        let (ux, uy): (Vec<f64>, Vec<f64>) = (0..n)
            .map(|k| if rho[k] > VACUUM { (mx[k] / rho[k], my[k] / rho[k]) } else { (0.0, 0.0) })
            .unzip();
        FluidState { grid, rho, mx, my, theta, ux, uy, chi: vec![1.0; n] }
    }

    pub fn uniform(grid: Grid, rho: f64, u: [f64; 2], theta: f64) -> Self {
        let n = grid.len();
        Self::new(grid, vec![rho; n], vec![rho * u[0]; n], vec![rho * u[1]; n], vec![theta; n])
    }

    pub fn with_chi(mut self, chi: Vec<f64>) -> Self {
        assert_eq!(chi.len(), self.grid.len());
        self.chi = chi;
        self
    }

    pub fn len(&self) -> usize {
        self.rho.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rho.is_empty()
    }

    /// m/ρ, or 0 in vacuum.
    #[inline]
    pub fn velocity(&self, k: usize) -> [f64; 2] {
        if self.rho[k] > VACUUM { [self.mx[k] / self.rho[k], self.my[k] / self.rho[k]] } else { [0.0, 0.0] }
    }

    #[inline]
    pub fn kinetic_density(&self, k: usize) -> f64 {
        if self.rho[k] > VACUUM {
            0.5 * (self.mx[k] * self.mx[k] + self.my[k] * self.my[k]) / self.rho[k]
        } else {
            0.0
        }
    }

    #[inline]
    pub fn internal_density(&self, gas: &GasModel, k: usize) -> f64 {
        gas.rho_e_molecular(self.rho[k], self.theta[k]) + self.chi[k] * gas.a * self.theta[k].powi(4)
    }

    /// ½|m|²/ρ + ρe_η + δρ^β/(β−1).
    #[inline]
    pub fn total_energy_density(&self, gas: &GasModel, params: &ApproxParams, k: usize) -> f64 {
        self.kinetic_density(k) + self.internal_density(gas, k) + artificial_energy(self.rho[k], params)
    }

    pub fn mass(&self) -> f64 {
        self.grid.integrate(&self.rho)
    }
}
