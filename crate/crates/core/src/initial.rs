//! The Gaussian-peak initial data shared by every scheme.

use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::kinetic_ops::TurningModel;

/// Exponent of the initial peak `C_M exp(-80 x²)`.
pub const PEAK_SHARPNESS: f64 = 80.0;

#[derive(Debug, Clone, PartialEq)]
pub struct InitialData {
    /// Normalizing constant of the peak.
    pub c_m: f64,
    /// Density at the spatial nodes.
    pub n0: Vec<f64>,
}

impl InitialData {
    /// Peak whose half-weight trapezoid mass on `grid` equals `total_mass`.
    pub fn gaussian_peak(grid: &SpatialGrid, total_mass: f64) -> Result<Self> {
        if !(total_mass > 0.0) || !total_mass.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "total mass must be positive, got {total_mass}"
            )));
        }
        let shape: Vec<f64> = grid
            .nodes()
            .iter()
            .map(|x| (-PEAK_SHARPNESS * x * x).exp())
            .collect();
        let c_m = total_mass / grid.integrate(&shape);
        let n0 = shape.into_iter().map(|s| c_m * s).collect();
        Ok(Self { c_m, n0 })
    }

    /// `f_0(v_j) = (n + v_j e^{-v_j²} / C_M) M(v_j)` for local density `n`.
    pub fn distribution(&self, n: f64, model: &TurningModel) -> Vec<f64> {
        model
            .grid()
            .nodes()
            .iter()
            .zip(model.equilibrium())
            .map(|(&v, &m)| (n + v * (-v * v).exp() / self.c_m) * m)
            .collect()
    }

    /// `M(v_j) n`, the initial data projected onto equilibrium.
    pub fn equilibrium_distribution(n: f64, model: &TurningModel) -> Vec<f64> {
        model.equilibrium().iter().map(|m| m * n).collect()
    }
}
