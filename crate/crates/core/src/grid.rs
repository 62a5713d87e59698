//! Uniform phase-space grids.
//!
//! Space carries nodes `x_i` (where densities live) and staggered faces
//! `x_{i+1/2}` (where the micro perturbation lives). Velocity carries nodes
//! `v_j` and panel midpoints `v̄_l`; velocity integrals use the trapezoid
//! rule, written `bracket` throughout the crate.

use crate::error::{check_len, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialGrid {
    x_min: f64,
    x_max: f64,
    nx: usize,
    dx: f64,
}

impl SpatialGrid {
    pub fn new(x_min: f64, x_max: f64, nx: usize) -> Result<Self> {
        if nx < 2 {
            return Err(Error::InvalidGrid(format!("need Nx >= 2, got {nx}")));
        }
        if !(x_max > x_min) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "degenerate interval [{x_min}, {x_max}]"
            )));
        }
        Ok(Self {
            x_min,
            x_max,
            nx,
            dx: (x_max - x_min) / nx as f64,
        })
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Number of cells; there are `nx + 1` nodes.
    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn node(&self, i: usize) -> f64 {
        self.x_min + i as f64 * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.nx).map(|i| self.node(i)).collect()
    }

    /// Coordinate of face `i + 1/2`; `i = -1` and `i = nx` are the ghost faces.
    pub fn face(&self, i: isize) -> f64 {
        self.x_min + (i as f64 + 0.5) * self.dx
    }

    /// Interior faces `x_{1/2} .. x_{nx-1/2}`.
    pub fn faces(&self) -> Vec<f64> {
        (0..self.nx as isize).map(|i| self.face(i)).collect()
    }

    pub fn ghost_faces(&self) -> (f64, f64) {
        (self.face(-1), self.face(self.nx as isize))
    }

    /// Trapezoid weights over the nodes (half weight at both ends).
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut w = vec![self.dx; self.nx + 1];
        w[0] *= 0.5;
        w[self.nx] *= 0.5;
        w
    }

    /// `dx · Σ' u_i` with half weights at the two boundary nodes.
    pub fn integrate(&self, u: &[f64]) -> f64 {
        debug_assert_eq!(u.len(), self.nx + 1);
        let interior: f64 = u[1..self.nx].iter().sum();
        self.dx * (interior + 0.5 * (u[0] + u[self.nx]))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VelocityGrid {
    v_max: f64,
    nv: usize,
    dv: f64,
    nodes: Vec<f64>,
    midpoints: Vec<f64>,
    weights: Vec<f64>,
}

impl VelocityGrid {
    /// Symmetric grid on `[v_min, v_max]` with `v_min = -v_max`.
    pub fn new(v_min: f64, v_max: f64, nv: usize) -> Result<Self> {
        if nv < 2 {
            return Err(Error::InvalidGrid(format!("need Nv >= 2, got {nv}")));
        }
        if !(v_max > 0.0) || !v_max.is_finite() {
            return Err(Error::InvalidGrid(format!("need v_max > 0, got {v_max}")));
        }
        if v_min != -v_max {
            return Err(Error::InvalidGrid(format!(
                "velocity bounds must be symmetric, got [{v_min}, {v_max}]"
            )));
        }
        let dv = 2.0 * v_max / nv as f64;
        // Built from signed integers so that v_{Nv-j} == -v_j holds bit for bit.
        let nodes: Vec<f64> = (0..=nv)
            .map(|j| v_max * (2 * j as i64 - nv as i64) as f64 / nv as f64)
            .collect();
        let midpoints = nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
        let mut weights = vec![dv; nv + 1];
        weights[0] *= 0.5;
        weights[nv] *= 0.5;
        Ok(Self {
            v_max,
            nv,
            dv,
            nodes,
            midpoints,
            weights,
        })
    }

    pub fn v_min(&self) -> f64 {
        -self.v_max
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }

    /// Number of velocity panels; there are `nv + 1` nodes.
    pub fn nv(&self) -> usize {
        self.nv
    }

    pub fn dv(&self) -> f64 {
        self.dv
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn midpoints(&self) -> &[f64] {
        &self.midpoints
    }

    /// Trapezoid weights: `bracket(G) = Σ_j weights[j] · G_j`.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Index of the node mirrored through `v = 0`.
    pub fn mirror(&self, j: usize) -> usize {
        self.nv - j
    }

    /// Evaluates `h` on every node.
    pub fn profile(&self, h: impl Fn(f64) -> f64) -> Vec<f64> {
        self.nodes.iter().map(|&v| h(v)).collect()
    }

    /// Trapezoid quadrature without a length check, for hot loops.
    #[inline]
    pub(crate) fn quad(&self, g: &[f64]) -> f64 {
        self.weights.iter().zip(g).map(|(w, x)| w * x).sum()
    }

    /// Trapezoid quadrature of `v · g`.
    #[inline]
    pub(crate) fn quad_v(&self, g: &[f64]) -> f64 {
        self.weights
            .iter()
            .zip(&self.nodes)
            .zip(g)
            .map(|((w, v), x)| w * v * x)
            .sum()
    }
}

/// `⟨G⟩ = Δv Σ_{l<Nv} (G_l + G_{l+1}) / 2`.
pub fn bracket(g: &[f64], grid: &VelocityGrid) -> Result<f64> {
    check_len(g.len(), grid.nv + 1)?;
    Ok(grid.quad(g))
}

/// `(I - P_M) G = G - M ⟨G⟩`.
pub fn project_complement(g: &[f64], m: &[f64], grid: &VelocityGrid) -> Result<Vec<f64>> {
    check_len(g.len(), grid.nv + 1)?;
    check_len(m.len(), grid.nv + 1)?;
    let mean = grid.quad(g);
    Ok(g.iter().zip(m).map(|(g, m)| g - m * mean).collect())
}
