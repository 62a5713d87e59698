//! Chemoattractant update: backward-Euler diffusion with linear production
//! and decay, homogeneous Neumann ends, solved by tridiagonal elimination.

use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::grid::SpatialGrid;

/// `H(n, S) = a n - b S` with diffusivity `D_S`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReactionParams {
    pub a: f64,
    pub b: f64,
    pub d_s: f64,
}

impl Default for ReactionParams {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            d_s: 1.0,
        }
    }
}

impl ReactionParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.b >= 0.0) || !(self.d_s >= 0.0) || !self.a.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "reaction parameters need b >= 0 and D_S >= 0, got {self:?}"
            )));
        }
        Ok(())
    }

    pub fn source(&self, n: f64, s: f64) -> f64 {
        self.a * n - self.b * s
    }
}

/// Tridiagonal system; `sub[i]` sits at `(i+1, i)` and `sup[i]` at `(i, i+1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TridiagonalSystem {
    pub sub: Vec<f64>,
    pub diag: Vec<f64>,
    pub sup: Vec<f64>,
    pub rhs: Vec<f64>,
}

impl TridiagonalSystem {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.len();
        (0..n)
            .map(|i| {
                let mut y = self.diag[i] * x[i];
                if i > 0 {
                    y += self.sub[i - 1] * x[i - 1];
                }
                if i + 1 < n {
                    y += self.sup[i] * x[i + 1];
                }
                y
            })
            .collect()
    }

    pub fn is_diagonally_dominant(&self) -> bool {
        let n = self.len();
        (0..n).all(|i| {
            let off = if i > 0 { self.sub[i - 1].abs() } else { 0.0 }
                + if i + 1 < n { self.sup[i].abs() } else { 0.0 };
            self.diag[i].abs() > off
        })
    }
}

/// Thomas elimination without pivoting.
pub fn thomas_solve(system: &TridiagonalSystem) -> Result<Vec<f64>> {
    let n = system.len();
    check_len(system.rhs.len(), n)?;
    if n == 0 {
        return Ok(Vec::new());
    }
    check_len(system.sub.len(), n - 1)?;
    check_len(system.sup.len(), n - 1)?;

    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = system.diag[0];
    if pivot == 0.0 {
        return Err(Error::SingularSystem { row: 0 });
    }
    if n > 1 {
        c[0] = system.sup[0] / pivot;
    }
    d[0] = system.rhs[0] / pivot;
    for i in 1..n {
        pivot = system.diag[i] - system.sub[i - 1] * c[i - 1];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::SingularSystem { row: i });
        }
        if i + 1 < n {
            c[i] = system.sup[i] / pivot;
        }
        d[i] = (system.rhs[i] - system.sub[i - 1] * d[i - 1]) / pivot;
    }
    for i in (0..n - 1).rev() {
        d[i] -= c[i] * d[i + 1];
    }
    Ok(d)
}

/// Assembles `A_k S^{k+1} = S^k + a Δt n^{k+1}` with a constant `D_S`.
pub fn assemble_chemo_system(
    s: &[f64],
    n_new: &[f64],
    params: &ReactionParams,
    grid: &SpatialGrid,
    dt: f64,
) -> Result<TridiagonalSystem> {
    let d = vec![params.d_s; grid.nx() + 1];
    assemble_chemo_system_variable(s, n_new, params, &d, grid, dt)
}

/// As [`assemble_chemo_system`] with a nodal diffusivity `D_{S_i}`. The
/// mirrored ghost `S_{-1} = S_1` (and at the right end) is folded into the
/// boundary rows, which doubles their off-diagonal.
pub fn assemble_chemo_system_variable(
    s: &[f64],
    n_new: &[f64],
    params: &ReactionParams,
    diffusivity: &[f64],
    grid: &SpatialGrid,
    dt: f64,
) -> Result<TridiagonalSystem> {
    let len = grid.nx() + 1;
    check_len(s.len(), len)?;
    check_len(n_new.len(), len)?;
    check_len(diffusivity.len(), len)?;
    if !(dt > 0.0) {
        return Err(Error::InvalidConfig(format!("time step must be positive, got {dt}")));
    }
    let dx2 = grid.dx() * grid.dx();
    let c: Vec<f64> = diffusivity.iter().map(|d| dt * d / dx2).collect();
    let last = len - 1;

    let diag = c.iter().map(|ci| 1.0 + 2.0 * ci + params.b * dt).collect();
    let mut sup: Vec<f64> = c[..last].iter().map(|ci| -ci).collect();
    let mut sub: Vec<f64> = c[1..].iter().map(|ci| -ci).collect();
    sup[0] = -2.0 * c[0];
    sub[last - 1] = -2.0 * c[last];
    let rhs = s
        .iter()
        .zip(n_new)
        .map(|(s, n)| s + params.a * dt * n)
        .collect();
    Ok(TridiagonalSystem {
        sub,
        diag,
        sup,
        rhs,
    })
}

pub fn chemo_step(
    s: &[f64],
    n_new: &[f64],
    params: &ReactionParams,
    grid: &SpatialGrid,
    dt: f64,
) -> Result<Vec<f64>> {
    thomas_solve(&assemble_chemo_system(s, n_new, params, grid, dt)?)
}
