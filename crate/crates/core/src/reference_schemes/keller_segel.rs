use serde::{Deserialize, Serialize};

use crate::chemo::{chemo_step, thomas_solve, ReactionParams, TridiagonalSystem};
use crate::error::{check_len, Result};
use crate::grid::SpatialGrid;

use super::centered_gradient;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum KsMode {
    Explicit,
    #[default]
    Implicit,
}

#[derive(Debug, Clone, PartialEq)]
pub struct KsState {
    pub n: Vec<f64>,
    pub s: Vec<f64>,
    pub t: f64,
}

/// One step of `∂_t n = ∂_x(D ∂_x n - χ n ∂_x S)` with homogeneous Dirichlet
/// data for `n`, followed by the chemoattractant update.
///
/// The drift is the centered difference of `n ∂_x S` with `∂_x S` itself
/// centered at the nodes and zero at both ends.
#[allow(clippy::too_many_arguments)]
pub fn ks_step(
    state: &mut KsState,
    grid: &SpatialGrid,
    dt: f64,
    d: f64,
    chi: f64,
    mode: KsMode,
    reaction: &ReactionParams,
) -> Result<()> {
    let len = grid.nx() + 1;
    check_len(state.n.len(), len)?;
    check_len(state.s.len(), len)?;
    let dx = grid.dx();
    let n = &state.n;
    let ds = centered_gradient(&state.s, dx);
    let mu = dt * d / (dx * dx);

    let mut explicit = vec![0.0; len];
    for i in 1..len - 1 {
        let drift = chi * (ds[i + 1] * n[i + 1] - ds[i - 1] * n[i - 1]) / (2.0 * dx);
        explicit[i] = n[i] - dt * drift;
        if mode == KsMode::Explicit {
            explicit[i] += mu * (n[i + 1] - 2.0 * n[i] + n[i - 1]);
        }
    }
    let n_new = match mode {
        KsMode::Explicit => explicit,
        KsMode::Implicit if len > 2 => {
            let m = len - 2;
            let interior = thomas_solve(&TridiagonalSystem {
                sub: vec![-mu; m - 1],
                diag: vec![1.0 + 2.0 * mu; m],
                sup: vec![-mu; m - 1],
                rhs: explicit[1..len - 1].to_vec(),
            })?;
            let mut out = vec![0.0; len];
            out[1..len - 1].copy_from_slice(&interior);
            out
        }
        KsMode::Implicit => vec![0.0; len],
    };
    state.s = chemo_step(&state.s, &n_new, reaction, grid, dt)?;
    state.n = n_new;
    state.t += dt;
    Ok(())
}
