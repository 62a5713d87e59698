use crate::chemo::{chemo_step, ReactionParams};
use crate::error::{check_len, Error, Result};
use crate::grid::{SpatialGrid, VelocityGrid};
use crate::initial::InitialData;
use crate::kinetic_ops::{ChemotacticKernel, TurningModel, MODEL_CHECK_TOL};

use super::centered_gradient;

/// Indices of the nodes with `v ≥ 0`, in increasing order of `v`.
fn half_nodes(grid: &VelocityGrid) -> impl Iterator<Item = usize> + '_ {
    grid.nodes()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v >= 0.0)
        .map(|(j, _)| j)
}

/// Trapezoid weights on `[0, v_max]`: the symmetric weight for `v > 0` and
/// half of it at `v = 0`, so that `2 · half_bracket(r) = bracket(f)` exactly.
fn half_weights(grid: &VelocityGrid) -> Vec<f64> {
    half_nodes(grid)
        .map(|j| {
            let w = grid.weights()[j];
            if grid.nodes()[j] == 0.0 {
                0.5 * w
            } else {
                w
            }
        })
        .collect()
}

pub fn half_bracket(r: &[f64], grid: &VelocityGrid) -> Result<f64> {
    let w = half_weights(grid);
    check_len(r.len(), w.len())?;
    Ok(w.iter().zip(r).map(|(w, r)| w * r).sum())
}

/// Even part `r = (f(v) + f(-v)) / 2` and scaled odd part
/// `j = (f(v) - f(-v)) / (2ε)` on the nodes with `v ≥ 0`.
pub fn parity_transform(f: &[f64], grid: &VelocityGrid, eps: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    check_len(f.len(), grid.nv() + 1)?;
    Ok(half_nodes(grid)
        .map(|j| {
            let (a, b) = (f[j], f[grid.mirror(j)]);
            (0.5 * (a + b), 0.5 * (a - b) / eps)
        })
        .unzip())
}

/// Inverse of [`parity_transform`]: `f(v) = r(|v|) ± ε j(|v|)`.
pub fn parity_reconstruct(r: &[f64], j: &[f64], grid: &VelocityGrid, eps: f64) -> Result<Vec<f64>> {
    let idx: Vec<usize> = half_nodes(grid).collect();
    check_len(r.len(), idx.len())?;
    check_len(j.len(), idx.len())?;
    let mut f = vec![0.0; grid.nv() + 1];
    for (h, &jf) in idx.iter().enumerate() {
        f[jf] = r[h] + eps * j[h];
        let jm = grid.mirror(jf);
        if jm != jf {
            f[jm] = r[h] - eps * j[h];
        }
    }
    Ok(f)
}

/// `r` and `j` stored node-major with one entry per `v ≥ 0` node.
#[derive(Debug, Clone, PartialEq)]
pub struct ParityState {
    pub r: Vec<f64>,
    pub j: Vec<f64>,
    pub s: Vec<f64>,
    pub t: f64,
    pub eps: f64,
    stride: usize,
}

impl ParityState {
    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn density(&self, grid: &VelocityGrid) -> Vec<f64> {
        let w = half_weights(grid);
        self.r
            .chunks(self.stride)
            .map(|ri| 2.0 * w.iter().zip(ri).map(|(w, r)| w * r).sum::<f64>())
            .collect()
    }

    pub fn distribution_at(&self, i: usize, grid: &VelocityGrid) -> Vec<f64> {
        let range = i * self.stride..(i + 1) * self.stride;
        parity_reconstruct(&self.r[range.clone()], &self.j[range], grid, self.eps)
            .expect("state layout matches its grid")
    }
}

/// Odd-even parity splitting: a pointwise implicit collision substep
/// followed by explicit second-order upwind transport of `r ± j`, with Robin
/// boundary rows from the vacuum inflow condition.
///
/// Restricted to the relaxation kernel with an even equilibrium and the
/// positive-part chemotactic kernel, where the parity system closes.
#[derive(Debug, Clone)]
pub struct OddEven {
    space: SpatialGrid,
    model: TurningModel,
    reaction: ReactionParams,
    eps: f64,
    /// `v`, `M` and weights on the `v ≥ 0` nodes.
    v: Vec<f64>,
    m: Vec<f64>,
}

impl OddEven {
    pub fn new(
        space: SpatialGrid,
        model: TurningModel,
        reaction: ReactionParams,
        eps: f64,
    ) -> Result<Self> {
        if !(eps > 0.0 && eps <= 1.0) {
            return Err(Error::InvalidConfig(format!(
                "odd-even scheme needs 0 < eps <= 1, got {eps}"
            )));
        }
        if !model.is_relaxation()
            || !matches!(model.chemotactic_kernel(), ChemotacticKernel::PositivePart)
        {
            return Err(Error::InvalidModel(
                "odd-even scheme supports the relaxation and positive-part kernels only".into(),
            ));
        }
        let grid = model.grid();
        let m_full = model.equilibrium();
        if (0..=grid.nv()).any(|j| (m_full[j] - m_full[grid.mirror(j)]).abs() > MODEL_CHECK_TOL) {
            return Err(Error::InvalidModel("odd-even scheme needs an even equilibrium".into()));
        }
        reaction.validate()?;
        let idx: Vec<usize> = half_nodes(grid).collect();
        Ok(Self {
            v: idx.iter().map(|&j| grid.nodes()[j]).collect(),
            m: idx.iter().map(|&j| m_full[j]).collect(),
            space,
            model,
            reaction,
            eps,
        })
    }

    pub fn model(&self) -> &TurningModel {
        &self.model
    }

    pub fn space(&self) -> &SpatialGrid {
        &self.space
    }

    pub fn from_distribution(&self, f: &[f64], s: Vec<f64>) -> Result<ParityState> {
        let grid = self.model.grid();
        let len = grid.nv() + 1;
        check_len(f.len(), (self.space.nx() + 1) * len)?;
        check_len(s.len(), self.space.nx() + 1)?;
        let (mut r, mut j) = (Vec::new(), Vec::new());
        for fi in f.chunks(len) {
            let (ri, ji) = parity_transform(fi, grid, self.eps)?;
            r.extend(ri);
            j.extend(ji);
        }
        Ok(ParityState {
            r,
            j,
            s,
            t: 0.0,
            eps: self.eps,
            stride: self.v.len(),
        })
    }

    /// Gaussian-peak data; `project` replaces `f_0` by `M n_0`.
    pub fn initialize(&self, total_mass: f64, project: bool) -> Result<ParityState> {
        let init = InitialData::gaussian_peak(&self.space, total_mass)?;
        let f: Vec<f64> = init
            .n0
            .iter()
            .flat_map(|&n| {
                if project {
                    InitialData::equilibrium_distribution(n, &self.model)
                } else {
                    init.distribution(n, &self.model)
                }
            })
            .collect();
        self.from_distribution(&f, vec![0.0; init.n0.len()])
    }

    /// Pointwise backward-Euler relaxation with `n` and `∂_x S` frozen at
    /// their values on entry. `r` is relaxed first and `∂_x r` in the `j`
    /// update is taken from the relaxed `r`; differencing the unrelaxed `r`
    /// instead amplifies its non-equilibrium part whenever `Δt > Δx² / 2`.
    pub fn collision_substep(&self, state: &mut ParityState, dt: f64) {
        let nx = self.space.nx();
        let dx = self.space.dx();
        let eps = self.eps;
        let h = self.v.len();
        let sigma = self.model.sigma();
        let n = state.density(self.model.grid());
        let ds = centered_gradient(&state.s, dx);
        let stiff = dt / (eps * eps);
        let denom: Vec<f64> = ds
            .iter()
            .map(|&d| 1.0 + stiff * sigma + dt / eps * self.model.positive_part_loss(d))
            .collect();
        for i in 0..=nx {
            for k in 0..h {
                let idx = i * h + k;
                let gain = stiff * sigma * self.m[k] + dt / eps * 0.5 * (self.v[k] * ds[i]).abs();
                state.r[idx] = (state.r[idx] + gain * n[i]) / denom[i];
            }
        }
        let r = &state.r;
        for i in 0..=nx {
            for k in 0..h {
                let at = |i: usize| r[i * h + k];
                let dr = if i == 0 {
                    (at(1) - at(0)) / dx
                } else if i == nx {
                    (at(nx) - at(nx - 1)) / dx
                } else {
                    (at(i + 1) - at(i - 1)) / (2.0 * dx)
                };
                let v = self.v[k];
                let idx = i * h + k;
                state.j[idx] = (state.j[idx]
                    + stiff * 0.5 * v * ds[i] * n[i]
                    + dt * (1.0 - 1.0 / (eps * eps)) * v * dr)
                    / denom[i];
            }
        }
    }

    /// Explicit transport of `w± = r ± j` at speeds `±v`.
    pub fn transport_substep(&self, state: &mut ParityState, dt: f64) {
        let nx = self.space.nx();
        let dx = self.space.dx();
        let h = self.v.len();
        let mut r_new = state.r.clone();
        let mut j_new = state.j.clone();
        for k in 0..h {
            let v = self.v[k];
            if v == 0.0 {
                continue;
            }
            let wp = |i: usize| state.r[i * h + k] + state.j[i * h + k];
            let wm = |i: usize| state.r[i * h + k] - state.j[i * h + k];
            for i in 1..nx {
                let dwp = if i == 1 {
                    (wp(1) - wp(0)) / dx
                } else {
                    (3.0 * wp(i) - 4.0 * wp(i - 1) + wp(i - 2)) / (2.0 * dx)
                };
                let dwm = if i == nx - 1 {
                    (wm(nx) - wm(nx - 1)) / dx
                } else {
                    (-3.0 * wm(i) + 4.0 * wm(i + 1) - wm(i + 2)) / (2.0 * dx)
                };
                let p = wp(i) - dt * v * dwp;
                let m = wm(i) + dt * v * dwm;
                r_new[i * h + k] = 0.5 * (p + m);
                j_new[i * h + k] = 0.5 * (p - m);
            }
        }
        state.r = r_new;
        state.j = j_new;
    }

    /// Robin rows `r ∓ ε v ∂_x r = 0` (one-sided differences) with `j` from
    /// the vacuum condition `r ± ε j = 0`.
    pub fn apply_boundary(&self, state: &mut ParityState) {
        let nx = self.space.nx();
        let dx = self.space.dx();
        let h = self.v.len();
        let eps = self.eps;
        for k in 0..h {
            let v = self.v[k];
            let c = 1.0 / (dx + eps * v);
            let (r1, rn1) = (state.r[h + k], state.r[(nx - 1) * h + k]);
            state.r[k] = eps * v * r1 * c;
            state.j[k] = -v * r1 * c;
            state.r[nx * h + k] = eps * v * rn1 * c;
            state.j[nx * h + k] = v * rn1 * c;
        }
    }

    pub fn step(&self, state: &mut ParityState, dt: f64) -> Result<()> {
        self.collision_substep(state, dt);
        self.apply_boundary(state);
        self.transport_substep(state, dt);
        self.apply_boundary(state);
        let n = state.density(self.model.grid());
        state.s = chemo_step(&state.s, &n, &self.reaction, &self.space, dt)?;
        state.t += dt;
        Ok(())
    }
}
