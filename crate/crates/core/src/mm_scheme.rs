//! Micro-macro asymptotic-preserving solver.
//!
//! The distribution is split as `f = M n + ε g` with `⟨g⟩ = 0`. The density
//! `n` and the chemoattractant `S` live on the spatial nodes; `g` lives on the
//! staggered faces `x_{i+1/2}`, including one ghost face beyond each end that
//! carries the inflow closure.
//!
//! A step runs: implicit-in-`𝒯_0` micro update of `g`, boundary densities,
//! interior macro update (explicit or implicit diffusion), ghost faces, and
//! finally the chemoattractant.

use serde::{Deserialize, Serialize};

use crate::chemo::{chemo_step, thomas_solve, ReactionParams, TridiagonalSystem};
use crate::error::{check_len, Error, Result};
use crate::grid::SpatialGrid;
use crate::initial::InitialData;
use crate::kinetic_ops::TurningModel;
use crate::linalg::DenseLu;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MacroMode {
    #[default]
    Explicit,
    Implicit,
}

/// Solver state. `g` is stored face-major with `nv + 1` entries per face;
/// face index `k` holds `x_{k - 1/2}`, so `k = 0` and `k = nx + 1` are ghosts.
#[derive(Debug, Clone, PartialEq)]
pub struct MmState {
    pub n: Vec<f64>,
    pub g: Vec<f64>,
    pub s: Vec<f64>,
    pub t: f64,
    pub eps: f64,
    stride: usize,
}

impl MmState {
    pub fn new(n: Vec<f64>, g: Vec<f64>, s: Vec<f64>, eps: f64, nv: usize) -> Result<Self> {
        let nodes = n.len();
        check_len(s.len(), nodes)?;
        check_len(g.len(), (nodes + 1) * (nv + 1))?;
        Ok(Self {
            n,
            g,
            s,
            t: 0.0,
            eps,
            stride: nv + 1,
        })
    }

    /// Number of faces including both ghosts.
    pub fn num_faces(&self) -> usize {
        self.n.len() + 1
    }

    pub fn face(&self, k: usize) -> &[f64] {
        &self.g[k * self.stride..(k + 1) * self.stride]
    }

    pub fn face_mut(&mut self, k: usize) -> &mut [f64] {
        &mut self.g[k * self.stride..(k + 1) * self.stride]
    }

    /// `f` at node `i`, with `g` averaged from the two adjacent faces.
    pub fn distribution_at(&self, i: usize, model: &TurningModel) -> Vec<f64> {
        let (gl, gr) = (self.face(i), self.face(i + 1));
        model
            .equilibrium()
            .iter()
            .zip(gl.iter().zip(gr))
            .map(|(m, (a, b))| m * self.n[i] + 0.5 * self.eps * (a + b))
            .collect()
    }

    pub fn is_finite(&self) -> bool {
        self.n.iter().chain(&self.g).chain(&self.s).all(|x| x.is_finite())
    }
}

/// Diagnostics for one step. Masses use half weights at the boundary nodes,
/// and `boundary_flux` is the net inflow over the step, so that
/// `mass_after - mass_before == boundary_flux` up to round-off.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct StepReport {
    pub mass_before: f64,
    pub mass_after: f64,
    pub max_abs_g: f64,
    pub boundary_flux: f64,
    /// `max_k |⟨g_k⟩|` over interior faces.
    pub max_bracket_g: f64,
}

/// Prescribed incoming distributions `f_l(v)` (used for `v > 0`) and
/// `f_r(v)` (used for `v < 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct Inflow {
    pub left: Vec<f64>,
    pub right: Vec<f64>,
}

impl Inflow {
    pub fn vacuum(nv: usize) -> Self {
        Self {
            left: vec![0.0; nv + 1],
            right: vec![0.0; nv + 1],
        }
    }
}

/// `α = Δt² ⟨v² M⟩ / ((ε² + σ Δt) Δx²)`, the off-diagonal weight of the
/// implicit macro system. Tends to `Δt D_n / Δx²` as `ε → 0`.
pub fn implicit_alpha(model: &TurningModel, eps: f64, dt: f64, dx: f64) -> f64 {
    implicit_kappa(model, eps, dt) * dt / (dx * dx)
}

fn implicit_kappa(model: &TurningModel, eps: f64, dt: f64) -> f64 {
    let grid = model.grid();
    let v2m: f64 = grid
        .weights()
        .iter()
        .zip(grid.nodes())
        .zip(model.equilibrium())
        .map(|((w, v), m)| w * v * v * m)
        .sum();
    dt * v2m / (eps * eps + model.sigma() * dt)
}

#[derive(Debug, Clone)]
pub struct MmSolver {
    space: SpatialGrid,
    model: TurningModel,
    reaction: ReactionParams,
    eps: f64,
    inflow: Inflow,
    /// `(τ, LU of I - τ 𝒯_0)` for general kernels.
    micro_lu: Option<(f64, DenseLu)>,
}

impl MmSolver {
    pub fn new(
        space: SpatialGrid,
        model: TurningModel,
        reaction: ReactionParams,
        eps: f64,
    ) -> Result<Self> {
        if !(eps > 0.0) || !eps.is_finite() {
            return Err(Error::InvalidConfig(format!("eps must be positive, got {eps}")));
        }
        reaction.validate()?;
        let nv = model.grid().nv();
        Ok(Self {
            space,
            model,
            reaction,
            eps,
            inflow: Inflow::vacuum(nv),
            micro_lu: None,
        })
    }

    pub fn with_inflow(mut self, inflow: Inflow) -> Result<Self> {
        let len = self.model.grid().nv() + 1;
        check_len(inflow.left.len(), len)?;
        check_len(inflow.right.len(), len)?;
        self.inflow = inflow;
        Ok(self)
    }

    pub fn space(&self) -> &SpatialGrid {
        &self.space
    }

    pub fn model(&self) -> &TurningModel {
        &self.model
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    /// Gaussian-peak data: `n_0` on nodes, `g_0 = (f_0 - M n_0) / ε` on faces
    /// with face densities averaged from nodes, `S_0 = 0`.
    pub fn initialize(&self, total_mass: f64) -> Result<MmState> {
        let init = InitialData::gaussian_peak(&self.space, total_mass)?;
        let m = self.model.equilibrium();
        let nx = self.space.nx();
        let stride = m.len();
        let mut g = vec![0.0; (nx + 2) * stride];
        for k in 1..=nx {
            let n_face = 0.5 * (init.n0[k - 1] + init.n0[k]);
            let f0 = init.distribution(n_face, &self.model);
            for ((out, f), m) in g[k * stride..(k + 1) * stride].iter_mut().zip(&f0).zip(m) {
                *out = (f - m * n_face) / self.eps;
            }
        }
        let mut state = MmState::new(init.n0, g, vec![0.0; nx + 1], self.eps, stride - 1)?;
        let n = state.n.clone();
        self.apply_ghost_faces(&mut state.g, &n);
        Ok(state)
    }

    /// Micro update on every interior face. Ghost entries of the result are
    /// copied from `state` and must be refreshed by [`Self::apply_ghost_faces`].
    pub fn micro_step(&mut self, state: &MmState, dt: f64) -> Result<Vec<f64>> {
        let nx = self.space.nx();
        let dx = self.space.dx();
        let eps = self.eps;
        let tau = dt / (eps * eps);
        let vgrid = self.model.grid().clone();
        let v = vgrid.nodes();
        let m = self.model.equilibrium();
        let len = v.len();

        if !self.model.is_relaxation() && self.micro_lu.as_ref().map(|c| c.0) != Some(tau) {
            let mut a = self.model.t0_matrix();
            for (idx, x) in a.iter_mut().enumerate() {
                *x *= -tau;
                if idx / len == idx % len {
                    *x += 1.0;
                }
            }
            self.micro_lu = Some((tau, DenseLu::factor(a, len)?));
        }
        let relax_scale = 1.0 / (1.0 + tau * self.model.sigma() * self.model.mid_mass());

        let mut out = state.g.clone();
        let mut transport = vec![0.0; len];
        let mut t1m = vec![0.0; len];
        let mut t1g = vec![0.0; len];
        let mut rhs = vec![0.0; len];
        for k in 1..=nx {
            let (gl, gc, gr) = (state.face(k - 1), state.face(k), state.face(k + 1));
            let (i, ip) = (k - 1, k);
            let n_face = 0.5 * (state.n[i] + state.n[ip]);
            let dn = (state.n[ip] - state.n[i]) / dx;
            let ds = (state.s[ip] - state.s[i]) / dx;

            for j in 0..len {
                transport[j] = if v[j] > 0.0 {
                    v[j] * (gc[j] - gl[j]) / dx
                } else {
                    v[j] * (gr[j] - gc[j]) / dx
                };
            }
            let mean_t = vgrid.quad(&transport);
            self.model.apply_t1_into(ds, m, &mut t1m);
            self.model.apply_t1_into(ds, gc, &mut t1g);
            for j in 0..len {
                rhs[j] = gc[j] - dt / eps * (transport[j] - m[j] * mean_t)
                    + tau * (n_face * t1m[j] - v[j] * m[j] * dn)
                    + dt / eps * t1g[j];
            }
            // The exact right-hand side is mean-zero; removing its round-off
            // mean keeps ⟨g⟩ at machine precision for tiny ε.
            let mean_rhs = vgrid.quad(&rhs);
            for (r, mj) in rhs.iter_mut().zip(m) {
                *r -= mj * mean_rhs;
            }

            let dst = &mut out[k * len..(k + 1) * len];
            match &self.micro_lu {
                Some((_, lu)) if !self.model.is_relaxation() => {
                    let sol = lu.solve(&rhs);
                    let mean = vgrid.quad(&sol);
                    for ((d, s), mj) in dst.iter_mut().zip(&sol).zip(m) {
                        *d = s - mj * mean;
                    }
                }
                _ => {
                    for (d, r) in dst.iter_mut().zip(&rhs) {
                        *d = r * relax_scale;
                    }
                }
            }
        }
        Ok(out)
    }

    fn face_flux(&self, g: &[f64], k: usize) -> f64 {
        let len = self.model.grid().nv() + 1;
        self.model.grid().quad_v(&g[k * len..(k + 1) * len])
    }

    /// `n_i - Δt ⟨v (g_{i+1/2} - g_{i-1/2})⟩ / Δx` on interior nodes;
    /// the boundary entries are returned unchanged.
    pub fn macro_step_explicit(&self, state: &MmState, g_new: &[f64], dt: f64) -> Vec<f64> {
        let nx = self.space.nx();
        let r = dt / self.space.dx();
        let flux: Vec<f64> = (0..=nx + 1).map(|k| self.face_flux(g_new, k)).collect();
        let mut n = state.n.clone();
        for i in 1..nx {
            n[i] -= r * (flux[i + 1] - flux[i]);
        }
        n
    }

    /// Implicit-diffusion macro update for the relaxation kernel, with the
    /// boundary densities `(n_0, n_Nx)` at the new time level as Dirichlet data.
    pub fn macro_step_implicit(
        &self,
        state: &MmState,
        g_new: &[f64],
        boundary: (f64, f64),
        dt: f64,
    ) -> Result<Vec<f64>> {
        if !self.model.is_relaxation() {
            return Err(Error::InvalidModel(
                "implicit macro update requires the relaxation kernel".into(),
            ));
        }
        let nx = self.space.nx();
        let dx = self.space.dx();
        let kappa = implicit_kappa(&self.model, self.eps, dt);
        let alpha = kappa * dt / (dx * dx);
        let n = &state.n;
        // ⟨v ĝ⟩ at interior faces k = 1..nx.
        let flux_hat: Vec<f64> = (0..=nx)
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    self.face_flux(g_new, k) + kappa * (n[k] - n[k - 1]) / dx
                }
            })
            .collect();

        let mut result = n.clone();
        result[0] = boundary.0;
        result[nx] = boundary.1;
        if nx < 2 {
            return Ok(result);
        }
        let m = nx - 1;
        let mut rhs: Vec<f64> = (1..nx)
            .map(|i| n[i] - dt / dx * (flux_hat[i + 1] - flux_hat[i]))
            .collect();
        rhs[0] += alpha * boundary.0;
        rhs[m - 1] += alpha * boundary.1;
        let system = TridiagonalSystem {
            sub: vec![-alpha; m - 1],
            diag: vec![1.0 + 2.0 * alpha; m],
            sup: vec![-alpha; m - 1],
            rhs,
        };
        let interior = thomas_solve(&system)?;
        result[1..nx].copy_from_slice(&interior);
        Ok(result)
    }

    /// New boundary densities from the discrete conservation law at the two
    /// boundary nodes with the inflow ghost substituted.
    pub fn apply_boundary_density(&self, state: &MmState, g_new: &[f64], dt: f64) -> (f64, f64) {
        let vg = self.model.grid();
        let (v, w, m) = (vg.nodes(), vg.weights(), self.model.equilibrium());
        let len = v.len();
        let nx = self.space.nx();
        let (eps, r) = (self.eps, dt / self.space.dx());
        let g_left = &g_new[len..2 * len];
        let g_right = &g_new[nx * len..(nx + 1) * len];

        let (mut num_l, mut den_l, mut num_r, mut den_r) = (0.0, 0.0, 0.0, 0.0);
        for j in 0..len {
            let (vp, vm) = (v[j].max(0.0), v[j].min(0.0));
            num_l += w[j] * (2.0 * vp * g_left[j] - 2.0 * vp / eps * self.inflow.left[j]);
            den_l += w[j] * vp * m[j];
            num_r += w[j] * (2.0 * vm / eps * self.inflow.right[j] - 2.0 * vm * g_right[j]);
            den_r += w[j] * vm * m[j];
        }
        let n0 = (state.n[0] - r * num_l) / (1.0 + 2.0 * r / eps * den_l);
        let nn = (state.n[nx] - r * num_r) / (1.0 - 2.0 * r / eps * den_r);
        (n0, nn)
    }

    /// Ghost faces from the inflow closure: incoming velocities reflect
    /// through the prescribed boundary value, the others (and `v = 0`) copy
    /// the adjacent interior face.
    pub fn apply_ghost_faces(&self, g: &mut [f64], n_new: &[f64]) {
        let v = self.model.grid().nodes();
        let m = self.model.equilibrium();
        let len = v.len();
        let nx = self.space.nx();
        let eps = self.eps;
        for j in 0..len {
            let inner = g[len + j];
            g[j] = if v[j] > 0.0 {
                2.0 / eps * (self.inflow.left[j] - n_new[0] * m[j]) - inner
            } else {
                inner
            };
            let inner = g[nx * len + j];
            g[(nx + 1) * len + j] = if v[j] < 0.0 {
                2.0 / eps * (self.inflow.right[j] - n_new[nx] * m[j]) - inner
            } else {
                inner
            };
        }
    }

    /// One full time step.
    pub fn step(&mut self, state: &mut MmState, dt: f64, mode: MacroMode) -> Result<StepReport> {
        let nx = self.space.nx();
        let len = self.model.grid().nv() + 1;
        let mass_before = self.space.integrate(&state.n);

        let mut g_new = self.micro_step(state, dt)?;
        let boundary = self.apply_boundary_density(state, &g_new, dt);
        let mut n_new = match mode {
            MacroMode::Explicit => self.macro_step_explicit(state, &g_new, dt),
            MacroMode::Implicit => self.macro_step_implicit(state, &g_new, boundary, dt)?,
        };
        n_new[0] = boundary.0;
        n_new[nx] = boundary.1;
        self.apply_ghost_faces(&mut g_new, &n_new);

        let half = |a: usize, b: usize| 0.5 * (self.face_flux(&g_new, a) + self.face_flux(&g_new, b));
        let mut boundary_flux = dt * (half(0, 1) - half(nx, nx + 1));
        if mode == MacroMode::Implicit {
            let dx = self.space.dx();
            let kappa = implicit_kappa(&self.model, self.eps, dt);
            let correction = |k: usize| {
                kappa * ((state.n[k] - state.n[k - 1]) - (n_new[k] - n_new[k - 1])) / dx
            };
            boundary_flux += dt * (correction(1) - correction(nx));
        }

        state.s = chemo_step(&state.s, &n_new, &self.reaction, &self.space, dt)?;
        state.n = n_new;
        state.g = g_new;
        state.t += dt;

        let vg = self.model.grid();
        let max_bracket_g = (1..=nx)
            .map(|k| vg.quad(&state.g[k * len..(k + 1) * len]).abs())
            .fold(0.0, f64::max);
        Ok(StepReport {
            mass_before,
            mass_after: self.space.integrate(&state.n),
            max_abs_g: state.g[len..(nx + 1) * len]
                .iter()
                .fold(0.0, |a, x| a.max(x.abs())),
            boundary_flux,
            max_bracket_g,
        })
    }
}
