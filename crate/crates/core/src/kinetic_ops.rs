//! Turning operators on the discrete velocity grid.
//!
//! The turning operator splits as `𝒯 = 𝒯_0 + ε 𝒯_1(S)`. Both parts are linear
//! integral operators evaluated with kernel values at panel midpoints and
//! node-averaged profiles, so the same bar convention as [`bracket`] applies.
//!
//! [`bracket`]: crate::grid::bracket

use std::fmt;
use std::sync::Arc;

use crate::error::{check_len, Error, Result};
use crate::grid::VelocityGrid;
use crate::linalg::DenseLu;

/// Tolerance for the structural checks run when a model is built.
pub const MODEL_CHECK_TOL: f64 = 1e-10;

pub type TurningKernelFn = Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>;
/// `T_1(∂_x S, v, v')`.
pub type ChemotacticKernelFn = Arc<dyn Fn(f64, f64, f64) -> f64 + Send + Sync>;

/// Dominant turning kernel `T_0(v, v')`.
#[derive(Clone)]
pub enum TurningKernel {
    /// `T_0(v, v') = σ M(v)`.
    Relaxation,
    General(TurningKernelFn),
}

/// Chemically biased kernel `T_1(S, v, v')`.
#[derive(Clone)]
pub enum ChemotacticKernel {
    /// `T_1 = (v ∂_x S)_+`, a function of the first velocity only.
    PositivePart,
    General(ChemotacticKernelFn),
}

impl fmt::Debug for TurningKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Relaxation => f.write_str("Relaxation"),
            Self::General(_) => f.write_str("General(..)"),
        }
    }
}

impl fmt::Debug for ChemotacticKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::PositivePart => f.write_str("PositivePart"),
            Self::General(_) => f.write_str("General(..)"),
        }
    }
}

/// Equilibrium `M`, turning rate `σ` and the two kernels, sampled on one grid.
#[derive(Clone, Debug)]
pub struct TurningModel {
    grid: VelocityGrid,
    sigma: f64,
    m: Vec<f64>,
    m_mid: Vec<f64>,
    turning: TurningKernel,
    chemotactic: ChemotacticKernel,
    /// `T_0(v_j, v̄_l)`, row-major `(nv+1) × nv`; empty for relaxation.
    t0_in: Vec<f64>,
    /// `Σ_l T_0(v̄_l, v_j)`; empty for relaxation.
    t0_out: Vec<f64>,
    /// `Δv Σ_l M(v̄_l)`.
    mid_mass: f64,
    /// `Δv Σ_l (v̄_l)_+` and `Δv Σ_l (-v̄_l)_+`.
    pos_mid: f64,
    neg_mid: f64,
}

impl TurningModel {
    /// Relaxation model with uniform equilibrium `M = 1 / (2 v_max)` and the
    /// positive-part chemotactic kernel.
    pub fn relaxation(grid: &VelocityGrid, sigma: f64) -> Result<Self> {
        let height = 0.5 / grid.v_max();
        Self::new(
            grid,
            move |_| height,
            sigma,
            TurningKernel::Relaxation,
            ChemotacticKernel::PositivePart,
        )
    }

    pub fn new(
        grid: &VelocityGrid,
        equilibrium: impl Fn(f64) -> f64,
        sigma: f64,
        turning: TurningKernel,
        chemotactic: ChemotacticKernel,
    ) -> Result<Self> {
        if !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidModel(format!("sigma must be positive, got {sigma}")));
        }
        let m = grid.profile(&equilibrium);
        let m_mid: Vec<f64> = grid.midpoints().iter().map(|&v| equilibrium(v)).collect();
        if m.iter().chain(&m_mid).any(|&x| !(x > 0.0) || !x.is_finite()) {
            return Err(Error::InvalidModel("equilibrium must be positive".into()));
        }
        let mass = grid.quad(&m);
        if (mass - 1.0).abs() > MODEL_CHECK_TOL {
            return Err(Error::InvalidModel(format!("bracket(M) = {mass}, expected 1")));
        }
        let flux = grid.quad_v(&m);
        if flux.abs() > MODEL_CHECK_TOL {
            return Err(Error::InvalidModel(format!("bracket(vM) = {flux}, expected 0")));
        }

        let dv = grid.dv();
        let mid = grid.midpoints();
        let (t0_in, t0_out) = match &turning {
            TurningKernel::Relaxation => (Vec::new(), Vec::new()),
            TurningKernel::General(t0) => {
                let nodes = grid.nodes();
                for (a, (&v, &mv)) in nodes.iter().zip(&m).enumerate() {
                    for (&w, &mw) in nodes[a..].iter().zip(&m[a..]) {
                        let (k_vw, k_wv) = (t0(v, w), t0(w, v));
                        let scale = 1.0 + k_vw.abs() * mw + k_wv.abs() * mv;
                        if (k_wv * mv - k_vw * mw).abs() > MODEL_CHECK_TOL * scale {
                            return Err(Error::InvalidModel(format!(
                                "detailed balance fails at (v, v') = ({v}, {w})"
                            )));
                        }
                        if k_vw < sigma * mv - MODEL_CHECK_TOL || k_wv < sigma * mw - MODEL_CHECK_TOL
                        {
                            return Err(Error::InvalidModel(format!(
                                "T0 >= sigma M fails at (v, v') = ({v}, {w})"
                            )));
                        }
                    }
                }
                let t0_in = nodes
                    .iter()
                    .flat_map(|&v| mid.iter().map(move |&w| (v, w)))
                    .map(|(v, w)| t0(v, w))
                    .collect();
                let t0_out = nodes
                    .iter()
                    .map(|&v| mid.iter().map(|&w| t0(w, v)).sum())
                    .collect();
                (t0_in, t0_out)
            }
        };

        Ok(Self {
            grid: grid.clone(),
            sigma,
            mid_mass: dv * m_mid.iter().sum::<f64>(),
            pos_mid: dv * mid.iter().map(|v| v.max(0.0)).sum::<f64>(),
            neg_mid: dv * mid.iter().map(|v| (-v).max(0.0)).sum::<f64>(),
            m,
            m_mid,
            turning,
            chemotactic,
            t0_in,
            t0_out,
        })
    }

    pub fn with_chemotactic(mut self, kernel: ChemotacticKernel) -> Self {
        self.chemotactic = kernel;
        self
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `M(v_j)` on the nodes.
    pub fn equilibrium(&self) -> &[f64] {
        &self.m
    }

    /// `M(v̄_l)` on the panel midpoints.
    pub fn equilibrium_mid(&self) -> &[f64] {
        &self.m_mid
    }

    pub fn is_relaxation(&self) -> bool {
        matches!(self.turning, TurningKernel::Relaxation)
    }

    pub fn turning_kernel(&self) -> &TurningKernel {
        &self.turning
    }

    pub fn chemotactic_kernel(&self) -> &ChemotacticKernel {
        &self.chemotactic
    }

    /// `Δv Σ_l M(v̄_l)`, the loss rate of the relaxation operator per unit `σ`.
    pub fn mid_mass(&self) -> f64 {
        self.mid_mass
    }

    /// `𝒯_0(G)_j = Δv (Σ_l T_0(v_j, v̄_l) Ḡ_l - G_j Σ_l T_0(v̄_l, v_j))`.
    pub fn apply_t0(&self, g: &[f64]) -> Result<Vec<f64>> {
        check_len(g.len(), self.grid.nv() + 1)?;
        let mut out = vec![0.0; g.len()];
        self.apply_t0_into(g, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_t0_into(&self, g: &[f64], out: &mut [f64]) {
        let dv = self.grid.dv();
        match &self.turning {
            TurningKernel::Relaxation => {
                let mean = self.grid.quad(g);
                for ((o, &gj), &mj) in out.iter_mut().zip(g).zip(&self.m) {
                    *o = self.sigma * (mj * mean - gj * self.mid_mass);
                }
            }
            TurningKernel::General(_) => {
                let nv = self.grid.nv();
                let bar: Vec<f64> = g.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
                for (j, o) in out.iter_mut().enumerate() {
                    let row = &self.t0_in[j * nv..(j + 1) * nv];
                    let gain: f64 = row.iter().zip(&bar).map(|(k, b)| k * b).sum();
                    *o = dv * (gain - g[j] * self.t0_out[j]);
                }
            }
        }
    }

    /// `𝒯_1(S)(G)_j = Δv (Σ_l T_1(S, v_j, v̄_l) Ḡ_l - G_j Σ_l T_1(S, v̄_l, v_j))`,
    /// with `ds` the face value of `∂_x S`.
    pub fn apply_t1(&self, ds: f64, g: &[f64]) -> Result<Vec<f64>> {
        check_len(g.len(), self.grid.nv() + 1)?;
        let mut out = vec![0.0; g.len()];
        self.apply_t1_into(ds, g, &mut out);
        Ok(out)
    }

    pub(crate) fn apply_t1_into(&self, ds: f64, g: &[f64], out: &mut [f64]) {
        match &self.chemotactic {
            ChemotacticKernel::PositivePart => {
                let mean = self.grid.quad(g);
                let loss = self.positive_part_loss(ds);
                for ((o, &gj), &v) in out.iter_mut().zip(g).zip(self.grid.nodes()) {
                    *o = (v * ds).max(0.0) * mean - gj * loss;
                }
            }
            ChemotacticKernel::General(t1) => {
                let dv = self.grid.dv();
                let mid = self.grid.midpoints();
                let bar: Vec<f64> = g.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect();
                for ((o, &gj), &v) in out.iter_mut().zip(g).zip(self.grid.nodes()) {
                    let gain: f64 = mid.iter().zip(&bar).map(|(&w, b)| t1(ds, v, w) * b).sum();
                    let loss: f64 = mid.iter().map(|&w| t1(ds, w, v)).sum();
                    *o = dv * (gain - gj * loss);
                }
            }
        }
    }

    /// `Δv Σ_l (v̄_l ds)_+`.
    #[inline]
    pub(crate) fn positive_part_loss(&self, ds: f64) -> f64 {
        if ds >= 0.0 {
            ds * self.pos_mid
        } else {
            -ds * self.neg_mid
        }
    }

    /// Dense matrix of `𝒯_0`, row-major `(nv+1) × (nv+1)`.
    pub fn t0_matrix(&self) -> Vec<f64> {
        let n = self.grid.nv() + 1;
        let mut a = vec![0.0; n * n];
        let mut unit = vec![0.0; n];
        let mut col = vec![0.0; n];
        for c in 0..n {
            unit[c] = 1.0;
            self.apply_t0_into(&unit, &mut col);
            unit[c] = 0.0;
            for r in 0..n {
                a[r * n + c] = col[r];
            }
        }
        a
    }

    /// Solves `𝒯_0(G) = rhs` with `⟨G⟩ = 0`; `rhs` must be mean-zero.
    pub fn solve_t0(&self, rhs: &[f64]) -> Result<Vec<f64>> {
        check_len(rhs.len(), self.grid.nv() + 1)?;
        let residual = self.grid.quad(rhs);
        let scale = rhs.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        if residual.abs() > MODEL_CHECK_TOL * scale {
            return Err(Error::NotMeanZero { residual });
        }
        match self.turning {
            TurningKernel::Relaxation => {
                let k = -1.0 / (self.sigma * self.mid_mass);
                Ok(rhs.iter().map(|r| k * r).collect())
            }
            TurningKernel::General(_) => {
                // Bordered system [𝒯_0  M; w^T  0] [G; λ] = [rhs; 0].
                let n = self.grid.nv() + 1;
                let t0 = self.t0_matrix();
                let size = n + 1;
                let mut a = vec![0.0; size * size];
                for r in 0..n {
                    a[r * size..r * size + n].copy_from_slice(&t0[r * n..(r + 1) * n]);
                    a[r * size + n] = self.m[r];
                }
                a[n * size..n * size + n].copy_from_slice(self.grid.weights());
                let lu = DenseLu::factor(a, size)?;
                let mut b = rhs.to_vec();
                b.push(0.0);
                let mut x = lu.solve(&b);
                x.truncate(n);
                Ok(x)
            }
        }
    }

    /// `θ`, the mean-zero solution of `𝒯_0(θ) = v M`.
    pub fn theta(&self) -> Result<Vec<f64>> {
        let vm: Vec<f64> = self.grid.nodes().iter().zip(&self.m).map(|(v, m)| v * m).collect();
        self.solve_t0(&vm)
    }

    /// `D_n = -⟨v θ⟩`; for the relaxation kernel this is `⟨v² M⟩ / σ`.
    pub fn diffusion_coefficient(&self) -> f64 {
        match self.turning {
            TurningKernel::Relaxation => {
                let v2m: Vec<f64> = self
                    .grid
                    .nodes()
                    .iter()
                    .zip(&self.m)
                    .map(|(v, m)| v * v * m)
                    .collect();
                self.grid.quad(&v2m) / self.sigma
            }
            TurningKernel::General(_) => {
                let theta = self.theta().expect("v M is mean-zero for a valid model");
                -self.grid.quad_v(&theta)
            }
        }
    }

    /// `α(S) = -⟨(θ / M) 𝒯_1(S)(M)⟩`; for the relaxation kernel this is
    /// `⟨v 𝒯_1(S)(M)⟩ / σ`, and equals `χ ∂_x S` for the positive-part kernel.
    pub fn drift_coefficient(&self, ds: f64) -> f64 {
        let mut t1m = vec![0.0; self.m.len()];
        self.apply_t1_into(ds, &self.m, &mut t1m);
        match self.turning {
            TurningKernel::Relaxation => self.grid.quad_v(&t1m) / self.sigma,
            TurningKernel::General(_) => {
                let theta = self.theta().expect("v M is mean-zero for a valid model");
                let weighted: Vec<f64> = theta
                    .iter()
                    .zip(&self.m)
                    .zip(&t1m)
                    .map(|((th, m), t)| th / m * t)
                    .collect();
                -self.grid.quad(&weighted)
            }
        }
    }
}
