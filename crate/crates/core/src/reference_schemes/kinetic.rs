use crate::chemo::{chemo_step, ReactionParams};
use crate::error::{check_len, Error, Result};
use crate::grid::SpatialGrid;
use crate::initial::InitialData;
use crate::kinetic_ops::TurningModel;
use crate::mm_scheme::Inflow;

use super::centered_gradient;

/// Full distribution on nodes, stored node-major with `nv + 1` velocities.
#[derive(Debug, Clone, PartialEq)]
pub struct KineticState {
    pub f: Vec<f64>,
    pub s: Vec<f64>,
    pub t: f64,
    pub eps: f64,
    stride: usize,
}

impl KineticState {
    pub fn new(f: Vec<f64>, s: Vec<f64>, eps: f64, nv: usize) -> Result<Self> {
        check_len(f.len(), s.len() * (nv + 1))?;
        Ok(Self {
            f,
            s,
            t: 0.0,
            eps,
            stride: nv + 1,
        })
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.f[i * self.stride..(i + 1) * self.stride]
    }

    pub fn density(&self, model: &TurningModel) -> Vec<f64> {
        self.f.chunks(self.stride).map(|fi| model.grid().quad(fi)).collect()
    }
}

/// Full-weight mass audit of one explicit step: `mass_after - mass_before`
/// equals `boundary_flux` for a conservative turning operator.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct MassReport {
    pub mass_before: f64,
    pub mass_after: f64,
    pub boundary_flux: f64,
}

/// Forward Euler in time, first-order upwind in space. Not asymptotic
/// preserving: the step must resolve both `ε Δx` and `ε²`.
#[derive(Debug, Clone)]
pub struct ExplicitKinetic {
    space: SpatialGrid,
    model: TurningModel,
    reaction: ReactionParams,
    eps: f64,
    inflow: Inflow,
}

impl ExplicitKinetic {
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
        })
    }

    pub fn with_inflow(mut self, inflow: Inflow) -> Result<Self> {
        let len = self.model.grid().nv() + 1;
        check_len(inflow.left.len(), len)?;
        check_len(inflow.right.len(), len)?;
        self.inflow = inflow;
        Ok(self)
    }

    pub fn model(&self) -> &TurningModel {
        &self.model
    }

    pub fn space(&self) -> &SpatialGrid {
        &self.space
    }

    /// Gaussian-peak data; `project` replaces `f_0` by `M n_0`.
    pub fn initialize(&self, total_mass: f64, project: bool) -> Result<KineticState> {
        let init = InitialData::gaussian_peak(&self.space, total_mass)?;
        let f = init
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
        let nodes = init.n0.len();
        KineticState::new(f, vec![0.0; nodes], self.eps, self.model.grid().nv())
    }

    pub fn step(&self, state: &mut KineticState, dt: f64) -> Result<MassReport> {
        let nx = self.space.nx();
        let dx = self.space.dx();
        let eps = self.eps;
        let vg = self.model.grid();
        let v = vg.nodes();
        let len = v.len();
        let ds = centered_gradient(&state.s, dx);
        let mass_before = dx * state.density(&self.model).iter().sum::<f64>();

        let old = &state.f;
        let node = |i: usize| &old[i * len..(i + 1) * len];
        let mut f_new = vec![0.0; old.len()];
        let mut t0 = vec![0.0; len];
        let mut t1 = vec![0.0; len];
        for i in 0..=nx {
            let fi = node(i);
            let left = if i == 0 { &self.inflow.left[..] } else { node(i - 1) };
            let right = if i == nx { &self.inflow.right[..] } else { node(i + 1) };
            self.model.apply_t0_into(fi, &mut t0);
            self.model.apply_t1_into(ds[i], fi, &mut t1);
            let out = &mut f_new[i * len..(i + 1) * len];
            for j in 0..len {
                let grad = if v[j] > 0.0 {
                    v[j] * (fi[j] - left[j])
                } else {
                    v[j] * (right[j] - fi[j])
                };
                out[j] = fi[j] - dt / (eps * dx) * grad + dt / (eps * eps) * (t0[j] + eps * t1[j]);
            }
        }

        let (mut inflow, mut outflow) = (0.0, 0.0);
        let (f0, fnx) = (node(0), node(nx));
        for j in 0..len {
            let (vp, vm, w) = (v[j].max(0.0), v[j].min(0.0), vg.weights()[j]);
            inflow += w * (vp * self.inflow.left[j] - vm * self.inflow.right[j]);
            outflow += w * (vp * fnx[j] - vm * f0[j]);
        }
        let boundary_flux = dt / eps * (inflow - outflow);

        let n_new: Vec<f64> = f_new.chunks(len).map(|fi| vg.quad(fi)).collect();
        state.s = chemo_step(&state.s, &n_new, &self.reaction, &self.space, dt)?;
        state.f = f_new;
        state.t += dt;
        Ok(MassReport {
            mass_before,
            mass_after: dx * n_new.iter().sum::<f64>(),
            boundary_flux,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::VelocityGrid;
    use approx::assert_abs_diff_eq;

    fn scheme(nx: usize, nv: usize, eps: f64) -> ExplicitKinetic {
        let x = SpatialGrid::new(-1.0, 1.0, nx).unwrap();
        let v = VelocityGrid::new(-1.0, 1.0, nv).unwrap();
        let model = TurningModel::relaxation(&v, 1.0).unwrap();
        ExplicitKinetic::new(x, model, ReactionParams::default(), eps).unwrap()
    }

    #[test]
    fn constant_equilibrium_is_steady_with_matching_inflow() {
        let nbar = 1.3;
        let s = scheme(12, 8, 0.4);
        let m = s.model().equilibrium().to_vec();
        let feq: Vec<f64> = m.iter().map(|m| m * nbar).collect();
        let s = s
            .with_inflow(Inflow {
                left: feq.clone(),
                right: feq.clone(),
            })
            .unwrap();
        let mut st = KineticState::new(feq.repeat(13), vec![0.7; 13], 0.4, 8).unwrap();
        let params = ReactionParams { a: 0.7 / nbar, ..ReactionParams::default() };
        let s = ExplicitKinetic { reaction: params, ..s };
        s.step(&mut st, 0.01).unwrap();
        for (a, b) in st.f.iter().zip(feq.repeat(13)) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-14);
        }
        for x in st.s {
            assert_abs_diff_eq!(x, 0.7, epsilon = 1e-14);
        }
    }

    #[test]
    fn mass_change_matches_boundary_flux() {
        let s = scheme(40, 16, 0.5);
        let mut st = s.initialize(2.0, false).unwrap();
        for _ in 0..50 {
            let rep = s.step(&mut st, 0.005).unwrap();
            let drift = rep.mass_after - rep.mass_before - rep.boundary_flux;
            assert!(drift.abs() <= 1e-10 * rep.mass_before, "{drift}");
        }
    }

    #[test]
    fn projected_initial_data_is_equilibrium() {
        let s = scheme(10, 8, 1.0);
        let st = s.initialize(1.0, true).unwrap();
        let m = s.model().equilibrium();
        let n = st.density(s.model());
        for i in 0..=10 {
            for (f, mj) in st.node(i).iter().zip(m) {
                assert_abs_diff_eq!(*f, mj * n[i], epsilon = 1e-14);
            }
        }
    }
}
