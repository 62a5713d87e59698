use serde::Serialize;

use crate::chemo::ReactionParams;
use crate::error::{Error, Result};
use crate::grid::SpatialGrid;
use crate::initial::InitialData;
use crate::kinetic_ops::TurningModel;
use crate::mm_scheme::{MacroMode, MmSolver, MmState};
use crate::reference_schemes::{
    ks_step, ExplicitKinetic, KineticState, KsMode, KsState, OddEven, ParityState,
};

use super::config::{RunConfig, Scheme};

/// Densities beyond this magnitude count as a blow-up.
pub const BLOW_UP_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Snapshot {
    pub t: f64,
    pub n: Vec<f64>,
    pub s: Vec<f64>,
    /// `f` at each node when the run records distributions.
    pub f: Option<Vec<Vec<f64>>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BlowUp {
    pub t: f64,
    pub step: usize,
}

/// Run-level diagnostics. Mass is half-weighted for the micro-macro schemes
/// and full-weighted for the explicit kinetic scheme, matching the
/// respective conservation forms; the other schemes report no audit.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct Diagnostics {
    pub steps: usize,
    pub max_abs_n: f64,
    pub initial_mass: f64,
    pub final_mass: f64,
    pub accumulated_flux: Option<f64>,
    /// Largest `|Δmass - flux| / mass` over single steps.
    pub max_step_mass_defect: Option<f64>,
    /// Largest `max_k |⟨g_k⟩| / max|g|` over steps.
    pub max_relative_bracket_g: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub x: Vec<f64>,
    pub dt: f64,
    pub snapshots: Vec<Snapshot>,
    /// Set when the run stopped early; the last snapshot is then the last
    /// finite state.
    pub blow_up: Option<BlowUp>,
    pub diagnostics: Diagnostics,
}

impl Trajectory {
    pub fn last(&self) -> &Snapshot {
        self.snapshots.last().expect("a trajectory holds at least the initial state")
    }

    pub fn final_density(&self) -> &[f64] {
        &self.last().n
    }
}

enum Runner {
    Mm {
        solver: MmSolver,
        state: MmState,
        mode: MacroMode,
    },
    Kinetic {
        scheme: ExplicitKinetic,
        state: KineticState,
    },
    Ks {
        state: KsState,
        d: f64,
        chi: f64,
    },
    OddEven {
        scheme: OddEven,
        state: ParityState,
    },
}

struct StepAudit {
    mass_before: f64,
    mass_after: f64,
    flux: f64,
    bracket: Option<f64>,
}

impl Runner {
    fn new(cfg: &RunConfig, space: &SpatialGrid, model: &TurningModel) -> Result<Self> {
        let reaction = cfg.reaction();
        let project = cfg.projects_initial();
        Ok(match cfg.scheme {
            Scheme::MmExplicit | Scheme::MmImplicit => {
                let solver = MmSolver::new(space.clone(), model.clone(), reaction, cfg.eps)?;
                let mut state = solver.initialize(cfg.total_mass)?;
                if project {
                    let len = model.grid().nv() + 1;
                    state.g[len..(space.nx() + 1) * len].fill(0.0);
                    let n = state.n.clone();
                    solver.apply_ghost_faces(&mut state.g, &n);
                }
                let mode = if cfg.scheme == Scheme::MmExplicit {
                    MacroMode::Explicit
                } else {
                    MacroMode::Implicit
                };
                Runner::Mm { solver, state, mode }
            }
            Scheme::ExplicitKinetic => {
                let scheme = ExplicitKinetic::new(space.clone(), model.clone(), reaction, cfg.eps)?;
                let state = scheme.initialize(cfg.total_mass, project)?;
                Runner::Kinetic { scheme, state }
            }
            Scheme::KellerSegel => {
                let init = InitialData::gaussian_peak(space, cfg.total_mass)?;
                let d = model.diffusion_coefficient();
                let chi = model.drift_coefficient(1.0);
                let state = KsState {
                    s: vec![0.0; init.n0.len()],
                    n: init.n0,
                    t: 0.0,
                };
                Runner::Ks { state, d, chi }
            }
            Scheme::OddEven => {
                let scheme = OddEven::new(space.clone(), model.clone(), reaction, cfg.eps)?;
                let state = scheme.initialize(cfg.total_mass, project)?;
                Runner::OddEven { scheme, state }
            }
        })
    }

    fn step(
        &mut self,
        dt: f64,
        space: &SpatialGrid,
        reaction: &ReactionParams,
    ) -> Result<Option<StepAudit>> {
        Ok(match self {
            Runner::Mm { solver, state, mode } => {
                let rep = solver.step(state, dt, *mode)?;
                Some(StepAudit {
                    mass_before: rep.mass_before,
                    mass_after: rep.mass_after,
                    flux: rep.boundary_flux,
                    bracket: Some(if rep.max_abs_g > 0.0 {
                        rep.max_bracket_g / rep.max_abs_g
                    } else {
                        0.0
                    }),
                })
            }
            Runner::Kinetic { scheme, state } => {
                let rep = scheme.step(state, dt)?;
                Some(StepAudit {
                    mass_before: rep.mass_before,
                    mass_after: rep.mass_after,
                    flux: rep.boundary_flux,
                    bracket: None,
                })
            }
            Runner::Ks { state, d, chi } => {
                ks_step(state, space, dt, *d, *chi, KsMode::Implicit, reaction)?;
                None
            }
            Runner::OddEven { scheme, state } => {
                scheme.step(state, dt)?;
                None
            }
        })
    }

    fn set_time(&mut self, t: f64) {
        match self {
            Runner::Mm { state, .. } => state.t = t,
            Runner::Kinetic { state, .. } => state.t = t,
            Runner::Ks { state, .. } => state.t = t,
            Runner::OddEven { state, .. } => state.t = t,
        }
    }

    fn density(&self, model: &TurningModel) -> Vec<f64> {
        match self {
            Runner::Mm { state, .. } => state.n.clone(),
            Runner::Kinetic { state, .. } => state.density(model),
            Runner::Ks { state, .. } => state.n.clone(),
            Runner::OddEven { state, .. } => state.density(model.grid()),
        }
    }

    fn chemo(&self) -> Vec<f64> {
        match self {
            Runner::Mm { state, .. } => state.s.clone(),
            Runner::Kinetic { state, .. } => state.s.clone(),
            Runner::Ks { state, .. } => state.s.clone(),
            Runner::OddEven { state, .. } => state.s.clone(),
        }
    }

    fn distribution(&self, model: &TurningModel, nodes: usize) -> Option<Vec<Vec<f64>>> {
        match self {
            Runner::Mm { state, .. } => {
                Some((0..nodes).map(|i| state.distribution_at(i, model)).collect())
            }
            Runner::Kinetic { state, .. } => {
                Some((0..nodes).map(|i| state.node(i).to_vec()).collect())
            }
            Runner::Ks { .. } => None,
            Runner::OddEven { state, .. } => {
                Some((0..nodes).map(|i| state.distribution_at(i, model.grid())).collect())
            }
        }
    }

    fn is_finite(&self) -> bool {
        match self {
            Runner::Mm { state, .. } => state.is_finite(),
            Runner::Kinetic { state, .. } => state.f.iter().chain(&state.s).all(|x| x.is_finite()),
            Runner::Ks { state, .. } => state.n.iter().chain(&state.s).all(|x| x.is_finite()),
            Runner::OddEven { state, .. } => {
                state.r.iter().chain(&state.j).chain(&state.s).all(|x| x.is_finite())
            }
        }
    }
}

fn max_abs(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |a, x| a.max(x.abs()))
}

/// Any scheme advanced on demand, for interactive drivers.
pub struct Simulation {
    runner: Runner,
    space: SpatialGrid,
    model: TurningModel,
    reaction: ReactionParams,
    dt: f64,
    t: f64,
    steps: usize,
}

impl Simulation {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let space = cfg.spatial_grid()?;
        let model = cfg.model()?;
        let runner = Runner::new(cfg, &space, &model)?;
        Ok(Self {
            runner,
            space,
            model,
            reaction: cfg.reaction(),
            dt: cfg.dt(),
            t: 0.0,
            steps: 0,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn x(&self) -> Vec<f64> {
        self.space.nodes()
    }

    pub fn density(&self) -> Vec<f64> {
        self.runner.density(&self.model)
    }

    pub fn chemoattractant(&self) -> Vec<f64> {
        self.runner.chemo()
    }

    /// Steps until time `t`, shortening the last step to land on it.
    /// Fails with [`Error::BlowUp`] once the state leaves the finite range.
    pub fn advance_to(&mut self, t: f64) -> Result<()> {
        while t - self.t > 1e-9 * self.dt {
            let remaining = t - self.t;
            let h = if remaining <= self.dt * (1.0 + 1e-6) { remaining } else { self.dt };
            self.runner.step(h, &self.space, &self.reaction)?;
            self.steps += 1;
            self.t = if h == remaining { t } else { self.t + h };
            self.runner.set_time(self.t);
            if !self.runner.is_finite() || !(max_abs(&self.density()) < BLOW_UP_LIMIT) {
                return Err(Error::BlowUp { t: self.t, step: self.steps });
            }
        }
        Ok(())
    }
}

/// Runs `cfg` from the Gaussian-peak data to `t_end`, recording the initial
/// state, every requested snapshot time and the final state. Steps are
/// shortened so that each recorded time is hit exactly.
pub fn run(cfg: &RunConfig) -> Result<Trajectory> {
    cfg.validate()?;
    let space = cfg.spatial_grid()?;
    let model = cfg.model()?;
    let dt = cfg.dt();
    let nodes = space.nx() + 1;
    let reaction = cfg.reaction();
    let mut runner = Runner::new(cfg, &space, &model)?;

    let mut targets: Vec<f64> = cfg
        .snapshots
        .iter()
        .copied()
        .chain(std::iter::once(cfg.t_end))
        .filter(|&t| t > 0.0)
        .collect();
    targets.sort_by(f64::total_cmp);
    targets.dedup();

    let snapshot = |runner: &Runner, t: f64| Snapshot {
        t,
        n: runner.density(&model),
        s: runner.chemo(),
        f: cfg
            .record_distribution
            .then(|| runner.distribution(&model, nodes))
            .flatten(),
    };
    let mut snapshots = vec![snapshot(&runner, 0.0)];
    let n0 = &snapshots[0].n;
    let mut diag = Diagnostics {
        max_abs_n: max_abs(n0),
        initial_mass: space.integrate(n0),
        ..Diagnostics::default()
    };
    let mut last_good = (snapshots[0].n.clone(), snapshots[0].s.clone());
    let mut blow_up = None;
    let mut t = 0.0;

    'outer: for &target in &targets {
        while target - t > 1e-9 * dt {
            let remaining = target - t;
            let h = if remaining <= dt * (1.0 + 1e-6) { remaining } else { dt };
            let audit = runner.step(h, &space, &reaction)?;
            diag.steps += 1;
            t = if h == remaining { target } else { t + h };
            runner.set_time(t);

            let n = runner.density(&model);
            let peak = max_abs(&n);
            if !runner.is_finite() || !(peak < BLOW_UP_LIMIT) {
                blow_up = Some(BlowUp { t, step: diag.steps });
                break 'outer;
            }
            diag.max_abs_n = diag.max_abs_n.max(peak);
            if let Some(a) = audit {
                *diag.accumulated_flux.get_or_insert(0.0) += a.flux;
                let defect = (a.mass_after - a.mass_before - a.flux).abs() / a.mass_before.abs();
                let d = diag.max_step_mass_defect.get_or_insert(0.0);
                *d = d.max(defect);
                if let Some(b) = a.bracket {
                    let m = diag.max_relative_bracket_g.get_or_insert(0.0);
                    *m = m.max(b);
                }
            }
            last_good = (n, runner.chemo());
        }
        snapshots.push(snapshot(&runner, target));
    }

    if let Some(b) = blow_up {
        let (n, s) = last_good;
        snapshots.push(Snapshot { t: b.t, n, s, f: None });
    }
    diag.final_mass = space.integrate(&snapshots.last().expect("nonempty").n);
    if let (Some(_), Scheme::ExplicitKinetic) = (diag.accumulated_flux, cfg.scheme) {
        // Full-weight mass, matching the explicit scheme's conservation form.
        let full = |n: &[f64]| space.dx() * n.iter().sum::<f64>();
        diag.initial_mass = full(&snapshots[0].n);
        diag.final_mass = full(&snapshots.last().expect("nonempty").n);
    }

    Ok(Trajectory {
        x: space.nodes(),
        dt,
        snapshots,
        blow_up,
        diagnostics: diag,
    })
}
