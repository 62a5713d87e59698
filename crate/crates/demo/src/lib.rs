//! WebAssembly bindings for the browser demo: animate one scheme next to the
//! Keller-Segel limit, and measure the micro-macro distance to that limit.

use std::str::FromStr;

use kinchemo::harness::{relative_l2, run, DtPolicy, RunConfig, Scheme, Simulation};
use wasm_bindgen::prelude::*;

fn parse_scheme(name: &str) -> Result<Scheme, String> {
    Scheme::ALL
        .into_iter()
        .find(|s| s.name() == name)
        .ok_or_else(|| format!("unknown scheme `{name}`"))
}

fn config(scheme: Scheme, eps: f64, nx: usize, dt_policy: DtPolicy) -> RunConfig {
    RunConfig {
        scheme,
        eps,
        nx,
        dt_policy,
        ..RunConfig::default()
    }
}

/// One scheme and the Keller-Segel reference, advanced together frame by
/// frame from the Gaussian peak.
#[wasm_bindgen]
pub struct Animation {
    sim: Simulation,
    limit: Simulation,
}

#[wasm_bindgen]
impl Animation {
    /// `dt_policy` is one of `macroscopic`, `kinetic`, `diffusive_sq`,
    /// `odd_even_macroscopic` or `fixed:<dt>`.
    #[wasm_bindgen(constructor)]
    pub fn new(scheme: &str, eps: f64, nx: usize, dt_policy: &str) -> Result<Animation, String> {
        let scheme = parse_scheme(scheme)?;
        let policy = DtPolicy::from_str(dt_policy)?;
        let sim = Simulation::new(&config(scheme, eps, nx, policy)).map_err(|e| e.to_string())?;
        let limit = Simulation::new(&config(Scheme::KellerSegel, eps, nx, DtPolicy::Macroscopic))
            .map_err(|e| e.to_string())?;
        Ok(Self { sim, limit })
    }

    /// Advances both solutions by `span`; an error means the scheme blew up.
    pub fn advance(&mut self, span: f64) -> Result<(), String> {
        let t = self.sim.time() + span;
        self.sim.advance_to(t).map_err(|e| e.to_string())?;
        self.limit.advance_to(t).map_err(|e| e.to_string())
    }

    pub fn time(&self) -> f64 {
        self.sim.time()
    }

    pub fn dt(&self) -> f64 {
        self.sim.dt()
    }

    pub fn x(&self) -> Vec<f64> {
        self.sim.x()
    }

    pub fn density(&self) -> Vec<f64> {
        self.sim.density()
    }

    pub fn chemoattractant(&self) -> Vec<f64> {
        self.sim.chemoattractant()
    }

    #[wasm_bindgen(js_name = limitDensity)]
    pub fn limit_density(&self) -> Vec<f64> {
        self.limit.density()
    }

    /// Relative L² distance between the two current densities.
    #[wasm_bindgen(js_name = distanceToLimit)]
    pub fn distance_to_limit(&self) -> f64 {
        relative_l2(&self.sim.density(), &self.limit.density())
    }
}

/// Relative L² distance at `t_end` between the implicit micro-macro density
/// (step `Δx/2`) and the Keller-Segel density, for each `ε` in `eps`. Runs
/// that blow up report NaN.
#[wasm_bindgen(js_name = limitDistances)]
pub fn limit_distances(eps: Vec<f64>, t_end: f64, nx: usize) -> Result<Vec<f64>, String> {
    let limit = run(&RunConfig {
        t_end,
        ..config(Scheme::KellerSegel, 1.0, nx, DtPolicy::Macroscopic)
    })
    .map_err(|e| e.to_string())?;
    eps.iter()
        .map(|&e| {
            let tr = run(&RunConfig {
                t_end,
                ..config(Scheme::MmImplicit, e, nx, DtPolicy::Macroscopic)
            })
            .map_err(|e| e.to_string())?;
            Ok(match tr.blow_up {
                Some(_) => f64::NAN,
                None => relative_l2(tr.final_density(), limit.final_density()),
            })
        })
        .collect()
}
