use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::chemo::ReactionParams;
use crate::error::{Error, Result};
use crate::grid::{SpatialGrid, VelocityGrid};
use crate::kinetic_ops::TurningModel;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum Scheme {
    MmExplicit,
    MmImplicit,
    ExplicitKinetic,
    KellerSegel,
    OddEven,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::MmExplicit,
        Scheme::MmImplicit,
        Scheme::ExplicitKinetic,
        Scheme::KellerSegel,
        Scheme::OddEven,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::MmExplicit => "mm_explicit",
            Scheme::MmImplicit => "mm_implicit",
            Scheme::ExplicitKinetic => "explicit_kinetic",
            Scheme::KellerSegel => "keller_segel",
            Scheme::OddEven => "odd_even",
        }
    }

    /// Whether the scheme carries a velocity distribution.
    pub fn is_kinetic(self) -> bool {
        !matches!(self, Scheme::KellerSegel)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// How the time step follows from the grid and `ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DtPolicy {
    /// `Δx² / 2`
    DiffusiveSq,
    /// `ε Δx / 2`
    Kinetic,
    /// `Δx / 2`
    Macroscopic,
    /// `Δx / 40`
    OddEvenMacroscopic,
    Fixed(f64),
}

impl DtPolicy {
    pub fn dt(self, dx: f64, eps: f64) -> f64 {
        match self {
            DtPolicy::DiffusiveSq => 0.5 * dx * dx,
            DtPolicy::Kinetic => 0.5 * eps * dx,
            DtPolicy::Macroscopic => 0.5 * dx,
            DtPolicy::OddEvenMacroscopic => dx / 40.0,
            DtPolicy::Fixed(dt) => dt,
        }
    }
}

impl FromStr for DtPolicy {
    type Err = String;

    /// Accepts the policy names and `fixed:<dt>`.
    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "diffusive_sq" => Ok(DtPolicy::DiffusiveSq),
            "kinetic" => Ok(DtPolicy::Kinetic),
            "macroscopic" => Ok(DtPolicy::Macroscopic),
            "odd_even_macroscopic" => Ok(DtPolicy::OddEvenMacroscopic),
            other => other
                .strip_prefix("fixed:")
                .and_then(|v| v.parse().ok())
                .map(DtPolicy::Fixed)
                .ok_or_else(|| {
                    format!(
                        "unknown dt policy `{other}`; expected diffusive_sq, kinetic, \
                         macroscopic, odd_even_macroscopic or fixed:<dt>"
                    )
                }),
        }
    }
}

/// Everything needed to reproduce one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scheme: Scheme,
    pub eps: f64,
    #[serde(alias = "Nx")]
    pub nx: usize,
    #[serde(alias = "Nv")]
    pub nv: usize,
    pub x_min: f64,
    pub x_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub t_end: f64,
    pub dt_policy: DtPolicy,
    pub total_mass: f64,
    #[serde(alias = "D_S")]
    pub d_s: f64,
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    /// Times in `(0, t_end]` to record besides the initial and final state.
    pub snapshots: Vec<f64>,
    /// Replace `f_0` by `M n_0`. Unset means: only for the explicit kinetic
    /// and odd-even schemes at `ε >= 1`.
    pub project_initial: Option<bool>,
    /// Store the velocity distribution in every snapshot.
    pub record_distribution: bool,
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::MmImplicit,
            eps: 1.0,
            nx: 200,
            nv: 64,
            x_min: -1.0,
            x_max: 1.0,
            v_min: -1.0,
            v_max: 1.0,
            t_end: 0.5,
            dt_policy: DtPolicy::Macroscopic,
            total_mass: 2.0 * std::f64::consts::PI,
            d_s: 1.0,
            a: 1.0,
            b: 1.0,
            sigma: 1.0,
            snapshots: Vec::new(),
            project_initial: None,
            record_distribution: false,
            output: None,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("eps", self.eps),
            ("total_mass", self.total_mass),
            ("sigma", self.sigma),
        ];
        for (name, value) in positive {
            if !(value > 0.0) || !value.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {value}")));
            }
        }
        if !(self.t_end >= 0.0) || !self.t_end.is_finite() {
            return Err(Error::InvalidConfig(format!(
                "t_end must be nonnegative, got {}",
                self.t_end
            )));
        }
        if let DtPolicy::Fixed(dt) = self.dt_policy {
            if !(dt > 0.0) || !dt.is_finite() {
                return Err(Error::InvalidConfig(format!("fixed dt must be positive, got {dt}")));
            }
        }
        if let Some(t) = self.snapshots.iter().find(|&&t| !(t >= 0.0 && t <= self.t_end)) {
            return Err(Error::InvalidConfig(format!(
                "snapshot time {t} outside [0, {}]",
                self.t_end
            )));
        }
        self.reaction().validate()?;
        self.spatial_grid()?;
        self.velocity_grid()?;
        Ok(())
    }

    pub fn spatial_grid(&self) -> Result<SpatialGrid> {
        SpatialGrid::new(self.x_min, self.x_max, self.nx)
    }

    pub fn velocity_grid(&self) -> Result<VelocityGrid> {
        VelocityGrid::new(self.v_min, self.v_max, self.nv)
    }

    pub fn model(&self) -> Result<TurningModel> {
        TurningModel::relaxation(&self.velocity_grid()?, self.sigma)
    }

    pub fn reaction(&self) -> ReactionParams {
        ReactionParams {
            a: self.a,
            b: self.b,
            d_s: self.d_s,
        }
    }

    pub fn dt(&self) -> f64 {
        let dx = (self.x_max - self.x_min) / self.nx as f64;
        self.dt_policy.dt(dx, self.eps)
    }

    pub fn projects_initial(&self) -> bool {
        self.project_initial.unwrap_or(
            matches!(self.scheme, Scheme::ExplicitKinetic | Scheme::OddEven) && self.eps >= 1.0,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dt_policies() {
        let dx = 0.01;
        assert_eq!(DtPolicy::DiffusiveSq.dt(dx, 0.3), 0.5 * dx * dx);
        assert_eq!(DtPolicy::Kinetic.dt(dx, 0.3), 0.5 * 0.3 * dx);
        assert_eq!(DtPolicy::Macroscopic.dt(dx, 0.3), dx / 2.0);
        assert_eq!(DtPolicy::OddEvenMacroscopic.dt(dx, 0.3), dx / 40.0);
        assert_eq!(DtPolicy::Fixed(1e-3).dt(dx, 0.3), 1e-3);
    }

    #[test]
    fn parses_policies() {
        assert_eq!("kinetic".parse::<DtPolicy>().unwrap(), DtPolicy::Kinetic);
        assert_eq!("fixed:0.25".parse::<DtPolicy>().unwrap(), DtPolicy::Fixed(0.25));
        assert!("fixed:x".parse::<DtPolicy>().is_err());
        assert!("slow".parse::<DtPolicy>().is_err());
    }

    #[test]
    fn json_roundtrip_and_aliases() {
        let cfg = RunConfig {
            dt_policy: DtPolicy::Fixed(1e-3),
            snapshots: vec![0.1, 0.2],
            ..RunConfig::default()
        };
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(serde_json::from_str::<RunConfig>(&text).unwrap(), cfg);

        let cfg: RunConfig = serde_json::from_str(
            r#"{"scheme": "odd_even", "Nx": 80, "Nv": 16, "D_S": 0.5, "dt_policy": "kinetic"}"#,
        )
        .unwrap();
        assert_eq!((cfg.scheme, cfg.nx, cfg.nv, cfg.d_s), (Scheme::OddEven, 80, 16, 0.5));
        assert_eq!(cfg.eps, 1.0);
        assert!(serde_json::from_str::<RunConfig>(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn validation() {
        assert!(RunConfig::default().validate().is_ok());
        let bad = [
            RunConfig { eps: 0.0, ..Default::default() },
            RunConfig { nx: 1, ..Default::default() },
            RunConfig { t_end: -1.0, ..Default::default() },
            RunConfig { snapshots: vec![0.7], ..Default::default() },
            RunConfig { dt_policy: DtPolicy::Fixed(0.0), ..Default::default() },
            RunConfig { v_min: -2.0, ..Default::default() },
            RunConfig { b: -1.0, ..Default::default() },
        ];
        for cfg in bad {
            assert!(matches!(cfg.validate(), Err(Error::InvalidConfig(_) | Error::InvalidGrid(_))));
        }
    }

    #[test]
    fn projection_default() {
        let mut cfg = RunConfig { scheme: Scheme::OddEven, ..Default::default() };
        assert!(cfg.projects_initial());
        cfg.eps = 0.5;
        assert!(!cfg.projects_initial());
        cfg.scheme = Scheme::MmImplicit;
        cfg.eps = 1.0;
        assert!(!cfg.projects_initial());
        cfg.project_initial = Some(true);
        assert!(cfg.projects_initial());
    }
}
