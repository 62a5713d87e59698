use serde::Serialize;

use crate::error::{Error, Result};

use super::config::{DtPolicy, RunConfig, Scheme};
use super::runner::{run, BlowUp, Trajectory};

/// Trapezoid weights `[1/2, 1, …, 1, 1/2]`; the common factor `Δx` cancels
/// in every ratio below.
fn weights(len: usize) -> impl Iterator<Item = f64> {
    (0..len).map(move |i| if i == 0 || i + 1 == len { 0.5 } else { 1.0 })
}

fn weighted_norm(u: &[f64]) -> f64 {
    u.iter().zip(weights(u.len())).map(|(u, w)| w * u * u).sum::<f64>().sqrt()
}

fn weighted_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(weights(a.len()))
        .map(|((a, b), w)| w * (a - b) * (a - b))
        .sum::<f64>()
        .sqrt()
}

/// `‖a - b‖ / ‖b‖` in the trapezoid-weighted discrete L² norm.
pub fn relative_l2(a: &[f64], b: &[f64]) -> f64 {
    weighted_distance(a, b) / weighted_norm(b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub nx: usize,
    /// `‖n_Δx(t) - n_2Δx(t)‖ / ‖n_2Δx(0)‖` on the coarse nodes; absent on the
    /// first row and NaN when either run blew up.
    pub error: Option<f64>,
    /// `log2(e_2Δx / e_Δx)`.
    pub order: Option<f64>,
    /// The same error measured on the distribution, for kinetic schemes.
    pub error_f: Option<f64>,
    pub order_f: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub scheme: Scheme,
    pub eps: f64,
    pub t: f64,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceReport {
    pub fn orders(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.order).collect()
    }

    pub fn errors(&self) -> Vec<f64> {
        self.rows.iter().filter_map(|r| r.error).collect()
    }
}

fn order(prev: Option<f64>, cur: Option<f64>) -> Option<f64> {
    match (prev, cur) {
        (Some(p), Some(c)) if p > 0.0 && c > 0.0 && p.is_finite() && c.is_finite() => {
            Some((p / c).log2())
        }
        _ => None,
    }
}

/// Distribution error on the coarse nodes, weighted in `x` and `v`.
fn distribution_error(fine: &Trajectory, coarse: &Trajectory, vw: &[f64]) -> Option<f64> {
    let ff = fine.last().f.as_ref()?;
    let fc = coarse.last().f.as_ref()?;
    let fc0 = coarse.snapshots[0].f.as_ref()?;
    let len = fc.len();
    let (mut num, mut den) = (0.0, 0.0);
    for (i, wx) in weights(len).enumerate() {
        for (j, wv) in vw.iter().enumerate() {
            let d = ff[2 * i][j] - fc[i][j];
            num += wx * wv * d * d;
            den += wx * wv * fc0[i][j] * fc0[i][j];
        }
    }
    Some((num / den).sqrt())
}

/// Runs `base` at every `Nx` in `nx_list` and `ε` in `eps_list` up to time
/// `t`, comparing each run with the previous (twice coarser) one by node
/// subsampling. Repeating an `Nx` is allowed and gives a zero error.
pub fn convergence_study(
    base: &RunConfig,
    eps_list: &[f64],
    nx_list: &[usize],
    t: f64,
) -> Result<Vec<ConvergenceReport>> {
    for w in nx_list.windows(2) {
        if w[1] != w[0] && w[1] != 2 * w[0] {
            return Err(Error::NonNestingGrids(format!(
                "Nx = {} does not refine Nx = {} by a factor of two",
                w[1], w[0]
            )));
        }
    }
    let vw = base.velocity_grid()?.weights().to_vec();
    let mut reports = Vec::new();
    for &eps in eps_list {
        let mut rows: Vec<ConvergenceRow> = Vec::new();
        let mut prev: Option<Trajectory> = None;
        for &nx in nx_list {
            let cfg = RunConfig {
                eps,
                nx,
                t_end: t,
                snapshots: Vec::new(),
                record_distribution: base.scheme.is_kinetic(),
                ..base.clone()
            };
            let tr = run(&cfg)?;
            let mut row = ConvergenceRow {
                nx,
                error: None,
                order: None,
                error_f: None,
                order_f: None,
            };
            if let Some(coarse) = &prev {
                let stride = if nx == coarse.x.len() - 1 { 1 } else { 2 };
                let restricted: Vec<f64> =
                    tr.final_density().iter().step_by(stride).copied().collect();
                let e = if tr.blow_up.is_some() || coarse.blow_up.is_some() {
                    f64::NAN
                } else {
                    weighted_distance(&restricted, coarse.final_density())
                        / weighted_norm(&coarse.snapshots[0].n)
                };
                row.error = Some(e);
                row.error_f = if stride == 2 {
                    distribution_error(&tr, coarse, &vw)
                } else {
                    coarse.last().f.as_ref().map(|_| 0.0)
                };
                if let Some(p) = rows.last() {
                    row.order = order(p.error, row.error);
                    row.order_f = order(p.error_f, row.error_f);
                }
            }
            rows.push(row);
            prev = Some(tr);
        }
        reports.push(ConvergenceReport {
            scheme: base.scheme,
            eps,
            t,
            rows,
        });
    }
    Ok(reports)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepEntry {
    pub eps: f64,
    pub n: Vec<f64>,
    pub blow_up: Option<BlowUp>,
    pub max_abs_n: f64,
    pub distance_to_ks: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepReport {
    pub x: Vec<f64>,
    pub ks: Vec<f64>,
    pub entries: Vec<SweepEntry>,
}

/// Runs `base` at each `ε` and the Keller-Segel scheme once with the same
/// grid, step policy and end time.
pub fn regime_sweep(base: &RunConfig, eps_list: &[f64]) -> Result<SweepReport> {
    let plain = RunConfig {
        snapshots: Vec::new(),
        record_distribution: false,
        ..base.clone()
    };
    let ks = run(&RunConfig {
        scheme: Scheme::KellerSegel,
        ..plain.clone()
    })?;
    let ks_n = ks.final_density().to_vec();
    let mut entries = Vec::new();
    for &eps in eps_list {
        let tr = run(&RunConfig { eps, ..plain.clone() })?;
        let n = tr.final_density().to_vec();
        entries.push(SweepEntry {
            eps,
            distance_to_ks: if tr.blow_up.is_some() {
                f64::NAN
            } else {
                relative_l2(&n, &ks_n)
            },
            n,
            blow_up: tr.blow_up,
            max_abs_n: tr.diagnostics.max_abs_n,
        });
    }
    Ok(SweepReport {
        x: ks.x,
        ks: ks_n,
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub eps: f64,
    pub x: Vec<f64>,
    pub profiles: Vec<(Scheme, Vec<f64>, Option<BlowUp>)>,
    /// `(a, b, ‖n_a - n_b‖ / ‖n_b‖)` for every pair in lineup order.
    pub distances: Vec<(Scheme, Scheme, f64)>,
}

impl ComparisonReport {
    pub fn distance(&self, a: Scheme, b: Scheme) -> Option<f64> {
        self.distances
            .iter()
            .find(|(p, q, _)| (*p, *q) == (a, b) || (*p, *q) == (b, a))
            .map(|d| d.2)
    }
}

/// The schemes and step policies compared at a given `ε`: micro-macro,
/// explicit kinetic and odd-even with `Δt = εΔx/2` in the kinetic regime
/// (`ε >= 1/2`); otherwise micro-macro and Keller-Segel with `Δt = Δx/2` and
/// odd-even with `Δt = Δx/40`.
pub fn comparison_lineup(eps: f64) -> Vec<(Scheme, DtPolicy)> {
    if eps >= 0.5 {
        vec![
            (Scheme::MmImplicit, DtPolicy::Kinetic),
            (Scheme::ExplicitKinetic, DtPolicy::Kinetic),
            (Scheme::OddEven, DtPolicy::Kinetic),
        ]
    } else {
        vec![
            (Scheme::MmImplicit, DtPolicy::Macroscopic),
            (Scheme::KellerSegel, DtPolicy::Macroscopic),
            (Scheme::OddEven, DtPolicy::OddEvenMacroscopic),
        ]
    }
}

pub fn scheme_comparison(
    base: &RunConfig,
    lineup: &[(Scheme, DtPolicy)],
) -> Result<ComparisonReport> {
    let mut profiles = Vec::new();
    let mut x = Vec::new();
    for &(scheme, dt_policy) in lineup {
        let tr = run(&RunConfig {
            scheme,
            dt_policy,
            snapshots: Vec::new(),
            record_distribution: false,
            ..base.clone()
        })?;
        profiles.push((scheme, tr.final_density().to_vec(), tr.blow_up));
        x = tr.x;
    }
    let mut distances = Vec::new();
    for (i, a) in profiles.iter().enumerate() {
        for b in &profiles[i + 1..] {
            distances.push((a.0, b.0, relative_l2(&a.1, &b.1)));
        }
    }
    Ok(ComparisonReport {
        eps: base.eps,
        x,
        profiles,
        distances,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvolutionReport {
    pub eps: f64,
    pub x: Vec<f64>,
    pub snapshots: Vec<(f64, Vec<f64>)>,
    /// `‖n(t_{m+1}) - n(t_m)‖₂` (weighted by `Δx`) between consecutive
    /// snapshots.
    pub differences: Vec<f64>,
    pub blow_up: Option<BlowUp>,
    pub initial_mass: f64,
    pub final_mass: f64,
    pub accumulated_flux: Option<f64>,
}

impl EvolutionReport {
    /// Whether the last `k` differences are non-increasing.
    pub fn settles(&self, k: usize) -> bool {
        self.differences.len() >= k
            && self.differences[self.differences.len() - k..]
                .windows(2)
                .all(|w| w[1] <= w[0])
    }
}

/// Density snapshots of `base` at `times` (the last one sets the end time).
pub fn evolution_study(base: &RunConfig, times: &[f64]) -> Result<EvolutionReport> {
    let mut times = times.to_vec();
    times.sort_by(f64::total_cmp);
    times.dedup();
    let t_end = *times
        .last()
        .ok_or_else(|| Error::InvalidConfig("evolution needs at least one time".into()))?;
    let tr = run(&RunConfig {
        t_end,
        snapshots: times.clone(),
        record_distribution: false,
        ..base.clone()
    })?;
    let dx = base.spatial_grid()?.dx();
    let snapshots: Vec<(f64, Vec<f64>)> = tr
        .snapshots
        .iter()
        .filter(|s| times.contains(&s.t))
        .map(|s| (s.t, s.n.clone()))
        .collect();
    let differences = snapshots
        .windows(2)
        .map(|w| dx.sqrt() * weighted_distance(&w[1].1, &w[0].1))
        .collect();
    Ok(EvolutionReport {
        eps: base.eps,
        x: tr.x,
        snapshots,
        differences,
        blow_up: tr.blow_up,
        initial_mass: tr.diagnostics.initial_mass,
        final_mass: tr.diagnostics.final_mass,
        accumulated_flux: tr.diagnostics.accumulated_flux,
    })
}
