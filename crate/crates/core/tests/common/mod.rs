//! Brute-force transcriptions of the discrete equations, written without
//! reusing any solver code.

#![allow(dead_code)]

use std::sync::Arc;

use kinchemo::chemo::ReactionParams;
use kinchemo::grid::{SpatialGrid, VelocityGrid};
use kinchemo::kinetic_ops::{ChemotacticKernel, TurningKernel, TurningModel};
use kinchemo::mm_scheme::{Inflow, MacroMode, MmSolver, MmState};
use kinchemo::reference_schemes::{ExplicitKinetic, KineticState};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gaussian elimination with partial pivoting on a dense row-major matrix.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for c in 0..n {
        let p = (c..n).max_by(|&i, &j| a[i][c].abs().total_cmp(&a[j][c].abs())).unwrap();
        a.swap(c, p);
        b.swap(c, p);
        for r in c + 1..n {
            let f = a[r][c] / a[c][c];
            for k in c..n {
                a[r][k] -= f * a[c][k];
            }
            b[r] -= f * b[c];
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    x
}

fn pos(x: f64) -> f64 {
    x.max(0.0)
}

fn neg(x: f64) -> f64 {
    x.min(0.0)
}

/// Velocity data needed by the transcriptions.
pub struct Vel {
    v: Vec<f64>,
    vbar: Vec<f64>,
    dv: f64,
    m: Vec<f64>,
}

impl Vel {
    pub fn new(nv: usize, m: impl Fn(f64) -> f64) -> Self {
        let dv = 2.0 / nv as f64;
        let v: Vec<f64> = (0..=nv).map(|j| -1.0 + j as f64 * dv).collect();
        let vbar: Vec<f64> = (0..nv).map(|l| -1.0 + (l as f64 + 0.5) * dv).collect();
        Self {
            m: v.iter().map(|&x| m(x)).collect(),
            v,
            vbar,
            dv,
        }
    }

    fn len(&self) -> usize {
        self.v.len()
    }

    /// `⟨G⟩ = Δv Σ_l (G_l + G_{l+1}) / 2`.
    pub fn bracket(&self, g: &[f64]) -> f64 {
        (0..self.len() - 1).map(|l| 0.5 * (g[l] + g[l + 1])).sum::<f64>() * self.dv
    }

    /// `Δv (Σ_l K(v_j, v̄_l) Ḡ_l - G_j Σ_l K(v̄_l, v_j))`.
    pub fn integral_op(&self, k: &dyn Fn(f64, f64) -> f64, g: &[f64]) -> Vec<f64> {
        let nv = self.len() - 1;
        (0..=nv)
            .map(|j| {
                let gain: f64 = (0..nv).map(|l| k(self.v[j], self.vbar[l]) * 0.5 * (g[l] + g[l + 1])).sum();
                let loss: f64 = (0..nv).map(|l| k(self.vbar[l], self.v[j])).sum();
                self.dv * (gain - g[j] * loss)
            })
            .collect()
    }

    pub fn project(&self, g: &[f64]) -> Vec<f64> {
        let b = self.bracket(g);
        g.iter().zip(&self.m).map(|(g, m)| g - m * b).collect()
    }
}

fn chemo_oracle(s: &[f64], n_new: &[f64], p: &ReactionParams, dx: f64, dt: f64) -> Vec<f64> {
    let len = s.len();
    let c = dt * p.d_s / (dx * dx);
    let mut a = vec![vec![0.0; len]; len];
    for i in 0..len {
        a[i][i] = 1.0 + 2.0 * c + p.b * dt;
        // Neumann ghosts S_{-1} = S_1 and S_{Nx+1} = S_{Nx-1} fold into the neighbours.
        let left = if i == 0 { 1 } else { i - 1 };
        let right = if i + 1 == len { len - 2 } else { i + 1 };
        a[i][left] -= c;
        a[i][right] -= c;
    }
    let rhs = s.iter().zip(n_new).map(|(s, n)| s + p.a * dt * n).collect();
    dense_solve(a, rhs)
}

fn random_mm_state(rng: &mut ChaCha8Rng, nx: usize, vel: &Vel, eps: f64) -> MmState {
    let len = vel.len();
    let n: Vec<f64> = (0..=nx).map(|_| rng.gen_range(0.5..2.0)).collect();
    let s: Vec<f64> = (0..=nx).map(|_| rng.gen_range(0.0..1.0)).collect();
    let mut g = Vec::with_capacity((nx + 2) * len);
    for _ in 0..nx + 2 {
        let raw: Vec<f64> = (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect();
        g.extend(vel.project(&raw));
    }
    MmState::new(n, g, s, eps, len - 1).unwrap()
}

struct MmOracleOut {
    g: Vec<Vec<f64>>,
    n: Vec<f64>,
    s: Vec<f64>,
}

/// One micro-macro step with explicit macro update, transcribed equation by
/// equation with the relaxation kernel `T_0 = σ M(v)` and `T_1 = (v ∂_x S)_+`.
#[allow(clippy::too_many_arguments)]
fn mm_oracle(
    st: &MmState,
    vel: &Vel,
    nx: usize,
    dx: f64,
    eps: f64,
    sigma: f64,
    dt: f64,
    fl: &[f64],
    fr: &[f64],
    p: &ReactionParams,
) -> MmOracleOut {
    let len = vel.len();
    let gk: Vec<Vec<f64>> = (0..nx + 2).map(|k| st.face(k).to_vec()).collect();
    let m = &vel.m;
    // Uniform equilibrium, so T_0(v, v') = σ M(v) is constant.
    let t0 = |_v: f64, _w: f64| sigma * m[0];

    // I - (Δt/ε²) 𝒯_0 as a dense matrix, column by column.
    let tau = dt / (eps * eps);
    let mut a = vec![vec![0.0; len]; len];
    for c in 0..len {
        let mut e = vec![0.0; len];
        e[c] = 1.0;
        let col = vel.integral_op(&t0, &e);
        for r in 0..len {
            a[r][c] = e[r] - tau * col[r];
        }
    }

    let mut g_new = gk.clone();
    for i in 0..nx {
        let k = i + 1;
        let n_face = 0.5 * (st.n[i] + st.n[i + 1]);
        let dn = (st.n[i + 1] - st.n[i]) / dx;
        let ds = (st.s[i + 1] - st.s[i]) / dx;
        let t1 = move |v: f64, _w: f64| pos(v * ds);
        let transport: Vec<f64> = (0..len)
            .map(|j| {
                let v = vel.v[j];
                pos(v) * (gk[k][j] - gk[k - 1][j]) / dx + neg(v) * (gk[k + 1][j] - gk[k][j]) / dx
            })
            .collect();
        let transport = vel.project(&transport);
        let mn: Vec<f64> = m.iter().map(|m| m * n_face).collect();
        let t1_mn = vel.integral_op(&t1, &mn);
        let t1_g = vel.integral_op(&t1, &gk[k]);
        let rhs: Vec<f64> = (0..len)
            .map(|j| {
                gk[k][j] - dt / eps * transport[j]
                    + tau * (t1_mn[j] - vel.v[j] * m[j] * dn)
                    + dt / eps * t1_g[j]
            })
            .collect();
        g_new[k] = dense_solve(a.clone(), rhs);
    }

    let flux = |k: usize| vel.bracket(&vel.v.iter().zip(&g_new[k]).map(|(v, g)| v * g).collect::<Vec<_>>());
    let mut n_new = st.n.clone();
    for i in 1..nx {
        n_new[i] = st.n[i] - dt / dx * (flux(i + 1) - flux(i));
    }
    let br = |h: &dyn Fn(usize) -> f64| vel.bracket(&(0..len).map(h).collect::<Vec<_>>());
    let (v, r) = (&vel.v, dt / dx);
    let lhs0 = 1.0 + 2.0 * r / eps * br(&|j| pos(v[j]) * m[j]);
    n_new[0] = (st.n[0]
        - r * br(&|j| (v[j] + pos(v[j]) - neg(v[j])) * g_new[1][j] - 2.0 * pos(v[j]) / eps * fl[j]))
        / lhs0;
    let lhsn = 1.0 - 2.0 * r / eps * br(&|j| neg(v[j]) * m[j]);
    n_new[nx] = (st.n[nx]
        - r * br(&|j| 2.0 * neg(v[j]) / eps * fr[j] - (v[j] - pos(v[j]) + neg(v[j])) * g_new[nx][j]))
        / lhsn;

    for j in 0..len {
        g_new[0][j] = if v[j] > 0.0 {
            2.0 / eps * (fl[j] - n_new[0] * m[j]) - g_new[1][j]
        } else {
            g_new[1][j]
        };
        g_new[nx + 1][j] = if v[j] < 0.0 {
            2.0 / eps * (fr[j] - n_new[nx] * m[j]) - g_new[nx][j]
        } else {
            g_new[nx][j]
        };
    }

    let s = chemo_oracle(&st.s, &n_new, p, dx, dt);
    MmOracleOut { g: g_new, n: n_new, s }
}

/// Micro update in assembled form `(A⁰ - B⁰) G^{k+1} = (B¹ - P⁺ + P⁻ + I) G^k
/// + B² M + P⁺ G_{i-1/2} - P⁻ G_{i+3/2}`, with the matrices built entrywise.
/// Row velocity `v_j` multiplies the density gradient, and the node weights of
/// the trapezoid rule enter through the bar averages.
fn assembled_micro(
    st: &MmState,
    vel: &Vel,
    t0: &dyn Fn(f64, f64) -> f64,
    nx: usize,
    dx: f64,
    eps: f64,
    dt: f64,
) -> Vec<Vec<f64>> {
    let len = vel.len();
    let nv = len - 1;
    let (v, vbar, dv, m) = (&vel.v, &vel.vbar, vel.dv, &vel.m);
    // Coefficient of G_c in Σ_l w_l Ḡ_l.
    let bar = |w: &dyn Fn(usize) -> f64, c: usize| {
        let left = if c > 0 { w(c - 1) } else { 0.0 };
        let right = if c < nv { w(c) } else { 0.0 };
        0.5 * (left + right)
    };
    let trap = |c: usize| if c == 0 || c == nv { 0.5 * dv } else { dv };

    let sigma0: Vec<f64> = (0..len)
        .map(|j| 1.0 + dt * dv / (eps * eps) * (0..nv).map(|l| t0(vbar[l], v[j])).sum::<f64>())
        .collect();
    let mut a = vec![vec![0.0; len]; len];
    for j in 0..len {
        for c in 0..len {
            let w0 = |l: usize| dt * dv / (eps * eps) * t0(v[j], vbar[l]);
            a[j][c] = if j == c { sigma0[j] } else { 0.0 } - bar(&w0, c);
        }
    }
    let p_mat = |sign: f64| -> Vec<Vec<f64>> {
        let part = |x: f64| if sign > 0.0 { pos(x) } else { neg(x) };
        let r = dt / (eps * dx);
        (0..len)
            .map(|j| {
                (0..len)
                    .map(|c| r * ((if j == c { part(v[c]) } else { 0.0 }) - m[j] * trap(c) * part(v[c])))
                    .collect()
            })
            .collect()
    };
    let (pp, pm) = (p_mat(1.0), p_mat(-1.0));

    let mut out = vec![vec![0.0; len]; nx + 2];
    for i in 0..nx {
        let k = i + 1;
        let n_face = 0.5 * (st.n[i] + st.n[i + 1]);
        let dn = (st.n[i + 1] - st.n[i]) / dx;
        let ds = (st.s[i + 1] - st.s[i]) / dx;
        let t1 = |a: f64, _b: f64| pos(a * ds);
        let alpha1: Vec<f64> = (0..len).map(|j| (0..nv).map(|l| t1(vbar[l], v[j])).sum()).collect();
        let mut rhs = vec![0.0; len];
        for j in 0..len {
            let w1 = |l: usize| dt * dv / eps * t1(v[j], vbar[l]);
            let w2 = |l: usize| dt * dv / (eps * eps) * t1(v[j], vbar[l]) * n_face;
            let sigma1 = dt * dv / eps * alpha1[j];
            let sigma2 = dt * dv / (eps * eps) * alpha1[j] * n_face + dt * v[j] / (eps * eps) * dn;
            for c in 0..len {
                let delta = if j == c { 1.0 } else { 0.0 };
                let b1 = bar(&w1, c) - delta * sigma1;
                let b2 = bar(&w2, c) - delta * sigma2;
                rhs[j] += (b1 - pp[j][c] + pm[j][c] + delta) * st.face(k)[c]
                    + b2 * m[c]
                    + pp[j][c] * st.face(k - 1)[c]
                    - pm[j][c] * st.face(k + 1)[c];
            }
        }
        out[k] = dense_solve(a.clone(), rhs);
    }
    out
}

/// One forward-Euler upwind step of the kinetic equation, inflow ghosts
/// outside the domain, centered `∂_x S` (zero at the two ends).
fn kinetic_oracle(
    f: &[Vec<f64>],
    s: &[f64],
    vel: &Vel,
    dx: f64,
    eps: f64,
    dt: f64,
    p: &ReactionParams,
) -> (Vec<Vec<f64>>, Vec<f64>) {
    let nx = f.len() - 1;
    let len = vel.len();
    let t0 = |_v: f64, _w: f64| 0.5;
    let mut out = f.to_vec();
    for i in 0..=nx {
        let ds = if i == 0 || i == nx { 0.0 } else { (s[i + 1] - s[i - 1]) / (2.0 * dx) };
        let t1 = move |v: f64, _w: f64| pos(v * ds);
        let c0 = vel.integral_op(&t0, &f[i]);
        let c1 = vel.integral_op(&t1, &f[i]);
        for j in 0..len {
            let v = vel.v[j];
            let left = if i == 0 { 0.0 } else { f[i - 1][j] };
            let right = if i == nx { 0.0 } else { f[i + 1][j] };
            let grad = pos(v) * (f[i][j] - left) + neg(v) * (right - f[i][j]);
            out[i][j] = f[i][j] - dt / (eps * dx) * grad + dt / (eps * eps) * (c0[j] + eps * c1[j]);
        }
    }
    let n: Vec<f64> = out.iter().map(|fi| vel.bracket(fi)).collect();
    let s_new = chemo_oracle(s, &n, p, dx, dt);
    (out, s_new)
}


/// Largest entrywise deviation between two profiles.
pub fn max_deviation(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).fold(0.0, |m, (x, y)| m.max((x - y).abs()))
}

/// One explicit-macro step at `Nx = 8`, `Nv = 4` from a random state, solver
/// against transcription; returns the largest deviation over `n`, `S` and `g`.
pub fn mm_step_deviation(seed: u64, eps: f64, inflow: bool) -> f64 {
    let (nx, nv, dt, sigma) = (8, 4, 0.01, 1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vel = Vel::new(nv, |_| 0.5);
    let space = SpatialGrid::new(-1.0, 1.0, nx).unwrap();
    let vgrid = VelocityGrid::new(-1.0, 1.0, nv).unwrap();
    let model = TurningModel::relaxation(&vgrid, sigma).unwrap();
    let p = ReactionParams::default();
    let (fl, fr): (Vec<f64>, Vec<f64>) = if inflow {
        (
            (0..=nv).map(|_| rng.gen_range(0.0..1.0)).collect(),
            (0..=nv).map(|_| rng.gen_range(0.0..1.0)).collect(),
        )
    } else {
        (vec![0.0; nv + 1], vec![0.0; nv + 1])
    };
    let mut solver = MmSolver::new(space.clone(), model, p, eps)
        .unwrap()
        .with_inflow(Inflow { left: fl.clone(), right: fr.clone() })
        .unwrap();
    let mut state = random_mm_state(&mut rng, nx, &vel, eps);
    let expected = mm_oracle(&state, &vel, nx, space.dx(), eps, sigma, dt, &fl, &fr, &p);
    solver.step(&mut state, dt, MacroMode::Explicit).unwrap();

    let mut dev = max_deviation(&state.n, &expected.n).max(max_deviation(&state.s, &expected.s));
    for k in 0..nx + 2 {
        dev = dev.max(max_deviation(state.face(k), &expected.g[k]));
    }
    dev
}

/// Micro update through the solver against the assembled form, relative to
/// the largest entry; `t0` must be the kernel inside `model`.
pub fn assembled_deviation(model: TurningModel, t0: &dyn Fn(f64, f64) -> f64, seed: u64, eps: f64) -> f64 {
    let (nx, nv, dt) = (8, 4, 0.01);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vel = Vel::new(nv, |_| 0.5);
    let space = SpatialGrid::new(-1.0, 1.0, nx).unwrap();
    let mut solver = MmSolver::new(space.clone(), model, ReactionParams::default(), eps).unwrap();
    let state = random_mm_state(&mut rng, nx, &vel, eps);
    let expected = assembled_micro(&state, &vel, t0, nx, space.dx(), eps, dt);
    let got = solver.micro_step(&state, dt).unwrap();
    let len = nv + 1;
    let scale = expected.iter().flatten().fold(1.0f64, |a, x| a.max(x.abs()));
    (1..=nx)
        .map(|k| max_deviation(&got[k * len..(k + 1) * len], &expected[k]))
        .fold(0.0, f64::max)
        / scale
}

/// `T_0(v, v') = σ M (1 + κ (1 + v v'))` with `σ = 1`, `M = 1/2`, `κ = 0.3`.
pub fn general_kernel(v: f64, w: f64) -> f64 {
    0.5 * (1.0 + 0.3 * (1.0 + v * w))
}

pub fn general_model(nv: usize) -> TurningModel {
    let vgrid = VelocityGrid::new(-1.0, 1.0, nv).unwrap();
    TurningModel::new(
        &vgrid,
        |_| 0.5,
        1.0,
        TurningKernel::General(Arc::new(general_kernel)),
        ChemotacticKernel::PositivePart,
    )
    .unwrap()
}

/// One explicit kinetic step at `Nx = 8`, `Nv = 4`, `ε = 1` from random data.
pub fn kinetic_step_deviation(seed: u64) -> f64 {
    let (nx, nv, eps, dt) = (8, 4, 1.0, 0.01);
    let vel = Vel::new(nv, |_| 0.5);
    let space = SpatialGrid::new(-1.0, 1.0, nx).unwrap();
    let vgrid = VelocityGrid::new(-1.0, 1.0, nv).unwrap();
    let model = TurningModel::relaxation(&vgrid, 1.0).unwrap();
    let p = ReactionParams::default();
    let scheme = ExplicitKinetic::new(space.clone(), model, p, eps).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f: Vec<Vec<f64>> = (0..=nx)
        .map(|_| (0..=nv).map(|_| rng.gen_range(0.0..1.0)).collect())
        .collect();
    let s: Vec<f64> = (0..=nx).map(|_| rng.gen_range(0.0..1.0)).collect();
    let (f_exp, s_exp) = kinetic_oracle(&f, &s, &vel, space.dx(), eps, dt, &p);
    let mut state = KineticState::new(f.concat(), s, eps, nv).unwrap();
    scheme.step(&mut state, dt).unwrap();
    max_deviation(&state.f, &f_exp.concat()).max(max_deviation(&state.s, &s_exp))
}
