//! Comparison solvers: the explicit kinetic scheme, the Keller-Segel limit
//! scheme and the odd-even parity scheme.

mod keller_segel;
mod kinetic;
mod parity;

pub use keller_segel::{ks_step, KsMode, KsState};
pub use kinetic::{ExplicitKinetic, KineticState, MassReport};
pub use parity::{
    half_bracket, parity_reconstruct, parity_transform, OddEven, ParityState,
};

/// Centered node gradient `(u_{i+1} - u_{i-1}) / (2Δx)`, zero at both ends.
pub fn centered_gradient(u: &[f64], dx: f64) -> Vec<f64> {
    let n = u.len();
    let mut d = vec![0.0; n];
    for i in 1..n.saturating_sub(1) {
        d[i] = (u[i + 1] - u[i - 1]) / (2.0 * dx);
    }
    d
}
