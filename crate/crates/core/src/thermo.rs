//! Thermodynamic checks on generators and trajectories.

use nalgebra::DVector;
use num_complex::Complex64;
use serde::Serialize;

use crate::dynamics::Trajectory;
use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::linalg::{eigh, hermitian_part, trace, trace_norm, CMatrix, DensityMatrix, HermitianOperator};
use crate::units::fs_to_inverse_wavenumber;

const EIGENVALUE_FLOOR: f64 = 1e-14;
const NEGATIVITY_FLAG: f64 = -1e-8;

/// `e^{−βH}/Z` from the eigendecomposition of `H`.
pub fn gibbs_state(h0: &HermitianOperator, beta: f64) -> Result<DensityMatrix> {
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(Error::InvalidParameter(format!("inverse temperature must be positive, got {beta}")));
    }
    let (e, v) = eigh(h0.matrix());
    let e0 = e.first().copied().unwrap_or(0.0);
    let w: Vec<f64> = e.iter().map(|x| (-beta * (x - e0)).exp()).collect();
    let z: f64 = w.iter().sum();
    let diag = DVector::from_iterator(w.len(), w.iter().map(|x| Complex64::new(x / z, 0.0)));
    let rho = &v * CMatrix::from_diagonal(&diag) * v.adjoint();
    DensityMatrix::new(hermitian_part(&rho))
}

/// The common inverse temperature of all baths, if there is one.
pub fn uniform_beta(g: &Generator) -> Option<f64> {
    let first = g.baths.first()?.beta;
    g.baths.iter().all(|b| (b.beta - first).abs() <= 1e-12 * first).then_some(first)
}

/// `‖𝓛 ρ_β‖₁`.
pub fn stationarity_residual(g: &Generator, rho_beta: &DensityMatrix) -> f64 {
    trace_norm(&g.apply(rho_beta.matrix()))
}

/// `exp(−i H t)` with `t` in fs.
pub fn unitary(h: &CMatrix, t_fs: f64) -> CMatrix {
    let (e, v) = eigh(h);
    let t = fs_to_inverse_wavenumber(t_fs);
    let phases = DVector::from_iterator(e.len(), e.iter().map(|x| Complex64::new(0.0, -x * t).exp()));
    &v * CMatrix::from_diagonal(&phases) * v.adjoint()
}

/// `max ‖U(𝓛ρ)U† − 𝓛(UρU†)‖₁` over the samples, `U = e^{−iH0 t}`.
pub fn covariance_residual(g: &Generator, h0: &CMatrix, samples: &[(f64, CMatrix)]) -> f64 {
    samples
        .iter()
        .map(|(t, rho)| {
            let u = unitary(h0, *t);
            let ud = u.adjoint();
            let lhs = &u * g.apply(rho) * &ud;
            let rhs = g.apply(&(&u * rho * &ud));
            trace_norm(&(lhs - rhs))
        })
        .fold(0.0, f64::max)
}

/// `−Tr ρ ln ρ` with `0 ln 0 = 0`.
pub fn von_neumann_entropy(rho: &DensityMatrix) -> f64 {
    let (vals, _) = eigh(rho.matrix());
    vals.iter().filter(|&&p| p > 0.0).map(|&p| -p * p.ln()).sum()
}

fn log_floored(rho: &CMatrix) -> (CMatrix, f64) {
    let (vals, v) = eigh(&hermitian_part(rho));
    let min = vals.first().copied().unwrap_or(0.0);
    let logs =
        DVector::from_iterator(vals.len(), vals.iter().map(|&p| Complex64::new(p.max(EIGENVALUE_FLOOR).ln(), 0.0)));
    (&v * CMatrix::from_diagonal(&logs) * v.adjoint(), min)
}

#[derive(Debug, Clone, Serialize)]
pub struct EntropyProduction {
    pub times_fs: Vec<f64>,
    /// `σ(t)` in cm⁻¹.
    pub sigma: Vec<f64>,
    /// `dS/dt = −Tr[(𝓛ρ) ln ρ]` in cm⁻¹.
    pub entropy_rate: Vec<f64>,
    /// Heat current into each bath, `−Tr(H0 𝓛_n ρ)`, indexed `[bath][t]`, in cm⁻¹ · cm⁻¹.
    pub heat_currents: Vec<Vec<f64>>,
    /// Samples whose minimum eigenvalue is below −1e-8.
    pub flagged: Vec<usize>,
}

impl EntropyProduction {
    pub fn min_sigma(&self) -> f64 {
        self.sigma.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// `σ = −Tr[(𝓛ρ) ln ρ] − Σ_n β_n Tr(H0 𝓛_n ρ)` with `H0` the generator's reference Hamiltonian.
pub fn entropy_production(traj: &Trajectory, g: &Generator) -> EntropyProduction {
    let h0 = g.reference.matrix();
    let mut sigma = Vec::with_capacity(traj.states.len());
    let mut entropy_rate = Vec::with_capacity(traj.states.len());
    let mut heat_currents = vec![Vec::with_capacity(traj.states.len()); g.baths.len()];
    let mut flagged = Vec::new();
    for (k, state) in traj.states.iter().enumerate() {
        let rho = state.matrix();
        let (log, min) = log_floored(rho);
        if min < NEGATIVITY_FLAG {
            flagged.push(k);
        }
        let ds = -trace(&(g.apply(rho) * &log)).re;
        let mut s = ds;
        for (n, bath) in g.baths.iter().enumerate() {
            let j = -trace(&(h0 * bath.generator.apply(rho))).re;
            heat_currents[n].push(j);
            s += bath.beta * j;
        }
        entropy_rate.push(ds);
        sigma.push(s);
    }
    EntropyProduction { times_fs: traj.times(), sigma, entropy_rate, heat_currents, flagged }
}

#[derive(Debug, Clone, Serialize)]
pub struct ThermoReport {
    /// Present when all baths share one temperature.
    pub stationarity_residual: Option<f64>,
    pub covariance_residuals: Vec<(f64, f64)>,
    pub entropy_production: EntropyProduction,
}

/// Stationarity (if the temperature is uniform), covariance at the sample
/// times applied to the state at that time, and entropy production along `traj`.
pub fn thermo_report(g: &Generator, traj: &Trajectory, covariance_times_fs: &[f64]) -> Result<ThermoReport> {
    let stationarity_residual = match uniform_beta(g) {
        Some(beta) => Some(stationarity_residual(g, &gibbs_state(&g.reference, beta)?)),
        None => None,
    };
    let rho = traj.last().matrix().clone();
    let covariance_residuals = covariance_times_fs
        .iter()
        .map(|&t| (t, covariance_residual(g, g.reference.matrix(), &[(t, rho.clone())])))
        .collect();
    Ok(ThermoReport { stationarity_residual, covariance_residuals, entropy_production: entropy_production(traj, g) })
}
