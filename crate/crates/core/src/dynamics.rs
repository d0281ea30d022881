//! Time propagation of density matrices under a generator.
//!
//! Generators carry energies in cm⁻¹; time grids are in fs. The product
//! `𝓛 t` uses `t` converted with [`fs_to_inverse_wavenumber`].

use nalgebra::DVector;
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::generators::Generator;
use crate::linalg::{
    eigh, general_eigenvalues, matrix_exp, trace_distance, unvec, vec, CMatrix, DensityMatrix, Superoperator,
};
use crate::units::{angular_per_fs_to_wavenumber, fs_to_inverse_wavenumber, wavenumber_to_angular_per_fs};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub t0_fs: f64,
    pub dt_fs: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(t0_fs: f64, dt_fs: f64, steps: usize) -> Result<Self> {
        if !(dt_fs > 0.0) || !dt_fs.is_finite() || !t0_fs.is_finite() {
            return Err(Error::InvalidParameter(format!("time step must be positive, got {dt_fs}")));
        }
        if steps == 0 {
            return Err(Error::InvalidParameter("time grid needs at least one step".into()));
        }
        Ok(Self { t0_fs, dt_fs, steps })
    }

    /// Grid from 0 to at least `t_max_fs` with step `dt_fs`.
    pub fn covering(t_max_fs: f64, dt_fs: f64) -> Result<Self> {
        let steps = (t_max_fs / dt_fs).ceil().max(1.0) as usize;
        Self::new(0.0, dt_fs, steps)
    }

    /// `steps + 1` sample times including `t0`.
    pub fn times(&self) -> Vec<f64> {
        (0..=self.steps).map(|k| self.t0_fs + k as f64 * self.dt_fs).collect()
    }

    pub fn t_end(&self) -> f64 {
        self.t0_fs + self.steps as f64 * self.dt_fs
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Integrator {
    /// `exp(𝓛 dt)` computed once and applied repeatedly.
    ExpmStep,
    /// Classic fourth-order Runge–Kutta with `‖𝓛‖₁ dt_sub ≤ 0.1`.
    Rk4,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: TimeGrid,
    pub states: Vec<DensityMatrix>,
    pub method: String,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.grid.times()
    }

    /// `max_t |Tr ρ(t) − 1|`.
    pub fn max_trace_drift(&self) -> f64 {
        self.states.iter().map(|s| (s.trace() - 1.0).abs()).fold(0.0, f64::max)
    }

    pub fn last(&self) -> &DensityMatrix {
        self.states.last().expect("trajectory has at least one state")
    }
}

fn one_norm(m: &CMatrix) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

fn check_finite(v: &DVector<Complex64>, step: usize) -> Result<()> {
    if v.iter().all(|z| z.re.is_finite() && z.im.is_finite()) {
        Ok(())
    } else {
        Err(Error::PropagationDiverged { step })
    }
}

/// Propagates under an arbitrary superoperator in cm⁻¹.
pub fn propagate_superoperator(
    l: &Superoperator,
    rho0: &DensityMatrix,
    grid: TimeGrid,
    integrator: Integrator,
    tag: impl Into<String>,
) -> Result<Trajectory> {
    let d = l.dim();
    if rho0.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, found: rho0.dim() });
    }
    let h = fs_to_inverse_wavenumber(grid.dt_fs);
    let mut v = vec(rho0.matrix());
    let mut states = Vec::with_capacity(grid.steps + 1);
    states.push(rho0.clone());

    match integrator {
        Integrator::ExpmStep => {
            let e = matrix_exp(&(l.matrix() * Complex64::new(h, 0.0)));
            for step in 1..=grid.steps {
                v = &e * &v;
                check_finite(&v, step)?;
                states.push(DensityMatrix::from_propagated(unvec(&v, d)));
            }
        }
        Integrator::Rk4 => {
            let norm = one_norm(l.matrix());
            let sub = ((norm * h) / 0.1).ceil().max(1.0) as usize;
            let hs = Complex64::new(h / sub as f64, 0.0);
            let m = l.matrix();
            for step in 1..=grid.steps {
                for _ in 0..sub {
                    let k1 = m * &v;
                    let k2 = m * (&v + &k1 * (hs * 0.5));
                    let k3 = m * (&v + &k2 * (hs * 0.5));
                    let k4 = m * (&v + &k3 * hs);
                    v += (k1 + (k2 + k3).scale(2.0) + k4) * (hs / 6.0);
                }
                check_finite(&v, step)?;
                states.push(DensityMatrix::from_propagated(unvec(&v, d)));
            }
        }
    }
    Ok(Trajectory { grid, states, method: tag.into() })
}

pub fn propagate(g: &Generator, rho0: &DensityMatrix, grid: TimeGrid, integrator: Integrator) -> Result<Trajectory> {
    propagate_superoperator(&g.total, rho0, grid, integrator, g.kind.name())
}

/// `(1/40) min(2π/ω_max, 1/γ_max)` in fs, with `ω_max` the largest Bohr
/// frequency and `γ_max` the largest decay rate of the generator.
pub fn default_dt_fs(g: &Generator) -> f64 {
    let (energies, _) = eigh(g.hamiltonian.matrix());
    let omega_max = energies.last().copied().unwrap_or(0.0) - energies.first().copied().unwrap_or(0.0);
    let gamma_max = general_eigenvalues(g.total.matrix()).iter().map(|z| -z.re).fold(0.0, f64::max);
    let mut bound = f64::INFINITY;
    if omega_max > 0.0 {
        bound = bound.min(2.0 * std::f64::consts::PI / wavenumber_to_angular_per_fs(omega_max));
    }
    if gamma_max > 0.0 {
        bound = bound.min(1.0 / wavenumber_to_angular_per_fs(gamma_max));
    }
    if bound.is_finite() {
        bound / 40.0
    } else {
        1.0
    }
}

fn check_basis(basis: &[DVector<Complex64>]) -> Result<()> {
    let mut worst = 0.0f64;
    for (i, a) in basis.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            let expected = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((a.dotc(b) - Complex64::new(expected, 0.0)).norm());
        }
    }
    if worst > 1e-10 {
        return Err(Error::NonOrthonormalBasis(worst));
    }
    Ok(())
}

/// `⟨e_i|ρ(t)|e_j⟩` for every state.
pub fn coherence_series(traj: &Trajectory, basis: &[DVector<Complex64>], i: usize, j: usize) -> Result<Vec<Complex64>> {
    check_basis(basis)?;
    if i >= basis.len() || j >= basis.len() {
        return Err(Error::InvalidParameter(format!("basis index out of range ({i}, {j})")));
    }
    let (ei, ej) = (&basis[i], &basis[j]);
    Ok(traj.states.iter().map(|s| ei.dotc(&(s.matrix() * ej))).collect())
}

/// `Tr(O ρ(t))` for every state.
pub fn expectation_series(traj: &Trajectory, observable: &CMatrix) -> Vec<Complex64> {
    traj.states.iter().map(|s| (observable * s.matrix()).trace()).collect()
}

pub fn trace_distance_series(a: &Trajectory, b: &Trajectory) -> Result<Vec<f64>> {
    let same = a.states.len() == b.states.len()
        && (a.grid.dt_fs - b.grid.dt_fs).abs() <= 1e-12 * a.grid.dt_fs
        && (a.grid.t0_fs - b.grid.t0_fs).abs() <= 1e-12 * a.grid.dt_fs;
    if !same {
        return Err(Error::GridMismatch);
    }
    a.states.iter().zip(&b.states).map(|(x, y)| trace_distance(x, y)).collect()
}

/// Minimum eigenvalue of each state.
pub fn positivity_monitor(traj: &Trajectory) -> Vec<f64> {
    traj.states.iter().map(|s| s.min_eigenvalue()).collect()
}

/// Eigenvector columns of a Hermitian operator as a basis list.
pub fn eigenbasis(h: &CMatrix) -> Vec<DVector<Complex64>> {
    let (_, vectors) = eigh(h);
    vectors.column_iter().map(|c| c.into_owned()).collect()
}

/// Least-squares slope of `ln|x(t)|` over samples with `t ≥ t_start` and
/// `|x| > floor`, returned as a positive decay rate in cm⁻¹.
pub fn fit_decay_rate(times_fs: &[f64], values: &[Complex64], t_start_fs: f64, floor: f64) -> Option<f64> {
    let pts: Vec<(f64, f64)> = times_fs
        .iter()
        .zip(values)
        .filter(|(t, x)| **t >= t_start_fs && x.norm() > floor)
        .map(|(t, x)| (fs_to_inverse_wavenumber(*t), x.norm().ln()))
        .collect();
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    Some(-sxy / sxx)
}

/// Converts a rate in cm⁻¹ to fs⁻¹.
pub fn rate_per_fs(rate_cm: f64) -> f64 {
    wavenumber_to_angular_per_fs(rate_cm)
}

/// Converts a rate in fs⁻¹ to cm⁻¹.
pub fn rate_per_wavenumber(rate_fs: f64) -> f64 {
    angular_per_fs_to_wavenumber(rate_fs)
}
