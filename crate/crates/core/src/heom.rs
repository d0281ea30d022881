//! High-temperature hierarchical equations of motion for baths whose
//! correlation functions are sums of real-decay exponentials.
//!
//! Each (bath, mode) pair `m` with `C_m(s) = c_m e^{−ν_m s}` and system
//! operator `A_m` contributes one hierarchy index. The auxiliary density
//! operators obey
//!
//! ```text
//! dρ_n/dt = −i[H_S, ρ_n] − (Σ_m n_m ν_m) ρ_n
//!           − i Σ_m [A_m, ρ_{n+e_m}]
//!           − i Σ_m n_m (c_m A_m ρ_{n−e_m} − c_m* ρ_{n−e_m} A_m)
//! ```
//!
//! with `ρ_n = 0` beyond depth `L`.

use std::collections::HashMap;

use num_complex::Complex64;

use crate::bath::{check_couplings, BathDescriptor, Coupling, GammaMode};
use crate::dynamics::{trace_distance_series, TimeGrid, Trajectory};
use crate::error::{Error, Result};
use crate::linalg::{eigh, max_abs, CMatrix, DensityMatrix, HermitianOperator, I};
use crate::units::fs_to_inverse_wavenumber;

#[derive(Debug, Clone)]
pub struct HeomMode {
    pub bath: usize,
    pub amplitude: Complex64,
    pub decay: f64,
    pub operator: CMatrix,
}

#[derive(Debug, Clone)]
pub struct Hierarchy {
    hamiltonian: CMatrix,
    modes: Vec<HeomMode>,
    depth: usize,
    indices: Vec<Vec<usize>>,
    up: Vec<Vec<Option<usize>>>,
    down: Vec<Vec<Option<usize>>>,
    damping: Vec<f64>,
}

fn enumerate_indices(modes: usize, depth: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![0; modes]];
    let mut frontier = out.clone();
    for _ in 0..depth {
        let mut next = Vec::new();
        for idx in &frontier {
            // Only raise the last nonzero position or later, so each index appears once.
            let start = idx.iter().rposition(|&n| n > 0).unwrap_or(0);
            for m in start..modes {
                let mut k = idx.clone();
                k[m] += 1;
                next.push(k);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

pub fn build_hierarchy(
    h_s: &HermitianOperator,
    couplings: &[Coupling],
    baths: &[BathDescriptor],
    depth: usize,
) -> Result<Hierarchy> {
    if depth < 1 {
        return Err(Error::InvalidParameter("hierarchy depth must be at least 1".into()));
    }
    let dim = h_s.dim();
    check_couplings(couplings, baths, dim)?;
    let mut modes = Vec::new();
    for (k, bath) in baths.iter().enumerate() {
        if bath.gamma_mode != GammaMode::ExpSum {
            return Err(Error::UnsupportedBath(format!(
                "bath '{}' uses KMS-exact rates, which have no exponential-mode hierarchy",
                bath.label
            )));
        }
        let members: Vec<&Coupling> = couplings.iter().filter(|c| c.bath == k).collect();
        if members.is_empty() {
            continue;
        }
        let operator = members.iter().fold(CMatrix::zeros(dim, dim), |acc, c| acc + &c.operator);
        for mode in &bath.modes {
            if mode.decay.im != 0.0 {
                return Err(Error::UnsupportedBath(format!(
                    "bath '{}' has a complex decay rate {}",
                    bath.label, mode.decay
                )));
            }
            modes.push(HeomMode {
                bath: k,
                amplitude: mode.amplitude,
                decay: mode.decay.re,
                operator: operator.clone(),
            });
        }
    }

    let indices = enumerate_indices(modes.len(), depth);
    let lookup: HashMap<&[usize], usize> = indices.iter().enumerate().map(|(i, v)| (v.as_slice(), i)).collect();
    let mut up = Vec::with_capacity(indices.len());
    let mut down = Vec::with_capacity(indices.len());
    let mut damping = Vec::with_capacity(indices.len());
    for idx in &indices {
        let mut u = Vec::with_capacity(modes.len());
        let mut d = Vec::with_capacity(modes.len());
        for m in 0..modes.len() {
            let mut k = idx.clone();
            k[m] += 1;
            u.push(lookup.get(k.as_slice()).copied());
            if idx[m] > 0 {
                k[m] -= 2;
                d.push(lookup.get(k.as_slice()).copied());
            } else {
                d.push(None);
            }
        }
        up.push(u);
        down.push(d);
        damping.push(idx.iter().zip(&modes).map(|(&n, m)| n as f64 * m.decay).sum());
    }
    Ok(Hierarchy { hamiltonian: h_s.matrix().clone(), modes, depth, indices, up, down, damping })
}

impl Hierarchy {
    pub fn dim(&self) -> usize {
        self.hamiltonian.nrows()
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn modes(&self) -> &[HeomMode] {
        &self.modes
    }

    /// Number of auxiliary density operators including the system one.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    pub fn multi_index(&self, k: usize) -> &[usize] {
        &self.indices[k]
    }

    /// Hierarchy state with `ρ0` in the system slot and zero elsewhere.
    pub fn initial_state(&self, rho0: &CMatrix) -> Vec<CMatrix> {
        let n = self.dim();
        let mut s = vec![CMatrix::zeros(n, n); self.len()];
        s[0] = rho0.clone();
        s
    }

    /// Time derivative of the full hierarchy (energies in cm⁻¹).
    pub fn rhs(&self, state: &[CMatrix]) -> Vec<CMatrix> {
        let n = self.dim();
        let flat: Vec<Complex64> = state.iter().flat_map(|m| m.as_slice().iter().copied()).collect();
        let mut out = vec![Complex64::new(0.0, 0.0); flat.len()];
        self.rhs_flat(&flat, &mut out, &mut Scratch::new(n));
        out.chunks(n * n).map(|c| CMatrix::from_column_slice(n, n, c)).collect()
    }

    fn rhs_flat(&self, state: &[Complex64], out: &mut [Complex64], scratch: &mut Scratch) {
        let n = self.dim();
        let b = n * n;
        let h = self.hamiltonian.as_slice();
        let minus_i = Complex64::new(0.0, -1.0);
        for (k, o) in out.chunks_exact_mut(b).enumerate() {
            let r = &state[k * b..(k + 1) * b];
            for (oi, ri) in o.iter_mut().zip(r) {
                *oi = ri * -self.damping[k];
            }
            mul_acc(o, h, r, n, minus_i);
            mul_acc(o, r, h, n, I);
            for (m, mode) in self.modes.iter().enumerate() {
                let up = self.up[k][m];
                let down = self.down[k][m];
                if up.is_none() && down.is_none() {
                    continue;
                }
                let (x, y) = (&mut scratch.x, &mut scratch.y);
                x.fill(Complex64::new(0.0, 0.0));
                y.fill(Complex64::new(0.0, 0.0));
                if let Some(u) = up {
                    for ((xi, yi), ri) in x.iter_mut().zip(y.iter_mut()).zip(&state[u * b..(u + 1) * b]) {
                        *xi += ri * minus_i;
                        *yi += ri * minus_i;
                    }
                }
                if let Some(l) = down {
                    let w = minus_i * self.indices[k][m] as f64;
                    let (cx, cy) = (w * mode.amplitude, w * mode.amplitude.conj());
                    for ((xi, yi), ri) in x.iter_mut().zip(y.iter_mut()).zip(&state[l * b..(l + 1) * b]) {
                        *xi += ri * cx;
                        *yi += ri * cy;
                    }
                }
                let a = mode.operator.as_slice();
                mul_acc(o, a, x, n, Complex64::new(1.0, 0.0));
                mul_acc(o, y, a, n, Complex64::new(-1.0, 0.0));
            }
        }
    }

    /// Upper bound on the spectral radius of the hierarchy generator, in cm⁻¹.
    ///
    /// The estimate uses the rescaled ADOs `ρ_n / Π √(n_m! |c_m|^{n_m})`, in
    /// which the coupling blocks have norm `≤ 2‖A_m‖ √(L |c_m|)`.
    pub fn rate_bound(&self) -> f64 {
        let (e, _) = eigh(&self.hamiltonian);
        let spread = e.last().copied().unwrap_or(0.0) - e.first().copied().unwrap_or(0.0);
        let damping = self.damping.iter().copied().fold(0.0, f64::max);
        let coupling: f64 = self
            .modes
            .iter()
            .map(|m| {
                let norm = m.operator.clone().singular_values().iter().copied().fold(0.0, f64::max);
                2.0 * norm * (self.depth as f64 * m.amplitude.norm()).sqrt()
            })
            .sum();
        spread + damping + 2.0 * coupling
    }
}

struct Scratch {
    x: Vec<Complex64>,
    y: Vec<Complex64>,
}

impl Scratch {
    fn new(n: usize) -> Self {
        Self { x: vec![Complex64::new(0.0, 0.0); n * n], y: vec![Complex64::new(0.0, 0.0); n * n] }
    }
}

/// `out += alpha · a b` for column-major `n × n` blocks.
fn mul_acc(out: &mut [Complex64], a: &[Complex64], b: &[Complex64], n: usize, alpha: Complex64) {
    for j in 0..n {
        for k in 0..n {
            let bkj = alpha * b[k + j * n];
            if bkj == Complex64::new(0.0, 0.0) {
                continue;
            }
            let col = &a[k * n..(k + 1) * n];
            for (o, aik) in out[j * n..(j + 1) * n].iter_mut().zip(col) {
                *o += aik * bkj;
            }
        }
    }
}

/// RK4 on the stacked hierarchy with substeps `rate_bound · dt_sub ≤ 0.1`.
/// Returns the system ADO on the grid.
pub fn propagate_heom(h: &Hierarchy, rho0: &DensityMatrix, grid: TimeGrid) -> Result<Trajectory> {
    if rho0.dim() != h.dim() {
        return Err(Error::DimensionMismatch { expected: h.dim(), found: rho0.dim() });
    }
    let n = h.dim();
    let dt = fs_to_inverse_wavenumber(grid.dt_fs);
    let sub = ((h.rate_bound() * dt) / 0.1).ceil().max(1.0) as usize;
    let hs = dt / sub as f64;
    let zero = Complex64::new(0.0, 0.0);
    let mut state = vec![zero; h.len() * n * n];
    state[..n * n].copy_from_slice(rho0.matrix().as_slice());
    let (mut k1, mut k2, mut k3, mut k4, mut tmp) =
        (state.clone(), state.clone(), state.clone(), state.clone(), state.clone());
    let mut scratch = Scratch::new(n);
    let mut states = Vec::with_capacity(grid.steps + 1);
    states.push(rho0.clone());
    for step in 1..=grid.steps {
        for _ in 0..sub {
            h.rhs_flat(&state, &mut k1, &mut scratch);
            for ((t, s), k) in tmp.iter_mut().zip(&state).zip(&k1) {
                *t = s + k * (0.5 * hs);
            }
            h.rhs_flat(&tmp, &mut k2, &mut scratch);
            for ((t, s), k) in tmp.iter_mut().zip(&state).zip(&k2) {
                *t = s + k * (0.5 * hs);
            }
            h.rhs_flat(&tmp, &mut k3, &mut scratch);
            for ((t, s), k) in tmp.iter_mut().zip(&state).zip(&k3) {
                *t = s + k * hs;
            }
            h.rhs_flat(&tmp, &mut k4, &mut scratch);
            for (i, s) in state.iter_mut().enumerate() {
                *s += (k1[i] + (k2[i] + k3[i]) * 2.0 + k4[i]) * (hs / 6.0);
            }
        }
        let system = CMatrix::from_column_slice(n, n, &state[..n * n]);
        if system.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::PropagationDiverged { step });
        }
        states.push(DensityMatrix::from_propagated(system));
    }
    Ok(Trajectory { grid, states, method: "heom".into() })
}

/// Pairwise maximum trace distances between trajectories at several depths.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ConvergenceTable {
    pub depths: Vec<usize>,
    /// `distances[i][j] = max_t D(ρ_{L_i}(t), ρ_{L_j}(t))`.
    pub distances: Vec<Vec<f64>>,
}

impl ConvergenceTable {
    /// Distances between consecutive entries of `depths`.
    pub fn successive(&self) -> Vec<f64> {
        (1..self.depths.len()).map(|i| self.distances[i - 1][i]).collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.successive().windows(2).all(|w| w[1] <= w[0])
    }
}

/// Runs one HEOM propagation per depth, concurrently, and tabulates their distances.
pub fn convergence_scan<F>(
    builder: F,
    rho0: &DensityMatrix,
    grid: TimeGrid,
    depths: &[usize],
) -> Result<ConvergenceTable>
where
    F: Fn(usize) -> Result<Hierarchy> + Sync,
{
    let trajectories: Vec<Result<Trajectory>> = std::thread::scope(|s| {
        let handles: Vec<_> = depths
            .iter()
            .map(|&l| {
                let builder = &builder;
                s.spawn(move || builder(l).and_then(|h| propagate_heom(&h, rho0, grid)))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("HEOM worker panicked")).collect()
    });
    let trajectories = trajectories.into_iter().collect::<Result<Vec<_>>>()?;
    convergence_table(depths, &trajectories)
}

/// Tabulates pairwise distances between trajectories computed at `depths`.
pub fn convergence_table(depths: &[usize], trajectories: &[Trajectory]) -> Result<ConvergenceTable> {
    if depths.len() != trajectories.len() {
        return Err(Error::DimensionMismatch { expected: depths.len(), found: trajectories.len() });
    }
    let n = depths.len();
    let mut distances = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let worst = trace_distance_series(&trajectories[i], &trajectories[j])?.into_iter().fold(0.0, f64::max);
            distances[i][j] = worst;
            distances[j][i] = worst;
        }
    }
    Ok(ConvergenceTable { depths: depths.to_vec(), distances })
}

/// Largest entry of any ADO, useful as a divergence diagnostic.
pub fn max_ado_entry(state: &[CMatrix]) -> f64 {
    state.iter().map(max_abs).fold(0.0, f64::max)
}
