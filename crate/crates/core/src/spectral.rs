//! Spectral data of the system Hamiltonian: distinct levels, Bohr frequencies,
//! jump operators, the reference split `H_S = H0 + δH` and the induced
//! clustering of Bohr frequencies.
//!
//! Clustering acts on energy levels. A Bohr frequency `ω = ε_j − ε_j′` is
//! assigned to the cluster centred at `ε0_k − ε0_k′`, where `k`, `k′` are the
//! reference levels containing `j`, `j′`. Assignment is done per level pair, so
//! an accidental coincidence of two Bohr frequencies from different reference
//! gaps is still split correctly.

use std::sync::atomic::{AtomicU64, Ordering};

use num_complex::Complex64;

use crate::bath::{BathDescriptor, Coupling};
use crate::error::{Error, Result};
use crate::linalg::{checked_eig, hermitian_part, max_abs, CMatrix, EigenLevel, HermitianOperator};

static NEXT_ID: AtomicU64 = AtomicU64::new(1);

fn fresh_id() -> u64 {
    NEXT_ID.fetch_add(1, Ordering::Relaxed)
}

/// Distinct eigenvalues of `H_S` with their projectors, ascending.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    id: u64,
    hamiltonian: HermitianOperator,
    pub levels: Vec<EigenLevel>,
    pub group_tol: f64,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn hamiltonian(&self) -> &HermitianOperator {
        &self.hamiltonian
    }

    pub fn energies(&self) -> Vec<f64> {
        self.levels.iter().map(|l| l.value).collect()
    }

    fn energy_scale(&self) -> f64 {
        self.levels.iter().map(|l| l.value.abs()).fold(0.0, f64::max)
    }
}

pub fn decompose(h: &HermitianOperator, group_tol: f64) -> Result<SpectralDecomposition> {
    if !(group_tol >= 0.0) {
        return Err(Error::InvalidParameter(format!("group tolerance must be non-negative, got {group_tol}")));
    }
    let levels = checked_eig(h.matrix(), group_tol)?;
    Ok(SpectralDecomposition { id: fresh_id(), hamiltonian: h.clone(), levels, group_tol })
}

/// One Bohr frequency with the level pairs `(j, j′)` such that `ε_j − ε_j′ = ω`.
#[derive(Debug, Clone, PartialEq)]
pub struct BohrFrequency {
    pub omega: f64,
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct BohrSpectrum {
    source: u64,
    pub frequencies: Vec<BohrFrequency>,
    pub dedup_tol: f64,
}

impl BohrSpectrum {
    pub fn omegas(&self) -> Vec<f64> {
        self.frequencies.iter().map(|f| f.omega).collect()
    }

    /// Index of the frequency closest to `omega`, if within the dedup tolerance.
    pub fn find(&self, omega: f64) -> Option<usize> {
        self.frequencies
            .iter()
            .enumerate()
            .map(|(i, f)| (i, (f.omega - omega).abs()))
            .filter(|&(_, d)| d <= self.dedup_tol.max(1e-12))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .map(|(i, _)| i)
    }
}

/// Default tolerance for identifying Bohr frequencies: `1e-9 × max|ε_j|`.
pub fn default_dedup_tol(d: &SpectralDecomposition) -> f64 {
    1e-9 * d.energy_scale()
}

/// All pairwise level differences, merged by single linkage within `dedup_tol`.
/// Pass `None` for the default tolerance.
pub fn bohr_frequencies(d: &SpectralDecomposition, dedup_tol: Option<f64>) -> BohrSpectrum {
    let tol = dedup_tol.unwrap_or_else(|| default_dedup_tol(d)).max(0.0);
    let n = d.levels.len();
    let mut raw: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for j in 0..n {
        for jp in 0..n {
            raw.push((d.levels[j].value - d.levels[jp].value, j, jp));
        }
    }
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut frequencies = Vec::new();
    let mut start = 0;
    while start < raw.len() {
        let mut end = start + 1;
        while end < raw.len() && raw[end].0 - raw[end - 1].0 <= tol {
            end += 1;
        }
        let group = &raw[start..end];
        let pairs: Vec<(usize, usize)> = group.iter().map(|&(_, j, jp)| (j, jp)).collect();
        let omega = if pairs.iter().any(|&(j, jp)| j == jp) {
            0.0
        } else {
            group.iter().map(|g| g.0).sum::<f64>() / group.len() as f64
        };
        frequencies.push(BohrFrequency { omega, pairs });
        start = end;
    }
    BohrSpectrum { source: d.id, frequencies, dedup_tol: tol }
}

/// `Σ_{(j,j′)} P_j′ A P_j` over the given pairs.
pub fn project_pairs(d: &SpectralDecomposition, a: &CMatrix, pairs: &[(usize, usize)]) -> CMatrix {
    let n = d.dim();
    let mut out = CMatrix::zeros(n, n);
    for &(j, jp) in pairs {
        out += &d.levels[jp].projector * a * &d.levels[j].projector;
    }
    out
}

/// Jump operators `A_{αω}` indexed `[α][frequency]`, optionally with cluster
/// aggregates `A_{αω̄}` indexed `[α][cluster]`.
#[derive(Debug, Clone)]
pub struct JumpOperatorSet {
    source: u64,
    pub frequencies: Vec<f64>,
    pub operators: Vec<Vec<CMatrix>>,
    pub cluster_centers: Vec<f64>,
    pub aggregated: Option<Vec<Vec<CMatrix>>>,
}

impl JumpOperatorSet {
    pub fn couplings(&self) -> usize {
        self.operators.len()
    }
}

pub fn jump_operators(d: &SpectralDecomposition, f: &BohrSpectrum, couplings: &[CMatrix]) -> Result<JumpOperatorSet> {
    if f.source != d.id {
        return Err(Error::MismatchedProvenance);
    }
    let n = d.dim();
    let mut operators = Vec::with_capacity(couplings.len());
    for a in couplings {
        if a.nrows() != n || a.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: a.nrows() });
        }
        operators.push(f.frequencies.iter().map(|bf| project_pairs(d, a, &bf.pairs)).collect());
    }
    Ok(JumpOperatorSet {
        source: d.id,
        frequencies: f.omegas(),
        operators,
        cluster_centers: Vec::new(),
        aggregated: None,
    })
}

/// A level of `H0` and the `H_S` levels it contains.
#[derive(Debug, Clone)]
pub struct ReferenceLevel {
    pub value: f64,
    pub projector: CMatrix,
    pub members: Vec<usize>,
}

/// Part of a Bohr frequency that falls into a given cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterMember {
    /// Index into the Bohr spectrum.
    pub frequency: usize,
    pub omega: f64,
    pub pairs: Vec<(usize, usize)>,
}

#[derive(Debug, Clone)]
pub struct BohrCluster {
    pub center: f64,
    pub members: Vec<ClusterMember>,
}

impl BohrCluster {
    /// `max |ω − ω̄|` over members.
    pub fn spread(&self) -> f64 {
        self.members.iter().map(|m| (m.omega - self.center).abs()).fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct ReferenceSplit {
    pub base: SpectralDecomposition,
    pub bohr: BohrSpectrum,
    pub h0_levels: Vec<ReferenceLevel>,
    pub h0: HermitianOperator,
    pub delta: HermitianOperator,
    pub bohr_clusters: Vec<BohrCluster>,
}

impl ReferenceSplit {
    pub fn centers(&self) -> Vec<f64> {
        self.bohr_clusters.iter().map(|c| c.center).collect()
    }

    /// Index of the cluster whose centre is closest to `omega_bar`.
    pub fn cluster_index(&self, omega_bar: f64) -> Option<usize> {
        self.bohr_clusters
            .iter()
            .enumerate()
            .min_by(|a, b| (a.1.center - omega_bar).abs().total_cmp(&(b.1.center - omega_bar).abs()))
            .map(|(i, _)| i)
    }

    pub fn is_trivial(&self) -> bool {
        self.h0_levels.iter().all(|l| l.members.len() == 1)
    }
}

/// Single-linkage clustering of the levels of `H_S` with gap threshold `level_cluster_tol`.
pub fn reference_split_by_tolerance(d: &SpectralDecomposition, level_cluster_tol: f64) -> Result<ReferenceSplit> {
    if !(level_cluster_tol >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "level cluster tolerance must be non-negative, got {level_cluster_tol}"
        )));
    }
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (j, level) in d.levels.iter().enumerate() {
        match groups.last_mut() {
            Some(g) if level.value - d.levels[*g.last().unwrap()].value <= level_cluster_tol => g.push(j),
            _ => groups.push(vec![j]),
        }
    }
    let n = d.dim();
    let h0_levels = groups
        .into_iter()
        .map(|members| {
            let weight: usize = members.iter().map(|&j| d.levels[j].multiplicity).sum();
            let value = members.iter().map(|&j| d.levels[j].value * d.levels[j].multiplicity as f64).sum::<f64>()
                / weight as f64;
            let mut projector = CMatrix::zeros(n, n);
            for &j in &members {
                projector += &d.levels[j].projector;
            }
            ReferenceLevel { value, projector, members }
        })
        .collect::<Vec<_>>();
    let mut h0 = CMatrix::zeros(n, n);
    for l in &h0_levels {
        h0 += l.projector.scale(l.value);
    }
    finish_split(d, h0_levels, h0)
}

/// Split with a user-supplied `H0`, which must be a function of `H_S`'s spectral projectors.
pub fn reference_split_explicit(d: &SpectralDecomposition, h0: &HermitianOperator) -> Result<ReferenceSplit> {
    let n = d.dim();
    if h0.dim() != n {
        return Err(Error::DimensionMismatch { expected: n, found: h0.dim() });
    }
    let scale = max_abs(h0.matrix()).max(max_abs(d.hamiltonian.matrix())).max(1.0);
    let ref_levels = checked_eig(h0.matrix(), 1e-9 * scale)?;

    let mut assigned = vec![None; d.levels.len()];
    for (k, q) in ref_levels.iter().enumerate() {
        for (j, p) in d.levels.iter().enumerate() {
            let inside = max_abs(&(&q.projector * &p.projector - &p.projector));
            if inside <= 1e-8 {
                assigned[j] = Some(k);
            }
        }
    }
    let mut h0_levels = Vec::with_capacity(ref_levels.len());
    let mut worst = 0.0f64;
    for (k, q) in ref_levels.iter().enumerate() {
        let members: Vec<usize> = (0..d.levels.len()).filter(|&j| assigned[j] == Some(k)).collect();
        let mut sum = CMatrix::zeros(n, n);
        for &j in &members {
            sum += &d.levels[j].projector;
        }
        worst = worst.max(max_abs(&(&q.projector - &sum)));
        h0_levels.push(ReferenceLevel { value: q.value, projector: sum, members });
    }
    if assigned.iter().any(|a| a.is_none()) {
        worst = worst.max(1.0);
    }
    if worst > 1e-10 {
        return Err(Error::IncompatibleReference(worst));
    }
    finish_split(d, h0_levels, h0.matrix().clone())
}

fn finish_split(d: &SpectralDecomposition, h0_levels: Vec<ReferenceLevel>, h0: CMatrix) -> Result<ReferenceSplit> {
    let bohr = bohr_frequencies(d, None);
    let mut level_of = vec![0; d.levels.len()];
    for (k, l) in h0_levels.iter().enumerate() {
        for &j in &l.members {
            level_of[j] = k;
        }
    }
    let ref_scale = h0_levels.iter().map(|l| l.value.abs()).fold(0.0, f64::max);
    let center_tol = (1e-9 * ref_scale).max(bohr.dedup_tol);

    let mut clusters: Vec<BohrCluster> = Vec::new();
    for (fi, bf) in bohr.frequencies.iter().enumerate() {
        for &(j, jp) in &bf.pairs {
            let (k, kp) = (level_of[j], level_of[jp]);
            let center = if k == kp { 0.0 } else { h0_levels[k].value - h0_levels[kp].value };
            let ci = match clusters.iter().position(|c| (c.center - center).abs() <= center_tol) {
                Some(ci) => ci,
                None => {
                    clusters.push(BohrCluster { center, members: Vec::new() });
                    clusters.len() - 1
                }
            };
            let cluster = &mut clusters[ci];
            match cluster.members.iter_mut().find(|m| m.frequency == fi) {
                Some(m) => m.pairs.push((j, jp)),
                None => cluster.members.push(ClusterMember { frequency: fi, omega: bf.omega, pairs: vec![(j, jp)] }),
            }
        }
    }
    clusters.sort_by(|a, b| a.center.total_cmp(&b.center));

    let h_s = d.hamiltonian.matrix();
    let delta = h_s - &h0;
    Ok(ReferenceSplit {
        base: d.clone(),
        bohr,
        h0_levels,
        h0: HermitianOperator::new(hermitian_part(&h0))?,
        delta: HermitianOperator::new(hermitian_part(&delta))?,
        bohr_clusters: clusters,
    })
}

/// Adds `A_{αω̄} = Σ_{ω∈𝓕_ω̄} A_{αω}` to a jump-operator set.
pub fn aggregate_jump_operators(j: &JumpOperatorSet, split: &ReferenceSplit) -> Result<JumpOperatorSet> {
    if j.source != split.base.id || split.bohr.source != split.base.id {
        return Err(Error::MismatchedProvenance);
    }
    if j.frequencies.len() != split.bohr.frequencies.len() {
        return Err(Error::MismatchedProvenance);
    }
    let n = split.base.dim();
    let mut aggregated = Vec::with_capacity(j.couplings());
    for per_freq in &j.operators {
        let mut row = Vec::with_capacity(split.bohr_clusters.len());
        for cluster in &split.bohr_clusters {
            let mut sum = CMatrix::zeros(n, n);
            for m in &cluster.members {
                sum += member_operator(split, per_freq, m);
            }
            row.push(sum);
        }
        aggregated.push(row);
    }
    Ok(JumpOperatorSet {
        source: j.source,
        frequencies: j.frequencies.clone(),
        operators: j.operators.clone(),
        cluster_centers: split.centers(),
        aggregated: Some(aggregated),
    })
}

/// The part of `A_{αω}` belonging to one cluster member. Equal to the full
/// `A_{αω}` unless the frequency is shared between clusters.
pub fn member_operator(split: &ReferenceSplit, per_freq: &[CMatrix], m: &ClusterMember) -> CMatrix {
    if m.pairs.len() == split.bohr.frequencies[m.frequency].pairs.len() {
        per_freq[m.frequency].clone()
    } else {
        // Recover the coupling from the full set of frequency components.
        let mut a = CMatrix::zeros(split.base.dim(), split.base.dim());
        for op in per_freq {
            a += op;
        }
        project_pairs(&split.base, &a, &m.pairs)
    }
}

/// Dimensionless ratios behind the three validity conditions of the unified
/// construction. All are advisory; smaller is better.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ValidityReport {
    /// `max |Γ(ω)| / Ω` over Bohr frequencies and coupled baths, Ω the slowest correlation decay rate.
    pub coupling_vs_bath_memory: f64,
    /// `max |Γ(ω̄)| / |ω̄′ − ω̄|` over distinct cluster centres.
    pub coupling_vs_cluster_gap: f64,
    /// `max |Re Γ′(ω̄)| Δω / |Re Γ(ω̄)|` over clusters.
    pub intra_cluster_variation_re: f64,
    /// `max |Im Γ′(ω̄)| Δω / |Im Γ(ω̄)|` over clusters.
    pub intra_cluster_variation_im: f64,
    /// `‖δH‖_max / ‖H_S‖_max`.
    pub perturbation_ratio: f64,
    pub warnings: Vec<String>,
}

pub fn validity_diagnostics(
    split: &ReferenceSplit,
    baths: &[BathDescriptor],
    couplings: &[Coupling],
) -> ValidityReport {
    let mut used: Vec<usize> = couplings.iter().map(|c| c.bath).filter(|&b| b < baths.len()).collect();
    used.sort_unstable();
    used.dedup();
    let baths: Vec<&BathDescriptor> = used.iter().map(|&b| &baths[b]).collect();

    let mut cond_i = 0.0f64;
    for b in &baths {
        let omega_c = b.correlation_decay_rate();
        for f in &split.bohr.frequencies {
            cond_i = cond_i.max(b.eval_gamma(f.omega).norm() / omega_c);
        }
    }

    let centers = split.centers();
    let mut cond_ii = 0.0f64;
    for (i, &w) in centers.iter().enumerate() {
        for (k, &wp) in centers.iter().enumerate() {
            if i == k {
                continue;
            }
            for b in &baths {
                cond_ii = cond_ii.max(b.eval_gamma(w).norm() / (wp - w).abs());
            }
        }
    }

    let (mut iii_re, mut iii_im) = (0.0f64, 0.0f64);
    for cluster in &split.bohr_clusters {
        let spread = cluster.spread();
        if spread == 0.0 {
            continue;
        }
        let h = spread / 100.0;
        for b in &baths {
            let g = b.eval_gamma(cluster.center);
            let dg: Complex64 = (b.eval_gamma(cluster.center + h) - b.eval_gamma(cluster.center - h)) / (2.0 * h);
            let floor = 1e-12 * g.norm();
            iii_re = iii_re.max(dg.re.abs() * spread / g.re.abs().max(floor));
            iii_im = iii_im.max(dg.im.abs() * spread / g.im.abs().max(floor));
        }
    }

    let hs = max_abs(split.base.hamiltonian.matrix());
    let perturbation_ratio = if hs == 0.0 { 0.0 } else { max_abs(split.delta.matrix()) / hs };
    let mut warnings = Vec::new();
    if split.h0_levels.len() == 1 && split.base.levels.len() > 1 && perturbation_ratio > 0.5 {
        warnings.push(format!(
            "all levels merged into one reference level with |dH|/|H_S| = {perturbation_ratio:.2}; intra-cluster variation is the user's responsibility"
        ));
    }
    for (name, v) in [
        ("coupling_vs_bath_memory", cond_i),
        ("coupling_vs_cluster_gap", cond_ii),
        ("intra_cluster_variation_re", iii_re),
        ("intra_cluster_variation_im", iii_im),
    ] {
        if v >= 1.0 {
            warnings.push(format!("{name} = {v:.3} is not small"));
        }
    }
    ValidityReport {
        coupling_vs_bath_memory: cond_i,
        coupling_vs_cluster_gap: cond_ii,
        intra_cluster_variation_re: iii_re,
        intra_cluster_variation_im: iii_im,
        perturbation_ratio,
        warnings,
    }
}
