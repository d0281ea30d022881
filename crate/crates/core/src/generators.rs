//! Master-equation generators as dense superoperators.
//!
//! Every generator has the shape
//! `𝓛ρ = −i[H_S + Σ_n H_LS^n, ρ] + Σ_n 𝓓_n ρ` with one Lamb shift and one
//! dissipator per bath. Each bath term is assembled from a list of channel
//! operators `F_i` (a coupling operator restricted to a Bohr frequency or a
//! cluster) and Hermitian coefficient matrices `M`, `S`:
//!
//! ```text
//! 𝓓ρ   = Σ_ij M_ij (F_j ρ F_i† − ½{F_i† F_j, ρ})
//! H_LS = Σ_ij S_ij F_i† F_j
//! ```
//!
//! The builders differ only in the channels and in which pairs `(i, j)` are
//! retained.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::bath::{check_couplings, BathDescriptor, Coupling};
use crate::error::{Error, Result};
use crate::linalg::{
    eigh, hermitian_part, lift_dissipative_term, lift_hamiltonian, lift_sandwich, max_abs, CMatrix, HermitianOperator,
    Superoperator,
};
use crate::spectral::{
    aggregate_jump_operators, jump_operators, member_operator, JumpOperatorSet, ReferenceSplit, SpectralDecomposition,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GeneratorKind {
    Redfield,
    Davies,
    Unified,
    UnifiedSimplified,
    NonsecularDavies,
}

impl GeneratorKind {
    pub const ALL: [GeneratorKind; 5] = [
        GeneratorKind::Redfield,
        GeneratorKind::Davies,
        GeneratorKind::Unified,
        GeneratorKind::UnifiedSimplified,
        GeneratorKind::NonsecularDavies,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GeneratorKind::Redfield => "redfield",
            GeneratorKind::Davies => "davies",
            GeneratorKind::Unified => "unified",
            GeneratorKind::UnifiedSimplified => "unified_simplified",
            GeneratorKind::NonsecularDavies => "nonsecular_davies",
        }
    }

    /// Kinds whose certificate is guaranteed positive semidefinite.
    pub fn is_gkls(self) -> bool {
        matches!(self, GeneratorKind::Davies | GeneratorKind::Unified | GeneratorKind::UnifiedSimplified)
    }
}

impl fmt::Display for GeneratorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GeneratorKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown method '{s}'")))
    }
}

/// Coefficient matrix of one bath restricted to one frequency block.
#[derive(Debug, Clone)]
pub struct CertificateBlock {
    pub bath: usize,
    /// Block frequency (`ω`, `ω̄`), or `None` for the full Redfield-type matrix.
    pub frequency: Option<f64>,
    pub matrix: CMatrix,
    pub min_eigenvalue: f64,
}

#[derive(Debug, Clone)]
pub struct GklsCertificate {
    pub blocks: Vec<CertificateBlock>,
}

impl GklsCertificate {
    pub fn min_eigenvalue(&self) -> f64 {
        self.blocks.iter().map(|b| b.min_eigenvalue).fold(f64::INFINITY, f64::min)
    }

    /// Every block has minimum eigenvalue at least `-tol × (1 + max|block|)`.
    pub fn is_positive(&self, tol: f64) -> bool {
        self.blocks.iter().all(|b| b.min_eigenvalue >= -tol * (1.0 + max_abs(&b.matrix)))
    }
}

/// Contribution of one bath.
#[derive(Debug, Clone)]
pub struct BathTerm {
    pub label: String,
    pub beta: f64,
    pub lamb_shift: HermitianOperator,
    pub dissipator: Superoperator,
    /// `𝓛_n = −i[H_LS^n, ·] + 𝓓_n`.
    pub generator: Superoperator,
    blocks: Vec<CertificateBlock>,
}

#[derive(Debug, Clone)]
pub struct Generator {
    pub kind: GeneratorKind,
    pub hamiltonian: HermitianOperator,
    /// The Hamiltonian the generator is covariant under (`H_S^(0)` for the unified kinds, `H_S` otherwise).
    pub reference: HermitianOperator,
    pub baths: Vec<BathTerm>,
    pub total: Superoperator,
}

impl Generator {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn total_lamb_shift(&self) -> CMatrix {
        let n = self.dim();
        self.baths.iter().fold(CMatrix::zeros(n, n), |acc, b| acc + b.lamb_shift.matrix())
    }

    pub fn apply(&self, rho: &CMatrix) -> CMatrix {
        self.total.apply(rho)
    }
}

pub fn gkls_certificate(g: &Generator) -> GklsCertificate {
    GklsCertificate { blocks: g.baths.iter().flat_map(|b| b.blocks.iter().cloned()).collect() }
}

struct Channel {
    op: CMatrix,
    /// Frequency at which Γ is evaluated.
    omega: f64,
    /// Pairs are retained only within equal groups.
    group: usize,
}

type Coefficient<'a> = dyn Fn(&Channel, &Channel) -> Complex64 + 'a;

/// `(𝓓, certificate blocks)` for channels `F` and coefficient `M_ij = coeff(F_i, F_j)`.
fn assemble_dissipator(
    dim: usize,
    bath: usize,
    channels: &[Channel],
    coeff: &Coefficient,
    block_frequency: &dyn Fn(usize) -> Option<f64>,
) -> (Superoperator, Vec<CertificateBlock>) {
    let mut d = Superoperator::zeros(dim);
    let mut groups: Vec<usize> = channels.iter().map(|c| c.group).collect();
    groups.sort_unstable();
    groups.dedup();
    let mut blocks = Vec::with_capacity(groups.len());
    for g in groups {
        let members: Vec<&Channel> = channels.iter().filter(|c| c.group == g).collect();
        let m = CMatrix::from_fn(members.len(), members.len(), |i, j| coeff(members[i], members[j]));
        for (i, fi) in members.iter().enumerate() {
            for (j, fj) in members.iter().enumerate() {
                if m[(i, j)] != Complex64::new(0.0, 0.0) {
                    d.add_assign(&lift_dissipative_term(&fj.op, &fi.op, m[(i, j)]));
                }
            }
        }
        let (vals, _) = eigh(&hermitian_part(&m));
        blocks.push(CertificateBlock {
            bath,
            frequency: block_frequency(g),
            min_eigenvalue: vals.first().copied().unwrap_or(0.0),
            matrix: m,
        });
    }
    (d, blocks)
}

fn assemble_lamb(dim: usize, channels: &[Channel], coeff: &Coefficient) -> Result<HermitianOperator> {
    let mut h = CMatrix::zeros(dim, dim);
    for fi in channels {
        let fid = fi.op.adjoint();
        for fj in channels.iter().filter(|c| c.group == fi.group) {
            h += (&fid * &fj.op) * coeff(fi, fj);
        }
    }
    HermitianOperator::new(hermitian_part(&h))
}

fn is_nonzero(m: &CMatrix, scale: f64) -> bool {
    max_abs(m) > 1e-13 * scale.max(1.0)
}

fn couplings_of(couplings: &[Coupling], bath: usize) -> Vec<usize> {
    couplings.iter().enumerate().filter(|(_, c)| c.bath == bath).map(|(a, _)| a).collect()
}

fn check_inputs(dim: usize, couplings: &[Coupling], baths: &[BathDescriptor]) -> Result<()> {
    check_couplings(couplings, baths, dim)?;
    for (k, b) in baths.iter().enumerate() {
        for f in [-1.0, 0.0, 1.0] {
            let g = b.eval_gamma(f);
            if !g.re.is_finite() || !g.im.is_finite() {
                return Err(Error::InvalidParameter(format!("bath {k} has non-finite Γ")));
            }
        }
    }
    Ok(())
}

fn frequency_channels(jumps: &JumpOperatorSet, alphas: &[usize], scale: f64, secular: bool) -> Vec<Channel> {
    let mut out = Vec::new();
    for &a in alphas {
        for (f, op) in jumps.operators[a].iter().enumerate() {
            if is_nonzero(op, scale) {
                out.push(Channel { op: op.clone(), omega: jumps.frequencies[f], group: if secular { f } else { 0 } });
            }
        }
    }
    out
}

fn finish(
    kind: GeneratorKind,
    hamiltonian: &HermitianOperator,
    reference: &HermitianOperator,
    terms: Vec<(usize, HermitianOperator, Superoperator, Vec<CertificateBlock>)>,
    baths: &[BathDescriptor],
) -> Generator {
    let mut h_total = hamiltonian.matrix().clone();
    let mut total = Superoperator::zeros(hamiltonian.dim());
    let mut out = Vec::with_capacity(terms.len());
    for (k, lamb, diss, blocks) in terms {
        h_total += lamb.matrix();
        total.add_assign(&diss);
        let generator = &lift_hamiltonian(lamb.matrix()) + &diss;
        out.push(BathTerm {
            label: baths[k].label.clone(),
            beta: baths[k].beta,
            lamb_shift: lamb,
            dissipator: diss,
            generator,
            blocks,
        });
    }
    total.add_assign(&lift_hamiltonian(&h_total));
    Generator { kind, hamiltonian: hamiltonian.clone(), reference: reference.clone(), baths: out, total }
}

/// Shared body of the Redfield, nonsecular-Davies and Davies builders.
fn build_frequency_resolved(
    kind: GeneratorKind,
    d: &SpectralDecomposition,
    couplings: &[Coupling],
    baths: &[BathDescriptor],
) -> Result<Generator> {
    let dim = d.dim();
    check_inputs(dim, couplings, baths)?;
    let bohr = crate::spectral::bohr_frequencies(d, None);
    let ops: Vec<CMatrix> = couplings.iter().map(|c| c.operator.clone()).collect();
    let jumps = jump_operators(d, &bohr, &ops)?;
    let scale = ops.iter().map(max_abs).fold(0.0, f64::max);
    let secular = kind == GeneratorKind::Davies;
    let swapped = kind == GeneratorKind::NonsecularDavies;

    let mut terms = Vec::with_capacity(baths.len());
    for (k, bath) in baths.iter().enumerate() {
        let channels = frequency_channels(&jumps, &couplings_of(couplings, k), scale, secular);
        // i = (α, ω′), j = (β, ω): γ(ω, ω′) = Γ(ω) + Γ*(ω′); the swapped form uses γ(ω′, ω).
        let gamma = |fi: &Channel, fj: &Channel| {
            let (w, wp) = if swapped { (fi.omega, fj.omega) } else { (fj.omega, fi.omega) };
            bath.gamma_s_pair(w, wp).0
        };
        let lamb = |fi: &Channel, fj: &Channel| {
            let (w, wp) = if swapped { (fi.omega, fj.omega) } else { (fj.omega, fi.omega) };
            bath.gamma_s_pair(w, wp).1
        };
        let freqs = jumps.frequencies.clone();
        let block_frequency = move |g: usize| if secular { Some(freqs[g]) } else { None };
        let (diss, blocks) = assemble_dissipator(dim, k, &channels, &gamma, &block_frequency);
        let h_ls = assemble_lamb(dim, &channels, &lamb)?;
        terms.push((k, h_ls, diss, blocks));
    }
    Ok(finish(kind, d.hamiltonian(), d.hamiltonian(), terms, baths))
}

/// Redfield generator in the Schrödinger picture, with all frequency pairs.
pub fn build_redfield(
    d: &SpectralDecomposition,
    couplings: &[Coupling],
    baths: &[BathDescriptor],
) -> Result<Generator> {
    build_frequency_resolved(GeneratorKind::Redfield, d, couplings, baths)
}

/// Secular (Davies) generator: only equal-frequency pairs.
pub fn build_davies(d: &SpectralDecomposition, couplings: &[Coupling], baths: &[BathDescriptor]) -> Result<Generator> {
    build_frequency_resolved(GeneratorKind::Davies, d, couplings, baths)
}

/// Redfield structure with the arguments of `γ` and `S` exchanged.
pub fn build_nonsecular_davies(
    d: &SpectralDecomposition,
    couplings: &[Coupling],
    baths: &[BathDescriptor],
) -> Result<Generator> {
    build_frequency_resolved(GeneratorKind::NonsecularDavies, d, couplings, baths)
}

fn build_clustered(
    kind: GeneratorKind,
    split: &ReferenceSplit,
    couplings: &[Coupling],
    baths: &[BathDescriptor],
) -> Result<Generator> {
    let d = &split.base;
    let dim = d.dim();
    check_inputs(dim, couplings, baths)?;
    let ops: Vec<CMatrix> = couplings.iter().map(|c| c.operator.clone()).collect();
    let jumps = aggregate_jump_operators(&jump_operators(d, &split.bohr, &ops)?, split)?;
    let aggregated = jumps.aggregated.as_ref().expect("aggregated operators");
    let scale = ops.iter().map(max_abs).fold(0.0, f64::max);
    let centers = split.centers();

    let mut terms = Vec::with_capacity(baths.len());
    for (k, bath) in baths.iter().enumerate() {
        let alphas = couplings_of(couplings, k);
        let mut cluster_channels = Vec::new();
        let mut member_channels = Vec::new();
        for &a in &alphas {
            for (c, cluster) in split.bohr_clusters.iter().enumerate() {
                if is_nonzero(&aggregated[a][c], scale) {
                    cluster_channels.push(Channel { op: aggregated[a][c].clone(), omega: cluster.center, group: c });
                }
                for m in &cluster.members {
                    let op = member_operator(split, &jumps.operators[a], m);
                    if is_nonzero(&op, scale) {
                        member_channels.push(Channel { op, omega: m.omega, group: c });
                    }
                }
            }
        }
        let gamma = |fi: &Channel, fj: &Channel| bath.gamma_s_pair(fj.omega, fi.omega).0;
        let lamb = |fi: &Channel, fj: &Channel| bath.gamma_s_pair(fj.omega, fi.omega).1;
        let cs = centers.clone();
        let block_frequency = move |g: usize| Some(cs[g]);
        let (diss, blocks) = assemble_dissipator(dim, k, &cluster_channels, &gamma, &block_frequency);
        let h_ls = match kind {
            GeneratorKind::Unified => assemble_lamb(dim, &member_channels, &lamb)?,
            _ => assemble_lamb(dim, &cluster_channels, &lamb)?,
        };
        terms.push((k, h_ls, diss, blocks));
    }
    Ok(finish(kind, d.hamiltonian(), &split.h0, terms, baths))
}

/// Unified GKLS generator: dissipator from cluster-aggregated jump operators
/// with rates at the cluster centres, Lamb shift from intra-cluster pairs at
/// the original frequencies.
pub fn build_unified(split: &ReferenceSplit, couplings: &[Coupling], baths: &[BathDescriptor]) -> Result<Generator> {
    build_clustered(GeneratorKind::Unified, split, couplings, baths)
}

/// Unified dissipator with the Lamb shift `Σ S(ω̄, ω̄) A_ω̄† A_ω̄`.
pub fn build_unified_simplified(
    split: &ReferenceSplit,
    couplings: &[Coupling],
    baths: &[BathDescriptor],
) -> Result<Generator> {
    build_clustered(GeneratorKind::UnifiedSimplified, split, couplings, baths)
}

/// Dispatches on `kind`; the frequency-resolved kinds use `split.base`.
pub fn build(
    kind: GeneratorKind,
    split: &ReferenceSplit,
    couplings: &[Coupling],
    baths: &[BathDescriptor],
) -> Result<Generator> {
    match kind {
        GeneratorKind::Redfield => build_redfield(&split.base, couplings, baths),
        GeneratorKind::Davies => build_davies(&split.base, couplings, baths),
        GeneratorKind::NonsecularDavies => build_nonsecular_davies(&split.base, couplings, baths),
        GeneratorKind::Unified => build_unified(split, couplings, baths),
        GeneratorKind::UnifiedSimplified => build_unified_simplified(split, couplings, baths),
    }
}

/// `−i[H, ·]` as a superoperator.
pub fn hamiltonian_superoperator(h: &CMatrix) -> Superoperator {
    lift_hamiltonian(h)
}

/// `c (A ρ A† − ½{A†A, ρ})`.
pub fn lindblad_channel(a: &CMatrix, rate: f64) -> Superoperator {
    lift_dissipative_term(a, a, Complex64::new(rate, 0.0))
}

/// `A ρ B` as a superoperator, re-exported for building custom terms.
pub fn sandwich(a: &CMatrix, b: &CMatrix) -> Result<Superoperator> {
    lift_sandwich(a, b)
}
