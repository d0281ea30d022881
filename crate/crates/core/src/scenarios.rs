//! Scenario specifications: a TOML schema with unit-bearing quantities, the
//! two built-in experiments, and closed forms for the dephasing dimer.
//!
//! Quantities are strings of the form `"<number> <unit>"`:
//! energies in `cm^-1`, times in `fs` or `ps`, temperatures in `K`, and the
//! Boltzmann constant in `cm^-1/K`.

use std::fmt;
use std::path::Path;

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};

use crate::bath::{drude_lorentz_exact_gamma, drude_lorentz_high_temp, BathDescriptor, Coupling};
use crate::error::{Error, Result};
use crate::generators::GeneratorKind;
use crate::linalg::{c64, identity, kron, CMatrix, DensityMatrix, HermitianOperator};
use crate::spectral::{
    decompose, reference_split_by_tolerance, reference_split_explicit, validity_diagnostics, ReferenceSplit,
    ValidityReport,
};
use crate::units::{angular_per_fs_to_wavenumber, fs_to_inverse_wavenumber, DEFAULT_BOLTZMANN};

macro_rules! quantity {
    ($name:ident, $what:literal, [$(($unit:literal, $factor:expr)),+], $canonical:literal) => {
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name(pub f64);

        impl $name {
            pub fn parse(s: &str) -> std::result::Result<Self, String> {
                let mut parts = s.split_whitespace();
                let (Some(num), Some(unit), None) = (parts.next(), parts.next(), parts.next()) else {
                    return Err(format!(concat!("expected ", $what, " as \"<number> <unit>\", got \"{}\""), s));
                };
                let value: f64 = num.parse().map_err(|_| format!("invalid number \"{num}\" in \"{s}\""))?;
                if !value.is_finite() {
                    return Err(format!("non-finite value in \"{s}\""));
                }
                $(if unit == $unit { return Ok(Self(value * $factor)); })+
                Err(format!(concat!("unknown ", $what, " unit \"{}\" in \"{}\""), unit, s))
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!("{} ", $canonical), self.0)
            }
        }

        impl Serialize for $name {
            fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
                s.serialize_str(&self.to_string())
            }
        }

        impl<'de> Deserialize<'de> for $name {
            fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
                struct V;
                impl Visitor<'_> for V {
                    type Value = $name;
                    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                        f.write_str(concat!("a ", $what, " string such as \"1 ", $canonical, "\""))
                    }
                    fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<$name, E> {
                        $name::parse(v).map_err(E::custom)
                    }
                }
                d.deserialize_str(V)
            }
        }
    };
}

quantity!(Energy, "energy", [("cm^-1", 1.0), ("cm-1", 1.0), ("1/cm", 1.0)], "cm^-1");
quantity!(Time, "time", [("fs", 1.0), ("ps", 1000.0)], "fs");
quantity!(Temperature, "temperature", [("K", 1.0)], "K");
quantity!(BoltzmannConstant, "Boltzmann constant", [("cm^-1/K", 1.0)], "cm^-1/K");

/// Either a generator kind or the HEOM reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Redfield,
    Davies,
    Unified,
    UnifiedSimplified,
    NonsecularDavies,
    Heom,
}

impl Method {
    pub fn generator_kind(self) -> Option<GeneratorKind> {
        match self {
            Method::Redfield => Some(GeneratorKind::Redfield),
            Method::Davies => Some(GeneratorKind::Davies),
            Method::Unified => Some(GeneratorKind::Unified),
            Method::UnifiedSimplified => Some(GeneratorKind::UnifiedSimplified),
            Method::NonsecularDavies => Some(GeneratorKind::NonsecularDavies),
            Method::Heom => None,
        }
    }

    pub fn name(self) -> &'static str {
        self.generator_kind().map_or("heom", GeneratorKind::name)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        if s == "heom" {
            return Ok(Method::Heom);
        }
        let k: GeneratorKind = s.parse()?;
        Ok(match k {
            GeneratorKind::Redfield => Method::Redfield,
            GeneratorKind::Davies => Method::Davies,
            GeneratorKind::Unified => Method::Unified,
            GeneratorKind::UnifiedSimplified => Method::UnifiedSimplified,
            GeneratorKind::NonsecularDavies => Method::NonsecularDavies,
        })
    }
}

/// Dense matrix as row lists of real and (optional) imaginary parts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixSpec {
    /// Required for energies; must be `cm^-1`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
    pub real: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imag: Option<Vec<Vec<f64>>>,
}

impl MatrixSpec {
    pub fn from_matrix(m: &CMatrix, unit: Option<&str>) -> Self {
        let rows = |f: fn(&Complex64) -> f64| {
            (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| f(&m[(i, j)])).collect()).collect()
        };
        let imag: Vec<Vec<f64>> = rows(|z| z.im);
        let has_imag = imag.iter().flatten().any(|&x| x != 0.0);
        MatrixSpec { unit: unit.map(str::to_string), real: rows(|z| z.re), imag: has_imag.then_some(imag) }
    }

    fn to_matrix(&self, what: &str, energy: bool) -> Result<CMatrix> {
        if energy {
            match self.unit.as_deref() {
                Some("cm^-1") | Some("cm-1") | Some("1/cm") => {}
                Some(u) => return Err(Error::Scenario(format!("{what}: unsupported energy unit \"{u}\""))),
                None => return Err(Error::Scenario(format!("{what}: missing unit (expected unit = \"cm^-1\")"))),
            }
        }
        let n = self.real.len();
        if n == 0 || self.real.iter().any(|r| r.len() != n) {
            return Err(Error::Scenario(format!("{what}: real part must be a non-empty square matrix")));
        }
        let imag = match &self.imag {
            Some(im) => {
                if im.len() != n || im.iter().any(|r| r.len() != n) {
                    return Err(Error::Scenario(format!("{what}: imaginary part has the wrong shape")));
                }
                im.clone()
            }
            None => vec![vec![0.0; n]; n],
        };
        Ok(CMatrix::from_fn(n, n, |i, j| c64(self.real[i][j], imag[i][j])))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    /// `E1 σz⁽¹⁾ + E2 σz⁽²⁾ + J σx⁽¹⁾σx⁽²⁾` on `|q1 q2⟩`, index `2 q1 + q2`.
    TwoQubit {
        e1: Energy,
        e2: Energy,
        j: Energy,
    },
    Matrix {
        hamiltonian: MatrixSpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GammaModeSpec {
    #[default]
    HighTemp,
    ExactKms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BathSpec {
    pub label: String,
    #[serde(default = "default_model")]
    pub model: String,
    pub eta: Energy,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff: Option<Energy>,
    /// Alternative to `cutoff`: `Ω⁻¹` as a time.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cutoff_time: Option<Time>,
    pub temperature: Temperature,
    #[serde(default)]
    pub gamma_mode: GammaModeSpec,
    /// Two-qubit systems: 0 couples to both qubits, 1 or 2 to one.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub qubit: Option<usize>,
    #[serde(default)]
    pub kappa_x: f64,
    #[serde(default)]
    pub kappa_z: f64,
    /// Explicit coupling operator (any system).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operator: Option<MatrixSpec>,
}

fn default_model() -> String {
    "drude_lorentz".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub level_tolerance: Option<Energy>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub h0: Option<MatrixSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialStateSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basis_index: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix: Option<MatrixSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub t_max: Time,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<Time>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HeomSpec {
    pub depth: usize,
}

impl Default for HeomSpec {
    fn default() -> Self {
        Self { depth: 6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub name: String,
    #[serde(default = "default_boltzmann")]
    pub boltzmann: BoltzmannConstant,
    pub methods: Vec<Method>,
    pub system: SystemSpec,
    pub baths: Vec<BathSpec>,
    pub reference: ReferenceSpec,
    pub initial_state: InitialStateSpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub heom: HeomSpec,
}

fn default_boltzmann() -> BoltzmannConstant {
    BoltzmannConstant(DEFAULT_BOLTZMANN)
}

impl ScenarioSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Scenario(e.to_string()))
    }

    /// Switches every bath to KMS-exact rates.
    pub fn with_exact_kms(mut self) -> Self {
        for b in &mut self.baths {
            b.gamma_mode = GammaModeSpec::ExactKms;
        }
        self
    }

    /// Sets every bath to the same temperature.
    pub fn with_uniform_temperature(mut self, kelvin: f64) -> Self {
        for b in &mut self.baths {
            b.temperature = Temperature(kelvin);
        }
        self
    }
}

/// Reads a scenario file, or returns the built-in scenario of that name.
pub fn parse_scenario(path_or_name: &str) -> Result<ScenarioSpec> {
    if let Some(spec) = builtin(path_or_name) {
        return Ok(spec);
    }
    let text = std::fs::read_to_string(Path::new(path_or_name))
        .map_err(|e| Error::Scenario(format!("cannot read scenario '{path_or_name}': {e}")))?;
    ScenarioSpec::from_toml(&text).map_err(|e| match e {
        Error::Scenario(m) => Error::Scenario(format!("{path_or_name}: {m}")),
        other => other,
    })
}

pub const BUILTIN_NAMES: [&str; 3] = ["paper-fig2", "paper-fig3", "paper-fig3-full"];

pub fn builtin(name: &str) -> Option<ScenarioSpec> {
    match name {
        "paper-fig2" => Some(builtin_two_qubit_three_bath()),
        "paper-fig3" => Some(builtin_dephasing_dimer()),
        "paper-fig3-full" => Some(builtin_dephasing_dimer_full()),
        _ => None,
    }
}

/// Drude–Lorentz cutoff used by both experiments, `Ω ≈ (100 fs)⁻¹`.
pub const CUTOFF: f64 = 53.08;

fn drude(label: &str, temperature: f64) -> BathSpec {
    BathSpec {
        label: label.into(),
        model: default_model(),
        eta: Energy(1.0),
        cutoff: Some(Energy(CUTOFF)),
        cutoff_time: None,
        temperature: Temperature(temperature),
        gamma_mode: GammaModeSpec::HighTemp,
        qubit: None,
        kappa_x: 0.0,
        kappa_z: 0.0,
        operator: None,
    }
}

pub fn builtin_two_qubit_three_bath() -> ScenarioSpec {
    let common = BathSpec { qubit: Some(0), kappa_x: 1.0, ..drude("bath0", 350.0) };
    let first = BathSpec { qubit: Some(1), kappa_z: 1.0, ..drude("bath1", 300.0) };
    let second = BathSpec { qubit: Some(2), kappa_z: 1.0, ..drude("bath2", 400.0) };
    ScenarioSpec {
        name: "paper-fig2".into(),
        boltzmann: default_boltzmann(),
        methods: vec![Method::Unified, Method::Davies, Method::Redfield, Method::Heom],
        system: SystemSpec::TwoQubit { e1: Energy(50.0), e2: Energy(50.0), j: Energy(2.0) },
        baths: vec![common, first, second],
        reference: ReferenceSpec { level_tolerance: Some(Energy(10.0)), h0: None },
        initial_state: InitialStateSpec { basis_index: Some(1), matrix: None },
        grid: GridSpec { t_max: Time(2000.0), dt: None },
        heom: HeomSpec { depth: 10 },
    }
}

/// The dimer restricted to `span{|01⟩, |10⟩}`.
pub fn builtin_dephasing_dimer() -> ScenarioSpec {
    let z = MatrixSpec { unit: None, real: vec![vec![1.0, 0.0], vec![0.0, -1.0]], imag: None };
    let minus_z = MatrixSpec { unit: None, real: vec![vec![-1.0, 0.0], vec![0.0, 1.0]], imag: None };
    ScenarioSpec {
        name: "paper-fig3".into(),
        boltzmann: default_boltzmann(),
        methods: vec![Method::Unified, Method::UnifiedSimplified, Method::Redfield, Method::Davies, Method::Heom],
        system: SystemSpec::Matrix {
            hamiltonian: MatrixSpec {
                unit: Some("cm^-1".into()),
                real: vec![vec![0.0, 2.0], vec![2.0, 0.0]],
                imag: None,
            },
        },
        baths: vec![
            BathSpec { operator: Some(minus_z), ..drude("bath1", 300.0) },
            BathSpec { operator: Some(z), ..drude("bath2", 300.0) },
        ],
        reference: ReferenceSpec {
            level_tolerance: None,
            h0: Some(MatrixSpec { unit: Some("cm^-1".into()), real: vec![vec![0.0; 2]; 2], imag: None }),
        },
        initial_state: InitialStateSpec { basis_index: Some(0), matrix: None },
        grid: GridSpec { t_max: Time(5000.0), dt: None },
        heom: HeomSpec { depth: 8 },
    }
}

/// The same dimer on the full two-qubit space with local σz baths.
pub fn builtin_dephasing_dimer_full() -> ScenarioSpec {
    let first = BathSpec { qubit: Some(1), kappa_z: 1.0, ..drude("bath1", 300.0) };
    let second = BathSpec { qubit: Some(2), kappa_z: 1.0, ..drude("bath2", 300.0) };
    ScenarioSpec {
        name: "paper-fig3-full".into(),
        baths: vec![first, second],
        methods: vec![Method::Unified, Method::UnifiedSimplified, Method::Redfield, Method::Davies],
        grid: GridSpec { t_max: Time(5000.0), dt: None },
        heom: HeomSpec { depth: 8 },
        ..builtin_two_qubit_three_bath()
    }
}

fn pauli_z() -> CMatrix {
    CMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c64(-1.0, 0.0), c64(1.0, 0.0)]))
}

fn pauli_x() -> CMatrix {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 1)] = c64(1.0, 0.0);
    m[(1, 0)] = c64(1.0, 0.0);
    m
}

/// `σ` on qubit 1 (`q = 1`), qubit 2 (`q = 2`) or their sum (`q = 0`).
pub fn qubit_operator(single: &CMatrix, q: usize) -> Result<CMatrix> {
    let i2 = identity(2);
    match q {
        0 => Ok(kron(single, &i2) + kron(&i2, single)),
        1 => Ok(kron(single, &i2)),
        2 => Ok(kron(&i2, single)),
        _ => Err(Error::Scenario(format!("qubit index must be 0, 1 or 2, got {q}"))),
    }
}

pub fn two_qubit_hamiltonian(e1: f64, e2: f64, j: f64) -> CMatrix {
    let i2 = identity(2);
    kron(&pauli_z(), &i2).scale(e1) + kron(&i2, &pauli_z()).scale(e2) + kron(&pauli_x(), &pauli_x()).scale(j)
}

/// A scenario with every operator built and validated.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub spec: ScenarioSpec,
    pub hamiltonian: HermitianOperator,
    pub couplings: Vec<Coupling>,
    pub baths: Vec<BathDescriptor>,
    pub split: ReferenceSplit,
    pub rho0: DensityMatrix,
    pub validity: ValidityReport,
    pub warnings: Vec<String>,
}

impl Scenario {
    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }
}

pub fn resolve(spec: &ScenarioSpec) -> Result<Scenario> {
    let kb = spec.boltzmann.0;
    if !(kb > 0.0) {
        return Err(Error::Scenario(format!("Boltzmann constant must be positive, got {kb}")));
    }
    let (h, two_qubit) = match &spec.system {
        SystemSpec::TwoQubit { e1, e2, j } => (two_qubit_hamiltonian(e1.0, e2.0, j.0), true),
        SystemSpec::Matrix { hamiltonian } => (hamiltonian.to_matrix("system.hamiltonian", true)?, false),
    };
    let hamiltonian = HermitianOperator::new(h).map_err(|e| Error::Scenario(format!("system.hamiltonian: {e}")))?;
    let dim = hamiltonian.dim();

    let mut couplings = Vec::with_capacity(spec.baths.len());
    let mut baths = Vec::with_capacity(spec.baths.len());
    let mut warnings = Vec::new();
    for (k, b) in spec.baths.iter().enumerate() {
        let what = format!("baths[{k}] ({})", b.label);
        if b.model != "drude_lorentz" {
            return Err(Error::Scenario(format!("{what}: unknown bath model \"{}\"", b.model)));
        }
        let cutoff = match (b.cutoff, b.cutoff_time) {
            (Some(c), None) => c.0,
            (None, Some(t)) => angular_per_fs_to_wavenumber(1.0 / t.0),
            _ => return Err(Error::Scenario(format!("{what}: give exactly one of cutoff, cutoff_time"))),
        };
        let desc = match b.gamma_mode {
            GammaModeSpec::HighTemp => drude_lorentz_high_temp(&b.label, b.eta.0, cutoff, b.temperature.0, kb),
            GammaModeSpec::ExactKms => drude_lorentz_exact_gamma(&b.label, b.eta.0, cutoff, b.temperature.0, kb),
        }
        .map_err(|e| Error::Scenario(format!("{what}: {e}")))?;
        if let Some(w) = &desc.warning {
            warnings.push(format!("{what}: {w}"));
        }
        let op = match (&b.operator, b.qubit) {
            (Some(m), None) => m.to_matrix(&format!("{what}.operator"), false)?,
            (None, Some(q)) if two_qubit => {
                qubit_operator(&pauli_x(), q)?.scale(b.kappa_x) + qubit_operator(&pauli_z(), q)?.scale(b.kappa_z)
            }
            (None, Some(_)) => return Err(Error::Scenario(format!("{what}: qubit couplings need a two_qubit system"))),
            _ => return Err(Error::Scenario(format!("{what}: give exactly one of operator, qubit"))),
        };
        if op.nrows() != dim {
            return Err(Error::Scenario(format!(
                "{what}: operator dimension {} does not match system dimension {dim}",
                op.nrows()
            )));
        }
        couplings.push(Coupling::new(op, k));
        baths.push(desc);
    }

    let d = decompose(&hamiltonian, 0.0)?;
    let split = match (&spec.reference.level_tolerance, &spec.reference.h0) {
        (Some(tol), None) => reference_split_by_tolerance(&d, tol.0)?,
        (None, Some(m)) => {
            let h0 = HermitianOperator::new(m.to_matrix("reference.h0", true)?)
                .map_err(|e| Error::Scenario(format!("reference.h0: {e}")))?;
            if h0.dim() != dim {
                return Err(Error::Scenario(format!("reference.h0: dimension {} does not match {dim}", h0.dim())));
            }
            reference_split_explicit(&d, &h0)?
        }
        _ => return Err(Error::Scenario("reference: give exactly one of level_tolerance, h0".into())),
    };

    let rho0 = match (&spec.initial_state.basis_index, &spec.initial_state.matrix) {
        (Some(k), None) => DensityMatrix::basis(dim, *k).map_err(|e| Error::Scenario(format!("initial_state: {e}")))?,
        (None, Some(m)) => DensityMatrix::new(m.to_matrix("initial_state.matrix", false)?)
            .map_err(|e| Error::Scenario(format!("initial_state: {e}")))?,
        _ => return Err(Error::Scenario("initial_state: give exactly one of basis_index, matrix".into())),
    };
    if !(spec.grid.t_max.0 > 0.0) {
        return Err(Error::Scenario("grid.t_max must be positive".into()));
    }
    if let Some(dt) = spec.grid.dt {
        if !(dt.0 > 0.0) {
            return Err(Error::Scenario("grid.dt must be positive".into()));
        }
    }

    let validity = validity_diagnostics(&split, &baths, &couplings);
    warnings.extend(validity.warnings.iter().cloned());
    Ok(Scenario { spec: spec.clone(), hamiltonian, couplings, baths, split, rho0, validity, warnings })
}

/// Coefficients of the dimer coherence equations, summed over baths:
/// `γ0 = Σ 2 Re Γ(0)` and `S(±2J) = Σ Im Γ(±2J)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DimerConstants {
    pub j: f64,
    pub gamma0: f64,
    pub s_plus: f64,
    pub s_minus: f64,
}

impl DimerConstants {
    pub fn from_baths(j: f64, baths: &[BathDescriptor]) -> Self {
        let sum = |f: &dyn Fn(&BathDescriptor) -> f64| baths.iter().map(f).sum::<f64>();
        Self {
            j,
            gamma0: sum(&|b| b.rate(0.0)),
            s_plus: sum(&|b| b.lamb(2.0 * j)),
            s_minus: sum(&|b| b.lamb(-2.0 * j)),
        }
    }

    pub fn delta_s(&self) -> f64 {
        self.s_plus - self.s_minus
    }
}

/// Exact solution of
/// `ẋ = −iΔx + γ0(y − x)`, `ẏ = iΔy − γ0(y − x)` with `Δ = 2J + S(2J) − S(−2J)`.
pub fn dephasing_analytic_coherences(
    c: &DimerConstants,
    x0: Complex64,
    y0: Complex64,
    times_fs: &[f64],
) -> Vec<(Complex64, Complex64)> {
    let delta = 2.0 * c.j + c.delta_s();
    let g = c.gamma0;
    let m = CMatrix::from_row_slice(2, 2, &[c64(-g, -delta), c64(g, 0.0), c64(g, 0.0), c64(-g, delta)]);
    times_fs
        .iter()
        .map(|&t| {
            let e = crate::linalg::matrix_exp(&(&m * c64(fs_to_inverse_wavenumber(t), 0.0)));
            let e = Matrix2::new(e[(0, 0)], e[(0, 1)], e[(1, 0)], e[(1, 1)]);
            let v = e * nalgebra::Vector2::new(x0, y0);
            (v[0], v[1])
        })
        .collect()
}

/// `Re[−γ0 + √(γ0² − (2J + ΔS)²)]`, the slowest eigenvalue of the coherence equations.
pub fn slowest_decay_rate(gamma0: f64, j: f64, delta_s: f64) -> f64 {
    let d = 2.0 * j + delta_s;
    (c64(-gamma0, 0.0) + c64(gamma0 * gamma0 - d * d, 0.0).sqrt()).re
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs;

    #[test]
    fn quantity_parsing() {
        assert_eq!(Energy::parse("50 cm^-1").unwrap(), Energy(50.0));
        assert_eq!(Time::parse("2 ps").unwrap(), Time(2000.0));
        assert_eq!(Temperature::parse("300 K").unwrap(), Temperature(300.0));
        assert!(Temperature::parse("300 C").is_err());
        assert!(Temperature::parse("300").is_err());
        assert!(Energy::parse("abc cm^-1").is_err());
        assert_eq!(Energy(0.1).to_string(), "0.1 cm^-1");
    }

    #[test]
    fn builtins_round_trip_through_toml() {
        for name in BUILTIN_NAMES {
            let spec = builtin(name).unwrap();
            let text = spec.to_toml().unwrap();
            assert_eq!(ScenarioSpec::from_toml(&text).unwrap(), spec, "{text}");
        }
    }

    #[test]
    fn fig2_resolves_to_paper_geometry() {
        let s = resolve(&builtin_two_qubit_three_bath()).unwrap();
        assert_eq!(s.dim(), 4);
        assert_eq!(s.split.bohr_clusters.len(), 5);
        assert_eq!(s.rho0.matrix()[(1, 1)], c64(1.0, 0.0));
        let top = s.split.base.levels.last().unwrap().value;
        assert!((top - 100.0200).abs() < 1e-4);
        assert!(s.warnings.is_empty(), "{:?}", s.warnings);
        // Bath 0 couples through σx⁽¹⁾ + σx⁽²⁾.
        let expected = qubit_operator(&pauli_x(), 0).unwrap();
        assert_eq!(s.couplings[0].operator, expected);
    }

    #[test]
    fn dimer_constants_match_closed_forms() {
        let s = resolve(&builtin_dephasing_dimer()).unwrap();
        let c = DimerConstants::from_baths(2.0, &s.baths);
        assert!((c.gamma0 - 33.19).abs() < 5e-3, "{}", c.gamma0);
        assert!((c.delta_s() - 2.487).abs() < 1e-3, "{}", c.delta_s());
        let rate = slowest_decay_rate(c.gamma0, 2.0, c.delta_s());
        assert!((rate + 0.64).abs() < 5e-3, "{rate}");
    }

    #[test]
    fn slowest_rate_limits() {
        assert_eq!(slowest_decay_rate(5.0, 1.0, -2.0), 0.0);
        let (g, j, ds) = (100.0f64, 2.0f64, 1.0f64);
        let approx = -(2.0 * j + ds).powi(2) / (2.0 * g);
        assert!((slowest_decay_rate(g, j, ds) / approx - 1.0).abs() < 0.01);
        // Underdamped: real part is −γ0.
        assert_eq!(slowest_decay_rate(1.0, 2.0, 0.0), -1.0);
    }

    #[test]
    fn analytic_coherences_symmetric_start_is_constant_without_rotation() {
        let c = DimerConstants { j: 0.0, gamma0: 3.0, s_plus: 0.4, s_minus: 0.4 };
        let out = dephasing_analytic_coherences(&c, c64(0.5, 0.0), c64(0.5, 0.0), &[0.0, 100.0, 1000.0]);
        for (x, y) in out {
            assert!((x - c64(0.5, 0.0)).norm() < 1e-14 && (y - c64(0.5, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn malformed_scenarios_are_rejected() {
        let good = builtin_two_qubit_three_bath().to_toml().unwrap();
        let bad_unit = good.replacen("350 K", "350 C", 1);
        let err = ScenarioSpec::from_toml(&bad_unit).unwrap_err().to_string();
        assert!(err.contains("line"), "{err}");
        let unknown = format!("{good}\nbogus = 1\n");
        assert!(ScenarioSpec::from_toml(&unknown).is_err());
        let mut spec = builtin_dephasing_dimer();
        spec.baths[0].operator = Some(MatrixSpec { unit: None, real: vec![vec![1.0; 3]; 3], imag: None });
        assert!(resolve(&spec).is_err());
        let mut spec = builtin_dephasing_dimer();
        spec.reference.h0.as_mut().unwrap().unit = None;
        assert!(matches!(resolve(&spec), Err(Error::Scenario(m)) if m.contains("missing unit")));
    }

    #[test]
    fn full_dimer_has_four_levels() {
        let s = resolve(&builtin_dephasing_dimer_full()).unwrap();
        assert_eq!(s.dim(), 4);
        assert!(max_abs(&(s.couplings[0].operator.clone() - qubit_operator(&pauli_z(), 1).unwrap())) == 0.0);
    }
}
