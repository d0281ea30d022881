//! Thermal bath descriptors.
//!
//! A bath correlation function is a finite sum of damped exponentials
//! `C(s) = Σ_k c_k e^{-ν_k s}`, so its half-sided Fourier transform
//! `Γ(ω) = ∫₀^∞ e^{iωs} C(s) ds = Σ_k c_k / (ν_k − iω)` is available in closed
//! form. Dissipation and Lamb-shift coefficients follow as
//! `γ(ω,ω′) = Γ(ω) + Γ*(ω′)` and `S(ω,ω′) = [Γ(ω) − Γ*(ω′)]/(2i)`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, I};
use crate::units::inverse_temperature;

/// One term `c e^{-ν s}` of a correlation function (c in cm⁻², ν in cm⁻¹).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentialMode {
    pub amplitude: Complex64,
    pub decay: Complex64,
}

impl ExponentialMode {
    pub fn new(amplitude: Complex64, decay: Complex64) -> Result<Self> {
        if !(decay.re > 0.0) || !amplitude.re.is_finite() || !amplitude.im.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "exponential mode needs Re ν > 0 and finite amplitude (ν = {decay}, c = {amplitude})"
            )));
        }
        Ok(Self { amplitude, decay })
    }

    pub fn half_fourier(&self, omega: f64) -> Complex64 {
        self.amplitude / (self.decay - I * omega)
    }
}

/// How the dissipation rates are obtained from the descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GammaMode {
    /// Everything from the exponential sum.
    ExpSum,
    /// Drude–Lorentz rates from the full Bose factor, so that
    /// `γ(−ω) = e^{−βω} γ(ω)` holds exactly; Lamb shifts stay at the
    /// exponential-sum value.
    DrudeExactGamma { eta: f64, cutoff: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BathDescriptor {
    pub label: String,
    /// Inverse temperature in cm.
    pub beta: f64,
    pub modes: Vec<ExponentialMode>,
    pub gamma_mode: GammaMode,
    pub warning: Option<String>,
}

impl BathDescriptor {
    pub fn new(label: impl Into<String>, beta: f64, modes: Vec<ExponentialMode>) -> Result<Self> {
        if !(beta > 0.0) || !beta.is_finite() {
            return Err(Error::InvalidParameter(format!("inverse temperature must be positive, got {beta}")));
        }
        Ok(Self { label: label.into(), beta, modes, gamma_mode: GammaMode::ExpSum, warning: None })
    }

    /// Correlation function `C(s)`, s in cm (reciprocal wavenumbers).
    pub fn correlation(&self, s: f64) -> Complex64 {
        self.modes.iter().map(|m| m.amplitude * (-m.decay * s).exp()).sum()
    }

    /// Slowest decay rate of the correlation function, the Ω of the weak-coupling condition.
    pub fn correlation_decay_rate(&self) -> f64 {
        self.modes.iter().map(|m| m.decay.re).fold(f64::INFINITY, f64::min)
    }

    fn exp_sum_gamma(&self, omega: f64) -> Complex64 {
        self.modes.iter().map(|m| m.half_fourier(omega)).sum()
    }

    /// `Γ(ω)`.
    pub fn eval_gamma(&self, omega: f64) -> Complex64 {
        match self.gamma_mode {
            GammaMode::ExpSum => self.exp_sum_gamma(omega),
            GammaMode::DrudeExactGamma { eta, cutoff } => {
                let rate = drude_exact_rate(eta, cutoff, self.beta, omega);
                Complex64::new(0.5 * rate, self.exp_sum_gamma(omega).im)
            }
        }
    }

    /// `(γ(ω,ω′), S(ω,ω′))`.
    pub fn gamma_s_pair(&self, omega: f64, omega_prime: f64) -> (Complex64, Complex64) {
        let g = self.eval_gamma(omega);
        let gp = self.eval_gamma(omega_prime);
        (g + gp.conj(), (g - gp.conj()) / (2.0 * I))
    }

    /// Single-frequency rate `γ(ω) = 2 Re Γ(ω)`.
    pub fn rate(&self, omega: f64) -> f64 {
        2.0 * self.eval_gamma(omega).re
    }

    /// Single-frequency Lamb-shift coefficient `S(ω) = Im Γ(ω)`.
    pub fn lamb(&self, omega: f64) -> f64 {
        self.eval_gamma(omega).im
    }

    /// `|γ(−ω) − e^{−βω} γ(ω)|`.
    pub fn kms_violation(&self, omega: f64) -> f64 {
        (self.rate(-omega) - (-self.beta * omega).exp() * self.rate(omega)).abs()
    }

    /// KMS violation normalized by `max(γ(ω), γ(−ω))`.
    pub fn kms_residual(&self, omega: f64) -> f64 {
        if omega == 0.0 {
            return 0.0;
        }
        let scale = self.rate(omega).max(self.rate(-omega));
        if scale == 0.0 {
            return 0.0;
        }
        self.kms_violation(omega) / scale
    }
}

/// `γ(ω) = 4ηΩω / [(ω²+Ω²)(1 − e^{−βω})]`, continuous through ω = 0.
pub fn drude_exact_rate(eta: f64, cutoff: f64, beta: f64, omega: f64) -> f64 {
    let x = beta * omega;
    let bose = if x.abs() < 1e-8 { 1.0 + 0.5 * x } else { x / (-(-x).exp_m1()) };
    4.0 * eta * cutoff * bose / (beta * (omega * omega + cutoff * cutoff))
}

/// Drude–Lorentz bath `J(ω) = 2ηΩω/[π(ω²+Ω²)]` in the high-temperature
/// approximation: a single mode `c = ηΩ(2/(βΩ) − i)`, `ν = Ω`.
pub fn drude_lorentz_high_temp(
    label: impl Into<String>,
    eta: f64,
    cutoff: f64,
    temperature: f64,
    boltzmann: f64,
) -> Result<BathDescriptor> {
    if !(eta > 0.0 && cutoff > 0.0 && temperature > 0.0 && boltzmann > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "Drude-Lorentz parameters must be positive (eta {eta}, cutoff {cutoff}, T {temperature}, kB {boltzmann})"
        )));
    }
    let beta = inverse_temperature(temperature, boltzmann);
    let amplitude = Complex64::new(eta * cutoff * 2.0 / (beta * cutoff), -eta * cutoff);
    let mode = ExponentialMode::new(amplitude, Complex64::new(cutoff, 0.0))?;
    let mut bath = BathDescriptor::new(label, beta, vec![mode])?;
    if beta * cutoff >= 1.0 {
        bath.warning =
            Some(format!("beta*Omega = {:.3} >= 1: high-temperature approximation is not valid", beta * cutoff));
    }
    Ok(bath)
}

/// Same correlation modes as [`drude_lorentz_high_temp`] but with KMS-exact rates.
pub fn drude_lorentz_exact_gamma(
    label: impl Into<String>,
    eta: f64,
    cutoff: f64,
    temperature: f64,
    boltzmann: f64,
) -> Result<BathDescriptor> {
    let mut bath = drude_lorentz_high_temp(label, eta, cutoff, temperature, boltzmann)?;
    bath.gamma_mode = GammaMode::DrudeExactGamma { eta, cutoff };
    bath.warning = None;
    Ok(bath)
}

/// A system operator `A_α` entering the interaction `A_α ⊗ B_bath`.
/// Couplings that name the same bath share one bath operator.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    pub operator: CMatrix,
    pub bath: usize,
}

impl Coupling {
    pub fn new(operator: CMatrix, bath: usize) -> Self {
        Self { operator, bath }
    }
}

pub(crate) fn check_couplings(couplings: &[Coupling], baths: &[BathDescriptor], dim: usize) -> Result<()> {
    for c in couplings {
        if c.operator.nrows() != dim || c.operator.ncols() != dim {
            return Err(Error::DimensionMismatch { expected: dim, found: c.operator.nrows() });
        }
        if c.bath >= baths.len() {
            return Err(Error::InvalidParameter(format!("coupling refers to missing bath {}", c.bath)));
        }
    }
    Ok(())
}
