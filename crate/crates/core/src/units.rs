//! Unit conventions: energies and rates in cm⁻¹, times in fs, temperatures in K.

/// Angular frequency in rad/fs of one wavenumber (2πc with c in cm/fs).
pub const WAVENUMBER_TO_RAD_PER_FS: f64 = 1.883651567e-4;

/// Boltzmann constant used to reproduce the two worked examples, in cm⁻¹/K.
pub const DEFAULT_BOLTZMANN: f64 = 0.734;

/// Tabulated CODATA value, in cm⁻¹/K.
pub const CODATA_BOLTZMANN: f64 = 0.695_034_8;

pub fn wavenumber_to_angular_per_fs(energy: f64) -> f64 {
    energy * WAVENUMBER_TO_RAD_PER_FS
}

pub fn angular_per_fs_to_wavenumber(omega: f64) -> f64 {
    omega / WAVENUMBER_TO_RAD_PER_FS
}

/// A time in fs expressed in the reciprocal-wavenumber unit used by generators.
pub fn fs_to_inverse_wavenumber(t_fs: f64) -> f64 {
    t_fs * WAVENUMBER_TO_RAD_PER_FS
}

pub fn inverse_wavenumber_to_fs(t: f64) -> f64 {
    t / WAVENUMBER_TO_RAD_PER_FS
}

/// Inverse temperature `1/(k_B T)` in cm.
pub fn inverse_temperature(temperature_k: f64, boltzmann: f64) -> f64 {
    1.0 / (boltzmann * temperature_k)
}
