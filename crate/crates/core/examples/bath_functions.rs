//! Half-Fourier transform of a Drude–Lorentz bath: rates, Lamb shifts and
//! how far each rate model is from detailed balance.
//!
//! ```text
//! cargo run --example bath_functions
//! ```

use unified_qme::bath::{drude_lorentz_exact_gamma, drude_lorentz_high_temp};
use unified_qme::units::DEFAULT_BOLTZMANN;

fn main() -> unified_qme::Result<()> {
    let high = drude_lorentz_high_temp("high-T", 1.0, 53.08, 300.0, DEFAULT_BOLTZMANN)?;
    let exact = drude_lorentz_exact_gamma("exact", 1.0, 53.08, 300.0, DEFAULT_BOLTZMANN)?;
    println!("beta = {:.5} cm, C(0) = {:.3}", high.beta, high.correlation(0.0));
    println!(
        "{:>8} {:>12} {:>12} {:>12} {:>12} {:>12}",
        "omega", "gamma_ht", "S_ht", "gamma_exact", "kms_ht", "kms_exact"
    );
    for omega in [-200.0, -100.0, -4.0, 0.0, 4.0, 100.0, 200.0] {
        println!(
            "{omega:>8.1} {:>12.5} {:>12.5} {:>12.5} {:>12.2e} {:>12.2e}",
            high.rate(omega),
            high.lamb(omega),
            exact.rate(omega),
            high.kms_residual(omega),
            exact.kms_residual(omega),
        );
    }
    let (g, s) = high.gamma_s_pair(4.0, -4.0);
    println!("gamma(4, -4) = {g:.5}, S(4, -4) = {s:.5}");
    Ok(())
}
