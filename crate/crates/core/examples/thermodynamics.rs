//! Heat currents and entropy production of the unified generator with
//! KMS-exact baths at three temperatures, plus the Gibbs-state check at a
//! common temperature.
//!
//! ```text
//! cargo run --release --example thermodynamics
//! ```

use unified_qme::dynamics::{default_dt_fs, propagate, Integrator, TimeGrid};
use unified_qme::generators::{build, GeneratorKind};
use unified_qme::scenarios::{builtin_two_qubit_three_bath, resolve};
use unified_qme::thermo::{gibbs_state, stationarity_residual, thermo_report};

fn main() -> unified_qme::Result<()> {
    let s = resolve(&builtin_two_qubit_three_bath().with_exact_kms())?;
    let g = build(GeneratorKind::Unified, &s.split, &s.couplings, &s.baths)?;
    let grid = TimeGrid::covering(2000.0, default_dt_fs(&g))?;
    let traj = propagate(&g, &s.rho0, grid, Integrator::ExpmStep)?;
    let report = thermo_report(&g, &traj, &[10.0, 100.0, 1000.0])?;
    let ep = &report.entropy_production;
    println!("min entropy production {:.4e} cm^-1", ep.min_sigma());
    println!(
        "{:>9} {:>11} {}",
        "t (fs)",
        "sigma",
        g.baths.iter().map(|b| format!("{:>11}", format!("J_{}", b.label))).collect::<String>()
    );
    let stride = (ep.times_fs.len() / 10).max(1);
    for k in (0..ep.times_fs.len()).step_by(stride) {
        let currents: String = ep.heat_currents.iter().map(|j| format!("{:>11.4e}", j[k])).collect();
        println!("{:>9.1} {:>11.4e} {currents}", ep.times_fs[k], ep.sigma[k]);
    }

    let uniform = resolve(&builtin_two_qubit_three_bath().with_exact_kms().with_uniform_temperature(300.0))?;
    let gu = build(GeneratorKind::Unified, &uniform.split, &uniform.couplings, &uniform.baths)?;
    let rho = gibbs_state(&uniform.split.h0, uniform.baths[0].beta)?;
    println!("Gibbs stationarity residual at 300 K: {:.2e}", stationarity_residual(&gu, &rho));
    Ok(())
}
