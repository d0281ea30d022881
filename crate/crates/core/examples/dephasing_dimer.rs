//! Decoherence rate of the dephasing dimer under every method, compared with
//! the closed-form slowest eigenvalue.
//!
//! ```text
//! cargo run --release --example dephasing_dimer
//! ```

use unified_qme::dynamics::{coherence_series, fit_decay_rate, propagate, Integrator, TimeGrid, Trajectory};
use unified_qme::generators::{build, GeneratorKind};
use unified_qme::heom::{build_hierarchy, propagate_heom};
use unified_qme::linalg::c64;
use unified_qme::scenarios::{builtin_dephasing_dimer, resolve, slowest_decay_rate, DimerConstants};

fn main() -> unified_qme::Result<()> {
    let s = resolve(&builtin_dephasing_dimer())?;
    let c = DimerConstants::from_baths(2.0, &s.baths);
    println!("gamma0 = {:.4} cm^-1, delta_s = {:.4} cm^-1", c.gamma0, c.delta_s());
    println!("closed-form slowest rate = {:.5} cm^-1", slowest_decay_rate(c.gamma0, c.j, c.delta_s()));

    let depth = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(s.spec.heom.depth);
    let grid = TimeGrid::covering(s.spec.grid.t_max.0, 2.0)?;
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let plus = nalgebra::DVector::from_vec(vec![c64(r, 0.0), c64(r, 0.0)]);
    let minus = nalgebra::DVector::from_vec(vec![c64(r, 0.0), c64(-r, 0.0)]);
    let basis = [plus, minus];

    let rate = |traj: &Trajectory| -> unified_qme::Result<Option<f64>> {
        let x = coherence_series(traj, &basis, 0, 1)?;
        Ok(fit_decay_rate(&traj.times(), &x, 1000.0, 1e-12))
    };

    for kind in
        [GeneratorKind::Davies, GeneratorKind::Unified, GeneratorKind::UnifiedSimplified, GeneratorKind::Redfield]
    {
        let g = build(kind, &s.split, &s.couplings, &s.baths)?;
        let traj = propagate(&g, &s.rho0, grid, Integrator::ExpmStep)?;
        println!("{:<20} rate = {:?}", kind.name(), rate(&traj)?);
    }
    let h = build_hierarchy(&s.hamiltonian, &s.couplings, &s.baths, depth)?;
    let start = std::time::Instant::now();
    let traj = propagate_heom(&h, &s.rho0, grid)?;
    println!("{:<20} rate = {:?} (depth {depth}, {} ADOs, {:.1?})", "heom", rate(&traj)?, h.len(), start.elapsed());
    Ok(())
}
