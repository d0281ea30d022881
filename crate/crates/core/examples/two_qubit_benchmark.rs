//! Three-bath two-qubit benchmark: distance of each master equation from a
//! converged HEOM reference, plus the HEOM depth scan.
//!
//! ```text
//! cargo run --release --example two_qubit_benchmark -- [depth]
//! ```

use std::time::Instant;

use unified_qme::dynamics::{
    default_dt_fs, positivity_monitor, propagate, trace_distance_series, Integrator, TimeGrid,
};
use unified_qme::generators::{build, GeneratorKind};
use unified_qme::heom::{build_hierarchy, convergence_scan, propagate_heom};
use unified_qme::scenarios::{builtin_two_qubit_three_bath, resolve};

fn main() -> unified_qme::Result<()> {
    let s = resolve(&builtin_two_qubit_three_bath())?;
    let depth: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(s.spec.heom.depth);
    let unified = build(GeneratorKind::Unified, &s.split, &s.couplings, &s.baths)?;
    let grid = TimeGrid::covering(s.spec.grid.t_max.0, default_dt_fs(&unified))?;
    println!("grid: dt = {:.3} fs, {} steps", grid.dt_fs, grid.steps);

    let start = Instant::now();
    let h = build_hierarchy(&s.hamiltonian, &s.couplings, &s.baths, depth)?;
    let reference = propagate_heom(&h, &s.rho0, grid)?;
    println!("heom depth {depth}: {} ADOs in {:.1?}", h.len(), start.elapsed());

    for kind in [GeneratorKind::Unified, GeneratorKind::Davies, GeneratorKind::Redfield] {
        let g = build(kind, &s.split, &s.couplings, &s.baths)?;
        let traj = propagate(&g, &s.rho0, grid, Integrator::ExpmStep)?;
        let d = trace_distance_series(&traj, &reference)?;
        let worst = d.iter().copied().fold(0.0, f64::max);
        let min_eig = positivity_monitor(&traj).into_iter().fold(f64::INFINITY, f64::min);
        println!("{:<10} max D to heom = {worst:.3e}, min eigenvalue = {min_eig:.3e}", kind.name());
    }

    let start = Instant::now();
    let depths = [depth, depth + 2];
    let table =
        convergence_scan(|l| build_hierarchy(&s.hamiltonian, &s.couplings, &s.baths, l), &s.rho0, grid, &depths)?;
    println!("depth scan {:?}: successive distances {:?} in {:.1?}", table.depths, table.successive(), start.elapsed());
    Ok(())
}
