//! Bohr frequencies of the two-qubit Hamiltonian, their clustering under a
//! reference split, and the validity ratios of the clustered description.
//!
//! ```text
//! cargo run --example spectral_clusters -- [level-tolerance-cm^-1]
//! ```

use unified_qme::scenarios::{builtin_two_qubit_three_bath, resolve, Energy};
use unified_qme::spectral::{reference_split_by_tolerance, validity_diagnostics};

fn main() -> unified_qme::Result<()> {
    let tol: f64 = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(10.0);
    let mut spec = builtin_two_qubit_three_bath();
    spec.reference.level_tolerance = Some(Energy(tol));
    let s = resolve(&spec)?;

    println!("levels of H_S: {:?}", s.split.base.energies());
    println!("Bohr frequencies: {:?}", s.split.bohr.omegas());
    let split = reference_split_by_tolerance(&s.split.base, tol)?;
    println!("level tolerance {tol} cm^-1 gives {} clusters:", split.bohr_clusters.len());
    for c in &split.bohr_clusters {
        let members: Vec<String> = c.members.iter().map(|m| format!("{:.4}", m.omega)).collect();
        println!("  centre {:>9.4}  spread {:.4}  members [{}]", c.center, c.spread(), members.join(", "));
    }
    let report = validity_diagnostics(&split, &s.baths, &s.couplings);
    println!("{}", serde_json::to_string_pretty(&report).expect("report serializes"));
    Ok(())
}
