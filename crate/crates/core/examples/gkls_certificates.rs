//! Positivity certificates of every generator kind on the two-qubit model:
//! the minimum eigenvalue of the dissipator coefficient blocks.
//!
//! ```text
//! cargo run --example gkls_certificates
//! ```

use unified_qme::generators::{build, gkls_certificate, GeneratorKind};
use unified_qme::scenarios::{builtin_two_qubit_three_bath, resolve};

fn main() -> unified_qme::Result<()> {
    let s = resolve(&builtin_two_qubit_three_bath())?;
    for kind in GeneratorKind::ALL {
        let g = build(kind, &s.split, &s.couplings, &s.baths)?;
        let cert = gkls_certificate(&g);
        println!(
            "{:<20} blocks {:>3}  min eigenvalue {:>12.5}  positive: {}",
            kind.name(),
            cert.blocks.len(),
            cert.min_eigenvalue(),
            cert.is_positive(1e-12)
        );
        if kind == GeneratorKind::Unified {
            for b in &cert.blocks {
                let freq = b.frequency.map_or("all".to_string(), |w| format!("{w:.3}"));
                println!("    bath {} at {freq:>9}: {:.5}", b.bath, b.min_eigenvalue);
            }
        }
    }
    Ok(())
}
