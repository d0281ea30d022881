//! Runs a TOML scenario through the batch runner and prints where the
//! outputs went.
//!
//! ```text
//! cargo run --release --example scenario_file -- examples/scenarios/driven_qubit.toml /tmp/driven
//! ```

use unified_qme::cli::{execute, RunConfig};

fn main() {
    let mut args = std::env::args().skip(1);
    let scenario = args
        .next()
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenarios/driven_qubit.toml").into());
    let out = args.next().unwrap_or_else(|| std::env::temp_dir().join("unified-qme-example").display().to_string());
    match execute(&RunConfig::new(scenario, &out)) {
        Ok(summary) => {
            println!("wrote {out}/ (reference method: {})", summary.reference_method);
            for m in &summary.methods {
                println!(
                    "  {:<20} {:<24} min eig {:>10.2e}  max D to reference {}",
                    m.method.name(),
                    m.csv,
                    m.min_eigenvalue,
                    m.max_distance_to_reference.map_or("-".into(), |d| format!("{d:.3e}"))
                );
            }
            if let Some(c) = &summary.convergence {
                println!("  HEOM depths {:?}: successive distance {:?}", c.depths, c.successive());
            }
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
