use clap::Parser;
use unified_qme::cli::{run, RunConfig};

fn main() {
    std::process::exit(run(&RunConfig::parse()));
}
