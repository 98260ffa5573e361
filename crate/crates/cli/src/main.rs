use clap::Parser;
use fuelsense_cli::{run, Cli};

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}
