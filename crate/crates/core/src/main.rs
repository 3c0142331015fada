use clap::Parser;

use argyris_qg::cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("argyris-qg: {e}");
        std::process::exit(e.exit_code());
    }
}
