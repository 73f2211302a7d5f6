use clap::Parser;
use spd_radial_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("spdrad: {e}");
        std::process::exit(e.exit_code());
    }
}
