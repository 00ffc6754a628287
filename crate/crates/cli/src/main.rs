use clap::Parser;

fn main() {
    if let Err(e) = ozgemm_cli::run(ozgemm_cli::Cli::parse()) {
        eprintln!("ozgemm: {e}");
        std::process::exit(1);
    }
}
