use clap::Parser;

fn main() {
    if let Err(e) = dci::cli::run(dci::cli::Cli::parse()) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}
