use clap::Parser;

fn main() {
    let cli = agglothresh::cli::Cli::parse();
    if let Err(e) = agglothresh::cli::run(cli) {
        eprintln!("E: {e}");
        std::process::exit(e.exit_code());
    }
}
