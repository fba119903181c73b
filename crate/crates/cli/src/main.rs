use clap::Parser;

fn main() {
    let cli = dampwave_cli::Cli::parse();
    if let Err(e) = dampwave_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
