use clap::Parser;

fn main() {
    let cli = tao_cli::Cli::parse();
    if let Err(e) = tao_cli::run(&cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
