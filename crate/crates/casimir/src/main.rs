use clap::Parser;

fn main() {
    let cli = casimir::cli::Cli::parse();
    std::process::exit(casimir::cli::run(cli));
}
