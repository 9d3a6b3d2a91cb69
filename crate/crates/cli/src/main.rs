use clap::Parser;

fn main() {
    let cli = exotic_cli::Cli::parse();
    std::process::exit(exotic_cli::run(&cli));
}
