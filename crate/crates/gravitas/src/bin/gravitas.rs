use clap::Parser;

fn main() {
    std::process::exit(gravitas::cli::run(gravitas::cli::Cli::parse()));
}
