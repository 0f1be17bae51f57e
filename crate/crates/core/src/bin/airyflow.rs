use clap::Parser;

fn main() {
    std::process::exit(airy_flow::cli::run(airy_flow::cli::Cli::parse()));
}
