use clap::Parser;

use oscavg::cli::{execute, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    oscavg::init_threads();
    std::process::exit(execute(Cli::parse()));
}
