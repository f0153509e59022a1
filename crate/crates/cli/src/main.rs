use clap::Parser;
use hyperrh_cli::{execute, Cli, EXIT_CONFIG};

fn main() {
    if let Ok(v) = std::env::var("HYPERRH_THREADS") {
        match v.parse::<usize>() {
            Ok(n) if n > 0 => {
                rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("global pool is set once");
            }
            _ => {
                eprintln!("configuration error: HYPERRH_THREADS={v:?} is not a positive integer");
                std::process::exit(EXIT_CONFIG);
            }
        }
    }
    let cli = Cli::parse();
    std::process::exit(execute(&cli, true));
}
