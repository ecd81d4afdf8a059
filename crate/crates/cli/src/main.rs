use clap::Parser;
use sixdma_cli::{run, Cli, EXIT_RUNTIME};

fn main() {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: thread pool: {e}");
            std::process::exit(EXIT_RUNTIME);
        }
    }
    std::process::exit(run(&cli));
}
