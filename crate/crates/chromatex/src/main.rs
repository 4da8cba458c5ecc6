use chromatex::cli::{run, Cli};

use clap::Parser;

fn main() {
    env_logger::Builder::from_env(
        env_logger::Env::new().filter_or("CHROMATEX_LOG", "warn"),
    )
    .format_timestamp(None)
    .init();

    let cli = Cli::parse();
    if let Err(err) = run(&cli) {
        let msg = err.to_string().replace('\n', "; ");
        eprintln!("error: kind={} msg={:?}", err.kind(), msg);
        std::process::exit(err.exit_code());
    }
}
