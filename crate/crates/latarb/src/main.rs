use clap::Parser;

use latarb::cli::{self, Cli};
use latarb::scenario::ScenarioError;

fn main() {
    let cli = Cli::parse();
    if let Err(err) = cli::run(cli) {
        eprintln!("error: {err}");
        let code = match err {
            ScenarioError::Parse(_) => 2,
            _ => 1,
        };
        std::process::exit(code);
    }
}
