use clap::Parser;
use mrdg_cli::commands::{dispatch, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mrdg: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
