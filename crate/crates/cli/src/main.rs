use clap::Parser;
use ising_rg_cli::{execute, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match execute(&cli) {
        Ok(true) => 0,
        Ok(false) => {
            eprintln!("ising-rg: check failed");
            1
        }
        Err(e) => {
            eprintln!("ising-rg: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
