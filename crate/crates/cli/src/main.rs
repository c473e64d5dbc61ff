use clap::Parser;
use mvca_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mvca: {e}");
            e.code
        }
    };
    std::process::exit(code as i32);
}
