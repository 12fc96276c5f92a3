use clap::Parser;
use mils_cli::{commands, exit_code, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let code = match commands::run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("mils: {err:#}");
            exit_code(&err)
        }
    };
    std::process::exit(code);
}
