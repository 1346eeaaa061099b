use clap::Parser;

fn main() {
    let cli = gdfactor_cli::Cli::parse();
    if let Err(err) = gdfactor_cli::execute(&cli) {
        eprintln!("gdfactor: {err}");
        std::process::exit(err.exit_code());
    }
}
