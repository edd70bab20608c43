use clap::Parser;

fn main() {
    let cli = windcast_cli::Cli::parse();
    if let Err(err) = windcast_cli::run(cli) {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}
