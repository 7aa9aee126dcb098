use clap::Parser;

fn main() {
    let cli = gest::cli::Cli::parse();
    if let Err(e) = gest::cli::run(cli) {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}
