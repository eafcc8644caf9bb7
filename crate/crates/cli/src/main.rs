use clap::Parser;

fn main() {
    let cli = jetc::Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = jetc::run_cli(&cli, &mut out);
    std::process::exit(code);
}
