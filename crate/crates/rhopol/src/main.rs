use std::process::exit;

fn main() {
    let argv: Vec<String> = std::env::args().collect();
    let mut out = std::io::stdout();
    let mut err = std::io::stderr();
    exit(rhopol::cli::run(&argv, &mut out, &mut err));
}
