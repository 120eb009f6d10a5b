fn main() {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let code = qcf::cli::run_from(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock());
    std::process::exit(code);
}
