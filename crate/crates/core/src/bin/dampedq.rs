fn main() {
    let seed = std::env::var("DAMPEDQ_SEED").ok();
    let code = dampedq::cli::main_with(
        std::env::args_os(),
        seed.as_deref(),
        &mut std::io::stdout().lock(),
        &mut std::io::stderr().lock(),
    );
    std::process::exit(code);
}
