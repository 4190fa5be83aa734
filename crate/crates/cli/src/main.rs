use std::io;

fn main() {
    let code = bq_cli::run_cli(
        std::env::args_os(),
        std::env::var_os(bq_cli::OUTPUT_DIR_VAR).map(Into::into),
        &mut io::stdout().lock(),
        &mut io::stderr().lock(),
    );
    std::process::exit(code);
}
