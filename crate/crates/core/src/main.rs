//! Binary entry point; all logic lives in the library's `runner` module.

fn main() {
    std::process::exit(hybrid_irs::runner::cli_main(std::env::args_os()));
}
