fn main() {
    std::process::exit(mmw_sounder::cli::main_with_args(std::env::args_os()));
}
