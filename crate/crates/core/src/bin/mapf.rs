fn main() {
    std::process::exit(mapf_smt::cli::main_with_args(std::env::args_os()));
}
