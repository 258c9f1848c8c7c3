fn main() {
    std::process::exit(diamond_comb::cli::main_with_args(std::env::args_os()));
}
