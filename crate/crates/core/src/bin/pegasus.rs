fn main() {
    std::process::exit(pegasus::cli::run(std::env::args_os()));
}
