fn main() {
    std::process::exit(sparse_al::cli::run(std::env::args_os()));
}
