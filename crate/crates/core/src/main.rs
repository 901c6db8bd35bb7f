fn main() {
    std::process::exit(wavecluster::cli::run(std::env::args_os()));
}
