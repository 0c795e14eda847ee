fn main() {
    std::process::exit(rtt_qe::cli::run(std::env::args_os()));
}
