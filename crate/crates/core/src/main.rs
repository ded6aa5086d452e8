fn main() {
    std::process::exit(nystrom_dlp::cli::run(std::env::args_os()));
}
