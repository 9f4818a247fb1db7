fn main() {
    std::process::exit(codec_cli::run(std::env::args_os()));
}
