fn main() {
    std::process::exit(tumorsim::io::cli_main(std::env::args_os()));
}
