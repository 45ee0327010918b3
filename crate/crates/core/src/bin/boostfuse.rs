fn main() {
    std::process::exit(boostfuse::cli::cli_main(std::env::args_os()));
}
