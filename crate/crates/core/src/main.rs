fn main() {
    std::process::exit(damped_ns::cli_main(std::env::args_os()));
}
