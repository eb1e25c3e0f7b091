fn main() {
    std::process::exit(lsbwave::run(std::env::args_os()));
}
