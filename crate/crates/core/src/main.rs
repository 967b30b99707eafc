fn main() {
    std::process::exit(spray_flame::cli::run(std::env::args_os()));
}
