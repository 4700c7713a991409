fn main() {
    std::process::exit(invbranch::cli::run(std::env::args_os()));
}
