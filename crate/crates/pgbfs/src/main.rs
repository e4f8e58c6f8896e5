fn main() {
    std::process::exit(pgbfs::cli::run(std::env::args_os()));
}
