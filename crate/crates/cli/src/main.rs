fn main() {
    std::process::exit(usd_cbs_cli::run_from_args(std::env::args_os()));
}
