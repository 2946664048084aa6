fn main() {
    std::process::exit(vendorledger::cli::run_from_env());
}
