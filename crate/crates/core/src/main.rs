fn main() {
    env_logger::init();
    std::process::exit(moproc::cli::main());
}
