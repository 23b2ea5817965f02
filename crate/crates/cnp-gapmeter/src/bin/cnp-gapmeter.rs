fn main() {
    env_logger::init();
    std::process::exit(cnp_gapmeter::cli::run());
}
