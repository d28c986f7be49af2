fn main() {
    std::process::exit(aoe_cli::run_main());
}
