fn main() {
    std::process::exit(evp_lab::run_cli());
}
