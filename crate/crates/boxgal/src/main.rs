fn main() {
    std::process::exit(boxgal::cli::dispatch(std::env::args().collect()));
}
