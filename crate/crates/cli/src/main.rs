fn main() {
    std::process::exit(gazemodal::dispatch(std::env::args()));
}
