fn main() {
    std::process::exit(bnpricing::app::run());
}
