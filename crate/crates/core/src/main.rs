fn main() {
    std::process::exit(oscbath::cli::main_entry());
}
