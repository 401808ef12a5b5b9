fn main() {
    std::process::exit(gaugecalc::cli::main_entry());
}
