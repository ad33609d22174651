fn main() {
    std::process::exit(qbm_thermo::cli::main_entry());
}
