fn main() {
    std::process::exit(context_asr::cli::main_with_std());
}
