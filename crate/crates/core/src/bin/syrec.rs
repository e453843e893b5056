fn main() -> std::process::ExitCode {
    syrec::cli::main()
}
