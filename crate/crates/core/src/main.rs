fn main() -> std::process::ExitCode {
    blochlab::cli::main()
}
