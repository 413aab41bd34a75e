fn main() -> std::process::ExitCode {
    trialstop::cli::main()
}
