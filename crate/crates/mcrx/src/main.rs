fn main() -> std::process::ExitCode {
    mcrx::cli::run()
}
