fn main() -> std::process::ExitCode {
    tldl::cli::main()
}
