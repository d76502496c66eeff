fn main() -> std::process::ExitCode {
    sentiment_measures::cli::main()
}
