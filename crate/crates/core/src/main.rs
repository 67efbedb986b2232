fn main() -> std::process::ExitCode {
    lax_glue::cli::main()
}
