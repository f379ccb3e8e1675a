fn main() -> std::process::ExitCode {
    implode_core::cli::main_entry()
}
