fn main() -> std::process::ExitCode {
    lorentz_lab::cli::main_entry()
}
