fn main() -> std::process::ExitCode {
    pose_confidence::cli::main()
}
