fn main() -> std::process::ExitCode {
    rqe_calib::cli::run()
}
