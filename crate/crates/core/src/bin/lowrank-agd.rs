fn main() -> std::process::ExitCode {
    lowrank_agd::harness::cli::main()
}
