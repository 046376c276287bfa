fn main() {
    std::process::exit(myceliumsim_cli::dispatch(std::env::args()));
}
