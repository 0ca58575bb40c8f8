fn main() {
    std::process::exit(fi_diffusion::cli::run(std::env::args_os()));
}
