fn main() {
    std::process::exit(sphere_transforms::cli::main_with_args(std::env::args_os()));
}
