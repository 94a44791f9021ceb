fn main() {
    std::process::exit(downfold::main_with_args(std::env::args_os()));
}
