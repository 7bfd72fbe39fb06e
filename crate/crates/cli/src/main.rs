fn main() {
    let code = schatten_cli::main_with(std::env::args_os());
    std::process::exit(code);
}
