fn main() { std::process::exit(pqgl::cli::run()); }
