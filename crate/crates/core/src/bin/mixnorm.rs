fn main() { std::process::exit(mixnorm::cli::main()) }
