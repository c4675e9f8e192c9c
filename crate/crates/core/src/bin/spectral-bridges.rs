use spectral_bridges::cli;

fn main() {
    match cli::threads_from_env() {
        Ok(Some(n)) => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                eprintln!("error: {e}");
                std::process::exit(cli::EXIT_CONFIG);
            }
        }
        Ok(None) => {}
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(cli::EXIT_CONFIG);
        }
    }
    std::process::exit(cli::run(std::env::args_os()));
}
