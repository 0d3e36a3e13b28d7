use std::io;

fn main() {
    if let Ok(threads) = std::env::var("FEWBODY_THREADS") {
        match threads.parse::<usize>() {
            Ok(n) if n > 0 => {
                rayon::ThreadPoolBuilder::new().num_threads(n).build_global().expect("global pool is built once");
            }
            _ => {
                eprintln!("error: FEWBODY_THREADS must be a positive integer, got '{threads}'");
                std::process::exit(fewbody::cli::EXIT_CONFIG);
            }
        }
    }
    let code = fewbody::cli::run(std::env::args_os(), &mut io::stdout().lock(), &mut io::stderr().lock());
    std::process::exit(code);
}
