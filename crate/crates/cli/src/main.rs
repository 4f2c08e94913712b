use edt_miner::{exit_code, init_logging, run};

fn main() {
    init_logging();
    if let Err(e) = run(std::env::args_os()) {
        match e.downcast_ref::<clap::Error>() {
            Some(c) => {
                let _ = c.print();
            }
            None => eprintln!("error: {e:#}"),
        }
        std::process::exit(exit_code(&e));
    }
}
