use clap::Parser;
use henchman::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            for line in &report.lines {
                println!("{line}");
            }
            for f in &report.files {
                eprintln!("wrote {}", f.display());
            }
        }
        Err(e) => {
            eprintln!("henchman: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
