use clap::Parser;

use cmspectra_cli::{run, Cli};

fn main() {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(report) => {
            println!("{} {}", report.command, report.config_hash);
            for (role, file) in &report.files {
                println!("  {role}: {file}");
            }
            if let Some(d) = &report.distances {
                println!("  ks: {}", d.ks);
            }
            for c in &report.checks {
                println!("  check {}: {} ({})", c.name, if c.passed { "pass" } else { "FAIL" }, c.detail);
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}
