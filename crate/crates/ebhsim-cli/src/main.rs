use clap::Parser;
use ebhsim_cli::config::Cli;

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // help/version requests are not errors
            if e.use_stderr() {
                eprintln!("{e}");
                std::process::exit(64);
            }
            print!("{e}");
            std::process::exit(0);
        }
    };
    ebhsim_cli::init_workers();
    match ebhsim_cli::commands::run(cli) {
        Ok(manifest) => {
            println!(
                "{}: done in {:.1}s, outputs: {}",
                manifest.command,
                manifest.wall_time_s,
                manifest.outputs.join(", ")
            );
        }
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(e.exit_code());
        }
    }
}
