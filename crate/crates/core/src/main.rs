use std::io::Write;
use std::process::ExitCode;

use hectl::sim::{self, cli};

fn main() -> ExitCode {
    let inv = match cli::parse_cli(std::env::args_os()) {
        Ok(inv) => inv,
        Err(e) => {
            let code = e.exit_code();
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    let log = match sim::simulate(&inv.config) {
        Ok(log) => log,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    let written = match &inv.out {
        Some(path) => sim::write_csv(&log, path),
        None => std::io::stdout()
            .write_all(sim::csv_string(&log).as_bytes())
            .map_err(Into::into),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return ExitCode::from(e.exit_code() as u8);
    }
    let s = sim::compare(&log);
    eprintln!(
        "max_dev_u={:.6e} max_dev_y={:.6e} final_state_norm={:.6e}",
        s.max_dev_u, s.max_dev_y, s.final_state_norm
    );
    ExitCode::SUCCESS
}
