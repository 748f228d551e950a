use std::io::Write;
use std::process::ExitCode;

fn main() -> ExitCode {
    let env_tol = std::env::var(maxent::cli::ENV_DEFAULT_TOL).ok();
    let out = maxent::cli::run(std::env::args_os(), env_tol.as_deref());
    let _ = std::io::stdout().write_all(out.stdout.as_bytes());
    let _ = std::io::stderr().write_all(out.stderr.as_bytes());
    ExitCode::from(out.code as u8)
}
