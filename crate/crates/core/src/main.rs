use std::io::{ErrorKind, Write};

fn main() -> anyhow::Result<()> {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    let mut out = stdout.lock();
    let mut err = stderr.lock();
    let code = beta_approx::cli::dispatch(std::env::args_os(), &mut out, &mut err);
    match out.flush() {
        Err(e) if e.kind() != ErrorKind::BrokenPipe => return Err(e.into()),
        _ => {}
    }
    std::process::exit(code);
}
