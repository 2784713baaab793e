use std::io::Write;

/// Installs a stderr logger emitting `level key=value ...` lines. The
/// level comes from `COPYDESC_LOG` (default `info`).
pub fn init() {
    let env = env_logger::Env::new().filter_or("COPYDESC_LOG", "info");
    let _ = env_logger::Builder::from_env(env)
        .format(|buf, record| {
            writeln!(buf, "{} {}", record.level().as_str().to_ascii_lowercase(), record.args())
        })
        .try_init();
}
