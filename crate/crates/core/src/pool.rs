use crate::error::{Error, Result};

/// Runs `f` on a dedicated rayon pool of `threads` workers, or on the
/// global pool when `threads == 0`.
pub fn with_threads<R, F>(threads: usize, f: F) -> Result<R>
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    if threads == 0 {
        return Ok(f());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::InvalidParam(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}
