/// Run `f` on a dedicated rayon pool of `workers` threads (0 = rayon default).
pub fn with_workers<R, F>(workers: usize, f: F) -> R
where
    R: Send,
    F: FnOnce() -> R + Send,
{
    match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
        Ok(pool) => pool.install(f),
        // Pool creation only fails on thread spawn errors; fall back to the global pool.
        Err(_) => f(),
    }
}
