use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::rng::RngSeed;

/// Runs `task(index, seed.derive(index))` for every replicate index in
/// parallel. Results come back in index order, so the output never depends
/// on the number of workers.
pub fn replicate<T, F>(reps: usize, seed: RngSeed, task: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, RngSeed) -> Result<T> + Sync,
{
    (0..reps).into_par_iter().map(|i| task(i, seed.derive(i as u64))).collect()
}

/// Runs `f` inside a dedicated pool of `threads` workers (all cores if `None`).
pub fn with_threads<T: Send>(threads: Option<usize>, f: impl FnOnce() -> T + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = threads {
        if k == 0 {
            return Err(Error::Config("--threads must be positive".into()));
        }
        builder = builder.num_threads(k);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    Ok(pool.install(f))
}

/// Fails with [`Error::Censored`] when more than 10% of `total` runs were censored.
pub fn check_censoring(censored: usize, total: usize, what: &str) -> Result<f64> {
    let fraction = if total == 0 { 0.0 } else { censored as f64 / total as f64 };
    if fraction > MAX_CENSORED_FRACTION {
        return Err(Error::Censored(format!(
            "{what}: {censored} of {total} stabilizations censored ({:.1}%); enlarge the window",
            100.0 * fraction
        )));
    }
    Ok(fraction)
}

pub const MAX_CENSORED_FRACTION: f64 = 0.10;
