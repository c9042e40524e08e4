//! Rayon-backed executor. Output order follows the item index, so results
//! do not depend on the pool size.

use ardl_core::exec::Executor;
use rayon::prelude::*;

use crate::error::{LabError, Result};

#[derive(Debug, Default, Clone, Copy)]
pub struct Rayon;

impl Executor for Rayon {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).into_par_iter().map(f).collect()
    }
}

/// Runs `f` inside a dedicated pool of `threads` workers (0 = rayon default).
pub fn with_threads<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| LabError::Config(format!("cannot start thread pool: {e}")))?;
    Ok(pool.install(f))
}
