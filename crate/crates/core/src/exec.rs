//! Pluggable execution of independent, indexed work items.

use alloc::vec::Vec;

/// Maps `f` over `0..count` and returns the results in index order.
///
/// Implementations may run items concurrently, but every item must be a pure
/// function of its index so the output never depends on scheduling.
pub trait Executor: Sync {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs items one after another on the calling thread.
#[derive(Debug, Default, Clone, Copy)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, count: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(f).collect()
    }
}
