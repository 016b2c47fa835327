//! Dispatch of independent replications.
//!
//! Every Monte Carlo routine in this crate splits its work into replications
//! indexed `0..count`, each drawing from its own stream. Executors only decide
//! where a replication runs; results are always returned in index order, so
//! output is identical for any executor and thread count.

use alloc::vec::Vec;

pub trait Executor: Sync {
    fn map<T, F>(&self, count: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Runs replications in order on the calling thread.
#[derive(Debug, Clone, Copy, Default)]
pub struct Sequential;

impl Executor for Sequential {
    fn map<T, F>(&self, count: usize, task: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..count).map(task).collect()
    }
}
