//! Replica execution.
//!
//! A replicator evaluates `f(0), ..., f(n-1)` and returns the results in
//! index order. Implementations may run replicas on any number of threads,
//! so reductions over the returned vector are independent of the schedule.

#[allow(unused_imports)]
use num_traits::Float;
use alloc::vec::Vec;

pub trait Replicator: Sync {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync;
}

/// Runs replicas one after another on the calling thread.
#[derive(Clone, Copy, Debug, Default)]
pub struct Sequential;

impl Replicator for Sequential {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        (0..n).map(f).collect()
    }
}
