use rayon::prelude::*;
use rde_core::Replicator;

use crate::LabError;

/// A fixed rayon pool. Results come back in replica order whatever the
/// number of workers.
pub struct Pool {
    pool: rayon::ThreadPool,
    workers: usize,
}

impl Pool {
    pub fn new(workers: usize) -> Result<Self, LabError> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers.max(1))
            .build()
            .map_err(|e| LabError::Config(format!("cannot start {workers} workers: {e}")))?;
        Ok(Pool { pool, workers: workers.max(1) })
    }

    pub fn workers(&self) -> usize {
        self.workers
    }
}

impl Replicator for Pool {
    fn map<T, F>(&self, n: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync,
    {
        self.pool.install(|| (0..n).into_par_iter().map(&f).collect())
    }
}
