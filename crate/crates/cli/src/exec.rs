use drift_core::bvp::SegmentSolution;
use drift_core::optimizer::SegmentExecutor;
use drift_core::Result;
use rayon::prelude::*;
use rayon::{ThreadPool, ThreadPoolBuilder};

/// Solves the segments of one outer step on a rayon pool. Results come
/// back in segment order, so the output does not depend on the pool size.
pub struct RayonExecutor {
    pool: ThreadPool,
}

impl RayonExecutor {
    /// `threads == 0` uses every available core.
    pub fn new(threads: usize) -> std::result::Result<Self, rayon::ThreadPoolBuildError> {
        Ok(RayonExecutor { pool: ThreadPoolBuilder::new().num_threads(threads).build()? })
    }

    pub fn threads(&self) -> usize {
        self.pool.current_num_threads()
    }
}

impl SegmentExecutor for RayonExecutor {
    fn map_segments(
        &self,
        count: usize,
        job: &(dyn Fn(usize) -> Result<SegmentSolution> + Sync),
    ) -> Vec<Result<SegmentSolution>> {
        self.pool.install(|| (0..count).into_par_iter().map(job).collect())
    }
}
