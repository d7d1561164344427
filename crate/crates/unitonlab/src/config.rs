//! Central tolerance table and the worker pool honoring UNITONLAB_THREADS.

use std::sync::OnceLock;

/// All numeric tolerances default from this single table; reports echo the
/// effective values.
#[derive(Clone, Debug, PartialEq)]
pub struct Tolerances {
    /// Coefficient pruning threshold after loop arithmetic.
    pub prune: f64,
    /// Birkhoff / Iwasawa acceptance tolerance.
    pub factorization: f64,
    /// Bauer iteration coefficient-delta target.
    pub bauer_delta: f64,
    /// Bauer row cap.
    pub bauer_max_rows: usize,
    /// Reality / twisting residual tolerance.
    pub reality: f64,
    /// Flatness residual tolerance for pipeline frames.
    pub flatness: f64,
    /// Step size for fine finite-difference derivatives of frames.
    pub fd_step: f64,
    /// Relative singular-value threshold for rank decisions.
    pub rank: f64,
    /// Picard step cap for uncertified potentials.
    pub picard_max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            prune: 1e-14,
            factorization: 1e-10,
            bauer_delta: 1e-12,
            bauer_max_rows: 500,
            reality: 1e-8,
            flatness: 1e-7,
            fd_step: 1e-5,
            rank: 1e-8,
            picard_max_steps: 64,
        }
    }
}

/// Shared worker pool; UNITONLAB_THREADS caps parallelism.
pub fn thread_pool() -> &'static rayon::ThreadPool {
    static POOL: OnceLock<rayon::ThreadPool> = OnceLock::new();
    POOL.get_or_init(|| {
        let mut builder = rayon::ThreadPoolBuilder::new();
        if let Ok(v) = std::env::var("UNITONLAB_THREADS") {
            if let Ok(n) = v.trim().parse::<usize>() {
                if n >= 1 {
                    builder = builder.num_threads(n);
                }
            }
        }
        builder.build().expect("worker pool")
    })
}
