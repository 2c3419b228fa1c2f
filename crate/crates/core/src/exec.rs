//! Order-preserving parallel map abstraction.

use alloc::vec::Vec;

/// Runs `f(0..len)` and returns the results in index order.
///
/// Implementations may evaluate indices concurrently but must return them in
/// order, so any reduction over the output is independent of scheduling.
pub trait Executor: Sync {
    fn map_indexed<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send;
}

/// Single-threaded executor.
#[derive(Debug, Clone, Copy, Default)]
pub struct Serial;

impl Executor for Serial {
    fn map_indexed<T, F>(&self, len: usize, f: F) -> Vec<T>
    where
        T: Send,
        F: Fn(usize) -> T + Sync + Send,
    {
        (0..len).map(f).collect()
    }
}
