use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::thread;

use gma_core::boundary::{BatchRunner, BoundaryError, FaceTrace};

/// Scoped worker threads pulling job indices from a shared counter. Results are
/// returned in job order whatever the thread count.
#[derive(Clone, Copy, Debug)]
pub struct ThreadPool {
    pub threads: usize,
}

impl ThreadPool {
    pub fn map<T: Send>(&self, count: usize, job: &(dyn Fn(usize) -> T + Sync)) -> Vec<T> {
        let workers = self.threads.min(count).max(1);
        if workers == 1 {
            return (0..count).map(job).collect();
        }
        let next = AtomicUsize::new(0);
        let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..count).map(|_| None).collect());
        thread::scope(|s| {
            for _ in 0..workers {
                s.spawn(|| loop {
                    let i = next.fetch_add(1, Ordering::Relaxed);
                    if i >= count {
                        break;
                    }
                    let r = job(i);
                    slots.lock().unwrap()[i] = Some(r);
                });
            }
        });
        slots.into_inner().unwrap().into_iter().map(|r| r.expect("every job ran")).collect()
    }
}

impl BatchRunner for ThreadPool {
    fn run(&self, count: usize, job: &(dyn Fn(usize) -> Result<FaceTrace, BoundaryError> + Sync)) -> Vec<Result<FaceTrace, BoundaryError>> {
        self.map(count, job)
    }
}
