//! Bounded worker pool with per-target ordering.
//!
//! Work arrives as batches. All units of one batch may run concurrently; two
//! batches that name the same target run strictly in submission order. A
//! batch's `finish` step runs after its last unit and before the next batch
//! on that target is released.

use std::collections::{HashMap, VecDeque};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::{Condvar, Mutex, MutexGuard};

use super::plan::SyncMode;
use crate::error::{Error, Result};

pub type Task<'env> = Box<dyn FnOnce() -> Result<()> + Send + 'env>;

pub struct Batch<'env> {
    /// Ordering key; `None` means unordered.
    pub target: Option<u64>,
    pub units: Vec<Task<'env>>,
    pub finish: Option<Task<'env>>,
}

impl<'env> Batch<'env> {
    pub fn new(target: Option<u64>) -> Self {
        Batch {
            target,
            units: Vec::new(),
            finish: None,
        }
    }

    pub fn unit(mut self, task: impl FnOnce() -> Result<()> + Send + 'env) -> Self {
        self.units.push(Box::new(task));
        self
    }

    pub fn push(&mut self, task: impl FnOnce() -> Result<()> + Send + 'env) {
        self.units.push(Box::new(task));
    }

    pub fn then(mut self, task: impl FnOnce() -> Result<()> + Send + 'env) -> Self {
        self.finish = Some(Box::new(task));
        self
    }
}

/// Runs `body` with an executor of `threads` workers; `threads <= 1` runs inline.
///
/// Returns the first error raised by `body` or by any task.
pub fn scoped<'env, R>(
    threads: usize,
    mode: SyncMode,
    body: impl FnOnce(&Executor<'_, 'env>) -> Result<R>,
) -> Result<R> {
    if threads <= 1 {
        return body(&Executor { shared: None });
    }
    let shared = Shared::new(mode, threads + 2);
    std::thread::scope(|s| {
        for _ in 0..threads {
            s.spawn(|| shared.worker());
        }
        let out = body(&Executor { shared: Some(&shared) });
        shared.close();
        let err = shared.lock().error.take();
        match (out, err) {
            (Err(e), _) | (Ok(_), Some(e)) => Err(e),
            (Ok(r), None) => Ok(r),
        }
    })
}

pub struct Executor<'s, 'env> {
    shared: Option<&'s Shared<'env>>,
}

impl<'env> Executor<'_, 'env> {
    pub fn is_parallel(&self) -> bool {
        self.shared.is_some()
    }

    /// Queues a batch, blocking while too many batches are in flight.
    pub fn submit(&self, batch: Batch<'env>) -> Result<()> {
        match self.shared {
            None => {
                for unit in batch.units {
                    unit()?;
                }
                batch.finish.map_or(Ok(()), |f| f())
            }
            Some(shared) => shared.submit(batch),
        }
    }

    /// Waits until every submitted batch has completed.
    pub fn drain(&self) -> Result<()> {
        match self.shared {
            None => Ok(()),
            Some(shared) => {
                let mut st = shared.lock();
                while st.in_flight > 0 {
                    st = shared.wait_progress(st);
                }
                match st.error.take() {
                    Some(e) => Err(e),
                    None => Ok(()),
                }
            }
        }
    }
}

struct Job<'env> {
    batch: u64,
    task: Task<'env>,
}

struct BatchState<'env> {
    target: Option<u64>,
    ticket: u64,
    remaining: usize,
    /// Units held back until the target is free (callback mode).
    held: Vec<Task<'env>>,
    finish: Option<Task<'env>>,
}

#[derive(Default)]
struct State<'env> {
    queue: VecDeque<Job<'env>>,
    batches: HashMap<u64, BatchState<'env>>,
    next_batch: u64,
    /// Callback mode: batches waiting for their target, in order.
    waiting: HashMap<u64, VecDeque<u64>>,
    busy: HashMap<u64, bool>,
    /// Lock mode: next ticket to hand out and ticket now served, per target.
    next_ticket: HashMap<u64, u64>,
    serving: HashMap<u64, u64>,
    in_flight: usize,
    error: Option<Error>,
    closed: bool,
}

struct Shared<'env> {
    mode: SyncMode,
    max_in_flight: usize,
    state: Mutex<State<'env>>,
    work: Condvar,
    progress: Condvar,
}

impl<'env> Shared<'env> {
    fn new(mode: SyncMode, max_in_flight: usize) -> Self {
        Shared {
            mode,
            max_in_flight,
            state: Mutex::new(State::default()),
            work: Condvar::new(),
            progress: Condvar::new(),
        }
    }

    fn lock(&self) -> MutexGuard<'_, State<'env>> {
        self.state.lock().unwrap_or_else(|p| p.into_inner())
    }

    fn wait_progress<'g>(&self, g: MutexGuard<'g, State<'env>>) -> MutexGuard<'g, State<'env>> {
        self.progress.wait(g).unwrap_or_else(|p| p.into_inner())
    }

    fn submit(&self, mut batch: Batch<'env>) -> Result<()> {
        if batch.units.is_empty() {
            batch.units.push(Box::new(|| Ok(())));
        }
        let mut st = self.lock();
        while st.in_flight >= self.max_in_flight && st.error.is_none() {
            st = self.wait_progress(st);
        }
        if let Some(e) = st.error.take() {
            return Err(e);
        }
        let id = st.next_batch;
        st.next_batch += 1;
        st.in_flight += 1;
        let ticket = match (self.mode, batch.target) {
            (SyncMode::Lock, Some(t)) => {
                let next = st.next_ticket.entry(t).or_insert(0);
                *next += 1;
                *next - 1
            }
            _ => 0,
        };
        let hold = match (self.mode, batch.target) {
            (SyncMode::Callback, Some(t)) => {
                let busy = st.busy.entry(t).or_insert(false);
                if *busy {
                    st.waiting.entry(t).or_default().push_back(id);
                    true
                } else {
                    *busy = true;
                    false
                }
            }
            _ => false,
        };
        let remaining = batch.units.len();
        let held = if hold {
            batch.units
        } else {
            for task in batch.units {
                st.queue.push_back(Job { batch: id, task });
            }
            Vec::new()
        };
        st.batches.insert(
            id,
            BatchState {
                target: batch.target,
                ticket,
                remaining,
                held,
                finish: batch.finish,
            },
        );
        drop(st);
        self.work.notify_all();
        Ok(())
    }

    fn worker(&self) {
        loop {
            let mut st = self.lock();
            let job = loop {
                if let Some(job) = st.queue.pop_front() {
                    break job;
                }
                if st.closed {
                    return;
                }
                st = self.work.wait(st).unwrap_or_else(|p| p.into_inner());
            };
            if self.mode == SyncMode::Lock {
                let (target, ticket) = {
                    let b = &st.batches[&job.batch];
                    (b.target, b.ticket)
                };
                if let Some(t) = target {
                    while st.serving.get(&t).copied().unwrap_or(0) != ticket {
                        st = self.wait_progress(st);
                    }
                }
            }
            let skip = st.error.is_some();
            drop(st);

            let result = if skip { Ok(()) } else { run_guarded(job.task) };
            self.complete(job.batch, result);
        }
    }

    fn complete(&self, batch: u64, result: Result<()>) {
        let mut st = self.lock();
        if let Err(e) = result {
            st.error.get_or_insert(e);
        }
        let b = st.batches.get_mut(&batch).expect("live batch");
        b.remaining -= 1;
        if b.remaining > 0 {
            return;
        }
        let finish = b.finish.take();
        let skip = st.error.is_some();
        drop(st);
        let result = match finish {
            Some(f) if !skip => run_guarded(f),
            _ => Ok(()),
        };

        let mut st = self.lock();
        if let Err(e) = result {
            st.error.get_or_insert(e);
        }
        let b = st.batches.remove(&batch).expect("live batch");
        st.in_flight -= 1;
        if let Some(t) = b.target {
            match self.mode {
                SyncMode::Lock => *st.serving.entry(t).or_insert(0) += 1,
                SyncMode::Callback => {
                    let next = st.waiting.get_mut(&t).and_then(|q| q.pop_front());
                    match next {
                        Some(id) => {
                            let held = std::mem::take(&mut st.batches.get_mut(&id).expect("waiting batch").held);
                            for task in held {
                                st.queue.push_back(Job { batch: id, task });
                            }
                            self.work.notify_all();
                        }
                        None => {
                            st.busy.insert(t, false);
                        }
                    }
                }
            }
        }
        drop(st);
        self.progress.notify_all();
    }

    fn close(&self) {
        let mut st = self.lock();
        while st.in_flight > 0 {
            st = self.wait_progress(st);
        }
        st.closed = true;
        drop(st);
        self.work.notify_all();
    }
}

fn run_guarded(task: Task<'_>) -> Result<()> {
    catch_unwind(AssertUnwindSafe(task)).unwrap_or_else(|panic| {
        let msg = panic
            .downcast_ref::<&str>()
            .map(|s| s.to_string())
            .or_else(|| panic.downcast_ref::<String>().cloned())
            .unwrap_or_else(|| "worker panicked".into());
        Err(Error::Internal(msg))
    })
}
