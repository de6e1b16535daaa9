//! Byte-exact I/O accounting.

use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;

/// What kind of file a transfer touched.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IoCategory {
    SubShard,
    Interval,
    Hub,
    /// Manifest, id maps, degree file.
    Metadata,
}

impl IoCategory {
    pub const ALL: [IoCategory; 4] = [
        IoCategory::SubShard,
        IoCategory::Interval,
        IoCategory::Hub,
        IoCategory::Metadata,
    ];

    fn slot(self) -> usize {
        match self {
            IoCategory::SubShard => 0,
            IoCategory::Interval => 1,
            IoCategory::Hub => 2,
            IoCategory::Metadata => 3,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            IoCategory::SubShard => "subshard",
            IoCategory::Interval => "interval",
            IoCategory::Hub => "hub",
            IoCategory::Metadata => "metadata",
        }
    }
}

#[derive(Debug, Default)]
struct AtomicTally {
    bytes_read: AtomicU64,
    bytes_written: AtomicU64,
    files_read: AtomicU64,
    files_written: AtomicU64,
}

/// Plain copy of one category's counters.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Tally {
    pub bytes_read: u64,
    pub bytes_written: u64,
    pub files_read: u64,
    pub files_written: u64,
}

impl Tally {
    fn saturating_sub(self, earlier: Tally) -> Tally {
        Tally {
            bytes_read: self.bytes_read.saturating_sub(earlier.bytes_read),
            bytes_written: self.bytes_written.saturating_sub(earlier.bytes_written),
            files_read: self.files_read.saturating_sub(earlier.files_read),
            files_written: self.files_written.saturating_sub(earlier.files_written),
        }
    }
}

/// Shared, thread-safe counters. Every storage read and write goes through here.
#[derive(Debug, Default)]
pub struct IoCounters {
    tallies: [AtomicTally; 4],
    snapshots: Mutex<Vec<IoSnapshot>>,
}

impl IoCounters {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn record_read(&self, category: IoCategory, bytes: u64) {
        let t = &self.tallies[category.slot()];
        t.bytes_read.fetch_add(bytes, Ordering::Relaxed);
        t.files_read.fetch_add(1, Ordering::Relaxed);
    }

    pub fn record_write(&self, category: IoCategory, bytes: u64) {
        let t = &self.tallies[category.slot()];
        t.bytes_written.fetch_add(bytes, Ordering::Relaxed);
        t.files_written.fetch_add(1, Ordering::Relaxed);
    }

    /// Adds bytes to an already-counted read (streaming readers).
    pub(crate) fn add_read_bytes(&self, category: IoCategory, bytes: u64) {
        self.tallies[category.slot()]
            .bytes_read
            .fetch_add(bytes, Ordering::Relaxed);
    }

    pub(crate) fn add_file_read(&self, category: IoCategory) {
        self.tallies[category.slot()].files_read.fetch_add(1, Ordering::Relaxed);
    }

    pub fn snapshot(&self) -> IoSnapshot {
        let mut snap = IoSnapshot::default();
        for (slot, t) in self.tallies.iter().enumerate() {
            snap.tallies[slot] = Tally {
                bytes_read: t.bytes_read.load(Ordering::Relaxed),
                bytes_written: t.bytes_written.load(Ordering::Relaxed),
                files_read: t.files_read.load(Ordering::Relaxed),
                files_written: t.files_written.load(Ordering::Relaxed),
            };
        }
        snap
    }

    /// Records the current totals as a per-iteration snapshot and returns them.
    pub fn checkpoint(&self) -> IoSnapshot {
        let snap = self.snapshot();
        self.snapshots.lock().expect("snapshot lock").push(snap);
        snap
    }

    pub fn snapshots(&self) -> Vec<IoSnapshot> {
        self.snapshots.lock().expect("snapshot lock").clone()
    }

    pub fn reset(&self) {
        for t in &self.tallies {
            t.bytes_read.store(0, Ordering::Relaxed);
            t.bytes_written.store(0, Ordering::Relaxed);
            t.files_read.store(0, Ordering::Relaxed);
            t.files_written.store(0, Ordering::Relaxed);
        }
        self.snapshots.lock().expect("snapshot lock").clear();
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IoSnapshot {
    tallies: [Tally; 4],
}

impl IoSnapshot {
    pub fn get(&self, category: IoCategory) -> Tally {
        self.tallies[category.slot()]
    }

    pub fn bytes_read(&self) -> u64 {
        self.tallies.iter().map(|t| t.bytes_read).sum()
    }

    pub fn bytes_written(&self) -> u64 {
        self.tallies.iter().map(|t| t.bytes_written).sum()
    }

    /// Traffic between `earlier` and `self`.
    pub fn since(&self, earlier: &IoSnapshot) -> IoSnapshot {
        let mut out = IoSnapshot::default();
        for slot in 0..4 {
            out.tallies[slot] = self.tallies[slot].saturating_sub(earlier.tallies[slot]);
        }
        out
    }

    pub fn is_zero(&self) -> bool {
        self.tallies.iter().all(|t| *t == Tally::default())
    }
}

impl fmt::Display for IoSnapshot {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for cat in IoCategory::ALL {
            let t = self.get(cat);
            if !first {
                write!(f, " ")?;
            }
            first = false;
            write!(
                f,
                "{}_read={} {}_written={}",
                cat.name(),
                t.bytes_read,
                cat.name(),
                t.bytes_written
            )?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn reset_zeroes_everything() {
        let io = IoCounters::new();
        io.record_read(IoCategory::SubShard, 48);
        io.record_write(IoCategory::Hub, 20);
        io.checkpoint();
        io.reset();
        assert!(io.snapshot().is_zero());
        assert!(io.snapshots().is_empty());
    }

    #[test]
    fn totals_exact_under_concurrency() {
        let io = Arc::new(IoCounters::new());
        std::thread::scope(|s| {
            for _ in 0..8 {
                let io = Arc::clone(&io);
                s.spawn(move || {
                    for _ in 0..1000 {
                        io.record_read(IoCategory::Interval, 3);
                        io.record_write(IoCategory::Hub, 5);
                    }
                });
            }
        });
        let snap = io.snapshot();
        assert_eq!(snap.get(IoCategory::Interval).bytes_read, 24_000);
        assert_eq!(snap.get(IoCategory::Interval).files_read, 8_000);
        assert_eq!(snap.get(IoCategory::Hub).bytes_written, 40_000);
        assert_eq!(snap.bytes_read(), 24_000);
    }

    #[test]
    fn deltas_between_snapshots() {
        let io = IoCounters::new();
        io.record_read(IoCategory::SubShard, 10);
        let a = io.checkpoint();
        io.record_read(IoCategory::SubShard, 48);
        let b = io.checkpoint();
        let d = b.since(&a);
        assert_eq!(d.get(IoCategory::SubShard).bytes_read, 48);
        assert_eq!(d.get(IoCategory::SubShard).files_read, 1);
        assert_eq!(io.snapshots().len(), 2);
    }
}
