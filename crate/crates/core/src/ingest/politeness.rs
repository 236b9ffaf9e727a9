use std::collections::HashMap;
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

/// Per-host dispatch schedule shared by every crawler thread.
///
/// `acquire` reserves the next free slot for a host under the lock and then
/// sleeps outside it, so concurrent callers for one host are serialized while
/// different hosts never wait on each other.
#[derive(Debug, Default)]
pub struct Politeness {
    last_dispatch: Mutex<HashMap<String, Instant>>,
}

impl Politeness {
    pub fn new() -> Self {
        Self::default()
    }

    /// Blocks until a request to `host` may be dispatched and returns that instant.
    pub fn acquire(&self, host: &str, min_gap: Duration) -> Instant {
        let slot = {
            let mut map = self.last_dispatch.lock().expect("politeness state poisoned");
            let now = Instant::now();
            let slot = match map.get(host) {
                Some(&prev) => (prev + min_gap).max(now),
                None => now,
            };
            map.insert(host.to_string(), slot);
            slot
        };
        let now = Instant::now();
        if slot > now {
            thread::sleep(slot - now);
        }
        slot
    }

    pub fn last_dispatch(&self, host: &str) -> Option<Instant> {
        self.last_dispatch
            .lock()
            .expect("politeness state poisoned")
            .get(host)
            .copied()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    #[test]
    fn spaces_same_host() {
        let p = Politeness::new();
        let gap = Duration::from_millis(40);
        let t0 = p.acquire("a", gap);
        let t1 = p.acquire("a", gap);
        assert!(t1 - t0 >= gap);
        assert!(Instant::now() >= t1);
    }

    #[test]
    fn hosts_are_independent() {
        let p = Politeness::new();
        let gap = Duration::from_millis(300);
        p.acquire("a", gap);
        let start = Instant::now();
        p.acquire("b", gap);
        assert!(start.elapsed() < Duration::from_millis(100));
    }

    #[test]
    fn concurrent_callers_are_serialized() {
        let p = Arc::new(Politeness::new());
        let gap = Duration::from_millis(25);
        let handles: Vec<_> = (0..4)
            .map(|_| {
                let p = Arc::clone(&p);
                thread::spawn(move || p.acquire("h", gap))
            })
            .collect();
        let mut slots: Vec<Instant> = handles.into_iter().map(|h| h.join().unwrap()).collect();
        slots.sort();
        for w in slots.windows(2) {
            assert!(w[1] - w[0] >= gap);
        }
    }
}
