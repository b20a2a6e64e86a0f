//! Request throttling for the external compound service: a sliding-window
//! rate limiter and a cap on outstanding requests.

use std::collections::VecDeque;
use std::sync::{Arc, Condvar, Mutex};
use std::time::{Duration, Instant};

pub trait Clock: Send + Sync {
    /// Time elapsed since an arbitrary fixed origin.
    fn now(&self) -> Duration;
    fn sleep(&self, duration: Duration);
}

#[derive(Debug)]
pub struct SystemClock {
    origin: Instant,
}

impl Default for SystemClock {
    fn default() -> Self {
        SystemClock {
            origin: Instant::now(),
        }
    }
}

impl Clock for SystemClock {
    fn now(&self) -> Duration {
        self.origin.elapsed()
    }

    fn sleep(&self, duration: Duration) {
        std::thread::sleep(duration);
    }
}

const WINDOW: Duration = Duration::from_secs(1);

/// Admits at most `per_second` acquisitions in any one-second window.
pub struct RateLimiter {
    clock: Arc<dyn Clock>,
    per_second: usize,
    recent: Mutex<VecDeque<Duration>>,
}

impl RateLimiter {
    pub fn new(per_second: usize, clock: Arc<dyn Clock>) -> Self {
        RateLimiter {
            clock,
            per_second: per_second.max(1),
            recent: Mutex::new(VecDeque::new()),
        }
    }

    /// Block until a request may be issued, then record it.
    pub fn acquire(&self) {
        loop {
            let wait = {
                let mut recent = self.recent.lock().unwrap();
                let now = self.clock.now();
                while recent.front().is_some_and(|&t| t + WINDOW <= now) {
                    recent.pop_front();
                }
                if recent.len() < self.per_second {
                    recent.push_back(now);
                    return;
                }
                recent[0] + WINDOW - now
            };
            self.clock.sleep(wait);
        }
    }
}

/// Counting semaphore bounding concurrent outstanding requests.
pub struct ConcurrencyLimit {
    max: usize,
    active: Mutex<usize>,
    freed: Condvar,
}

pub struct Permit<'a>(&'a ConcurrencyLimit);

impl Drop for Permit<'_> {
    fn drop(&mut self) {
        *self.0.active.lock().unwrap() -= 1;
        self.0.freed.notify_one();
    }
}

impl ConcurrencyLimit {
    pub fn new(max: usize) -> Self {
        ConcurrencyLimit {
            max: max.max(1),
            active: Mutex::new(0),
            freed: Condvar::new(),
        }
    }

    pub fn acquire(&self) -> Permit<'_> {
        let mut active = self.active.lock().unwrap();
        while *active >= self.max {
            active = self.freed.wait(active).unwrap();
        }
        *active += 1;
        Permit(self)
    }

    pub fn in_use(&self) -> usize {
        *self.active.lock().unwrap()
    }
}
