use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use texting_robots::Robot;

/// Parsed robots rules for one host.
#[derive(Debug)]
pub enum RobotsPolicy {
    AllowAll,
    DisallowAll,
    Rules(Box<Robot>),
}

impl RobotsPolicy {
    /// Builds a policy from a robots.txt response.
    ///
    /// Missing files (4xx) allow everything; server errors disallow everything
    /// until the next crawl.
    pub fn from_response(user_agent: &str, status: u16, body: &[u8]) -> Self {
        match status {
            200..=299 => match Robot::new(user_agent, body) {
                Ok(robot) => RobotsPolicy::Rules(Box::new(robot)),
                Err(e) => {
                    log::warn!("unparseable robots.txt, allowing all: {e}");
                    RobotsPolicy::AllowAll
                }
            },
            400..=499 => RobotsPolicy::AllowAll,
            _ => RobotsPolicy::DisallowAll,
        }
    }

    pub fn allows(&self, url: &str) -> bool {
        match self {
            RobotsPolicy::AllowAll => true,
            RobotsPolicy::DisallowAll => false,
            RobotsPolicy::Rules(robot) => robot.allowed(url),
        }
    }

    /// Crawl-delay requested by the site, in milliseconds.
    pub fn crawl_delay_ms(&self) -> Option<u64> {
        match self {
            RobotsPolicy::Rules(robot) => robot.delay.map(|d| (d.max(0.0) * 1000.0) as u64),
            _ => None,
        }
    }
}

/// One lazily fetched policy per host. Concurrent lookups for the same host
/// wait for a single fetch; other hosts proceed independently.
#[derive(Debug, Default)]
pub struct RobotsCache {
    hosts: Mutex<HashMap<String, Arc<OnceLock<Arc<RobotsPolicy>>>>>,
}

impl RobotsCache {
    pub fn get_or_fetch(&self, host: &str, fetch: impl FnOnce() -> RobotsPolicy) -> Arc<RobotsPolicy> {
        let cell = {
            let mut hosts = self.hosts.lock().expect("robots cache poisoned");
            Arc::clone(hosts.entry(host.to_string()).or_default())
        };
        Arc::clone(cell.get_or_init(|| Arc::new(fetch())))
    }
}
