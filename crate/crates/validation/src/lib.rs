//! Reporting for the acceptance suite in `tests/acceptance.rs`.
//!
//! Each criterion produces one line `criterion N: PASS|FAIL (secs) detail`.
//! The suite exits non-zero if any criterion failed.

use std::time::Instant;

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(passed: bool, detail: impl Into<String>) -> Self {
        Self { passed, detail: detail.into() }
    }
}

#[derive(Debug, Default)]
pub struct Suite {
    results: Vec<(u32, bool)>,
}

impl Suite {
    /// Runs one criterion and prints its line. An error from the library
    /// counts as a failure.
    pub fn check<F>(&mut self, id: u32, f: F)
    where
        F: FnOnce() -> spikeslab::Result<Outcome>,
    {
        let start = Instant::now();
        let outcome = f().unwrap_or_else(|e| Outcome::new(false, format!("error: {e}")));
        println!(
            "criterion {id}: {} ({:.1}s) {}",
            if outcome.passed { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64(),
            outcome.detail
        );
        self.results.push((id, outcome.passed));
    }

    pub fn failed(&self) -> Vec<u32> {
        self.results.iter().filter(|r| !r.1).map(|r| r.0).collect()
    }

    /// Prints the summary line and returns the process exit code.
    pub fn finish(&self) -> i32 {
        let failed = self.failed();
        println!(
            "acceptance: {}/{} criteria passed{}",
            self.results.len() - failed.len(),
            self.results.len(),
            if failed.is_empty() { String::new() } else { format!("; failed: {failed:?}") }
        );
        i32::from(!failed.is_empty())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exit_code_reflects_failures() {
        let mut s = Suite::default();
        s.check(1, || Ok(Outcome::new(true, "")));
        assert_eq!(s.finish(), 0);
        s.check(2, || Err(spikeslab::Error::Domain("x".into())));
        assert_eq!(s.failed(), vec![2]);
        assert_eq!(s.finish(), 1);
    }
}
