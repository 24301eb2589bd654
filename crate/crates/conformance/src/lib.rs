//! Harness pieces shared by the acceptance suite: verdict bookkeeping, a
//! one-dimensional maximizer and discovery of the `wgscatter` binary.

use std::error::Error;
use std::path::PathBuf;
use std::process::Command;
use std::time::{Duration, Instant};

pub type Res<T> = Result<T, Box<dyn Error>>;

/// Outcome of one criterion: verdict plus a one-line summary of the numbers.
#[derive(Clone, Debug, PartialEq)]
pub struct Verdict {
    pub passed: bool,
    pub detail: String,
}

/// Collects the sub-checks of a criterion.
#[derive(Clone, Debug)]
pub struct Tally {
    passed: bool,
    parts: Vec<String>,
}

impl Default for Tally {
    fn default() -> Self {
        Self::new()
    }
}

impl Tally {
    pub fn new() -> Self {
        Self {
            passed: true,
            parts: Vec::new(),
        }
    }

    pub fn check(&mut self, ok: bool, text: String) {
        self.passed &= ok;
        self.parts.push(if ok { text } else { format!("{text} <- fails") });
    }

    /// Adds context that does not affect the verdict.
    pub fn note(&mut self, text: String) {
        self.parts.push(format!("({text})"));
    }

    pub fn runtime(&mut self, start: Instant, limit: Duration) {
        let t = start.elapsed();
        self.check(
            t <= limit,
            format!("runtime {:.1}s (limit {}s)", t.as_secs_f64(), limit.as_secs()),
        );
    }

    pub fn done(self) -> Res<Verdict> {
        Ok(Verdict {
            passed: self.passed,
            detail: self.parts.join("; "),
        })
    }
}

pub fn log_sweep(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

/// Maximizes a unimodal `f` on `[lo, hi]` by golden-section search;
/// returns `(x, f(x))`.
pub fn golden_max(mut f: impl FnMut(f64) -> Res<f64>, mut lo: f64, mut hi: f64, tol: f64) -> Res<(f64, f64)> {
    let r = (5f64.sqrt() - 1.0) / 2.0;
    let (mut x1, mut x2) = (hi - r * (hi - lo), lo + r * (hi - lo));
    let (mut f1, mut f2) = (f(x1)?, f(x2)?);
    while hi - lo > tol {
        if f1 < f2 {
            lo = x1;
            (x1, f1) = (x2, f2);
            x2 = lo + r * (hi - lo);
            f2 = f(x2)?;
        } else {
            hi = x2;
            (x2, f2) = (x1, f1);
            x1 = hi - r * (hi - lo);
            f1 = f(x1)?;
        }
    }
    let x = (lo + hi) / 2.0;
    Ok((x, f(x)?))
}

/// Path of the `wgscatter` binary in the profile directory this test
/// executable was built into, building it first when absent.
pub fn wgscatter_binary() -> Res<PathBuf> {
    let exe = std::env::current_exe()?;
    let profile_dir = exe
        .parent()
        .and_then(|deps| deps.parent())
        .ok_or("test executable has no profile directory")?;
    let bin = profile_dir.join(format!("wgscatter{}", std::env::consts::EXE_SUFFIX));
    if !bin.exists() {
        let cargo = std::env::var("CARGO").unwrap_or_else(|_| "cargo".into());
        let mut cmd = Command::new(cargo);
        cmd.args(["build", "-p", "wgscatter-cli", "--bin", "wgscatter"]);
        if profile_dir.file_name().is_some_and(|n| n == "release") {
            cmd.arg("--release");
        }
        if !cmd.status()?.success() {
            return Err("building the wgscatter binary failed".into());
        }
    }
    Ok(bin)
}
