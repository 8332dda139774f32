use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A list of matrix sizes an experiment runs over.
///
/// Schedules are explicit so every report can echo exactly which sizes were
/// visited; the default is geometric doubling from 64 to 4096.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Schedule(pub Vec<usize>);

impl Schedule {
    /// Geometric doubling schedule `start, 2*start, ..., <= end`.
    pub fn doubling(start: usize, end: usize) -> Result<Self> {
        if start == 0 {
            return Err(Error::ZeroSize);
        }
        if end < start {
            return Err(Error::InvalidConfig(format!(
                "schedule end {end} is below start {start}"
            )));
        }
        let mut sizes = Vec::new();
        let mut n = start;
        while n <= end {
            sizes.push(n);
            match n.checked_mul(2) {
                Some(next) => n = next,
                None => break,
            }
        }
        Ok(Schedule(sizes))
    }

    pub fn explicit(sizes: Vec<usize>) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::InvalidConfig("schedule is empty".into()));
        }
        if sizes.contains(&0) {
            return Err(Error::ZeroSize);
        }
        Ok(Schedule(sizes))
    }

    pub fn sizes(&self) -> &[usize] {
        &self.0
    }

    pub fn largest(&self) -> usize {
        self.0.iter().copied().max().unwrap_or(0)
    }

    /// The trailing `window` entries (all entries when the schedule is shorter).
    pub fn tail(&self, window: usize) -> &[usize] {
        let start = self.0.len().saturating_sub(window.max(1));
        &self.0[start..]
    }
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule::doubling(64, 4096).expect("default schedule")
    }
}

/// Shared knobs for every experiment. All fields are echoed verbatim into
/// report headers so a run can be reproduced from any output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    /// Size schedule for sequence experiments.
    pub sizes: Schedule,
    /// Number of trailing schedule entries used for tail estimates.
    pub tail_window: usize,
    /// Pass threshold for symbol-verification discrepancies.
    pub discrepancy_threshold: f64,
    /// Pass threshold for zero-distribution fractions.
    pub zero_fraction_threshold: f64,
    /// Pass threshold for piecewise-convergence distances.
    pub piecewise_threshold: f64,
    /// Grid resolution for closure sampling, quadrature and rearrangements.
    pub grid_resolution: usize,
    /// Grid resolution used while scanning approximant families; kept lower
    /// than `grid_resolution` because the scan visits many candidate levels.
    pub approx_resolution: usize,
    /// Thresholds `epsilon` probed by the zero-distribution test.
    pub zero_epsilons: Vec<f64>,
    /// Seed for every randomized generator in the run.
    pub seed: u64,
    /// Largest size admitted for dense (non-diagonal) matrices.
    pub dense_cap: usize,
    /// Largest size admitted for diagonal sequences.
    pub diagonal_cap: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            sizes: Schedule::default(),
            tail_window: 3,
            discrepancy_threshold: 0.02,
            zero_fraction_threshold: 0.01,
            piecewise_threshold: 0.02,
            grid_resolution: 1 << 16,
            approx_resolution: 1 << 14,
            zero_epsilons: vec![0.1, 0.25, 0.5],
            seed: 0,
            dense_cap: 512,
            diagonal_cap: 1 << 13,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.sizes().is_empty() {
            return Err(Error::InvalidConfig("schedule is empty".into()));
        }
        if self.tail_window == 0 {
            return Err(Error::InvalidConfig("tail window must be at least 1".into()));
        }
        if self.grid_resolution == 0 || self.approx_resolution == 0 {
            return Err(Error::InvalidConfig("grid resolution must be positive".into()));
        }
        if self.zero_epsilons.iter().any(|&e| e <= 0.0) {
            return Err(Error::InvalidConfig("zero-test epsilons must be positive".into()));
        }
        for &n in self.sizes.sizes() {
            self.check_diagonal_size(n)?;
        }
        Ok(())
    }

    pub fn check_diagonal_size(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::ZeroSize);
        }
        if n > self.diagonal_cap {
            return Err(Error::SizeExceedsCap { n, cap: self.diagonal_cap, kind: "diagonal" });
        }
        Ok(())
    }

    pub fn check_dense_size(&self, n: usize) -> Result<()> {
        if n == 0 {
            return Err(Error::ZeroSize);
        }
        if n > self.dense_cap {
            return Err(Error::SizeExceedsCap { n, cap: self.dense_cap, kind: "dense" });
        }
        Ok(())
    }
}

/// Outcome of a thresholded check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
}

impl Verdict {
    pub fn passed(self) -> bool {
        self == Verdict::Pass
    }

    pub fn from_bool(pass: bool) -> Self {
        if pass {
            Verdict::Pass
        } else {
            Verdict::Fail
        }
    }
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Verdict::Pass => write!(f, "PASS"),
            Verdict::Fail => write!(f, "FAIL"),
        }
    }
}

/// True when `values` never increases beyond floating-point jitter.
pub fn non_increasing(values: &[f64]) -> bool {
    non_increasing_within(values, 0.0)
}

/// True when every step up is at most `slack`. Verdicts use a slack of a
/// tenth of their threshold: convergent sequences may approach a small
/// approximation floor from below, which is not the threshold-scale growth
/// the monotonicity clause is there to catch.
pub fn non_increasing_within(values: &[f64], slack: f64) -> bool {
    values.windows(2).all(|w| w[1] <= w[0] + slack + 1e-12 * w[0].abs().max(1.0))
}
