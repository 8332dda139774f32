//! Piecewise convergence: distances in measure between the piecewise-linear
//! interpolants of a diagonal sequence and a target symbol, plus the suites
//! tying that notion to zero-distribution and eigenvalue verification.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{non_increasing_within, RunConfig, Schedule, Verdict};
use crate::distribution::{
    verify_symbol, zero_distribution_test_default, DiscrepancyReport, SampleMode, ZeroTestReport,
};
use crate::error::Result;
use crate::sequences::{DiagonalSequence, Interpolant, MatrixSequence};
use crate::symbols::{Symbol, TestFunction};

/// One affine deviation cell: on `(x0, x1]` the difference between the
/// interpolant and the symbol is `slope * x + offset`.
struct DeviationCell {
    x0: f64,
    x1: f64,
    slope: Complex64,
    offset: Complex64,
}

impl DeviationCell {
    /// Length of `{x in (x0, x1) : |slope*x + offset| > eps}`, in closed form.
    fn measure_above(&self, eps: f64) -> f64 {
        let width = self.x1 - self.x0;
        if width <= 0.0 {
            return 0.0;
        }
        let a = self.slope.norm_sqr();
        let b = 2.0 * (self.slope.conj() * self.offset).re;
        let c = self.offset.norm_sqr() - eps * eps;
        if a == 0.0 {
            return if c > 0.0 { width } else { 0.0 };
        }
        // |deviation|^2 - eps^2 is an upward parabola; the set above eps is
        // the cell minus the root interval.
        let disc = b * b - 4.0 * a * c;
        if disc <= 0.0 {
            return width;
        }
        let sq = disc.sqrt();
        let r1 = (-b - sq) / (2.0 * a);
        let r2 = (-b + sq) / (2.0 * a);
        let left = (r1.min(self.x1) - self.x0).max(0.0);
        let right = (self.x1 - r2.max(self.x0)).max(0.0);
        left + right
    }

    fn max_deviation(&self) -> f64 {
        let at0 = (self.slope * self.x0 + self.offset).norm();
        let at1 = (self.slope * self.x1 + self.offset).norm();
        at0.max(at1)
    }
}

/// Exact distance in measure between a piecewise-linear interpolant and a
/// symbol, evaluated on the union grid of interpolant breakpoints and symbol
/// cells. The deviation is affine on each union cell, so the level-set
/// measure is a closed form and the Ky Fan fixed point can be bisected to
/// machine precision.
pub fn interpolant_symbol_distance(interp: &Interpolant, symbol: &Symbol, resolution: usize) -> f64 {
    let n = interp.size();
    let r = symbol.resolution().unwrap_or(resolution).max(1);
    let symbol_values = symbol.samples(r);

    let mut cells = Vec::with_capacity(n + r + 1);
    let mut x_prev = 0.0f64;
    let mut ci = 1usize;
    let mut cj = 1usize;
    while ci <= n || cj <= r {
        let xi = if ci <= n { ci as f64 / n as f64 } else { f64::INFINITY };
        let xj = if cj <= r { cj as f64 / r as f64 } else { f64::INFINITY };
        let x_next = xi.min(xj);
        let (slope, intercept) = interp.segment(ci.min(n));
        cells.push(DeviationCell {
            x0: x_prev,
            x1: x_next,
            slope,
            offset: intercept - symbol_values[cj.min(r) - 1],
        });
        if xi <= x_next {
            ci += 1;
        }
        if xj <= x_next {
            cj += 1;
        }
        x_prev = x_next;
    }

    let max_dev = cells.iter().map(|c| c.max_deviation()).fold(0.0, f64::max);
    if max_dev == 0.0 {
        return 0.0;
    }
    let measure_above = |eps: f64| -> f64 { cells.iter().map(|c| c.measure_above(eps)).sum() };
    if measure_above(0.0) <= 0.0 {
        return 0.0;
    }
    let mut lo = 0.0f64;
    let mut hi = max_dev;
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if measure_above(mid) <= mid {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo <= 1e-13 {
            break;
        }
    }
    hi
}

#[derive(Debug, Clone, Serialize)]
pub struct PiecewiseRow {
    pub n: usize,
    pub d_m: f64,
}

/// Per-size distances in measure between the interpolants of a diagonal
/// sequence and a target symbol. PASS requires the distance at the largest
/// size to clear the threshold and the trailing window to be non-increasing.
#[derive(Debug, Clone, Serialize)]
pub struct PiecewiseReport {
    pub sequence: String,
    pub symbol: String,
    pub schedule: Schedule,
    pub tail_window: usize,
    pub threshold: f64,
    pub resolution: usize,
    pub rows: Vec<PiecewiseRow>,
    pub tail_value: f64,
    pub tail_monotone: bool,
    pub verdict: Verdict,
}

impl PiecewiseReport {
    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

pub fn piecewise_convergence_check(
    seq: &DiagonalSequence,
    symbol: &Symbol,
    cfg: &RunConfig,
) -> Result<PiecewiseReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &n in cfg.sizes.sizes() {
        cfg.check_diagonal_size(n)?;
        let interp = Interpolant::new(&seq.diagonal(n)?);
        let d_m = interpolant_symbol_distance(&interp, symbol, cfg.grid_resolution);
        rows.push(PiecewiseRow { n, d_m });
    }
    let tail: Vec<f64> =
        rows[rows.len().saturating_sub(cfg.tail_window)..].iter().map(|r| r.d_m).collect();
    let tail_value = *tail.last().expect("non-empty schedule");
    let tail_monotone = non_increasing_within(&tail, 0.1 * cfg.piecewise_threshold);
    let verdict = Verdict::from_bool(tail_value <= cfg.piecewise_threshold && tail_monotone);
    Ok(PiecewiseReport {
        sequence: seq.descriptor().to_string(),
        symbol: symbol.descriptor().to_string(),
        schedule: cfg.sizes.clone(),
        tail_window: cfg.tail_window,
        threshold: cfg.piecewise_threshold,
        resolution: cfg.grid_resolution,
        rows,
        tail_value,
        tail_monotone,
        verdict,
    })
}

/// The three equivalent zero conditions on one diagonal sequence: piecewise
/// convergence to 0, the singular-value zero test, and eigenvalue
/// verification against the zero symbol. The flag records verdict agreement.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroEquivalenceReport {
    pub piecewise: PiecewiseReport,
    pub zero_test: ZeroTestReport,
    pub eigen: DiscrepancyReport,
    pub agree: bool,
}

pub fn zero_equivalence_suite(seq: &DiagonalSequence, cfg: &RunConfig) -> Result<ZeroEquivalenceReport> {
    let zero = Symbol::zero();
    let piecewise = piecewise_convergence_check(seq, &zero, cfg)?;
    let mseq: MatrixSequence = seq.clone().into();
    let zero_test = zero_distribution_test_default(&mseq, cfg)?;
    let eigen =
        crate::distribution::verify_symbol_default(&mseq, &zero, SampleMode::Eigen, cfg)?;
    let verdicts = [piecewise.verdict, zero_test.verdict, eigen.verdict];
    let agree = verdicts.iter().all(|v| v.passed()) || verdicts.iter().all(|v| !v.passed());
    Ok(ZeroEquivalenceReport { piecewise, zero_test, eigen, agree })
}

/// One-sided implication on a single instance: a piecewise PASS must come
/// with an eigenvalue-verification PASS; the converse may fail.
#[derive(Debug, Clone, Serialize)]
pub struct ImplicationReport {
    pub piecewise: PiecewiseReport,
    pub eigen: DiscrepancyReport,
    /// False only in the forbidden quadrant (piecewise PASS, eigen FAIL).
    pub implication_holds: bool,
}

pub fn piecewise_implies_lambda_check(
    seq: &DiagonalSequence,
    symbol: &Symbol,
    family: &[TestFunction],
    cfg: &RunConfig,
) -> Result<ImplicationReport> {
    let piecewise = piecewise_convergence_check(seq, symbol, cfg)?;
    let mseq: MatrixSequence = seq.clone().into();
    let eigen = verify_symbol(&mseq, symbol, family, SampleMode::Eigen, cfg)?;
    let implication_holds = !(piecewise.passed() && !eigen.passed());
    Ok(ImplicationReport { piecewise, eigen, implication_holds })
}
