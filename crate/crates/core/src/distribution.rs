//! Empirical eigenvalue/singular-value distributions tested against symbol
//! functions, and the zero-distribution test.

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{non_increasing, non_increasing_within, RunConfig, Schedule, Verdict};
use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, singular_values, sorted_magnitudes};
use crate::sequences::MatrixSequence;
use crate::symbols::{
    default_family, family_descriptor, symbol_mean, symbol_mean_magnitude, Symbol, TestFunction,
};

/// Which spectrum a verification runs against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SampleMode {
    Eigen,
    Singular,
}

/// The spectrum of one matrix, stored as a canonically sorted multiset so
/// that every derived report is bit-exact under permutations of the input.
#[derive(Debug, Clone)]
pub struct SpectralSample {
    pub n: usize,
    pub mode: SampleMode,
    values: Vec<Complex64>,
}

impl SpectralSample {
    pub fn eigen(mut values: Vec<Complex64>) -> Self {
        let n = values.len();
        values.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
        SpectralSample { n, mode: SampleMode::Eigen, values }
    }

    pub fn singular(diag_or_sv: Vec<f64>) -> Self {
        let n = diag_or_sv.len();
        let mut values: Vec<Complex64> =
            diag_or_sv.into_iter().map(|v| Complex64::new(v, 0.0)).collect();
        values.sort_by(|a, b| b.re.total_cmp(&a.re));
        SpectralSample { n, mode: SampleMode::Singular, values }
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    /// Numeric range of the real parts.
    pub fn real_range(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for v in &self.values {
            lo = lo.min(v.re);
            hi = hi.max(v.re);
        }
        if lo > hi {
            (0.0, 0.0)
        } else {
            (lo, hi)
        }
    }
}

/// Extract the requested spectrum of `seq` at size `n`. Diagonal sequences
/// are exact; dense eigen mode requires a hermitian matrix within the dense
/// cap, dense singular mode goes through the Gram eigensolve.
pub fn spectral_sample(
    seq: &MatrixSequence,
    n: usize,
    mode: SampleMode,
    cfg: &RunConfig,
) -> Result<SpectralSample> {
    match (seq, mode) {
        (MatrixSequence::Diagonal(d), SampleMode::Eigen) => {
            cfg.check_diagonal_size(n)?;
            Ok(SpectralSample::eigen(d.diagonal(n)?))
        }
        (MatrixSequence::Diagonal(d), SampleMode::Singular) => {
            cfg.check_diagonal_size(n)?;
            Ok(SpectralSample::singular(sorted_magnitudes(&d.diagonal(n)?)))
        }
        (MatrixSequence::Dense { .. }, SampleMode::Eigen) => {
            cfg.check_dense_size(n)?;
            let m = seq.matrix(n)?;
            let eigs = hermitian_eigenvalues(&m)?;
            Ok(SpectralSample::eigen(eigs.into_iter().map(|l| Complex64::new(l, 0.0)).collect()))
        }
        (MatrixSequence::Dense { .. }, SampleMode::Singular) => {
            cfg.check_dense_size(n)?;
            Ok(SpectralSample::singular(singular_values(&seq.matrix(n)?)?))
        }
    }
}

/// `(1/n) sum F(value_i)` over the canonical multiset, summed in the fixed
/// canonical order so equal multisets give bitwise-equal results.
pub fn empirical_mean(test: &TestFunction, sample: &SpectralSample) -> Complex64 {
    let mut sum = 0.0;
    for v in &sample.values {
        sum += test.eval(*v);
    }
    Complex64::new(sum / sample.n as f64, 0.0)
}

#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyRow {
    pub n: usize,
    /// Sup over the family of |empirical mean - symbol mean|.
    pub discrepancy: f64,
}

/// Per-size table of worst-case discrepancies against a symbol.
#[derive(Debug, Clone, Serialize)]
pub struct DiscrepancyReport {
    pub sequence: String,
    pub symbol: String,
    pub mode: SampleMode,
    pub family: String,
    pub schedule: Schedule,
    pub tail_window: usize,
    pub threshold: f64,
    pub rows: Vec<DiscrepancyRow>,
    /// Discrepancy at the largest scheduled size.
    pub tail_value: f64,
    /// Whether the trailing window is non-increasing (informational).
    pub tail_monotone: bool,
    pub verdict: Verdict,
}

impl DiscrepancyReport {
    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

/// Default family for a sequence/symbol pair: hats across the symbol's range
/// plus the wide probe covering the data range at the largest size.
pub fn family_for(
    seq: &MatrixSequence,
    symbol: &Symbol,
    mode: SampleMode,
    cfg: &RunConfig,
) -> Result<Vec<TestFunction>> {
    let side = match mode {
        SampleMode::Eigen => symbol.clone(),
        SampleMode::Singular => symbol.magnitude(),
    };
    let samples = side.samples(side.resolution().unwrap_or(4096).min(cfg.grid_resolution));
    let (mut sym_lo, mut sym_hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for v in &samples {
        sym_lo = sym_lo.min(v.re);
        sym_hi = sym_hi.max(v.re);
    }
    let largest = cfg.sizes.largest();
    let sample = spectral_sample(seq, largest, mode, cfg)?;
    let (data_lo, data_hi) = sample.real_range();
    Ok(default_family(sym_lo, sym_hi, data_lo, data_hi))
}

/// Compare the empirical spectrum of `seq` with `symbol` over the schedule.
/// In singular mode the symbol side integrates `F(|k(x)|)`.
pub fn verify_symbol(
    seq: &MatrixSequence,
    symbol: &Symbol,
    family: &[TestFunction],
    mode: SampleMode,
    cfg: &RunConfig,
) -> Result<DiscrepancyReport> {
    cfg.validate()?;
    if family.is_empty() {
        return Err(Error::InvalidConfig("test family is empty".into()));
    }
    let symbol_side: Vec<Complex64> = family
        .iter()
        .map(|f| match mode {
            SampleMode::Eigen => symbol_mean(f, symbol, cfg.grid_resolution),
            SampleMode::Singular => symbol_mean_magnitude(f, symbol, cfg.grid_resolution),
        })
        .collect();
    let mut rows = Vec::new();
    for &n in cfg.sizes.sizes() {
        let sample = spectral_sample(seq, n, mode, cfg)?;
        let mut worst = 0.0f64;
        for (f, s) in family.iter().zip(&symbol_side) {
            let gap = (empirical_mean(f, &sample) - s).norm();
            worst = worst.max(gap);
        }
        rows.push(DiscrepancyRow { n, discrepancy: worst });
    }
    let tail: Vec<f64> =
        rows[rows.len().saturating_sub(cfg.tail_window)..].iter().map(|r| r.discrepancy).collect();
    let tail_value = *tail.last().expect("non-empty schedule");
    let tail_monotone = non_increasing_within(&tail, 0.1 * cfg.discrepancy_threshold);
    let verdict = Verdict::from_bool(tail_value <= cfg.discrepancy_threshold);
    Ok(DiscrepancyReport {
        sequence: seq.descriptor(),
        symbol: symbol.descriptor().to_string(),
        mode,
        family: family_descriptor(family),
        schedule: cfg.sizes.clone(),
        tail_window: cfg.tail_window,
        threshold: cfg.discrepancy_threshold,
        rows,
        tail_value,
        tail_monotone,
        verdict,
    })
}

/// Convenience wrapper building the default family first.
pub fn verify_symbol_default(
    seq: &MatrixSequence,
    symbol: &Symbol,
    mode: SampleMode,
    cfg: &RunConfig,
) -> Result<DiscrepancyReport> {
    let family = family_for(seq, symbol, mode, cfg)?;
    verify_symbol(seq, symbol, &family, mode, cfg)
}

#[derive(Debug, Clone, Serialize)]
pub struct ZeroTestRow {
    pub n: usize,
    pub epsilon: f64,
    /// `#{i : sigma_i > epsilon} / n`.
    pub fraction: f64,
}

/// Outcome of the zero-distribution test: for each probed `epsilon` the
/// fraction of singular values above it, with a thresholded tail verdict.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroTestReport {
    pub sequence: String,
    pub epsilons: Vec<f64>,
    pub schedule: Schedule,
    pub tail_window: usize,
    pub threshold: f64,
    pub rows: Vec<ZeroTestRow>,
    pub verdict: Verdict,
}

impl ZeroTestReport {
    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }

    pub fn fraction(&self, n: usize, epsilon: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.n == n && r.epsilon == epsilon).map(|r| r.fraction)
    }
}

/// Fraction of singular values above each `epsilon`, per scheduled size.
/// PASS when, for every epsilon, the fraction at the largest size is at most
/// the threshold and the trailing window is non-increasing.
pub fn zero_distribution_test(
    seq: &MatrixSequence,
    epsilons: &[f64],
    cfg: &RunConfig,
) -> Result<ZeroTestReport> {
    cfg.validate()?;
    if epsilons.is_empty() || epsilons.iter().any(|&e| e <= 0.0) {
        return Err(Error::InvalidConfig("epsilon grid must be positive".into()));
    }
    let mut rows = Vec::new();
    let mut pass = true;
    let mut per_eps: Vec<Vec<f64>> = vec![Vec::new(); epsilons.len()];
    for &n in cfg.sizes.sizes() {
        let sample = spectral_sample(seq, n, SampleMode::Singular, cfg)?;
        for (j, &eps) in epsilons.iter().enumerate() {
            let above = sample.values().iter().filter(|v| v.re > eps).count();
            let fraction = above as f64 / n as f64;
            rows.push(ZeroTestRow { n, epsilon: eps, fraction });
            per_eps[j].push(fraction);
        }
    }
    for fractions in &per_eps {
        let tail = &fractions[fractions.len().saturating_sub(cfg.tail_window)..];
        let last = *tail.last().expect("non-empty schedule");
        if last > cfg.zero_fraction_threshold
            || !non_increasing_within(tail, 0.1 * cfg.zero_fraction_threshold)
        {
            pass = false;
        }
    }
    Ok(ZeroTestReport {
        sequence: seq.descriptor(),
        epsilons: epsilons.to_vec(),
        schedule: cfg.sizes.clone(),
        tail_window: cfg.tail_window,
        threshold: cfg.zero_fraction_threshold,
        rows,
        verdict: Verdict::from_bool(pass),
    })
}

/// Zero-distribution test with the configured default epsilon grid.
pub fn zero_distribution_test_default(
    seq: &MatrixSequence,
    cfg: &RunConfig,
) -> Result<ZeroTestReport> {
    zero_distribution_test(seq, &cfg.zero_epsilons, cfg)
}

/// Combined report for the sum of a verified sequence and a zero-distributed
/// perturbation: the sum must verify the same symbol, with the tolerance
/// widened by the explicit finite-size error term
/// `min_eps (2 * zero_fraction(eps) + omega_F(eps))`.
#[derive(Debug, Clone, Serialize)]
pub struct ZeroSumReport {
    pub base: DiscrepancyReport,
    pub zero_part: ZeroTestReport,
    pub sum: DiscrepancyReport,
    /// Additional tolerance granted by the perturbation bound.
    pub widening: f64,
    /// False when a precondition report failed; the verdict is then FAIL and
    /// the offending precondition is named.
    pub preconditions_met: bool,
    pub violated_precondition: Option<String>,
    pub verdict: Verdict,
}

pub fn zero_sum_property_check(
    seq: &MatrixSequence,
    symbol: &Symbol,
    zero_part: &MatrixSequence,
    family: &[TestFunction],
    cfg: &RunConfig,
) -> Result<ZeroSumReport> {
    let base = verify_symbol(seq, symbol, family, SampleMode::Eigen, cfg)?;
    let zero_report = zero_distribution_test_default(zero_part, cfg)?;

    let sum_seq = match (seq, zero_part) {
        (MatrixSequence::Diagonal(a), MatrixSequence::Diagonal(z)) => MatrixSequence::Diagonal(
            a.zip_with(z, format!("({})+({})", a.descriptor(), z.descriptor()), |x, y| x + y),
        ),
        _ => {
            return Err(Error::InvalidConfig(
                "zero-sum check is defined for diagonal sequences".into(),
            ))
        }
    };
    let sum = verify_symbol(&sum_seq, symbol, family, SampleMode::Eigen, cfg)?;

    // Explicit bound from the largest size: for each eps the perturbation
    // moves at most a `fraction(eps)` share of entries beyond eps, each worth
    // at most 2 in a height-one test function, and the rest by omega_F(eps).
    let n_last = cfg.sizes.largest();
    let min_ramp =
        family.iter().map(|f| f.ramp).fold(f64::INFINITY, f64::min).max(f64::MIN_POSITIVE);
    let zero_sample = spectral_sample(zero_part, n_last, SampleMode::Singular, cfg)?;
    let mut widening = f64::INFINITY;
    for &eps in &cfg.zero_epsilons {
        let fraction =
            zero_sample.values().iter().filter(|v| v.re > eps).count() as f64 / n_last as f64;
        widening = widening.min(2.0 * fraction + (eps / min_ramp).min(1.0));
    }

    let preconditions_met = base.passed() && zero_report.passed();
    let violated_precondition = if base.passed() && !zero_report.passed() {
        Some(format!("perturbation `{}` is not zero-distributed", zero_report.sequence))
    } else if !base.passed() {
        Some(format!("base sequence `{}` does not verify `{}`", base.sequence, base.symbol))
    } else {
        None
    };
    let pass = preconditions_met && sum.tail_value <= cfg.discrepancy_threshold + widening;
    Ok(ZeroSumReport {
        base,
        zero_part: zero_report,
        sum,
        widening,
        preconditions_met,
        violated_precondition,
        verdict: Verdict::from_bool(pass),
    })
}

/// Report for the closure property: when approximants verify their symbols,
/// approach the target in the pseudometric, and the symbols converge in
/// measure, the target sequence must verify the limit symbol.
#[derive(Debug, Clone, Serialize)]
pub struct CommutationReport {
    /// Per-approximant verification verdicts.
    pub approximant_verdicts: Vec<Verdict>,
    /// Tail pseudometric distances to the target, expected non-increasing.
    pub acs_distances: Vec<f64>,
    /// Symbol distances in measure, expected non-increasing.
    pub symbol_distances: Vec<f64>,
    pub hypotheses_met: bool,
    pub violated_hypothesis: Option<String>,
    pub conclusion: DiscrepancyReport,
    pub verdict: Verdict,
}

pub fn acs_limit_commutation_check(
    target: &MatrixSequence,
    approximants: &[(MatrixSequence, Symbol)],
    limit_symbol: &Symbol,
    family: &[TestFunction],
    cfg: &RunConfig,
) -> Result<CommutationReport> {
    if approximants.is_empty() {
        return Err(Error::InvalidConfig("need at least one approximant".into()));
    }
    let mut approximant_verdicts = Vec::new();
    let mut acs_distances = Vec::new();
    let mut symbol_distances = Vec::new();
    for (seq_m, sym_m) in approximants {
        let report = verify_symbol(seq_m, sym_m, family, SampleMode::Eigen, cfg)?;
        approximant_verdicts.push(report.verdict);
        acs_distances.push(crate::acs::acs_distance_estimate(target, seq_m, cfg)?.tail_estimate);
        symbol_distances
            .push(crate::symbols::ky_fan_distance(sym_m, limit_symbol, cfg.grid_resolution));
    }
    let mut violated_hypothesis = None;
    if let Some(i) = approximant_verdicts.iter().position(|v| !v.passed()) {
        violated_hypothesis = Some(format!("approximant {} does not verify its symbol", i + 1));
    } else if !non_increasing(&acs_distances) {
        violated_hypothesis = Some("pseudometric distances to the target do not decrease".into());
    } else if !non_increasing(&symbol_distances) {
        violated_hypothesis = Some("symbol distances in measure do not decrease".into());
    }
    let hypotheses_met = violated_hypothesis.is_none();
    let conclusion = verify_symbol(target, limit_symbol, family, SampleMode::Eigen, cfg)?;
    let verdict = Verdict::from_bool(hypotheses_met && conclusion.passed());
    Ok(CommutationReport {
        approximant_verdicts,
        acs_distances,
        symbol_distances,
        hypotheses_met,
        violated_hypothesis,
        conclusion,
        verdict,
    })
}
