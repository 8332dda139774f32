//! Rearrangement transfer, the sorted-sequence converse, continuous
//! approximant schedules, and the constructive permutation pipeline that
//! turns a real diagonal sequence with symbol `f` into one whose interpolants
//! converge in measure to `f`.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::acs::CrescentMap;
use crate::config::{non_increasing, RunConfig, Schedule, Verdict};
use crate::distribution::{
    verify_symbol, zero_distribution_test_default, DiscrepancyReport, SampleMode, ZeroTestReport,
};
use crate::error::{Error, Result};
use crate::piecewise::{
    interpolant_symbol_distance, piecewise_convergence_check, PiecewiseReport,
};
use crate::sequences::{diag_sampling, DiagonalSequence, Interpolant, MatrixSequence};
use crate::symbols::{decreasing_rearrangement, ky_fan_from_deviations, Symbol, TestFunction};

/// Stable permutation sorting a real vector descending: ties keep their
/// original order. Entry `i` of the result is the source index of the `i`-th
/// largest value.
pub fn sort_descending_permutation(values: &[Complex64]) -> Result<Vec<usize>> {
    if let Some(v) = values.iter().find(|v| v.im != 0.0) {
        return Err(Error::RealnessViolation { what: format!("sort input has entry {v}") });
    }
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&i, &j| values[j].re.total_cmp(&values[i].re));
    Ok(order)
}

/// `out[i] = values[perm[i]]`.
pub fn apply_permutation(perm: &[usize], values: &[Complex64]) -> Vec<Complex64> {
    perm.iter().map(|&i| values[i]).collect()
}

/// `inv[perm[i]] = i`.
pub fn invert_permutation(perm: &[usize]) -> Vec<usize> {
    let mut inv = vec![0usize; perm.len()];
    for (i, &p) in perm.iter().enumerate() {
        inv[p] = i;
    }
    inv
}

pub fn is_bijection(perm: &[usize]) -> bool {
    let mut seen = vec![false; perm.len()];
    for &p in perm {
        if p >= perm.len() || seen[p] {
            return false;
        }
        seen[p] = true;
    }
    true
}

/// Verification that the eigenvalue symbol survives replacement by its
/// decreasing rearrangement.
#[derive(Debug, Clone, Serialize)]
pub struct TransferReport {
    pub base: DiscrepancyReport,
    pub rearranged: DiscrepancyReport,
    pub verdict: Verdict,
}

/// Check that a sequence verifying `f` also verifies the decreasing
/// rearrangement of `f`. The precondition (verification of `f` itself) must
/// pass; its report travels with the error message otherwise.
pub fn rearrangement_transfer_check(
    seq: &MatrixSequence,
    f: &Symbol,
    family: &[TestFunction],
    cfg: &RunConfig,
) -> Result<TransferReport> {
    let base = verify_symbol(seq, f, family, SampleMode::Eigen, cfg)?;
    if !base.passed() {
        return Err(Error::PreconditionFailed {
            what: format!(
                "`{}` does not verify `{}` (tail discrepancy {:.4} > {:.4})",
                base.sequence, base.symbol, base.tail_value, base.threshold
            ),
        });
    }
    let resolution = f.resolution().unwrap_or(cfg.grid_resolution);
    let g = decreasing_rearrangement(f, resolution)?;
    let rearranged = verify_symbol(seq, &g, family, SampleMode::Eigen, cfg)?;
    let verdict = rearranged.verdict;
    Ok(TransferReport { base, rearranged, verdict })
}

/// Verification that an already-sorted sequence with a decreasing symbol
/// converges piecewise to it.
#[derive(Debug, Clone, Serialize)]
pub struct SortedConverseReport {
    pub base: DiscrepancyReport,
    pub piecewise: PiecewiseReport,
    pub verdict: Verdict,
}

/// Check the converse direction on sorted data: `f` and every scheduled
/// diagonal must be non-increasing (the pinned zero start of the interpolant
/// is exempt), the sequence must verify `f`, and then its interpolants must
/// converge to `f` in measure.
pub fn sorted_converse_check(
    seq: &DiagonalSequence,
    f: &Symbol,
    family: &[TestFunction],
    cfg: &RunConfig,
) -> Result<SortedConverseReport> {
    if !f.is_real() {
        return Err(Error::RealnessViolation { what: format!("symbol `{}`", f.descriptor()) });
    }
    let samples = f.samples(f.resolution().unwrap_or(cfg.grid_resolution));
    let reals: Vec<f64> = samples.iter().map(|v| v.re).collect();
    if !non_increasing(&reals) {
        return Err(Error::NotMonotone { what: format!("symbol `{}`", f.descriptor()) });
    }
    for &n in cfg.sizes.sizes() {
        let d = seq.diagonal(n)?;
        let interp = Interpolant::new(&d);
        if !interp.non_increasing_from_first_node() {
            return Err(Error::NotMonotone {
                what: format!("diagonal of `{}` at n = {}", seq.descriptor(), n),
            });
        }
    }
    let mseq: MatrixSequence = seq.clone().into();
    let base = verify_symbol(&mseq, f, family, SampleMode::Eigen, cfg)?;
    if !base.passed() {
        return Err(Error::PreconditionFailed {
            what: format!(
                "`{}` does not verify `{}` (tail discrepancy {:.4} > {:.4})",
                base.sequence, base.symbol, base.tail_value, base.threshold
            ),
        });
    }
    let piecewise = piecewise_convergence_check(seq, f, cfg)?;
    let verdict = piecewise.verdict;
    Ok(SortedConverseReport { base, piecewise, verdict })
}

/// Smooth a symbol at scale `1/m`: sample on the working grid and apply a
/// triangular kernel of half-width `1/(2m)` (two box passes over the grid,
/// edges clamped). The result is a grid symbol representing a continuous
/// function whose distance in measure to the input shrinks as `m` grows.
pub fn mollify_symbol(f: &Symbol, m: usize, resolution: usize) -> Result<Symbol> {
    if m == 0 {
        return Err(Error::ZeroSize);
    }
    let samples = f.samples(resolution);
    let half_width_cells = ((resolution as f64 / (2.0 * m as f64)).round() as usize).max(1);
    let radius = (half_width_cells / 2).max(1);
    let pass = |input: &[Complex64]| -> Vec<Complex64> {
        let len = input.len() as isize;
        let mut prefix = Vec::with_capacity(input.len() + 1);
        prefix.push(Complex64::new(0.0, 0.0));
        let mut acc = Complex64::new(0.0, 0.0);
        for v in input {
            acc += v;
            prefix.push(acc);
        }
        let window = (2 * radius + 1) as f64;
        (0..len)
            .map(|i| {
                let lo = i - radius as isize;
                let hi = i + radius as isize;
                // Clamped sum: out-of-range indices repeat the edge values.
                let mut sum = prefix[(hi.min(len - 1) + 1) as usize] - prefix[lo.max(0) as usize];
                if lo < 0 {
                    sum += input[0] * (-lo) as f64;
                }
                if hi > len - 1 {
                    sum += input[(len - 1) as usize] * (hi - (len - 1)) as f64;
                }
                sum / window
            })
            .collect()
    };
    let smoothed = pass(&pass(&samples));
    let mut symbol = Symbol::from_grid(format!("mollify({},1/{m})", f.descriptor()), smoothed)?;
    if f.is_real() {
        // Box passes preserve realness; keep the flag exact.
        symbol = Symbol::from_grid_real(
            format!("mollify({},1/{m})", f.descriptor()),
            symbol.samples(resolution).iter().map(|v| v.re).collect(),
        )?;
    }
    Ok(symbol)
}

#[derive(Debug, Clone, Serialize)]
pub struct ApproximantLevel {
    pub k: u32,
    /// Approximant index `M_k`: distance in measure to the target is at most
    /// `2^-k` from this index on.
    pub m: usize,
    /// Measured distance of approximant `M_k` to the target.
    pub distance: f64,
    /// Size `N_k` from which the level is active.
    pub breakpoint: usize,
}

/// Continuous approximant family plus the crescent map interleaving the two
/// convergences: approximant-to-target in measure, and interpolant-to-
/// approximant per size.
#[derive(Debug, Clone)]
pub struct ApproximantSchedule {
    pub target: String,
    pub levels: Vec<ApproximantLevel>,
    pub map: CrescentMap,
    pub k_attained: u32,
    pub resolution: usize,
    /// Measured `d_M(f_m, target)` for `m = 1..=max_m`.
    pub distances: Vec<f64>,
    /// Whether the measured distances are non-increasing in `m`.
    pub distances_monotone: bool,
    approximants: Arc<BTreeMap<usize, Symbol>>,
}

impl ApproximantSchedule {
    /// The approximant index `m(n)`.
    pub fn level_at(&self, n: usize) -> usize {
        self.map.level_at(n)
    }

    /// The continuous approximant at a stored level.
    pub fn approximant(&self, m: usize) -> Option<&Symbol> {
        self.approximants.get(&m)
    }

    /// The sampled sequence `D_n(f_{m(n)})`.
    pub fn sampled_sequence(&self) -> DiagonalSequence {
        let map = self.map.clone();
        let approximants = Arc::clone(&self.approximants);
        DiagonalSequence::new(format!("diag:approx({})", self.target), move |n| {
            let m = map.level_at(n);
            let f_m = approximants
                .get(&m)
                .ok_or_else(|| Error::MissingSize { n: m })?;
            diag_sampling(f_m, n)
        })
    }
}

/// Build the approximant schedule for a symbol: mollified approximants
/// `f_m`, level indices `M_k` where `d_M(f_m, f)` stays below `2^-k`, and
/// breakpoints `N_k` where the interpolants of `D_n(f_m)` settle within
/// `2^-k` of `f_m` for every in-band `m`.
pub fn build_approximant_schedule(
    f: &Symbol,
    k_max: u32,
    max_m: usize,
    cfg: &RunConfig,
) -> Result<ApproximantSchedule> {
    cfg.validate()?;
    if k_max == 0 || max_m == 0 {
        return Err(Error::InvalidConfig("k_max and max_m must be positive".into()));
    }
    let resolution = cfg.approx_resolution;
    let base = f.samples(resolution);

    // Distance of each approximant to the target, then suffix maxima so a
    // level certifies every index beyond it.
    let mut approximant_cache: BTreeMap<usize, Symbol> = BTreeMap::new();
    let mut distances = Vec::with_capacity(max_m);
    for m in 1..=max_m {
        let f_m = mollify_symbol(f, m, resolution)?;
        let samples = f_m.samples(resolution);
        let mut deviations: Vec<f64> =
            samples.iter().zip(&base).map(|(a, b)| (a - b).norm()).collect();
        distances.push(ky_fan_from_deviations(&mut deviations));
        approximant_cache.insert(m, f_m);
    }
    let mut suffix = distances.clone();
    for i in (0..suffix.len() - 1).rev() {
        suffix[i] = suffix[i].max(suffix[i + 1]);
    }
    let distances_monotone = non_increasing(&distances);

    let mut level_indices = Vec::with_capacity(k_max as usize + 1);
    let mut previous = 0usize;
    for k in 1..=k_max {
        let threshold = 0.5f64.powi(k as i32);
        let found = (1..=max_m).find(|&m| suffix[m - 1] <= threshold).ok_or_else(|| {
            Error::ApproximantStall {
                reached: k - 1,
                target: k_max,
                detail: format!(
                    "distance in measure never reaches {threshold:.3e} within {max_m} approximants"
                ),
            }
        })?;
        let m_k = found.max(previous + 1);
        if m_k > max_m {
            return Err(Error::ApproximantStall {
                reached: k - 1,
                target: k_max,
                detail: format!("strictly increasing levels exhausted the {max_m} approximants"),
            });
        }
        level_indices.push(m_k);
        previous = m_k;
    }
    // Degenerate top band: the last level certifies everything above it.
    level_indices.push(*level_indices.last().expect("at least one level"));

    // Interpolant-to-approximant breakpoints per band.
    let sizes = cfg.sizes.sizes();
    let mut k_attained = 0u32;
    let mut raw_breaks = Vec::new();
    'levels: for k in 1..=k_max as usize {
        let band_lo = level_indices[k - 1];
        let band_hi = level_indices[k];
        let threshold = 0.5f64.powi(k as i32);
        let mut band_break = sizes[0];
        for m in band_lo..=band_hi {
            let f_m = &approximant_cache[&m];
            let mut table = Vec::with_capacity(sizes.len());
            for &n in sizes {
                cfg.check_diagonal_size(n)?;
                let interp = Interpolant::new(&diag_sampling(f_m, n)?);
                table.push(interpolant_symbol_distance(&interp, f_m, resolution));
            }
            let mut from = None;
            for start in 0..table.len() {
                if table[start..].iter().all(|&d| d <= threshold) {
                    from = Some(start);
                    break;
                }
            }
            match from {
                Some(idx) => band_break = band_break.max(sizes[idx]),
                // The schedule is too short to certify this level; stop at
                // the previous one.
                None => break 'levels,
            }
        }
        raw_breaks.push(band_break);
        k_attained = k as u32;
    }
    if k_attained == 0 {
        return Err(Error::ApproximantStall {
            reached: 0,
            target: k_max,
            detail: "no scheduled size certifies the first level".into(),
        });
    }

    let mut breakpoints = Vec::with_capacity(raw_breaks.len());
    let mut previous_n = 0usize;
    for (i, &raw) in raw_breaks.iter().enumerate() {
        let n_k = if i == 0 { raw } else { raw.max(previous_n + 1) };
        breakpoints.push((n_k, level_indices[i]));
        previous_n = n_k;
    }
    let map = CrescentMap { breakpoints };

    // Keep only the approximants the map can ever request.
    let mut used: BTreeMap<usize, Symbol> = BTreeMap::new();
    used.insert(1, approximant_cache[&1].clone());
    for &(_, m) in &map.breakpoints {
        used.insert(m, approximant_cache[&m].clone());
    }

    let levels = map
        .breakpoints
        .iter()
        .enumerate()
        .map(|(i, &(n_k, m_k))| ApproximantLevel {
            k: i as u32 + 1,
            m: m_k,
            distance: distances[m_k - 1],
            breakpoint: n_k,
        })
        .collect();

    Ok(ApproximantSchedule {
        target: f.descriptor().to_string(),
        levels,
        map,
        k_attained,
        resolution,
        distances,
        distances_monotone,
        approximants: Arc::new(used),
    })
}

/// The permutations built at one size.
#[derive(Debug, Clone, Serialize)]
pub struct PermutationEntry {
    pub n: usize,
    /// Sorts the input diagonal descending.
    pub q: Vec<usize>,
    /// Sorts the reference diagonal descending.
    pub s: Vec<usize>,
    /// The combined permutation `p = q compose s^{-1}`.
    pub p: Vec<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct PermutationPlan {
    pub reference: String,
    pub entries: Vec<PermutationEntry>,
}

/// Full report of the constructive permutation pipeline.
#[derive(Debug, Clone, Serialize)]
pub struct GltPermutationReport {
    pub sequence: String,
    pub symbol: String,
    pub schedule: Schedule,
    pub approximant_levels: Vec<ApproximantLevel>,
    pub plan: PermutationPlan,
    /// Sorted sequence against the decreasing rearrangement of the symbol.
    pub sorted_vs_rearrangement: PiecewiseReport,
    /// Zero test of the difference between the sorted reference and the
    /// sorted input.
    pub difference_zero: ZeroTestReport,
    /// Permuted sequence against the symbol itself.
    pub permuted_vs_symbol: PiecewiseReport,
    pub verdict: Verdict,
}

impl GltPermutationReport {
    pub fn passed(&self) -> bool {
        self.verdict.passed()
    }
}

fn require_real(seq: &DiagonalSequence, n: usize) -> Result<Vec<Complex64>> {
    let d = seq.diagonal(n)?;
    if let Some(v) = d.iter().find(|v| v.im != 0.0) {
        return Err(Error::RealnessViolation {
            what: format!(
                "the permutation construction is defined for real diagonals; `{}` has entry {v}",
                seq.descriptor()
            ),
        });
    }
    Ok(d)
}

/// Construct the per-size permutations sorting `seq` into a sequence whose
/// interpolants converge in measure to `f`, and verify the three defining
/// checks: the sorted sequence matches the decreasing rearrangement, the
/// sorted reference differs from the sorted input by a zero-distributed
/// sequence, and the permuted sequence matches `f` itself.
pub fn construct_glt_permutation(
    seq: &DiagonalSequence,
    f: &Symbol,
    family: &[TestFunction],
    k_max: u32,
    max_m: usize,
    cfg: &RunConfig,
) -> Result<GltPermutationReport> {
    if !f.is_real() {
        return Err(Error::RealnessViolation {
            what: format!(
                "the permutation construction is defined for real symbols; got `{}`",
                f.descriptor()
            ),
        });
    }
    let mseq: MatrixSequence = seq.clone().into();
    let base = verify_symbol(&mseq, f, family, SampleMode::Eigen, cfg)?;
    if !base.passed() {
        return Err(Error::PreconditionFailed {
            what: format!(
                "`{}` does not verify `{}` (tail discrepancy {:.4} > {:.4})",
                base.sequence, base.symbol, base.tail_value, base.threshold
            ),
        });
    }

    let approx = build_approximant_schedule(f, k_max, max_m, cfg)?;

    let mut entries = Vec::new();
    for &n in cfg.sizes.sizes() {
        let d = require_real(seq, n)?;
        let reference = diag_sampling(
            approx.approximant(approx.level_at(n)).expect("level cached"),
            n,
        )?;
        let q = sort_descending_permutation(&d)?;
        let s = sort_descending_permutation(&reference)?;
        let s_inv = invert_permutation(&s);
        let p: Vec<usize> = s_inv.iter().map(|&j| q[j]).collect();
        entries.push(PermutationEntry { n, q, s, p });
    }
    let plan =
        PermutationPlan { reference: approx.target.clone(), entries };

    // The three derived sequences recompute the permutations per size so the
    // checks stay pure functions of (sequence, symbol, config).
    let sorted_input = {
        let seq = seq.clone();
        DiagonalSequence::new(format!("sorted({})", seq.descriptor()), move |n| {
            let d = require_real(&seq, n)?;
            let q = sort_descending_permutation(&d)?;
            Ok(apply_permutation(&q, &d))
        })
    };
    let sorted_reference = {
        let approx = approx.clone();
        DiagonalSequence::new(format!("sorted(ref:{})", approx.target), move |n| {
            let reference =
                diag_sampling(approx.approximant(approx.level_at(n)).expect("level cached"), n)?;
            let s = sort_descending_permutation(&reference)?;
            Ok(apply_permutation(&s, &reference))
        })
    };
    let difference = sorted_reference.zip_with(
        &sorted_input,
        format!("sorted(ref:{}) - sorted({})", approx.target, seq.descriptor()),
        |a, b| a - b,
    );
    let permuted = {
        let seq = seq.clone();
        let approx = approx.clone();
        DiagonalSequence::new(format!("permuted({})", seq.descriptor()), move |n| {
            let d = require_real(&seq, n)?;
            let reference =
                diag_sampling(approx.approximant(approx.level_at(n)).expect("level cached"), n)?;
            let q = sort_descending_permutation(&d)?;
            let s_inv = invert_permutation(&sort_descending_permutation(&reference)?);
            let p: Vec<usize> = s_inv.iter().map(|&j| q[j]).collect();
            Ok(apply_permutation(&p, &d))
        })
    };

    let g = decreasing_rearrangement(f, cfg.grid_resolution)?;
    let sorted_vs_rearrangement = piecewise_convergence_check(&sorted_input, &g, cfg)?;
    let difference_zero = zero_distribution_test_default(&difference.into(), cfg)?;
    let permuted_vs_symbol = piecewise_convergence_check(&permuted, f, cfg)?;

    let verdict = Verdict::from_bool(
        sorted_vs_rearrangement.passed() && difference_zero.passed() && permuted_vs_symbol.passed(),
    );
    Ok(GltPermutationReport {
        sequence: seq.descriptor().to_string(),
        symbol: f.descriptor().to_string(),
        schedule: cfg.sizes.clone(),
        approximant_levels: approx.levels.clone(),
        plan,
        sorted_vs_rearrangement,
        difference_zero,
        permuted_vs_symbol,
        verdict,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::Schedule;
    use crate::distribution::family_for;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn cfg_small() -> RunConfig {
        RunConfig {
            sizes: Schedule::doubling(64, 4096).unwrap(),
            grid_resolution: 1 << 14,
            approx_resolution: 1 << 12,
            ..RunConfig::default()
        }
    }

    fn sine() -> Symbol {
        Symbol::from_fn_real("sin(pi*x)", |x| (std::f64::consts::PI * x).sin())
    }

    #[test]
    fn sort_permutation_examples() {
        let q = sort_descending_permutation(&[c(3.0), c(1.0), c(2.0)]).unwrap();
        assert_eq!(apply_permutation(&q, &[c(3.0), c(1.0), c(2.0)]), vec![c(3.0), c(2.0), c(1.0)]);

        let already = sort_descending_permutation(&[c(5.0), c(4.0), c(0.0)]).unwrap();
        assert_eq!(already, vec![0, 1, 2]);

        let ties = sort_descending_permutation(&[c(1.0), c(1.0), c(1.0)]).unwrap();
        assert_eq!(ties, vec![0, 1, 2]);

        assert!(sort_descending_permutation(&[Complex64::new(0.0, 1.0)]).is_err());
    }

    #[test]
    fn permutation_helpers_roundtrip() {
        let perm = vec![2usize, 0, 3, 1];
        assert!(is_bijection(&perm));
        let inv = invert_permutation(&perm);
        let values: Vec<Complex64> = (0..4).map(|i| c(i as f64)).collect();
        let there = apply_permutation(&perm, &values);
        let back = apply_permutation(&inv, &there);
        assert_eq!(back, values);
    }

    #[test]
    fn mollified_symbol_approaches_target() {
        let step = Symbol::from_fn_real("step", |x| if x < 0.3 { 2.0 } else { 1.0 });
        let res = 1 << 12;
        let mut last = f64::INFINITY;
        for m in [1usize, 2, 4, 8, 16, 32] {
            let f_m = mollify_symbol(&step, m, res).unwrap();
            let samples = f_m.samples(res);
            let base = step.samples(res);
            let mut dev: Vec<f64> =
                samples.iter().zip(&base).map(|(a, b)| (a - b).norm()).collect();
            let d = ky_fan_from_deviations(&mut dev);
            assert!(d <= last + 1e-12, "m={m}: {d} > {last}");
            // Deviation measure is bounded by the kernel footprint.
            assert!(d <= 1.5 / m as f64 + 2.0 / res as f64, "m={m} d={d}");
            last = d;
        }
    }

    #[test]
    fn approximant_schedule_for_continuous_symbol() {
        let cfg = cfg_small();
        let approx = build_approximant_schedule(&sine(), 7, 256, &cfg).unwrap();
        assert_eq!(approx.k_attained, 7);
        assert!(approx.distances_monotone);
        // Levels are strictly increasing and the map is non-decreasing.
        let ms: Vec<usize> = approx.levels.iter().map(|l| l.m).collect();
        assert!(ms.windows(2).all(|w| w[0] < w[1]));
        let schedule_levels: Vec<usize> =
            cfg.sizes.sizes().iter().map(|&n| approx.level_at(n)).collect();
        assert!(schedule_levels.windows(2).all(|w| w[0] <= w[1]));
        // The sampled sequence converges piecewise to the target.
        let seq = approx.sampled_sequence();
        let report = piecewise_convergence_check(&seq, &sine(), &cfg).unwrap();
        assert!(report.passed(), "tail {}", report.tail_value);
    }

    #[test]
    fn approximant_schedule_for_step_symbol() {
        let cfg = cfg_small();
        let step = Symbol::from_fn_real("2-step", |x| if x < 0.3 { 2.0 } else { 1.0 });
        let approx = build_approximant_schedule(&step, 7, 256, &cfg).unwrap();
        assert_eq!(approx.k_attained, 7);
        let seq = approx.sampled_sequence();
        let report = piecewise_convergence_check(&seq, &step, &cfg).unwrap();
        assert!(report.passed(), "tail {}", report.tail_value);
    }

    #[test]
    fn approximant_stall_reports_level() {
        let cfg = cfg_small();
        let step = Symbol::from_fn_real("step", |x| if x < 0.5 { 1.0 } else { 0.0 });
        // Two approximants cannot reach 2^-5.
        let err = build_approximant_schedule(&step, 5, 2, &cfg).unwrap_err();
        match err {
            Error::ApproximantStall { reached, target, .. } => {
                assert!(reached < 5);
                assert_eq!(target, 5);
            }
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn transfer_check_on_grid_symbol_is_identity_when_sorted() {
        let cfg = cfg_small();
        // Non-increasing grid symbol: rearrangement is bit-identical.
        let values: Vec<f64> = (0..64).map(|i| 1.0 - i as f64 / 64.0).collect();
        let f = Symbol::from_grid_real("dec-grid", values).unwrap();
        let seq: MatrixSequence = DiagonalSequence::sampling(&f).into();
        let family = family_for(&seq, &f, SampleMode::Eigen, &cfg).unwrap();
        let report = rearrangement_transfer_check(&seq, &f, &family, &cfg).unwrap();
        assert!(report.verdict.passed());
        for (a, b) in report.base.rows.iter().zip(&report.rearranged.rows) {
            assert_eq!(a.discrepancy.to_bits(), b.discrepancy.to_bits());
        }
    }

    #[test]
    fn transfer_check_ramp() {
        let cfg = cfg_small();
        let ramp = Symbol::from_fn_real("x", |x| x);
        let seq: MatrixSequence = DiagonalSequence::sampling(&ramp).into();
        let family = family_for(&seq, &ramp, SampleMode::Eigen, &cfg).unwrap();
        let report = rearrangement_transfer_check(&seq, &ramp, &family, &cfg).unwrap();
        assert!(report.verdict.passed());
        assert!(report.rearranged.tail_value <= 0.02);
    }

    #[test]
    fn transfer_check_precondition_failure() {
        let cfg = cfg_small();
        let ramp = Symbol::from_fn_real("x", |x| x);
        let wrong: MatrixSequence =
            DiagonalSequence::sampling(&Symbol::from_fn_real("x^2", |x| x * x)).into();
        let family = family_for(&wrong, &ramp, SampleMode::Eigen, &cfg).unwrap();
        let err = rearrangement_transfer_check(&wrong, &ramp, &family, &cfg).unwrap_err();
        assert!(matches!(err, Error::PreconditionFailed { .. }));
    }

    #[test]
    fn sorted_converse_on_decreasing_ramp() {
        let cfg = cfg_small();
        let dec = Symbol::from_fn_real("1-x", |x| 1.0 - x);
        // Sorted shuffled samples of 1-x are exactly the ordered samples.
        let seq = DiagonalSequence::shuffled_sampling(&dec, 3).permuted("sorted", |_, d| {
            let q = sort_descending_permutation(d)?;
            Ok(apply_permutation(&q, d))
        });
        let family = family_for(&seq.clone().into(), &dec, SampleMode::Eigen, &cfg).unwrap();
        let report = sorted_converse_check(&seq, &dec, &family, &cfg).unwrap();
        assert!(report.verdict.passed());
    }

    #[test]
    fn sorted_converse_rejects_non_monotone_symbol() {
        let cfg = cfg_small();
        let seq = DiagonalSequence::constant(0.5);
        let family = vec![crate::symbols::TestFunction::hat(0.5, 0.5)];
        let err = sorted_converse_check(&seq, &sine(), &family, &cfg).unwrap_err();
        assert!(matches!(err, Error::NotMonotone { .. }));
    }

    #[test]
    fn glt_permutation_for_constant_symbol() {
        let cfg = cfg_small();
        let constant = Symbol::constant(0.7);
        let seq = DiagonalSequence::sampling(&constant);
        let family = family_for(&seq.clone().into(), &constant, SampleMode::Eigen, &cfg).unwrap();
        let report =
            construct_glt_permutation(&seq, &constant, &family, 4, 64, &cfg).unwrap();
        assert!(report.passed());
        for entry in &report.plan.entries {
            assert!(is_bijection(&entry.p));
            assert!(is_bijection(&entry.q));
            assert!(is_bijection(&entry.s));
        }
    }

    #[test]
    fn glt_permutation_on_sorted_input_is_near_identity() {
        let cfg = cfg_small();
        let dec = Symbol::from_fn_real("1-x", |x| 1.0 - x);
        let seq = DiagonalSequence::sampling(&dec);
        let family = family_for(&seq.clone().into(), &dec, SampleMode::Eigen, &cfg).unwrap();
        let report = construct_glt_permutation(&seq, &dec, &family, 4, 64, &cfg).unwrap();
        assert!(report.passed());
        // The input is already descending, so Q is the identity everywhere.
        for entry in &report.plan.entries {
            let identity: Vec<usize> = (0..entry.n).collect();
            assert_eq!(entry.q, identity);
        }
    }

    #[test]
    fn glt_permutation_shuffled_sine() {
        let cfg = cfg_small();
        let seq = DiagonalSequence::shuffled_sampling(&sine(), 7);
        let family = family_for(&seq.clone().into(), &sine(), SampleMode::Eigen, &cfg).unwrap();
        let report = construct_glt_permutation(&seq, &sine(), &family, 7, 128, &cfg).unwrap();
        assert!(
            report.sorted_vs_rearrangement.passed(),
            "sorted tail {}",
            report.sorted_vs_rearrangement.tail_value
        );
        assert!(report.difference_zero.passed());
        assert!(
            report.permuted_vs_symbol.passed(),
            "permuted tail {}",
            report.permuted_vs_symbol.tail_value
        );
    }

    #[test]
    fn glt_permutation_rejects_complex_input() {
        let cfg = cfg_small();
        let seq = DiagonalSequence::new("diag:complex", |n| {
            Ok(vec![Complex64::new(0.0, 1.0); n])
        });
        let family = vec![crate::symbols::TestFunction::hat(0.0, 1.0)];
        let err =
            construct_glt_permutation(&seq, &Symbol::zero(), &family, 3, 16, &cfg).unwrap_err();
        assert!(matches!(err, Error::RealnessViolation { .. } | Error::PreconditionFailed { .. }));
    }

    #[test]
    fn sorting_idempotence() {
        let cfg = cfg_small();
        let seq = DiagonalSequence::shuffled_sampling(&sine(), 11);
        // Apply the pipeline's Q-sort, then ask for the sort permutation of
        // the result: it must be the identity up to tie blocks.
        for &n in cfg.sizes.sizes() {
            let d = seq.diagonal(n).unwrap();
            let q = sort_descending_permutation(&d).unwrap();
            let sorted = apply_permutation(&q, &d);
            let q2 = sort_descending_permutation(&sorted).unwrap();
            let identity: Vec<usize> = (0..n).collect();
            assert_eq!(q2, identity);
        }
    }
}
