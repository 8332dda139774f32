//! The rank-plus-norm functional `p(A) = min_i (i-1)/n + sigma_i(A)`, the
//! split decomposition realizing it, tail estimates of the induced
//! pseudometric on matrix sequences, and the crescent-map extraction of a
//! diagonal sequence from a Cauchy family.

use std::sync::Arc;

use num_complex::Complex64;
use serde::Serialize;

use crate::config::{RunConfig, Schedule};
use crate::error::{Error, Result};
use crate::linalg::{leading_singular_part, singular_values, sorted_magnitudes, Matrix};
use crate::sequences::{DiagonalSequence, MatrixSequence};

/// `min_{i=1..n+1} (i-1)/n + sigma_i` over descending singular values, with
/// `sigma_{n+1} = 0`. Ties break toward the smallest index. Returns the
/// minimum and the 1-based minimizer.
pub fn p_from_singular_values(sv: &[f64]) -> (f64, usize) {
    let n = sv.len();
    debug_assert!(n > 0);
    let mut best = f64::INFINITY;
    let mut best_i = 1;
    for i in 1..=n + 1 {
        let sigma = if i <= n { sv[i - 1] } else { 0.0 };
        let value = (i - 1) as f64 / n as f64 + sigma;
        if value < best {
            best = value;
            best_i = i;
        }
    }
    (best, best_i)
}

/// `p` of a diagonal matrix given by its diagonal entries (exact path).
pub fn p_of_diagonal(diag: &[Complex64]) -> Result<f64> {
    if diag.is_empty() {
        return Err(Error::ZeroSize);
    }
    Ok(p_from_singular_values(&sorted_magnitudes(diag)).0)
}

/// `p` of a square matrix; diagonal inputs take the exact path.
pub fn p_value(a: &Matrix) -> Result<f64> {
    Ok(p_from_singular_values(&singular_values(a)?).0)
}

/// One side of a split decomposition. Diagonal inputs keep diagonal parts.
#[derive(Debug, Clone)]
pub enum SplitPart {
    Diagonal(Vec<Complex64>),
    Dense(Matrix),
}

impl SplitPart {
    pub fn to_matrix(&self) -> Result<Matrix> {
        match self {
            SplitPart::Diagonal(d) => Matrix::from_diagonal(d),
            SplitPart::Dense(m) => Ok(m.clone()),
        }
    }

    pub fn diagonal(&self) -> Option<&[Complex64]> {
        match self {
            SplitPart::Diagonal(d) => Some(d),
            SplitPart::Dense(_) => None,
        }
    }
}

/// The low-rank plus low-norm split realizing `p(A)`.
#[derive(Debug, Clone)]
pub struct SplitDecomposition {
    pub rank_part: SplitPart,
    pub norm_part: SplitPart,
    /// Minimizing index `i*` in `1..=n+1`.
    pub split_index: usize,
    /// `rank(R) = i* - 1`.
    pub rank: usize,
    /// `||N|| = sigma_{i*}`.
    pub norm: f64,
    pub p_value: f64,
}

/// Split a diagonal matrix at the minimizer of `p`: the rank part keeps the
/// `i* - 1` largest-magnitude entries at their original positions.
pub fn split_diagonal(diag: &[Complex64]) -> Result<SplitDecomposition> {
    let n = diag.len();
    if n == 0 {
        return Err(Error::ZeroSize);
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| diag[j].norm().total_cmp(&diag[i].norm()));
    let sv: Vec<f64> = order.iter().map(|&i| diag[i].norm()).collect();
    let (p, split_index) = p_from_singular_values(&sv);
    let rank = split_index - 1;
    let norm = if split_index <= n { sv[split_index - 1] } else { 0.0 };
    let zero = Complex64::new(0.0, 0.0);
    let mut rank_part = vec![zero; n];
    let mut norm_part = diag.to_vec();
    for &idx in order.iter().take(rank) {
        rank_part[idx] = diag[idx];
        norm_part[idx] = zero;
    }
    Ok(SplitDecomposition {
        rank_part: SplitPart::Diagonal(rank_part),
        norm_part: SplitPart::Diagonal(norm_part),
        split_index,
        rank,
        norm,
        p_value: p,
    })
}

/// Split any square matrix at the minimizer of `p`.
pub fn split_at_minimizer(a: &Matrix) -> Result<SplitDecomposition> {
    if a.is_diagonal(0.0) {
        return split_diagonal(&a.diagonal());
    }
    let sv = singular_values(a)?;
    let (p, split_index) = p_from_singular_values(&sv);
    let rank = split_index - 1;
    let norm = if split_index <= sv.len() { sv[split_index - 1] } else { 0.0 };
    let rank_part = leading_singular_part(a, rank)?;
    let norm_part = a.sub(&rank_part)?;
    Ok(SplitDecomposition {
        rank_part: SplitPart::Dense(rank_part),
        norm_part: SplitPart::Dense(norm_part),
        split_index,
        rank,
        norm,
        p_value: p,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AcsRow {
    pub n: usize,
    pub p: f64,
}

/// Per-size table of `p(A_n - B_n)` with the tail surrogate for the limsup.
#[derive(Debug, Clone, Serialize)]
pub struct AcsDistanceReport {
    pub left: String,
    pub right: String,
    pub schedule: Schedule,
    pub tail_window: usize,
    pub rows: Vec<AcsRow>,
    /// Max of `p` over the trailing `tail_window` schedule entries.
    pub tail_estimate: f64,
}

/// `p(A_n - B_n)` for a single size, with diagonal fast path.
pub fn p_of_difference(
    a: &MatrixSequence,
    b: &MatrixSequence,
    n: usize,
    cfg: &RunConfig,
) -> Result<f64> {
    match (a, b) {
        (MatrixSequence::Diagonal(da), MatrixSequence::Diagonal(db)) => {
            cfg.check_diagonal_size(n)?;
            let xs = da.diagonal(n)?;
            let ys = db.diagonal(n)?;
            let diff: Vec<Complex64> = xs.iter().zip(&ys).map(|(x, y)| x - y).collect();
            p_of_diagonal(&diff)
        }
        _ => {
            cfg.check_dense_size(n)?;
            let diff = a.matrix(n)?.sub(&b.matrix(n)?)?;
            p_value(&diff)
        }
    }
}

/// Estimate of the pseudometric between two sequences over a schedule.
pub fn acs_distance_estimate(
    a: &MatrixSequence,
    b: &MatrixSequence,
    cfg: &RunConfig,
) -> Result<AcsDistanceReport> {
    cfg.validate()?;
    let mut rows = Vec::new();
    for &n in cfg.sizes.sizes() {
        rows.push(AcsRow { n, p: p_of_difference(a, b, n, cfg)? });
    }
    let tail_start = rows.len().saturating_sub(cfg.tail_window);
    let tail_estimate = rows[tail_start..].iter().map(|r| r.p).fold(0.0, f64::max);
    Ok(AcsDistanceReport {
        left: a.descriptor(),
        right: b.descriptor(),
        schedule: cfg.sizes.clone(),
        tail_window: cfg.tail_window,
        rows,
        tail_estimate,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct RecoveryRow {
    pub m: usize,
    /// Tail max of `||N_{n,m}||`.
    pub omega: f64,
    /// Tail max of `rank(R_{n,m}) / n`.
    pub c: f64,
}

/// For every column of the family, the split-derived norm and rank-fraction
/// tables whose decay certifies a.c.s. convergence.
#[derive(Debug, Clone, Serialize)]
pub struct RecoveryReport {
    pub target: String,
    pub schedule: Schedule,
    pub tail_window: usize,
    pub rows: Vec<RecoveryRow>,
}

/// Split `A_n - B_{n,m}` at the minimizer for each column `m` and report the
/// tail behaviour of the norm and rank parts.
pub fn decomposition_recovery(
    a: &MatrixSequence,
    family: &[MatrixSequence],
    cfg: &RunConfig,
) -> Result<RecoveryReport> {
    cfg.validate()?;
    let tail = cfg.sizes.tail(cfg.tail_window);
    let mut rows = Vec::new();
    for (idx, b) in family.iter().enumerate() {
        let mut omega = 0.0f64;
        let mut c = 0.0f64;
        for &n in tail {
            let split = match (a, b) {
                (MatrixSequence::Diagonal(da), MatrixSequence::Diagonal(db)) => {
                    cfg.check_diagonal_size(n)?;
                    let xs = da.diagonal(n)?;
                    let ys = db.diagonal(n)?;
                    let diff: Vec<Complex64> = xs.iter().zip(&ys).map(|(x, y)| x - y).collect();
                    split_diagonal(&diff)?
                }
                _ => {
                    cfg.check_dense_size(n)?;
                    split_at_minimizer(&a.matrix(n)?.sub(&b.matrix(n)?)?)?
                }
            };
            omega = omega.max(split.norm);
            c = c.max(split.rank as f64 / n as f64);
        }
        rows.push(RecoveryRow { m: idx + 1, omega, c });
    }
    Ok(RecoveryReport {
        target: a.descriptor(),
        schedule: cfg.sizes.clone(),
        tail_window: cfg.tail_window,
        rows,
    })
}

/// A doubly indexed family of diagonal sequences `B_{n,m}` with columns
/// `m = 1..=columns`.
#[derive(Clone)]
pub struct DiagonalFamily {
    descriptor: String,
    columns: usize,
    generator: Arc<dyn Fn(usize, usize) -> Result<Vec<Complex64>> + Send + Sync>,
}

impl DiagonalFamily {
    pub fn new(
        descriptor: impl Into<String>,
        columns: usize,
        generator: impl Fn(usize, usize) -> Result<Vec<Complex64>> + Send + Sync + 'static,
    ) -> Self {
        DiagonalFamily { descriptor: descriptor.into(), columns, generator: Arc::new(generator) }
    }

    /// The family `D_n(f + 1/m)` of shifted samplings of a symbol.
    pub fn shifted_sampling(f: &crate::symbols::Symbol, columns: usize) -> Self {
        let f = f.clone();
        DiagonalFamily::new(format!("diag:{}+1/m", f.descriptor()), columns, move |n, m| {
            crate::sequences::diag_sampling(&f.shift(1.0 / m as f64), n)
        })
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn columns(&self) -> usize {
        self.columns
    }

    pub fn diagonal(&self, n: usize, m: usize) -> Result<Vec<Complex64>> {
        (self.generator)(n, m)
    }

    /// Column `m` as a standalone sequence.
    pub fn column(&self, m: usize) -> DiagonalSequence {
        let fam = self.clone();
        DiagonalSequence::new(format!("{}[m={}]", self.descriptor, m), move |n| fam.diagonal(n, m))
    }

    /// The extracted sequence `{B_{n, m(n)}}`.
    pub fn along_map(&self, map: CrescentMap) -> DiagonalSequence {
        let fam = self.clone();
        DiagonalSequence::new(format!("{}[m=m(n)]", self.descriptor), move |n| {
            fam.diagonal(n, map.level_at(n))
        })
    }
}

/// Step function `m(n)`: 1 below the first breakpoint, then the recorded
/// level from each breakpoint on. Non-decreasing by construction.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CrescentMap {
    /// `(N_k, M_k)` pairs with strictly increasing `N_k` and `M_k`.
    pub breakpoints: Vec<(usize, usize)>,
}

impl CrescentMap {
    pub fn level_at(&self, n: usize) -> usize {
        let mut level = 1;
        for &(break_n, m) in &self.breakpoints {
            if n >= break_n {
                level = m;
            } else {
                break;
            }
        }
        level
    }

    pub fn top_level(&self) -> usize {
        self.breakpoints.last().map(|&(_, m)| m).unwrap_or(1)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractionLevel {
    pub k: u32,
    /// Column index `M_k` certified at tolerance `2^-k`.
    pub m_k: usize,
    /// Size `N_k` from which the level is active.
    pub n_k: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationRow {
    pub m: usize,
    pub tail_distance: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ExtractionReport {
    pub family: String,
    pub schedule: Schedule,
    pub tail_window: usize,
    pub k_max: u32,
    pub levels: Vec<ExtractionLevel>,
    pub map: CrescentMap,
    /// `m(n)` sampled at the scheduled sizes.
    pub map_rows: Vec<(usize, usize)>,
    /// Estimated distance between the extracted sequence and each column
    /// `m = 1..=M_{k_max}`.
    pub verification: Vec<VerificationRow>,
}

/// Default column-distance oracle: the tail estimate of `p(B_{n,s} - B_{n,t})`
/// over the configured schedule.
pub fn estimated_distance_oracle<'a>(
    family: &'a DiagonalFamily,
    cfg: &'a RunConfig,
) -> impl Fn(usize, usize) -> Result<f64> + 'a {
    move |s, t| {
        let a: MatrixSequence = family.column(s).into();
        let b: MatrixSequence = family.column(t).into();
        Ok(acs_distance_estimate(&a, &b, cfg)?.tail_estimate)
    }
}

/// Build the crescent map `m(n)` extracting a diagonal sequence from a Cauchy
/// family.
///
/// Level indices `M_k` come from a triangle-inequality certificate through
/// the last available column `c`: every pair `s, t >= m` satisfies
/// `d(s,t) <= d(s,c) + d(c,t)`, so the first `m` whose certified bound
/// `2 * max_{s >= m} oracle(s, c)` drops below `2^-k` is taken as `M_k`
/// (testing one column per level instead of every pair). Breakpoints `N_k`
/// scan the schedule for the first size where `p` of every in-band column
/// pair stays below `2^(1-k)` through the end of the schedule.
pub fn extract_diagonal_subsequence(
    family: &DiagonalFamily,
    distance_oracle: &dyn Fn(usize, usize) -> Result<f64>,
    k_max: u32,
    cfg: &RunConfig,
) -> Result<ExtractionReport> {
    cfg.validate()?;
    if k_max == 0 {
        return Err(Error::InvalidConfig("k_max must be at least 1".into()));
    }
    let columns = family.columns();
    if columns < 2 {
        return Err(Error::InvalidConfig("family needs at least two columns".into()));
    }

    // Certified Cauchy radius per starting column.
    let reference = columns;
    let mut radius = vec![0.0f64; columns + 1];
    for s in 1..=columns {
        radius[s] = distance_oracle(s, reference)?;
    }
    for s in (1..columns).rev() {
        radius[s] = radius[s].max(radius[s + 1]);
    }

    let find_level =
        |threshold: f64, from: usize| -> Option<usize> { (from..=columns).find(|&m| 2.0 * radius[m] <= threshold) };

    // M_1 .. M_{k_max}, strictly increasing, plus the band ceiling above the
    // top level (falls back to the last column when no tighter one exists).
    let mut level_columns = Vec::with_capacity(k_max as usize + 1);
    let mut previous = 0usize;
    for k in 1..=k_max {
        let threshold = 0.5f64.powi(k as i32);
        let found = find_level(threshold, 1).ok_or_else(|| Error::ExtractionFailure {
            level: k,
            detail: format!(
                "no column with certified pair distance <= {threshold:.3e} among {columns} columns"
            ),
        })?;
        let m_k = found.max(previous + 1);
        if m_k > columns {
            return Err(Error::ExtractionFailure {
                level: k,
                detail: format!("strictly increasing levels exhausted the {columns} columns"),
            });
        }
        level_columns.push(m_k);
        previous = m_k;
    }
    let ceiling =
        find_level(0.5f64.powi(k_max as i32 + 1), previous).unwrap_or(columns).max(previous);
    level_columns.push(ceiling);

    // Per-band breakpoints from the p tables of in-band column pairs.
    let p_table = |s: usize, t: usize| -> Result<Vec<f64>> {
        let mut values = Vec::with_capacity(cfg.sizes.sizes().len());
        for &n in cfg.sizes.sizes() {
            cfg.check_diagonal_size(n)?;
            let xs = family.diagonal(n, s)?;
            let ys = family.diagonal(n, t)?;
            if xs.len() != n || ys.len() != n {
                return Err(Error::ShapeMismatch { expected: n, found: xs.len().min(ys.len()) });
            }
            let diff: Vec<Complex64> = xs.iter().zip(&ys).map(|(x, y)| x - y).collect();
            values.push(p_of_diagonal(&diff)?);
        }
        Ok(values)
    };

    let sizes = cfg.sizes.sizes();
    let mut n_tilde = Vec::with_capacity(k_max as usize);
    for k in 1..=k_max as usize {
        let band_lo = level_columns[k - 1];
        let band_hi = level_columns[k];
        let threshold = 2.0 * 0.5f64.powi(k as i32);
        let mut band_break = sizes[0];
        for s in band_lo..=band_hi {
            for t in (s + 1)..=band_hi {
                let table = p_table(s, t)?;
                // First index from which p stays below threshold to the end.
                let mut from = None;
                for start in 0..table.len() {
                    if table[start..].iter().all(|&p| p <= threshold) {
                        from = Some(start);
                        break;
                    }
                }
                match from {
                    Some(idx) => band_break = band_break.max(sizes[idx]),
                    None => {
                        return Err(Error::ExtractionFailure {
                            level: k as u32,
                            detail: format!(
                                "p(B[n,{s}] - B[n,{t}]) never settles below {threshold:.3e} on the schedule"
                            ),
                        })
                    }
                }
            }
        }
        n_tilde.push(band_break);
    }

    // Strictly increasing breakpoints.
    let mut breakpoints = Vec::with_capacity(k_max as usize);
    let mut previous_n = 0usize;
    for (k, &raw) in n_tilde.iter().enumerate() {
        let n_k = if k == 0 { raw } else { raw.max(previous_n + 1) };
        breakpoints.push((n_k, level_columns[k]));
        previous_n = n_k;
    }

    let map = CrescentMap { breakpoints };
    let map_rows: Vec<(usize, usize)> = sizes.iter().map(|&n| (n, map.level_at(n))).collect();

    let extracted: MatrixSequence = family.along_map(map.clone()).into();
    let mut verification = Vec::new();
    for m in 1..=map.top_level() {
        let column: MatrixSequence = family.column(m).into();
        let report = acs_distance_estimate(&extracted, &column, cfg)?;
        verification.push(VerificationRow { m, tail_distance: report.tail_estimate });
    }

    let levels = map
        .breakpoints
        .iter()
        .enumerate()
        .map(|(i, &(n_k, m_k))| ExtractionLevel { k: i as u32 + 1, m_k, n_k })
        .collect();

    Ok(ExtractionReport {
        family: family.descriptor().to_string(),
        schedule: cfg.sizes.clone(),
        tail_window: cfg.tail_window,
        k_max,
        levels,
        map,
        map_rows,
        verification,
    })
}
