//! Property suites: pseudometric axioms, oracle equivalences and the
//! invariants that tie the modules together.

use diagsym_core::acs::{p_of_diagonal, split_diagonal};
use diagsym_core::distribution::{
    verify_symbol_default, zero_distribution_test_default, SampleMode,
};
use diagsym_core::piecewise::piecewise_convergence_check;
use diagsym_core::symbols::{
    decreasing_rearrangement, distribution_above, ky_fan_distance, ky_fan_from_deviations,
    symbol_mean, TestFunction,
};
use diagsym_core::{
    Complex64, DiagonalSequence, MatrixSequence, RunConfig, Schedule, Symbol,
};
use proptest::prelude::*;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Brute-force `p` over all splits that zero out a subset of entries.
fn subset_split_oracle(diag: &[Complex64]) -> f64 {
    let n = diag.len();
    let mut best = f64::INFINITY;
    for mask in 0u32..(1 << n) {
        let rank = mask.count_ones() as f64 / n as f64;
        let mut norm = 0.0f64;
        for (i, d) in diag.iter().enumerate() {
            if mask & (1 << i) == 0 {
                norm = norm.max(d.norm());
            }
        }
        best = best.min(rank + norm);
    }
    best
}

/// Independent Ky Fan evaluation: bisection on the counting measure instead
/// of the sorted scan.
fn ky_fan_bisection_oracle(deviations: &[f64]) -> f64 {
    let m = deviations.len();
    if m == 0 {
        return 0.0;
    }
    let measure = |eps: f64| deviations.iter().filter(|&&d| d > eps).count() as f64 / m as f64;
    let mut hi = deviations.iter().cloned().fold(0.0, f64::max);
    if hi == 0.0 || measure(0.0) == 0.0 {
        return 0.0;
    }
    let mut lo = 0.0;
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if measure(mid) <= mid {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    hi
}

fn diag_strategy(max_n: usize) -> impl Strategy<Value = Vec<Complex64>> {
    prop::collection::vec(
        prop_oneof![
            3 => (-1.0f64..1.0).prop_map(c),
            1 => Just(c(0.0)),
            1 => (-1.0f64..1.0).prop_map(|re| Complex64::new(re, re / 2.0)),
        ],
        1..=max_n,
    )
}

fn grid_symbol_strategy() -> impl Strategy<Value = Symbol> {
    prop::collection::vec(-2.0f64..2.0, 4..64)
        .prop_map(|values| Symbol::from_grid_real("prop-grid", values).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn p_equals_subset_oracle(diag in diag_strategy(10)) {
        let direct = p_of_diagonal(&diag).unwrap();
        let oracle = subset_split_oracle(&diag);
        prop_assert!((direct - oracle).abs() < 1e-12);
    }

    #[test]
    fn p_is_subadditive(a in diag_strategy(12), b in diag_strategy(12)) {
        let n = a.len().min(b.len());
        let a = &a[..n];
        let b = &b[..n];
        let sum: Vec<Complex64> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        let ps = p_of_diagonal(&sum).unwrap();
        let pa = p_of_diagonal(a).unwrap();
        let pb = p_of_diagonal(b).unwrap();
        prop_assert!(ps <= pa + pb + 1e-12);
    }

    #[test]
    fn split_invariants_hold(diag in diag_strategy(16)) {
        let split = split_diagonal(&diag).unwrap();
        let r = split.rank_part.diagonal().unwrap();
        let nn = split.norm_part.diagonal().unwrap();
        for i in 0..diag.len() {
            prop_assert!((r[i] + nn[i] - diag[i]).norm() == 0.0);
        }
        prop_assert_eq!(r.iter().filter(|v| v.norm() > 0.0).count(), split.rank);
        let max_n = nn.iter().map(|v| v.norm()).fold(0.0, f64::max);
        prop_assert!((max_n - split.norm).abs() < 1e-15);
        prop_assert!((split.p_value - (split.rank as f64 / diag.len() as f64 + split.norm)).abs() < 1e-15);
    }

    #[test]
    fn ky_fan_scan_matches_bisection(devs in prop::collection::vec(0.0f64..3.0, 1..200)) {
        let mut sorted = devs.clone();
        let scan = ky_fan_from_deviations(&mut sorted);
        let oracle = ky_fan_bisection_oracle(&devs);
        prop_assert!((scan - oracle).abs() < 1e-9, "scan {} oracle {}", scan, oracle);
    }

    #[test]
    fn ky_fan_is_a_pseudometric(f in grid_symbol_strategy(), g in grid_symbol_strategy(), h in grid_symbol_strategy()) {
        let res = 256;
        let dff = ky_fan_distance(&f, &f, res);
        prop_assert!(dff == 0.0);
        let dfg = ky_fan_distance(&f, &g, res);
        let dgf = ky_fan_distance(&g, &f, res);
        prop_assert!((dfg - dgf).abs() < 1e-12);
        let dgh = ky_fan_distance(&g, &h, res);
        let dfh = ky_fan_distance(&f, &h, res);
        prop_assert!(dfh <= dfg + dgh + 1e-9, "{} > {} + {}", dfh, dfg, dgh);
    }

    #[test]
    fn rearrangement_is_non_increasing_and_equimeasurable(f in grid_symbol_strategy()) {
        let m = f.resolution().unwrap();
        let g = decreasing_rearrangement(&f, m).unwrap();
        let samples = g.samples(m);
        prop_assert!(samples.windows(2).all(|w| w[1].re <= w[0].re));
        // Same multiset at the grid resolution: level counts agree exactly.
        for z in [-2.5, -1.0, -0.1, 0.0, 0.3, 1.1, 2.5] {
            let df = distribution_above(&f, z, m).unwrap();
            let dg = distribution_above(&g, z, m).unwrap();
            prop_assert_eq!(df, dg);
        }
    }

    #[test]
    fn shuffle_preserves_the_multiset(seed in any::<u64>(), n in 1usize..300) {
        let ramp = Symbol::from_fn_real("x", |x| x);
        let mut plain: Vec<f64> = diagsym_core::sequences::diag_sampling(&ramp, n)
            .unwrap().iter().map(|v| v.re).collect();
        let mut shuffled: Vec<f64> = diagsym_core::sequences::shuffled_sampling(&ramp, n, seed)
            .unwrap().iter().map(|v| v.re).collect();
        plain.sort_by(f64::total_cmp);
        shuffled.sort_by(f64::total_cmp);
        prop_assert_eq!(plain, shuffled);
    }

    #[test]
    fn symbol_mean_invariant_under_rearrangement_on_grids(f in grid_symbol_strategy()) {
        let m = f.resolution().unwrap();
        let g = decreasing_rearrangement(&f, m).unwrap();
        for center in [-1.0, 0.0, 0.5, 1.5] {
            let hat = TestFunction::hat(center, 0.5);
            let a = symbol_mean(&hat, &f, m);
            let b = symbol_mean(&hat, &g, m);
            prop_assert!((a - b).norm() < 1e-12);
        }
    }
}

/// Convergence in measure characterized two ways: the Ky Fan distance to the
/// limit shrinks along a family exactly when the deviation-measure curve
/// shrinks pointwise on an epsilon grid.
#[test]
fn ky_fan_characterizes_convergence_in_measure() {
    let res = 1 << 12;
    let target = Symbol::from_fn_real("x", |x| x);
    let eps_grid = [0.02, 0.05, 0.1, 0.3];
    let mut last_distance = f64::INFINITY;
    for k in 1..=6usize {
        let scale = 1.0 / (1 << k) as f64;
        let fk = Symbol::from_fn_real(format!("x+bump/{k}"), move |x| {
            x + if x < scale { 1.0 } else { scale }
        });
        let d = ky_fan_distance(&fk, &target, res);
        assert!(d <= last_distance + 1e-12);
        last_distance = d;
        for &eps in &eps_grid {
            // Deviation measure at eps: exceeds only while scale > eps.
            let above = (1..=res)
                .filter(|&j| {
                    let x = j as f64 / res as f64;
                    (fk.eval(x) - target.eval(x)).norm() > eps
                })
                .count() as f64
                / res as f64;
            if scale < eps {
                assert!(above <= scale + 2.0 / res as f64);
            }
        }
    }
    assert!(last_distance <= 1.0 / 32.0 + 1e-3);
}

/// Finite form of the rearrangement-transfer identity for a closure symbol:
/// means against the standard family move by at most the grid modulus of
/// continuity plus the counting error.
#[test]
fn symbol_mean_transfer_for_closure_symbol() {
    let m = 4096usize;
    let f = Symbol::from_fn_real("sin(pi*x)", |x| (std::f64::consts::PI * x).sin());
    let g = decreasing_rearrangement(&f, m).unwrap();
    for i in 0..=10usize {
        let hat = TestFunction::hat(i as f64 * 0.1, 0.1);
        let a = symbol_mean(&hat, &f, 1 << 16).re;
        let b = symbol_mean(&hat, &g, 1 << 16).re;
        let bound = (1.0 / m as f64) / 0.1 + 2.0 / m as f64;
        assert!((a - b).abs() <= bound, "center {} gap {} bound {}", i, (a - b).abs(), bound);
    }
}

/// The three zero conditions checked through three different code paths
/// (split functional, threshold counting, eigenvalue verification) agree on
/// the corpus.
#[test]
fn zero_condition_triple_agreement() {
    let cfg = RunConfig {
        sizes: Schedule::doubling(64, 4096).unwrap(),
        grid_resolution: 1 << 14,
        ..RunConfig::default()
    };
    let split_threshold = 0.02;
    let corpus: Vec<(MatrixSequence, bool)> = vec![
        (DiagonalSequence::harmonic().into(), true),
        (DiagonalSequence::constant(1.0).into(), false),
        (DiagonalSequence::constant(0.0).into(), true),
    ];
    for (seq, expect_zero) in corpus {
        // Route 1: threshold counting.
        let counting = zero_distribution_test_default(&seq, &cfg).unwrap().passed();
        // Route 2: split functional at the largest size.
        let diag = match &seq {
            MatrixSequence::Diagonal(d) => d.diagonal(cfg.sizes.largest()).unwrap(),
            _ => unreachable!(),
        };
        let split = split_diagonal(&diag).unwrap();
        let split_verdict = split.rank as f64 / diag.len() as f64 <= split_threshold
            && split.norm <= split_threshold;
        // Route 3: singular-value verification against the zero symbol.
        let singular =
            verify_symbol_default(&seq, &Symbol::zero(), SampleMode::Singular, &cfg)
                .unwrap()
                .passed();
        assert_eq!(counting, expect_zero, "counting route on {}", seq.descriptor());
        assert_eq!(split_verdict, expect_zero, "split route on {}", seq.descriptor());
        assert_eq!(singular, expect_zero, "singular route on {}", seq.descriptor());
    }
}

/// Interpolants of a continuous symbol's sampling approach the symbol in the
/// metric of convergence in measure (uniform continuity drives the rate).
#[test]
fn sampling_interpolants_converge_for_continuous_symbols() {
    let cfg = RunConfig {
        sizes: Schedule::doubling(64, 4096).unwrap(),
        grid_resolution: 1 << 14,
        ..RunConfig::default()
    };
    for symbol in [
        Symbol::from_fn_real("sin(pi*x)", |x| (std::f64::consts::PI * x).sin()),
        Symbol::from_fn_real("exp(x)-1", |x| x.exp() - 1.0),
        Symbol::constant(0.25),
    ] {
        let seq = DiagonalSequence::sampling(&symbol);
        let report = piecewise_convergence_check(&seq, &symbol, &cfg).unwrap();
        assert!(report.passed(), "{} tail {}", symbol.descriptor(), report.tail_value);
    }
}
