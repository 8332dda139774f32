//! Measurable functions on `[0,1]` and the machinery that compares them:
//! level-set measures, decreasing rearrangements, quadrature means against
//! test functions, and the metric of convergence in measure.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};

type SymbolFn = dyn Fn(f64) -> Complex64 + Send + Sync;

#[derive(Clone)]
enum SymbolKind {
    /// Arbitrary closure evaluated on demand.
    Closure(Arc<SymbolFn>),
    /// Uniform grid sample: value `i` lives on the cell `((i-1)/m, i/m]`,
    /// and the value at 0 is the value at `1/m`.
    Grid(Arc<Vec<Complex64>>),
}

/// A measurable function on `[0,1]`, real or complex valued.
#[derive(Clone)]
pub struct Symbol {
    kind: SymbolKind,
    real: bool,
    descriptor: String,
}

impl std::fmt::Debug for Symbol {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Symbol")
            .field("descriptor", &self.descriptor)
            .field("real", &self.real)
            .field("resolution", &self.resolution())
            .finish()
    }
}

impl Symbol {
    pub fn from_fn_real(descriptor: impl Into<String>, f: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Symbol {
            kind: SymbolKind::Closure(Arc::new(move |x| Complex64::new(f(x), 0.0))),
            real: true,
            descriptor: descriptor.into(),
        }
    }

    pub fn from_fn_complex(
        descriptor: impl Into<String>,
        f: impl Fn(f64) -> Complex64 + Send + Sync + 'static,
    ) -> Self {
        Symbol {
            kind: SymbolKind::Closure(Arc::new(f)),
            real: false,
            descriptor: descriptor.into(),
        }
    }

    /// Grid symbol holding `values[i-1]` at node `i/m`.
    pub fn from_grid(descriptor: impl Into<String>, values: Vec<Complex64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ZeroSize);
        }
        let real = values.iter().all(|v| v.im == 0.0);
        Ok(Symbol {
            kind: SymbolKind::Grid(Arc::new(values)),
            real,
            descriptor: descriptor.into(),
        })
    }

    pub fn from_grid_real(descriptor: impl Into<String>, values: Vec<f64>) -> Result<Self> {
        Self::from_grid(descriptor, values.into_iter().map(|v| Complex64::new(v, 0.0)).collect())
    }

    pub fn constant(c: f64) -> Self {
        Symbol::from_fn_real(format!("const:{c}"), move |_| c)
    }

    pub fn zero() -> Self {
        Symbol::from_fn_real("0", |_| 0.0)
    }

    pub fn descriptor(&self) -> &str {
        &self.descriptor
    }

    pub fn is_real(&self) -> bool {
        self.real
    }

    /// Grid resolution when the symbol is a stored sample.
    pub fn resolution(&self) -> Option<usize> {
        match &self.kind {
            SymbolKind::Grid(v) => Some(v.len()),
            SymbolKind::Closure(_) => None,
        }
    }

    pub fn eval(&self, x: f64) -> Complex64 {
        match &self.kind {
            SymbolKind::Closure(f) => f(x),
            SymbolKind::Grid(v) => {
                let m = v.len();
                // Cell ((i-1)/m, i/m] carries value i; x <= 0 reads cell 1.
                let idx = (x * m as f64).ceil() as isize;
                let idx = idx.clamp(1, m as isize) as usize;
                v[idx - 1]
            }
        }
    }

    pub fn eval_real(&self, x: f64) -> Result<f64> {
        if !self.real {
            return Err(Error::RealnessViolation { what: format!("symbol `{}`", self.descriptor) });
        }
        Ok(self.eval(x).re)
    }

    /// Values at the nodes `i/resolution`, `i = 1..resolution`. Grid symbols
    /// with a matching resolution return the stored values unchanged.
    pub fn samples(&self, resolution: usize) -> Vec<Complex64> {
        if let SymbolKind::Grid(v) = &self.kind {
            if v.len() == resolution {
                return v.as_ref().clone();
            }
        }
        let m = resolution as f64;
        (1..=resolution).map(|i| self.eval(i as f64 / m)).collect()
    }

    /// Pointwise sum; real only when both operands are.
    pub fn add(&self, other: &Symbol) -> Symbol {
        let a = self.clone();
        let b = other.clone();
        Symbol {
            descriptor: format!("({})+({})", a.descriptor, b.descriptor),
            real: a.real && b.real,
            kind: SymbolKind::Closure(Arc::new(move |x| a.eval(x) + b.eval(x))),
        }
    }

    /// Pointwise shift by a real constant.
    pub fn shift(&self, c: f64) -> Symbol {
        let a = self.clone();
        Symbol {
            descriptor: format!("({})+{}", a.descriptor, c),
            real: a.real,
            kind: SymbolKind::Closure(Arc::new(move |x| a.eval(x) + c)),
        }
    }

    /// |f| as a real symbol.
    pub fn magnitude(&self) -> Symbol {
        let a = self.clone();
        Symbol {
            descriptor: format!("|{}|", a.descriptor),
            real: true,
            kind: SymbolKind::Closure(Arc::new(move |x| Complex64::new(a.eval(x).norm(), 0.0))),
        }
    }
}

/// Continuous compactly supported test function: a trapezoidal bump of height
/// one. `plateau = 0` gives the plain hat; a positive plateau keeps the value
/// at exactly one on `[center - plateau, center + plateau]`, which is how the
/// "identically one on the data range" probe is expressed. Complex arguments
/// are scored as the product of the real-part and imaginary-part bumps.
#[derive(Debug, Clone, PartialEq)]
pub struct TestFunction {
    pub center: Complex64,
    pub plateau: f64,
    pub ramp: f64,
}

impl TestFunction {
    pub fn hat(center: f64, half_width: f64) -> Self {
        assert!(half_width > 0.0, "hat half-width must be positive");
        TestFunction { center: Complex64::new(center, 0.0), plateau: 0.0, ramp: half_width }
    }

    pub fn wide(center: f64, plateau: f64, ramp: f64) -> Self {
        assert!(ramp > 0.0 && plateau >= 0.0);
        TestFunction { center: Complex64::new(center, 0.0), plateau, ramp }
    }

    fn bump(&self, t: f64, c: f64) -> f64 {
        let d = (t - c).abs();
        if d <= self.plateau {
            1.0
        } else {
            (1.0 - (d - self.plateau) / self.ramp).max(0.0)
        }
    }

    pub fn eval(&self, z: Complex64) -> f64 {
        self.bump(z.re, self.center.re) * self.bump(z.im, self.center.im)
    }

    /// Modulus of continuity, capped at the function's height.
    pub fn modulus_of_continuity(&self, eps: f64) -> f64 {
        (eps / self.ramp).min(1.0)
    }

    pub fn descriptor(&self) -> String {
        if self.plateau == 0.0 {
            format!("hat(c={},h={})", self.center.re, self.ramp)
        } else {
            format!("wide(c={},plateau={},ramp={})", self.center.re, self.plateau, self.ramp)
        }
    }
}

/// The default testing family: hats with half-width 0.1 on a 0.1-stepped
/// center grid spanning `[sym_lo, sym_hi]` (padded by one step), plus one wide
/// probe that is identically one on the whole numeric range of the data.
pub fn default_family(sym_lo: f64, sym_hi: f64, data_lo: f64, data_hi: f64) -> Vec<TestFunction> {
    let step = 0.1;
    let lo = ((sym_lo / step).floor() - 1.0) * step;
    let hi = ((sym_hi / step).ceil() + 1.0) * step;
    let count = ((hi - lo) / step).round() as usize;
    let mut family: Vec<TestFunction> =
        (0..=count).map(|i| TestFunction::hat(lo + i as f64 * step, step)).collect();
    let full_lo = sym_lo.min(data_lo);
    let full_hi = sym_hi.max(data_hi);
    let center = 0.5 * (full_lo + full_hi);
    let plateau = 0.5 * (full_hi - full_lo) + 1.0;
    family.push(TestFunction::wide(center, plateau, 1.0));
    family
}

pub fn family_descriptor(family: &[TestFunction]) -> String {
    family.iter().map(|f| f.descriptor()).collect::<Vec<_>>().join(";")
}

/// `mu{x in [0,1] : f(x) > z}` for a real symbol. Exact node counting for grid
/// symbols; closures are sampled at `resolution` points.
pub fn distribution_above(f: &Symbol, z: f64, resolution: usize) -> Result<f64> {
    if !f.is_real() {
        return Err(Error::RealnessViolation { what: format!("distribution of `{}`", f.descriptor()) });
    }
    let values = match f.resolution() {
        Some(m) => f.samples(m),
        None => f.samples(resolution),
    };
    let above = values.iter().filter(|v| v.re > z).count();
    Ok(above as f64 / values.len() as f64)
}

/// Decreasing rearrangement of a real symbol, as a grid symbol at resolution
/// `m`: sample at the nodes and sort descending (empirical quantile function).
pub fn decreasing_rearrangement(f: &Symbol, m: usize) -> Result<Symbol> {
    if !f.is_real() {
        return Err(Error::RealnessViolation { what: format!("rearrangement of `{}`", f.descriptor()) });
    }
    if m == 0 {
        return Err(Error::ZeroSize);
    }
    let mut values: Vec<f64> = f.samples(m).iter().map(|v| v.re).collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Symbol::from_grid_real(format!("rearranged({})", f.descriptor()), values)
}

/// Ky Fan distance between empirical samples with equal weights `1/M`:
/// `inf { eps > 0 : #{ |d_i| > eps } / M <= eps }`.
///
/// With the deviations sorted descending this is `min_k max(d_{k+1}, k/M)`
/// (conventions `d_0 = inf`, `d_{M+1} = 0`).
pub fn ky_fan_from_deviations(deviations: &mut [f64]) -> f64 {
    let m = deviations.len();
    if m == 0 {
        return 0.0;
    }
    deviations.sort_by(|a, b| b.total_cmp(a));
    let mut best = f64::INFINITY;
    for k in 0..=m {
        let d_next = if k < m { deviations[k] } else { 0.0 };
        let candidate = d_next.max(k as f64 / m as f64);
        if candidate < best {
            best = candidate;
        }
    }
    best
}

/// The metric of convergence in measure between two symbols, computed on a
/// common grid of `resolution` nodes.
pub fn ky_fan_distance(f: &Symbol, g: &Symbol, resolution: usize) -> f64 {
    let res = common_resolution(f, g, resolution);
    let fs = f.samples(res);
    let gs = g.samples(res);
    let mut deviations: Vec<f64> = fs.iter().zip(&gs).map(|(a, b)| (a - b).norm()).collect();
    ky_fan_from_deviations(&mut deviations)
}

/// Common sampling resolution: the largest of the stored grids and the
/// requested resolution, so grid data is never under-sampled.
fn common_resolution(f: &Symbol, g: &Symbol, resolution: usize) -> usize {
    resolution.max(f.resolution().unwrap_or(0)).max(g.resolution().unwrap_or(0))
}

/// Quadrature of `F(f(x))` over `[0,1]`: exact node average for grid symbols,
/// composite midpoint rule at `resolution` for closures.
pub fn symbol_mean(test: &TestFunction, f: &Symbol, resolution: usize) -> Complex64 {
    match f.resolution() {
        Some(m) => {
            let mut sum = 0.0;
            for v in f.samples(m) {
                sum += test.eval(v);
            }
            Complex64::new(sum / m as f64, 0.0)
        }
        None => {
            let r = resolution as f64;
            let mut sum = 0.0;
            for j in 1..=resolution {
                let x = (j as f64 - 0.5) / r;
                sum += test.eval(f.eval(x));
            }
            Complex64::new(sum / r, 0.0)
        }
    }
}

/// Mean of `F(|f(x)|)`, the symbol side of singular-value verification.
pub fn symbol_mean_magnitude(test: &TestFunction, f: &Symbol, resolution: usize) -> Complex64 {
    symbol_mean(test, &f.magnitude(), resolution)
}

#[cfg(test)]
mod tests {
    use super::*;

    const RES: usize = 1 << 16;

    #[test]
    fn grid_eval_uses_cells() {
        let s = Symbol::from_grid_real("g", vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(s.eval(0.0).re, 1.0); // value at 0 is the value at 1/m
        assert_eq!(s.eval(0.25).re, 1.0);
        assert_eq!(s.eval(0.26).re, 2.0);
        assert_eq!(s.eval(1.0).re, 4.0);
    }

    #[test]
    fn distribution_above_uniform_ramp() {
        let f = Symbol::from_fn_real("x", |x| x);
        assert!((distribution_above(&f, 0.5, RES).unwrap() - 0.5).abs() < 2e-5);
    }

    #[test]
    fn distribution_above_constant() {
        let f = Symbol::constant(2.0);
        assert_eq!(distribution_above(&f, 1.0, RES).unwrap(), 1.0);
    }

    #[test]
    fn distribution_above_sine_matches_level_set_length() {
        // mu{sin(pi x) > 1/2} = 2/3, cross-checked with a brute counting oracle.
        let f = Symbol::from_fn_real("sin(pi*x)", |x| (std::f64::consts::PI * x).sin());
        let measured = distribution_above(&f, 0.5, RES).unwrap();
        assert!((measured - 2.0 / 3.0).abs() < 1e-4, "measured {measured}");

        let oracle_res = 1_000_000usize;
        let count = (1..=oracle_res)
            .filter(|&i| (std::f64::consts::PI * i as f64 / oracle_res as f64).sin() > 0.5)
            .count();
        let oracle = count as f64 / oracle_res as f64;
        assert!((measured - oracle).abs() < 1e-4);
    }

    #[test]
    fn distribution_rejects_complex() {
        let f = Symbol::from_fn_complex("i", |_| Complex64::new(0.0, 1.0));
        assert!(matches!(distribution_above(&f, 0.0, 16), Err(Error::RealnessViolation { .. })));
    }

    #[test]
    fn rearrangement_of_ramp_is_reflection() {
        let f = Symbol::from_fn_real("x", |x| x);
        let g = decreasing_rearrangement(&f, 10).unwrap();
        // g(i/m) = (m - i + 1)/m
        for i in 1..=10usize {
            let expect = (10 - i + 1) as f64 / 10.0;
            assert!((g.eval(i as f64 / 10.0).re - expect).abs() < 1e-15);
        }
    }

    #[test]
    fn rearrangement_fixes_non_increasing_grid() {
        let f = Symbol::from_grid_real("g", vec![5.0, 3.0, 3.0, 1.0]).unwrap();
        let g = decreasing_rearrangement(&f, 4).unwrap();
        assert_eq!(g.samples(4), f.samples(4));
    }

    #[test]
    fn rearrangement_of_sine_matches_closed_form() {
        // mu{sin(pi x) > z} = 1 - (2/pi) asin z inverts to cos(pi y / 2).
        let m = 100_000usize;
        let f = Symbol::from_fn_real("sin(pi*x)", |x| (std::f64::consts::PI * x).sin());
        let g = decreasing_rearrangement(&f, m).unwrap();
        let mut sup = 0.0f64;
        for i in 1..=m {
            let y = i as f64 / m as f64;
            let expect = (std::f64::consts::FRAC_PI_2 * y).cos();
            sup = sup.max((g.eval(y).re - expect).abs());
        }
        assert!(sup <= 1e-3, "sup grid error {sup}");
    }

    #[test]
    fn ky_fan_identity_is_zero() {
        let f = Symbol::from_fn_real("x", |x| x);
        assert_eq!(ky_fan_distance(&f, &f, 4096), 0.0);
    }

    #[test]
    fn ky_fan_constant_gap() {
        let f = Symbol::constant(0.0);
        let g = Symbol::constant(0.3);
        let d = ky_fan_distance(&f, &g, 4096);
        assert!((d - 0.3).abs() < 1e-12, "d = {d}");
    }

    #[test]
    fn ky_fan_tall_thin_indicator() {
        // 10 * indicator([0, 0.05]) deviates from 0 on a set of measure 0.05.
        let f = Symbol::constant(0.0);
        let g = Symbol::from_fn_real("spike", |x| if x <= 0.05 { 10.0 } else { 0.0 });
        let d = ky_fan_distance(&f, &g, 4000);
        assert!((d - 0.05).abs() < 1e-3, "d = {d}");
    }

    #[test]
    fn symbol_mean_wide_probe_is_one() {
        let f = Symbol::from_fn_real("x", |x| x);
        let wide = TestFunction::wide(0.5, 2.0, 1.0);
        assert_eq!(symbol_mean(&wide, &f, RES).re, 1.0);
    }

    #[test]
    fn symbol_mean_hat_at_origin() {
        let f = Symbol::constant(0.0);
        let hat = TestFunction::hat(0.0, 1.0);
        assert_eq!(symbol_mean(&hat, &f, RES).re, 1.0);
    }

    #[test]
    fn symbol_mean_hat_against_ramp() {
        // integral of max(0, 1 - |x - 1/2| / (1/2)) over [0,1] is 1/2,
        // checked against a finer quadrature oracle.
        let f = Symbol::from_fn_real("x", |x| x);
        let hat = TestFunction::hat(0.5, 0.5);
        let measured = symbol_mean(&hat, &f, RES).re;
        assert!((measured - 0.5).abs() < 1e-9);

        let fine = 1 << 20;
        let oracle = symbol_mean(&hat, &f, fine).re;
        assert!((measured - oracle).abs() < 1e-9);
    }

    #[test]
    fn complex_test_function_is_product_of_bumps() {
        let hat = TestFunction::hat(0.0, 1.0);
        let z = Complex64::new(0.5, 0.5);
        assert!((hat.eval(z) - 0.25).abs() < 1e-15);
    }

    #[test]
    fn default_family_covers_range_and_probe() {
        let family = default_family(0.0, 1.0, 0.0, 5.0);
        // Plateau probe is exactly one over the data range.
        let wide = family.last().unwrap();
        assert_eq!(wide.eval(Complex64::new(5.0, 0.0)), 1.0);
        assert_eq!(wide.eval(Complex64::new(0.0, 0.0)), 1.0);
        // Hats step by 0.1 across the symbol range.
        assert!(family.len() > 10);
    }
}
