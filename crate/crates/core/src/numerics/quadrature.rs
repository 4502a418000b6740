//! Globally adaptive Gauss–Kronrod quadrature.
//!
//! The 1D engine bisects the cell with the largest error estimate until the
//! summed estimate meets `max(abs, rel·|value|)`. Semi-infinite domains are
//! mapped onto (0, 1) with `x = start + scale·t/(1−t)`. Higher-dimensional
//! boxes are integrated by nesting the 1D engine: the inner error estimates are
//! carried into the outer rule so that the reported bound covers both levels.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::sum::NeumaierSum;
use crate::error::{Error, Result};

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_208_292_324_150,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Number of integrand evaluations per Gauss–Kronrod cell.
pub const POINTS_PER_CELL: usize = 21;

/// Outcome of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureResult {
    pub value: f64,
    pub error_estimate: f64,
    pub cells_evaluated: usize,
}

/// Requested accuracy: the run stops once `error ≤ max(abs, rel·|value|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
}

impl Tolerance {
    pub const fn new(abs: f64, rel: f64) -> Self {
        Self { abs, rel }
    }

    pub const fn relative(rel: f64) -> Self {
        Self { abs: 0.0, rel }
    }

    pub const fn absolute(abs: f64) -> Self {
        Self { abs, rel: 0.0 }
    }

    pub fn target(&self, value: f64) -> f64 {
        self.abs.max(self.rel * value.abs())
    }

    /// Tighter tolerance handed to inner integrals of a nested rule.
    pub fn tightened(&self, factor: f64) -> Self {
        Self {
            abs: self.abs * factor,
            rel: self.rel * factor,
        }
    }
}

impl Default for Tolerance {
    fn default() -> Self {
        Self::new(1e-12, 1e-10)
    }
}

/// Integration domain for one variable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Domain {
    Finite { lower: f64, upper: f64 },
    /// `[start, ∞)`, mapped with `x = start + scale·t/(1−t)`.
    SemiInfinite { start: f64, scale: f64 },
}

impl Domain {
    pub fn finite(lower: f64, upper: f64) -> Self {
        Domain::Finite { lower, upper }
    }

    pub fn semi_infinite(start: f64) -> Self {
        Domain::SemiInfinite { start, scale: 1.0 }
    }

    pub fn semi_infinite_scaled(start: f64, scale: f64) -> Self {
        Domain::SemiInfinite { start, scale }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            Domain::Finite { lower, upper } => {
                if !(lower.is_finite() && upper.is_finite()) {
                    return Err(Error::InvalidInput("finite domain needs finite bounds".into()));
                }
            }
            Domain::SemiInfinite { start, scale } => {
                if !start.is_finite() || !(scale.is_finite() && scale > 0.0) {
                    return Err(Error::InvalidInput(
                        "semi-infinite domain needs a finite start and positive scale".into(),
                    ));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy)]
struct Cell {
    lower: f64,
    upper: f64,
    value: f64,
    error: f64,
    /// Set once bisection can no longer reduce the cell's error: the cell is too
    /// narrow to split, or its rule error is already at the roundoff floor.
    exhausted: bool,
}

impl PartialEq for Cell {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Cell {}
impl PartialOrd for Cell {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Cell {
    fn cmp(&self, other: &Self) -> Ordering {
        // exhausted cells sink; ties broken by position for determinism
        (!self.exhausted)
            .cmp(&!other.exhausted)
            .then(self.error.total_cmp(&other.error))
            .then(other.lower.total_cmp(&self.lower))
    }
}

/// Adaptive integrator configuration.
#[derive(Debug, Clone)]
pub struct Integrator {
    pub tolerance: Tolerance,
    pub max_cells: usize,
    /// Interior points (in the original variable) used as initial cell edges.
    pub breakpoints: Vec<f64>,
}

impl Integrator {
    pub fn new(tolerance: Tolerance) -> Self {
        Self {
            tolerance,
            max_cells: 4000,
            breakpoints: Vec::new(),
        }
    }

    pub fn max_cells(mut self, max_cells: usize) -> Self {
        self.max_cells = max_cells;
        self
    }

    pub fn breakpoints(mut self, points: impl IntoIterator<Item = f64>) -> Self {
        self.breakpoints = points.into_iter().collect();
        self
    }

    /// Integrate a plain scalar function.
    pub fn integrate<F>(&self, domain: Domain, f: F) -> Result<QuadratureResult>
    where
        F: Fn(f64) -> f64,
    {
        self.integrate_with_inner_error(domain, |x| (f(x), 0.0))
    }

    /// Integrate `f` where each evaluation carries its own error bound (as
    /// produced by an inner quadrature). The returned estimate adds the outer
    /// rule error to the integral of the inner errors.
    pub fn integrate_with_inner_error<F>(&self, domain: Domain, f: F) -> Result<QuadratureResult>
    where
        F: Fn(f64) -> (f64, f64),
    {
        domain.validate()?;
        match domain {
            Domain::Finite { lower, upper } => {
                if lower == upper {
                    return Ok(QuadratureResult {
                        value: 0.0,
                        error_estimate: 0.0,
                        cells_evaluated: 0,
                    });
                }
                let (lo, hi, sign) = if lower < upper {
                    (lower, upper, 1.0)
                } else {
                    (upper, lower, -1.0)
                };
                let edges = self.edges(lo, hi, |x| x);
                let mut res = self.run(&edges, &f)?;
                res.value *= sign;
                Ok(res)
            }
            Domain::SemiInfinite { start, scale } => {
                let map = |t: f64| start + scale * t / (1.0 - t);
                let g = |t: f64| {
                    let one_minus = 1.0 - t;
                    let jac = scale / (one_minus * one_minus);
                    let (v, e) = f(map(t));
                    let (v, e) = (v * jac, e * jac);
                    // integrands here all decay; an overflowed Jacobian times an underflowed
                    // value is treated as zero
                    if v.is_nan() {
                        (0.0, 0.0)
                    } else {
                        (v, e)
                    }
                };
                let to_t = |x: f64| {
                    let s = (x - start) / scale;
                    s / (1.0 + s)
                };
                let edges = self.edges(0.0, 1.0, to_t);
                self.run(&edges, &g)
            }
        }
    }

    fn edges(&self, lo: f64, hi: f64, to_unit: impl Fn(f64) -> f64) -> Vec<f64> {
        let mut edges = vec![lo];
        let mut interior: Vec<f64> = self
            .breakpoints
            .iter()
            .map(|&b| to_unit(b))
            .filter(|t| t.is_finite() && *t > lo && *t < hi)
            .collect();
        interior.sort_by(f64::total_cmp);
        interior.dedup();
        edges.extend(interior);
        edges.push(hi);
        edges
    }

    fn run<F>(&self, edges: &[f64], f: &F) -> Result<QuadratureResult>
    where
        F: Fn(f64) -> (f64, f64),
    {
        let mut heap = BinaryHeap::new();
        for w in edges.windows(2) {
            heap.push(gauss_kronrod_cell(f, w[0], w[1]));
        }
        let mut cells = heap.len();
        loop {
            let (value, error) = totals(&heap);
            if !error.is_finite() || !value.is_finite() {
                return Err(Error::QuadratureBudget {
                    partial: value,
                    error_estimate: f64::INFINITY,
                    cells,
                });
            }
            if error <= self.tolerance.target(value) {
                return Ok(QuadratureResult {
                    value,
                    error_estimate: error,
                    cells_evaluated: cells,
                });
            }
            let worst = *heap.peek().expect("at least one cell");
            if worst.exhausted {
                // every remaining cell sits at its roundoff floor; further bisection cannot
                // improve the estimate, so the honest bound is returned as is
                return Ok(QuadratureResult {
                    value,
                    error_estimate: error,
                    cells_evaluated: cells,
                });
            }
            if cells + 2 > self.max_cells {
                return Err(Error::QuadratureBudget {
                    partial: value,
                    error_estimate: error,
                    cells,
                });
            }
            heap.pop();
            let mid = 0.5 * (worst.lower + worst.upper);
            if !(mid > worst.lower && mid < worst.upper)
                || (worst.upper - worst.lower) <= 64.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE)
            {
                heap.push(Cell {
                    exhausted: true,
                    ..worst
                });
                continue;
            }
            heap.push(gauss_kronrod_cell(f, worst.lower, mid));
            heap.push(gauss_kronrod_cell(f, mid, worst.upper));
            cells += 2;
        }
    }
}

fn totals(heap: &BinaryHeap<Cell>) -> (f64, f64) {
    // heap iteration order is a function of the push/pop history, hence deterministic
    let value: NeumaierSum = heap.iter().map(|c| c.value).collect();
    let error: NeumaierSum = heap.iter().map(|c| c.error).collect();
    (value.value(), error.value())
}

fn gauss_kronrod_cell<F>(f: &F, lower: f64, upper: f64) -> Cell
where
    F: Fn(f64) -> (f64, f64),
{
    let center = 0.5 * (lower + upper);
    let half = 0.5 * (upper - lower);
    let (fc, ec) = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = fc.abs() * WGK[10];
    let mut inner_err = ec * WGK[10];
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let (f1, e1) = f(center - dx);
        let (f2, e2) = f(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        inner_err += WGK[j] * (e1 + e2);
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = kronrod * 0.5;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let result = kronrod * half;
    let resabs = abs_sum * half.abs();
    let resasc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if resasc != 0.0 && err != 0.0 {
        err = resasc * (200.0 * err / resasc).powf(1.5).min(1.0);
    }
    let round_floor = 50.0 * f64::EPSILON * resabs;
    let mut at_floor = false;
    if resabs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) && err <= round_floor {
        err = round_floor;
        at_floor = true;
    }
    Cell {
        lower,
        upper,
        value: result,
        error: err + inner_err * half.abs(),
        exhausted: at_floor && inner_err == 0.0,
    }
}

/// One-shot adaptive integration over a 1D domain.
pub fn integrate<F>(f: F, domain: Domain, tol: Tolerance) -> Result<QuadratureResult>
where
    F: Fn(f64) -> f64,
{
    Integrator::new(tol).integrate(domain, f)
}

/// Adaptive integration over a 1–3 dimensional box by nested 1D rules.
///
/// `f` receives a slice with one coordinate per domain, outermost first.
pub fn integrate_box<F>(f: F, domains: &[Domain], tol: Tolerance) -> Result<QuadratureResult>
where
    F: Fn(&[f64]) -> f64,
{
    if domains.is_empty() || domains.len() > 3 {
        return Err(Error::InvalidInput(format!(
            "box quadrature supports 1 to 3 dimensions, got {}",
            domains.len()
        )));
    }
    nested(&f, domains, tol, &[0.0; 3], 0)
}

fn nested<F>(
    f: &F,
    domains: &[Domain],
    tol: Tolerance,
    point: &[f64; 3],
    depth: usize,
) -> Result<QuadratureResult>
where
    F: Fn(&[f64]) -> f64,
{
    let dims = domains.len();
    let base = *point;
    let failure = std::cell::RefCell::new(None);
    let inner_tol = tol.tightened(0.1);
    let integrator = Integrator::new(tol);
    let total_cells = std::cell::Cell::new(0usize);
    let res = integrator.integrate_with_inner_error(domains[depth], |x| {
        let mut p = base;
        p[depth] = x;
        if depth + 1 == dims {
            total_cells.set(total_cells.get() + 1);
            (f(&p[..dims]), 0.0)
        } else {
            match nested(f, domains, inner_tol, &p, depth + 1) {
                Ok(r) => {
                    total_cells.set(total_cells.get() + r.cells_evaluated);
                    (r.value, r.error_estimate)
                }
                Err(e) => {
                    let partial = match &e {
                        Error::QuadratureBudget {
                            partial,
                            error_estimate,
                            cells,
                        } => {
                            total_cells.set(total_cells.get() + cells);
                            (*partial, *error_estimate)
                        }
                        _ => (f64::NAN, f64::INFINITY),
                    };
                    failure.borrow_mut().get_or_insert(e);
                    partial
                }
            }
        }
    });
    let mut res = res?;
    if depth + 1 < dims {
        res.cells_evaluated = total_cells.get() / POINTS_PER_CELL.max(1);
    }
    if let Some(e) = failure.into_inner() {
        // an inner budget failure is tolerable if its error still fits the outer target
        if res.error_estimate > tol.target(res.value) {
            return Err(e);
        }
    }
    Ok(res)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| x * x, Domain::finite(0.0, 1.0), Tolerance::relative(1e-13)).unwrap();
        assert_relative_eq!(r.value, 1.0 / 3.0, max_relative = 1e-15);
        assert_eq!(r.cells_evaluated, 1);
        // a tolerance below the roundoff floor returns the honest floor estimate
        let r = integrate(|x| x * x, Domain::finite(0.0, 1.0), Tolerance::relative(1e-17)).unwrap();
        assert!(r.error_estimate > 0.0 && r.error_estimate < 1e-14);
    }

    #[test]
    fn mapped_gamma_integral() {
        let r = integrate(
            |k| k.powi(3) * (-k).exp(),
            Domain::semi_infinite(0.0),
            Tolerance::relative(1e-12),
        )
        .unwrap();
        assert_relative_eq!(r.value, 6.0, max_relative = 1e-12);
    }

    #[test]
    fn reversed_bounds_flip_sign() {
        let r = integrate(|x| x.cos(), Domain::finite(PI / 2.0, 0.0), Tolerance::default()).unwrap();
        assert_relative_eq!(r.value, -1.0, max_relative = 1e-12);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let r = integrate(|x| 1.0 / x.sqrt(), Domain::finite(0.0, 1.0), Tolerance::relative(1e-10))
            .unwrap();
        assert_relative_eq!(r.value, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn budget_exhaustion_reports_partial_result() {
        let err = Integrator::new(Tolerance::relative(1e-14))
            .max_cells(5)
            .integrate(Domain::finite(0.0, 1.0), |x| (50.0 * x).sin().abs())
            .unwrap_err();
        match err {
            Error::QuadratureBudget {
                partial,
                error_estimate,
                cells,
            } => {
                assert!(partial.is_finite());
                assert!(error_estimate > 0.0);
                assert!(cells <= 5);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn box_integrals_in_two_and_three_dimensions() {
        let r2 = integrate_box(
            |p| p[0] * p[1],
            &[Domain::finite(0.0, 1.0), Domain::finite(0.0, 2.0)],
            Tolerance::relative(1e-12),
        )
        .unwrap();
        assert_relative_eq!(r2.value, 1.0, max_relative = 1e-12);
        let r3 = integrate_box(
            |p| (-(p[0] + p[1] + p[2])).exp(),
            &[
                Domain::semi_infinite(0.0),
                Domain::semi_infinite(0.0),
                Domain::finite(0.0, 1.0),
            ],
            Tolerance::relative(1e-9),
        )
        .unwrap();
        assert_relative_eq!(r3.value, 1.0 - (-1.0f64).exp(), max_relative = 1e-9);
    }

    #[test]
    fn breakpoints_are_respected() {
        let r = Integrator::new(Tolerance::relative(1e-13))
            .breakpoints([1.0])
            .integrate(Domain::finite(0.0, 2.0), |x| if x < 1.0 { 1.0 } else { 3.0 })
            .unwrap();
        assert_relative_eq!(r.value, 4.0, max_relative = 1e-14);
    }

    #[test]
    fn deterministic_bits() {
        let f = |x: f64| (x * 7.3).sin() * (-x).exp();
        let a = integrate(f, Domain::semi_infinite(0.0), Tolerance::relative(1e-12)).unwrap();
        let b = integrate(f, Domain::semi_infinite(0.0), Tolerance::relative(1e-12)).unwrap();
        assert_eq!(a.value.to_bits(), b.value.to_bits());
        assert_eq!(a.error_estimate.to_bits(), b.error_estimate.to_bits());
    }
}
