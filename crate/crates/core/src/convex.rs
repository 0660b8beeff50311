//! Cost functions on the half-line and their Legendre-Fenchel conjugates.
//!
//! The closed-form family is
//!
//! ```text
//! c_{A,α}(x) = x²/2                               for x ≤ A
//!            = A^{2-α} x^α / α + A² (α-2)/(2α)      for x ≥ A
//! ```
//!
//! whose conjugate is again a member of the family, `c_{A,α}* = c_{A,β}` with
//! `1/α + 1/β = 1`. Conjugates here are always computed numerically from the
//! primal; the closed-form dual is only used where a caller asks for it.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::quad::{golden_max, linspace, logspace};

/// Points per primal grid built by [`CostFunction::conjugate`].
const PRIMAL_POINTS: usize = 4096;
const GOLDEN_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GridSpacing {
    Linear,
    Log,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CostKind {
    /// `c_{A,α}`.
    ClosedForm { a: f64, alpha: f64 },
    /// `coef · x^exponent`.
    Power { coef: f64, exponent: f64 },
    /// Linear interpolation of convex samples with `c(0) = 0`.
    Sampled { grid: Vec<f64>, values: Vec<f64> },
}

/// A convex, nondecreasing, superlinear cost on `[0, ∞)` with `c(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CostFunction {
    kind: CostKind,
}

/// Result of evaluating a cost, flagged when a sampled cost was extrapolated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostEval {
    pub value: f64,
    pub extrapolated: bool,
}

fn convexity_tolerance(values: &[f64]) -> f64 {
    let max = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    1e-12 * (1.0 + max)
}

/// Largest violation of discrete convexity: how far a node sits above the
/// chord through its neighbours. Nonpositive for convex samples.
pub fn convexity_defect(grid: &[f64], values: &[f64]) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for k in 1..grid.len().saturating_sub(1) {
        let (x0, x1, x2) = (grid[k - 1], grid[k], grid[k + 1]);
        let chord = ((x2 - x1) * values[k - 1] + (x1 - x0) * values[k + 1]) / (x2 - x0);
        worst = worst.max(values[k] - chord);
    }
    worst
}

impl CostFunction {
    /// `c_{A,α}` for `A > 0` and `α > 1`.
    pub fn closed_form(a: f64, alpha: f64) -> Result<Self> {
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Argument(format!("A must be positive, got {a}")));
        }
        if !(alpha > 1.0 && alpha.is_finite()) {
            return Err(Error::Argument(format!("alpha must exceed 1, got {alpha}")));
        }
        Ok(CostFunction {
            kind: CostKind::ClosedForm { a, alpha },
        })
    }

    pub fn power(coef: f64, exponent: f64) -> Result<Self> {
        if !(coef > 0.0 && coef.is_finite()) || !(exponent > 1.0 && exponent.is_finite()) {
            return Err(Error::Argument(format!(
                "power cost needs coef > 0 and exponent > 1, got {coef}, {exponent}"
            )));
        }
        Ok(CostFunction {
            kind: CostKind::Power { coef, exponent },
        })
    }

    /// A cost given by samples; the grid must start at 0 with a zero ordinate.
    pub fn sampled(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != values.len() {
            return Err(Error::Argument(
                "sampled cost needs at least two (x, c(x)) pairs".into(),
            ));
        }
        if grid[0] != 0.0 || values[0].abs() > 1e-12 {
            return Err(Error::Argument("sampled cost must satisfy c(0) = 0".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Argument("cost grid must be strictly increasing".into()));
        }
        let tol = convexity_tolerance(&values);
        if values.windows(2).any(|w| w[1] < w[0] - tol) {
            return Err(Error::Argument("sampled cost must be nondecreasing".into()));
        }
        if convexity_defect(&grid, &values) > tol {
            return Err(Error::Argument("sampled cost is not convex on its grid".into()));
        }
        Ok(CostFunction {
            kind: CostKind::Sampled { grid, values },
        })
    }

    pub fn kind(&self) -> &CostKind {
        &self.kind
    }

    pub fn eval(&self, x: f64) -> Result<CostEval> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("cost evaluated at negative x = {x}")));
        }
        let value = match &self.kind {
            CostKind::ClosedForm { a, alpha } => c_a_alpha(*a, *alpha, x),
            CostKind::Power { coef, exponent } => coef * x.powf(*exponent),
            CostKind::Sampled { grid, values } => {
                let n = grid.len();
                if x > grid[n - 1] {
                    let slope = (values[n - 1] - values[n - 2]) / (grid[n - 1] - grid[n - 2]);
                    return Ok(CostEval {
                        value: values[n - 1] + slope * (x - grid[n - 1]),
                        extrapolated: true,
                    });
                }
                let k = grid.partition_point(|&g| g <= x).clamp(1, n - 1);
                let (x0, x1) = (grid[k - 1], grid[k]);
                let th = (x - x0) / (x1 - x0);
                values[k - 1] + th * (values[k] - values[k - 1])
            }
        };
        Ok(CostEval {
            value,
            extrapolated: false,
        })
    }

    pub fn value(&self, x: f64) -> Result<f64> {
        self.eval(x).map(|e| e.value)
    }

    fn value_unchecked(&self, x: f64) -> f64 {
        self.eval(x).map(|e| e.value).unwrap_or(f64::INFINITY)
    }

    /// Right derivative.
    pub fn derivative(&self, x: f64) -> f64 {
        match &self.kind {
            CostKind::ClosedForm { a, alpha } => {
                if x <= *a {
                    x
                } else {
                    a.powf(2.0 - alpha) * x.powf(alpha - 1.0)
                }
            }
            CostKind::Power { coef, exponent } => coef * exponent * x.powf(exponent - 1.0),
            CostKind::Sampled { grid, values } => {
                let n = grid.len();
                let k = grid.partition_point(|&g| g <= x).clamp(1, n - 1);
                (values[k] - values[k - 1]) / (grid[k] - grid[k - 1])
            }
        }
    }

    /// The closed-form conjugate when one exists (`c_{A,β}` for `c_{A,α}`).
    pub fn closed_dual(&self) -> Option<CostFunction> {
        match &self.kind {
            CostKind::ClosedForm { a, alpha } => Some(CostFunction {
                kind: CostKind::ClosedForm {
                    a: *a,
                    alpha: alpha / (alpha - 1.0),
                },
            }),
            CostKind::Power { coef, exponent } => {
                // sup_y xy - k y^p = (p-1) k^{-1/(p-1)} (x/p)^{p/(p-1)}
                let q = exponent / (exponent - 1.0);
                let k = (exponent - 1.0) * coef.powf(-1.0 / (exponent - 1.0)) * exponent.powf(-q);
                Some(CostFunction {
                    kind: CostKind::Power {
                        coef: k,
                        exponent: q,
                    },
                })
            }
            CostKind::Sampled { .. } => None,
        }
    }

    /// `c(x)/x` increases between the two last grid points of `grid`.
    pub fn is_superlinear_on(&self, grid: &[f64]) -> bool {
        let n = grid.len();
        if n < 2 || grid[n - 2] <= 0.0 {
            return false;
        }
        let r = |x: f64| self.value_unchecked(x) / x;
        r(grid[n - 1]) > r(grid[n - 2])
    }

    /// `c*(x) = sup_{y ≥ 0} (xy - c(y))` at a single point, with a flag that is
    /// set when a sampled cost cannot recover slope `x` (true value `+∞`).
    pub fn conjugate_at(&self, x: f64) -> Result<(f64, bool)> {
        if !(x >= 0.0) {
            return Err(Error::Domain(format!("conjugate evaluated at negative x = {x}")));
        }
        match &self.kind {
            CostKind::Sampled { grid, values } => {
                let n = grid.len();
                let last_slope = (values[n - 1] - values[n - 2]) / (grid[n - 1] - grid[n - 2]);
                let best = grid
                    .iter()
                    .zip(values)
                    .map(|(y, c)| x * y - c)
                    .fold(f64::NEG_INFINITY, f64::max);
                Ok((best, x > last_slope))
            }
            _ => {
                let g = |y: f64| x * y - self.value_unchecked(y);
                let mut hi = 1.0f64;
                while g(2.0 * hi) > g(hi) && hi < 1e300 {
                    hi *= 2.0;
                }
                let (_, v) = golden_max(0.0, 2.0 * hi, GOLDEN_ITERS, g);
                Ok((v.max(0.0), false))
            }
        }
    }

    /// Numerical conjugate on `dual_grid`.
    ///
    /// Closed-form costs get a primal grid wide enough to recover every
    /// requested slope, and each grid maximizer is polished by a continuous
    /// search in its bracketing cell. Sampled costs are transformed on their
    /// own grid.
    pub fn conjugate(&self, dual_grid: &[f64]) -> Result<ConjugateTable> {
        check_dual_grid(dual_grid)?;
        match &self.kind {
            CostKind::Sampled { grid, values } => {
                let primal = ConvexSamples::new(grid.clone(), values.clone(), GridSpacing::Linear)?;
                legendre_transform(&primal, dual_grid)
            }
            _ => {
                let x_max = dual_grid[dual_grid.len() - 1].max(1e-12);
                let y_max = self.slope_preimage(1.5 * x_max).max(1e-9);
                let x_min = dual_grid.iter().cloned().find(|&x| x > 0.0).unwrap_or(x_max);
                let y_min = self.slope_preimage(x_min).max(y_max * 1e-15);
                let (grid, spacing) = if y_max / y_min > 1e3 {
                    let mut g = vec![0.0];
                    g.extend(logspace(0.1 * y_min, y_max, PRIMAL_POINTS - 1));
                    (g, GridSpacing::Log)
                } else {
                    (linspace(0.0, y_max, PRIMAL_POINTS), GridSpacing::Linear)
                };
                let values = grid.iter().map(|&y| self.value_unchecked(y)).collect();
                let primal = ConvexSamples::new(grid, values, spacing)?;
                legendre_transform_refined(&primal, dual_grid, &|y| self.value_unchecked(y))
            }
        }
    }

    /// Smallest `y` with `c'(y) ≥ s`, found by doubling and bisection.
    fn slope_preimage(&self, s: f64) -> f64 {
        let mut hi = 1.0;
        while self.derivative(hi) < s && hi < 1e300 {
            hi *= 2.0;
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if self.derivative(mid) < s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        hi
    }
}

fn c_a_alpha(a: f64, alpha: f64, x: f64) -> f64 {
    if x <= a {
        0.5 * x * x
    } else {
        a.powf(2.0 - alpha) * x.powf(alpha) / alpha + a * a * (alpha - 2.0) / (2.0 * alpha)
    }
}

fn check_dual_grid(dual_grid: &[f64]) -> Result<()> {
    if dual_grid.is_empty() {
        return Err(Error::Argument("empty dual grid".into()));
    }
    if dual_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Argument("dual grid must be strictly increasing".into()));
    }
    Ok(())
}

/// Samples of a convex function on an increasing grid.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexSamples {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub spacing: GridSpacing,
}

impl ConvexSamples {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, spacing: GridSpacing) -> Result<Self> {
        if grid.is_empty() || grid.len() != values.len() {
            return Err(Error::Argument("empty or mismatched primal grid".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Argument("primal grid must be strictly increasing".into()));
        }
        Ok(ConvexSamples {
            grid,
            values,
            spacing,
        })
    }

    pub fn from_fn(grid: Vec<f64>, spacing: GridSpacing, f: impl Fn(f64) -> f64) -> Result<Self> {
        let values = grid.iter().map(|&y| f(y)).collect();
        Self::new(grid, values, spacing)
    }

    pub fn is_convex(&self) -> bool {
        convexity_defect(&self.grid, &self.values) <= convexity_tolerance(&self.values)
    }
}

/// Tabulated conjugate `f*(x) = max_y (x·y - f(y))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConjugateTable {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Primal maximizer for each dual point.
    pub argmax: Vec<f64>,
    #[serde(skip)]
    pub argmax_index: Vec<usize>,
    /// The maximizer sits on the last primal node: the requested slope is not
    /// recoverable from the primal grid and the value is only a lower bound.
    pub saturated: Vec<bool>,
    pub primal_spacing: GridSpacing,
    /// The convexity diagnostic failed and every entry used a full scan.
    pub full_scan: bool,
}

impl ConjugateTable {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn any_saturated(&self) -> bool {
        self.saturated.iter().any(|&s| s)
    }

    /// Linear interpolation in the table; `None` outside its range.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let n = self.grid.len();
        if n == 0 || x < self.grid[0] || x > self.grid[n - 1] {
            return None;
        }
        if n == 1 {
            return Some(self.values[0]);
        }
        let k = self.grid.partition_point(|&g| g <= x).clamp(1, n - 1);
        let (x0, x1) = (self.grid[k - 1], self.grid[k]);
        let th = (x - x0) / (x1 - x0);
        Some(self.values[k - 1] + th * (self.values[k] - self.values[k - 1]))
    }
}

/// Discrete conjugate of `primal` on `dual_grid`.
///
/// For convex input the maximizer index is nondecreasing in the dual
/// variable, so one forward sweep visits each primal node once. Inputs that
/// fail the convexity diagnostic fall back to a full scan per dual point.
pub fn legendre_transform(primal: &ConvexSamples, dual_grid: &[f64]) -> Result<ConjugateTable> {
    transform(primal, dual_grid, None)
}

/// Like [`legendre_transform`], then maximizes `x·y - exact(y)` continuously
/// on the cell pair around each grid maximizer.
pub fn legendre_transform_refined(
    primal: &ConvexSamples,
    dual_grid: &[f64],
    exact: &dyn Fn(f64) -> f64,
) -> Result<ConjugateTable> {
    transform(primal, dual_grid, Some(exact))
}

fn transform(
    primal: &ConvexSamples,
    dual_grid: &[f64],
    exact: Option<&dyn Fn(f64) -> f64>,
) -> Result<ConjugateTable> {
    check_dual_grid(dual_grid)?;
    let (ys, fs) = (&primal.grid, &primal.values);
    let n = ys.len();
    let full_scan = !primal.is_convex();
    let mut out = ConjugateTable {
        grid: dual_grid.to_vec(),
        values: Vec::with_capacity(dual_grid.len()),
        argmax: Vec::with_capacity(dual_grid.len()),
        argmax_index: Vec::with_capacity(dual_grid.len()),
        saturated: Vec::with_capacity(dual_grid.len()),
        primal_spacing: primal.spacing,
        full_scan,
    };
    let mut j = 0usize;
    for &x in dual_grid {
        if full_scan {
            j = 0;
            let mut best = x * ys[0] - fs[0];
            for k in 1..n {
                let v = x * ys[k] - fs[k];
                if v > best {
                    best = v;
                    j = k;
                }
            }
        } else {
            while j + 1 < n && x * ys[j + 1] - fs[j + 1] >= x * ys[j] - fs[j] {
                j += 1;
            }
        }
        let mut value = x * ys[j] - fs[j];
        let mut arg = ys[j];
        if let Some(f) = exact {
            let lo = ys[j.saturating_sub(1)];
            let hi = ys[(j + 1).min(n - 1)];
            if hi > lo {
                let (y, v) = golden_max(lo, hi, GOLDEN_ITERS, |y| x * y - f(y));
                if v > value {
                    value = v;
                    arg = y;
                }
            }
        }
        out.values.push(value);
        out.argmax.push(arg);
        out.argmax_index.push(j);
        out.saturated.push(n > 1 && j == n - 1);
    }
    Ok(out)
}

/// One row of the (H) diagnostic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthRatio {
    pub k: f64,
    /// Sampled `sup c(kx)/c(x)`.
    pub n_cost: f64,
    /// Sampled `sup c*(kx)/c*(x)`.
    pub n_conjugate: f64,
    /// `max(n_cost, n_conjugate)`: a lower bound for the true `n(k)`.
    pub n: f64,
    pub finite: bool,
    /// Sample points dropped because a sampled cost had to extrapolate.
    pub skipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionH {
    pub x_min: f64,
    pub x_max: f64,
    pub points: usize,
    pub rows: Vec<GrowthRatio>,
    pub all_finite: bool,
}

/// Samples `n(k)` of the doubling condition `c(kx) ≤ n(k) c(x)`,
/// `c*(kx) ≤ n(k) c*(x)` over log-spaced `x ∈ [x_min, x_max]`.
pub fn check_condition_h(
    c: &CostFunction,
    ks: &[f64],
    x_min: f64,
    x_max: f64,
    points: usize,
) -> Result<ConditionH> {
    if ks.iter().any(|&k| !(k > 0.0)) {
        return Err(Error::Argument("every k must be positive".into()));
    }
    if !(x_min > 0.0 && x_max > x_min) || points < 2 {
        return Err(Error::Argument("need 0 < x_min < x_max and at least two points".into()));
    }
    let xs = logspace(x_min, x_max, points);
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let (mut n_cost, mut n_conj) = (0.0f64, 0.0f64);
        let mut skipped = 0;
        for &x in &xs {
            let (cx, ckx) = (c.eval(x)?, c.eval(k * x)?);
            if cx.extrapolated || ckx.extrapolated {
                skipped += 1;
                continue;
            }
            if cx.value > 0.0 {
                n_cost = n_cost.max(ckx.value / cx.value);
            }
            let ((sx, sat_x), (skx, sat_kx)) = (c.conjugate_at(x)?, c.conjugate_at(k * x)?);
            if sat_x || sat_kx {
                skipped += 1;
                continue;
            }
            if sx > 0.0 {
                n_conj = n_conj.max(skx / sx);
            }
        }
        rows.push(GrowthRatio {
            k,
            n_cost,
            n_conjugate: n_conj,
            n: n_cost.max(n_conj),
            finite: n_cost.is_finite() && n_conj.is_finite(),
            skipped,
        });
    }
    let all_finite = rows.iter().all(|r| r.finite);
    Ok(ConditionH {
        x_min,
        x_max,
        points,
        rows,
        all_finite,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        if b == 0.0 {
            a.abs()
        } else {
            ((a - b) / b).abs()
        }
    }

    #[test]
    fn eval_cost_examples() {
        let c = CostFunction::closed_form(1.0, 2.0).unwrap();
        assert_eq!(c.value(3.0).unwrap(), 4.5);
        // Both branches written out independently of c_a_alpha.
        let c = CostFunction::closed_form(1.0, 1.5).unwrap();
        let oracle = 2f64.powf(1.5) / 1.5 + (1.5 - 2.0) / (2.0 * 1.5);
        assert!((c.value(2.0).unwrap() - oracle).abs() < 1e-14);
        assert!((oracle - 1.71895).abs() < 1e-5);
        let c = CostFunction::closed_form(0.5, 1.2).unwrap();
        assert_eq!(c.value(0.0).unwrap(), 0.0);
    }

    #[test]
    fn negative_argument_is_domain_error() {
        let c = CostFunction::closed_form(1.0, 1.5).unwrap();
        assert!(matches!(c.eval(-1.0), Err(Error::Domain(_))));
    }

    #[test]
    fn branches_glue_in_value_and_slope() {
        for &(a, alpha) in &[(0.5, 1.2), (1.0, 1.5), (2.0, 3.0)] {
            let c = CostFunction::closed_form(a, alpha).unwrap();
            let h = 1e-7 * a;
            let left = c.value(a - h).unwrap();
            let right = c.value(a + h).unwrap();
            assert!((c.value(a).unwrap() - 0.5 * a * a).abs() < 1e-14);
            let d_left = (c.value(a).unwrap() - left) / h;
            let d_right = (right - c.value(a).unwrap()) / h;
            assert!((d_left - d_right).abs() < 1e-5, "{a} {alpha}");
        }
    }

    #[test]
    fn sampled_cost_extrapolates_with_flag() {
        let grid = vec![0.0, 1.0, 2.0];
        let c = CostFunction::sampled(grid, vec![0.0, 0.5, 2.0]).unwrap();
        let e = c.eval(1.5).unwrap();
        assert!(!e.extrapolated && (e.value - 1.25).abs() < 1e-15);
        let e = c.eval(3.0).unwrap();
        assert!(e.extrapolated && (e.value - 3.5).abs() < 1e-15);
        assert!(CostFunction::sampled(vec![0.0, 1.0, 2.0], vec![0.0, 2.0, 2.5]).is_err());
        assert!(CostFunction::sampled(vec![0.0, 1.0], vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn quadratic_is_self_conjugate_on_a_grid() {
        let ys = linspace(0.0, 10.0, 2001);
        let primal = ConvexSamples::from_fn(ys, GridSpacing::Linear, |y| 0.5 * y * y).unwrap();
        let xs = linspace(0.0, 10.0, 1001);
        let t = legendre_transform(&primal, &xs).unwrap();
        let h: f64 = 10.0 / 2000.0;
        for (x, v) in xs.iter().zip(&t.values) {
            assert!((v - 0.5 * x * x).abs() <= h * h / 8.0 + 1e-12);
        }
        assert!(!t.full_scan);
    }

    #[test]
    fn entropy_conjugate_is_exponential() {
        let mut ys = vec![0.0];
        ys.extend(logspace(1e-6, 1e3, 8192));
        let f = |y: f64| if y == 0.0 { 0.0 } else { y * y.ln() - y };
        let primal = ConvexSamples::from_fn(ys, GridSpacing::Log, f).unwrap();
        let xs = linspace(0.0, 5.0, 501);
        let t = legendre_transform(&primal, &xs).unwrap();
        for ((x, v), y) in xs.iter().zip(&t.values).zip(&t.argmax) {
            assert!(rel(*v, x.exp()) < 1e-5, "x={x} v={v}");
            assert!(rel(*y, x.exp()) < 5e-3);
        }
    }

    #[test]
    fn closed_form_duality() {
        let c = CostFunction::closed_form(1.0, 1.5).unwrap();
        let dual = CostFunction::closed_form(1.0, 3.0).unwrap();
        let xs = linspace(0.0, 10.0, 2000);
        let t = c.conjugate(&xs).unwrap();
        for (x, v) in xs.iter().zip(&t.values) {
            assert!(rel(*v, dual.value(*x).unwrap()) < 1e-8, "x={x}");
        }
        assert!(!t.any_saturated());
    }

    #[test]
    fn fallback_scan_on_nonconvex_input() {
        let ys = linspace(0.0, 4.0, 401);
        let primal = ConvexSamples::from_fn(ys.clone(), GridSpacing::Linear, |y| (3.0 * y).sin()).unwrap();
        let xs = linspace(0.0, 2.0, 21);
        let t = legendre_transform(&primal, &xs).unwrap();
        assert!(t.full_scan);
        for (x, v) in xs.iter().zip(&t.values) {
            let brute = ys.iter().map(|y| x * y - (3.0 * y).sin()).fold(f64::MIN, f64::max);
            assert_eq!(*v, brute);
        }
    }

    #[test]
    fn empty_grids_are_rejected() {
        let c = CostFunction::closed_form(1.0, 2.0).unwrap();
        assert!(matches!(c.conjugate(&[]), Err(Error::Argument(_))));
        assert!(ConvexSamples::new(vec![], vec![], GridSpacing::Linear).is_err());
    }

    #[test]
    fn condition_h_examples() {
        let q = CostFunction::closed_form(1.0, 2.0).unwrap();
        let h = check_condition_h(&q, &[3.0, 1.0], 1e-3, 1e3, 401).unwrap();
        assert!((h.rows[0].n_cost - 9.0).abs() < 1e-9);
        assert!((h.rows[0].n_conjugate - 9.0).abs() < 1e-6);
        assert!((h.rows[1].n - 1.0).abs() < 1e-6);
        assert!(h.all_finite);

        // Brute-force ratio sweep for c_{1,1.5}, k = 2, as the oracle.
        let c = CostFunction::closed_form(1.0, 1.5).unwrap();
        let brute = logspace(1e-3, 1e3, 20001)
            .into_iter()
            .map(|x| c.value(2.0 * x).unwrap() / c.value(x).unwrap())
            .fold(0.0f64, f64::max);
        let coarse = check_condition_h(&c, &[2.0], 1e-3, 1e3, 501).unwrap();
        let fine = check_condition_h(&c, &[2.0], 1e-3, 1e3, 2001).unwrap();
        for n in [coarse.rows[0].n_cost, fine.rows[0].n_cost] {
            assert!(n >= 2f64.powf(1.5) - 1e-12 && n <= 4.0 + 1e-12);
            assert!(rel(n, brute) < 0.01);
        }
    }

    #[test]
    fn superlinearity() {
        let c = CostFunction::closed_form(1.0, 1.5).unwrap();
        assert!(c.is_superlinear_on(&[10.0, 20.0]));
        let lin = CostFunction::sampled(vec![0.0, 1.0, 2.0], vec![0.0, 1.0, 2.0]).unwrap();
        assert!(!lin.is_superlinear_on(&[1.0, 2.0]));
    }
}
