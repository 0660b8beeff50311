//! Probability measures `e^{-V(x)} dx / Z` on the line.
//!
//! The measure is tabulated on a truncation window: cell masses come from
//! 16-point Gauss-Legendre panels, the CDF and survival function are stored
//! in log space, and the mass beyond the window is integrated separately so
//! that point queries far in the tails remain meaningful.

mod criteria;
mod profile;
mod rearrange;
mod sampled;

use std::sync::Arc;

use serde::Serialize;

pub use criteria::{
    bobkov_bound_check, bobkov_goetze, lemma41_ratio, BobkovRow, BobkovBoundReport, GoetzeReport,
    GoetzeStatus, Lemma41Report, Lemma41Row, Side,
};
pub use profile::{
    cheeger_constant, fit_lower_bound, i_f_profile, j_f, log_j_f, tilde_profile, CheegerReport,
    IfProfile, IsoProfile, LowerBoundFit,
};
pub use rearrange::{kolmogorov_distance, rearrange};
pub use sampled::SampledFunction;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::quad::{
    gl_log_integrate, linspace, log_add_exp, log_integral_to_infinity, log_sub_exp, Direction,
};

/// Default number of grid points.
pub const DEFAULT_POINTS: usize = 16384;
/// Truncate where the density drops below this fraction of its peak.
const DENSITY_CUTOFF: f64 = 1e-16;
/// Largest mass allowed outside the truncation window.
const OUTSIDE_MASS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub enum Potential {
    /// `x²/2`.
    Gauss,
    /// `|x|`.
    Laplace,
    /// `|x|^α`.
    ExpPower(f64),
    /// `|x| log(1 + x²)`.
    LogLog,
    Expr(Expr),
}

impl Potential {
    /// `V(x)`, `+∞` where a user expression is undefined.
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Potential::Gauss => 0.5 * x * x,
            Potential::Laplace => x.abs(),
            Potential::ExpPower(a) => x.abs().powf(*a),
            Potential::LogLog => x.abs() * (x * x).ln_1p(),
            Potential::Expr(e) => match e.eval(x) {
                Ok(v) if !v.is_nan() => v,
                _ => f64::INFINITY,
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            Potential::Gauss => "gauss".into(),
            Potential::Laplace => "exp".into(),
            Potential::ExpPower(a) => format!("exp_power:{a}"),
            Potential::LogLog => "loglog".into(),
            Potential::Expr(e) => e.to_string(),
        }
    }

    /// Convexity known in closed form.
    fn declared_log_concave(&self) -> Option<bool> {
        match self {
            Potential::Gauss | Potential::Laplace | Potential::LogLog => Some(true),
            Potential::ExpPower(a) => Some(*a >= 1.0),
            Potential::Expr(_) => None,
        }
    }

    /// Symmetric about 0 in closed form.
    fn is_even(&self) -> bool {
        !matches!(self, Potential::Expr(_))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Truncation {
    /// Window where the density exceeds `1e-16 · peak`; grid placed by a
    /// blend of arc length in `x` and in `V`.
    Auto { points: usize },
    /// Uniform grid on `[lo, hi]`.
    Explicit { lo: f64, hi: f64, points: usize },
}

impl Default for Truncation {
    fn default() -> Self {
        Truncation::Auto {
            points: DEFAULT_POINTS,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Measure1D {
    potential: Potential,
    grid: Arc<[f64]>,
    /// `V` at the nodes.
    v: Vec<f64>,
    log_z: f64,
    /// Normalized log mass of each cell `[x_k, x_{k+1}]`.
    log_cell: Vec<f64>,
    /// Normalized `log μ((-∞, x_k])`.
    log_cdf: Vec<f64>,
    /// Normalized `log μ([x_k, ∞))`.
    log_sf: Vec<f64>,
    /// Normalized log masses beyond each end of the window.
    log_left_tail: f64,
    log_right_tail: f64,
    /// Normalized quadrature weights `ρ_k ω_k` summing to 1.
    weights: Vec<f64>,
    median: f64,
    centre: f64,
    log_concave: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MeasureSummary {
    pub potential: String,
    pub lo: f64,
    pub hi: f64,
    pub points: usize,
    pub log_z: f64,
    pub median: f64,
    pub centre: f64,
    pub outside_mass: f64,
    pub log_concave: bool,
}

impl Measure1D {
    pub fn build(potential: Potential, truncation: Truncation) -> Result<Self> {
        if let Potential::ExpPower(a) = potential {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Argument(format!("exp_power needs alpha > 0, got {a}")));
            }
        }
        let w = |x: f64| -potential.eval(x);
        let (grid, lo, hi) = match truncation {
            Truncation::Explicit { lo, hi, points } => {
                if !(lo < hi) || !lo.is_finite() || !hi.is_finite() || points < 3 {
                    return Err(Error::Argument(
                        "explicit truncation needs finite lo < hi and at least 3 points".into(),
                    ));
                }
                (linspace(lo, hi, points), lo, hi)
            }
            Truncation::Auto { points } => {
                if points < 3 {
                    return Err(Error::Argument("a grid needs at least 3 points".into()));
                }
                let (lo, hi, peak) = auto_window(&potential)?;
                (arc_length_grid(&potential, lo, hi, peak, points), lo, hi)
            }
        };
        let n = grid.len();
        let v: Vec<f64> = grid.iter().map(|&x| potential.eval(x)).collect();
        if v.iter().all(|x| !x.is_finite()) {
            return Err(Error::Construction("density vanishes on the whole window".into()));
        }
        let raw_cells: Vec<f64> = grid
            .windows(2)
            .map(|c| gl_log_integrate(c[0], c[1], w))
            .collect();
        let raw_left = tail_mass(&potential, lo, Direction::Down)?;
        let raw_right = tail_mass(&potential, hi, Direction::Up)?;
        let mut acc = raw_left;
        let mut raw_cdf = Vec::with_capacity(n);
        raw_cdf.push(acc);
        for &c in &raw_cells {
            acc = log_add_exp(acc, c);
            raw_cdf.push(acc);
        }
        let log_z = log_add_exp(acc, raw_right);
        let outside = log_add_exp(raw_left, raw_right) - log_z;
        if outside.exp() > OUTSIDE_MASS {
            return Err(Error::Construction(format!(
                "mass outside the truncation window is {:.3e}",
                outside.exp()
            )));
        }
        let mut raw_sf = vec![0.0; n];
        let mut acc = raw_right;
        raw_sf[n - 1] = acc;
        for k in (0..n - 1).rev() {
            acc = log_add_exp(acc, raw_cells[k]);
            raw_sf[k] = acc;
        }
        let log_cell: Vec<f64> = raw_cells.iter().map(|c| c - log_z).collect();
        let log_cdf: Vec<f64> = raw_cdf.iter().map(|c| (c - log_z).min(0.0)).collect();
        let log_sf: Vec<f64> = raw_sf.iter().map(|c| (c - log_z).min(0.0)).collect();

        let mut weights: Vec<f64> = (0..n)
            .map(|k| {
                let left = if k > 0 { grid[k] - grid[k - 1] } else { 0.0 };
                let right = if k + 1 < n { grid[k + 1] - grid[k] } else { 0.0 };
                0.5 * (left + right) * (-v[k] - log_z).exp()
            })
            .collect();
        let total: f64 = weights.iter().sum();
        if !(total > 0.0) {
            return Err(Error::Construction("zero quadrature mass on the grid".into()));
        }
        weights.iter_mut().for_each(|w| *w /= total);

        let log_concave = match potential.declared_log_concave() {
            Some(b) => b,
            None => convex_on_grid(&grid, &v),
        };
        let mut m = Measure1D {
            potential,
            grid: grid.into(),
            v,
            log_z,
            log_cell,
            log_cdf,
            log_sf,
            log_left_tail: raw_left - log_z,
            log_right_tail: raw_right - log_z,
            weights,
            median: 0.0,
            centre: 0.0,
            log_concave,
        };
        m.median = if m.potential.is_even() {
            0.0
        } else {
            m.quantile_log(0.5f64.ln())
        };
        m.centre = if m.log_density(0.0) > f64::NEG_INFINITY && 0.0 > lo && 0.0 < hi {
            0.0
        } else {
            m.median
        };
        Ok(m)
    }

    pub fn potential(&self) -> &Potential {
        &self.potential
    }

    pub fn grid(&self) -> &Arc<[f64]> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn lo(&self) -> f64 {
        self.grid[0]
    }

    pub fn hi(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    pub fn log_z(&self) -> f64 {
        self.log_z
    }

    pub fn median(&self) -> f64 {
        self.median
    }

    /// Centre of the balls `B_r`: 0, or the median when 0 is outside the
    /// support.
    pub fn centre(&self) -> f64 {
        self.centre
    }

    pub fn is_log_concave(&self) -> bool {
        self.log_concave
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn potential_at_nodes(&self) -> &[f64] {
        &self.v
    }

    /// Largest grid spacing.
    pub fn max_cell(&self) -> f64 {
        self.grid.windows(2).map(|c| c[1] - c[0]).fold(0.0, f64::max)
    }

    pub fn summary(&self) -> MeasureSummary {
        MeasureSummary {
            potential: self.potential.name(),
            lo: self.lo(),
            hi: self.hi(),
            points: self.len(),
            log_z: self.log_z,
            median: self.median,
            centre: self.centre,
            outside_mass: log_add_exp(self.log_left_tail, self.log_right_tail).exp(),
            log_concave: self.log_concave,
        }
    }

    pub fn log_density(&self, x: f64) -> f64 {
        -self.potential.eval(x) - self.log_z
    }

    pub fn density(&self, x: f64) -> f64 {
        self.log_density(x).exp()
    }

    fn cell_of(&self, x: f64) -> usize {
        let n = self.grid.len();
        self.grid.partition_point(|&g| g <= x).clamp(1, n - 1) - 1
    }

    fn log_mass_between(&self, a: f64, b: f64) -> f64 {
        gl_log_integrate(a, b, |x| self.log_density(x))
    }

    fn cdf_direct(&self, x: f64) -> f64 {
        let (lo, hi) = (self.lo(), self.hi());
        if x < lo {
            return log_integral_to_infinity(|y| self.log_density(y), x, Direction::Down)
                .unwrap_or(f64::NEG_INFINITY);
        }
        let n = self.grid.len();
        if x >= hi {
            return log_add_exp(self.log_cdf[n - 1], self.log_mass_between(hi, x));
        }
        let k = self.cell_of(x);
        log_add_exp(self.log_cdf[k], self.log_mass_between(self.grid[k], x)).min(self.log_cdf[k + 1])
    }

    fn sf_direct(&self, x: f64) -> f64 {
        let (lo, hi) = (self.lo(), self.hi());
        if x > hi {
            return log_integral_to_infinity(|y| self.log_density(y), x, Direction::Up)
                .unwrap_or(f64::NEG_INFINITY);
        }
        if x <= lo {
            return log_add_exp(self.log_sf[0], self.log_mass_between(x, lo));
        }
        let k = self.cell_of(x);
        log_add_exp(self.log_sf[k + 1], self.log_mass_between(x, self.grid[k + 1])).min(self.log_sf[k])
    }

    /// `log μ((-∞, x])`; above one half it is taken from the complement.
    pub fn log_cdf(&self, x: f64) -> f64 {
        let d = self.cdf_direct(x);
        if d > 0.5f64.ln() {
            (-self.sf_direct(x).exp()).ln_1p()
        } else {
            d
        }
    }

    /// `log μ([x, ∞))`.
    pub fn log_sf(&self, x: f64) -> f64 {
        let d = self.sf_direct(x);
        if d > 0.5f64.ln() {
            (-self.cdf_direct(x).exp()).ln_1p()
        } else {
            d
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.log_cdf(x).exp()
    }

    pub fn sf(&self, x: f64) -> f64 {
        self.log_sf(x).exp()
    }

    /// `u` with `μ((-∞, u]) = e^{log_t}`.
    pub fn quantile_log(&self, log_t: f64) -> f64 {
        self.invert(log_t, true)
    }

    /// `v` with `μ([v, ∞)) = e^{log_t}`.
    pub fn upper_quantile_log(&self, log_t: f64) -> f64 {
        self.invert(log_t, false)
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::Domain(format!("quantile needs 0 < p < 1, got {p}")));
        }
        Ok(if p <= 0.5 {
            self.quantile_log(p.ln())
        } else {
            self.upper_quantile_log((-p).ln_1p())
        })
    }

    fn invert(&self, log_t: f64, lower: bool) -> f64 {
        let f = |x: f64| {
            if lower {
                self.log_cdf(x)
            } else {
                -self.log_sf(x)
            }
        };
        let target = if lower { log_t } else { -log_t };
        let n = self.grid.len();
        let table = |k: usize| {
            if lower {
                self.log_cdf[k]
            } else {
                -self.log_sf[k]
            }
        };
        // Bracket: table lookup inside the window, outward doubling beyond it.
        let (mut a, mut b) = if target < table(0) {
            let mut step = 1.0 + self.max_cell();
            let mut a = self.lo() - step;
            while f(a) > target {
                step *= 2.0;
                a = self.lo() - step;
                if step > 1e15 {
                    break;
                }
            }
            (a, self.lo())
        } else if target > table(n - 1) {
            let mut step = 1.0 + self.max_cell();
            let mut b = self.hi() + step;
            while f(b) < target {
                step *= 2.0;
                b = self.hi() + step;
                if step > 1e15 {
                    break;
                }
            }
            (self.hi(), b)
        } else {
            let (mut l, mut r) = (0usize, n);
            while l < r {
                let mid = (l + r) / 2;
                if table(mid) < target {
                    l = mid + 1;
                } else {
                    r = mid;
                }
            }
            let k = l.clamp(1, n - 1);
            (self.grid[k - 1], self.grid[k])
        };
        // Safeguarded Newton on the log CDF (or negated log SF).
        let mut x = 0.5 * (a + b);
        for _ in 0..100 {
            let fx = f(x) - target;
            if fx == 0.0 {
                return x;
            }
            if fx < 0.0 {
                a = x;
            } else {
                b = x;
            }
            let log_mass = if lower { self.log_cdf(x) } else { self.log_sf(x) };
            let slope = (self.log_density(x) - log_mass).exp();
            let mut next = x - fx / slope;
            if !(next > a && next < b) || !next.is_finite() {
                next = 0.5 * (a + b);
            }
            if (next - x).abs() <= 1e-14 * (1.0 + x.abs()) || b - a <= 1e-14 * (1.0 + x.abs()) {
                return next;
            }
            x = next;
        }
        x
    }

    /// `log μ(|x - c| > r)` for the ball centre `c`.
    pub fn log_outside_ball(&self, r: f64) -> f64 {
        let c = self.centre;
        if r <= 0.0 {
            return 0.0;
        }
        log_add_exp(self.log_cdf(c - r), self.log_sf(c + r))
    }

    /// Radius with `μ(|x - c| > r) = e^{log_s}`.
    pub fn radius_for_outside_mass(&self, log_s: f64) -> Result<f64> {
        if !(log_s < 0.0) {
            return Err(Error::Domain(format!("outside mass must be below 1, got {}", log_s.exp())));
        }
        let mut hi = 1.0;
        while self.log_outside_ball(hi) > log_s {
            hi *= 2.0;
            if hi > 1e15 {
                return Err(Error::NonIntegrable("no radius reaches the requested mass".into()));
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.log_outside_ball(mid) > log_s {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// Normalized `log ∫_a^b e^{V}` over `[a, b]`, i.e. `log ∫ dx/ρ`.
    pub fn log_inverse_density_integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return f64::NEG_INFINITY;
        }
        let w = |x: f64| self.potential.eval(x) + self.log_z;
        let panels = 64;
        let h = (b - a) / panels as f64;
        let mut acc = f64::NEG_INFINITY;
        for i in 0..panels {
            acc = log_add_exp(acc, gl_log_integrate(a + i as f64 * h, a + (i + 1) as f64 * h, w));
        }
        acc
    }

    /// Inverse-pair residual used by diagnostics: `|quantile(cdf(x)) - x|`.
    pub fn quantile_cdf_residual(&self, x: f64) -> f64 {
        let lc = self.log_cdf(x);
        let back = if lc < 0.5f64.ln() {
            self.quantile_log(lc)
        } else {
            self.upper_quantile_log(self.log_sf(x))
        };
        (back - x).abs()
    }

    /// `log` of the tabulated node value `μ((-∞, x_k])`.
    pub fn node_log_cdf(&self) -> &[f64] {
        &self.log_cdf
    }

    pub fn node_log_sf(&self) -> &[f64] {
        &self.log_sf
    }

    pub fn node_log_cell(&self) -> &[f64] {
        &self.log_cell
    }

    /// Normalized log mass of `(-∞, lo)` and `(hi, ∞)`.
    pub fn log_tails(&self) -> (f64, f64) {
        (self.log_left_tail, self.log_right_tail)
    }

    /// `log μ([a, b])` computed from the table.
    pub fn log_mass(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return f64::NEG_INFINITY;
        }
        let (la, lb) = (self.log_cdf(a), self.log_cdf(b));
        if lb < 0.5f64.ln() {
            log_sub_exp(lb, la)
        } else {
            log_sub_exp(self.log_sf(a), self.log_sf(b))
        }
    }

    /// `log ∫ e^{g(|x - c|)} dμ`.
    pub fn log_expectation_radial(&self, g: &dyn Fn(f64) -> f64) -> Result<f64> {
        let c = self.centre;
        let w = |x: f64| g((x - c).abs()) + self.log_density(x);
        let mut acc = f64::NEG_INFINITY;
        for cell in self.grid.windows(2) {
            acc = log_add_exp(acc, gl_log_integrate(cell[0], cell[1], w));
        }
        let left = log_integral_to_infinity(w, self.lo(), Direction::Down)?;
        let right = log_integral_to_infinity(w, self.hi(), Direction::Up)?;
        Ok(log_add_exp(acc, log_add_exp(left, right)))
    }
}

fn tail_mass(p: &Potential, from: f64, dir: Direction) -> Result<f64> {
    log_integral_to_infinity(|x| -p.eval(x), from, dir).map_err(|_| {
        Error::Construction(format!(
            "e^{{-V}} is not integrable beyond {from} for V = {}",
            p.name()
        ))
    })
}

/// Truncation window where `V - V_min ≤ log(1e16)`, plus the peak location.
fn auto_window(p: &Potential) -> Result<(f64, f64, f64)> {
    let scan = linspace(-64.0, 64.0, 2001);
    let (mut peak, mut v_min) = (0.0, f64::INFINITY);
    for &x in &scan {
        let v = p.eval(x);
        if v < v_min {
            v_min = v;
            peak = x;
        }
    }
    if !v_min.is_finite() {
        return Err(Error::Construction(
            "potential is nowhere finite on [-64, 64]".into(),
        ));
    }
    let level = v_min - DENSITY_CUTOFF.ln();
    let edge = |sign: f64| -> Result<f64> {
        let mut d = 1.0;
        while p.eval(peak + sign * d) < level {
            d *= 2.0;
            if d > 1e12 {
                return Err(Error::Construction(format!(
                    "density of V = {} does not decay",
                    p.name()
                )));
            }
        }
        let (mut a, mut b) = (0.5 * d, d);
        if d == 1.0 {
            a = 0.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if p.eval(peak + sign * mid) < level {
                a = mid;
            } else {
                b = mid;
            }
        }
        Ok(peak + sign * b)
    };
    Ok((edge(-1.0)?, edge(1.0)?, peak))
}

/// Nodes equidistributed in `s(x) = ½ x/L + ½ ∫|V'|/TV`, with the peak kept
/// in the grid when it lies inside.
fn arc_length_grid(p: &Potential, lo: f64, hi: f64, peak: f64, n: usize) -> Vec<f64> {
    let fine_n = 8 * n;
    let fine = linspace(lo, hi, fine_n);
    let v: Vec<f64> = fine.iter().map(|&x| p.eval(x)).collect();
    let mut dv: Vec<f64> = v.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
    dv.iter_mut().filter(|d| !d.is_finite()).for_each(|d| *d = 0.0);
    let tv: f64 = dv.iter().sum();
    let mut s = vec![0.0; fine_n];
    for i in 1..fine_n {
        let dx = (fine[i] - fine[i - 1]) / (hi - lo);
        let dvi = if tv > 0.0 { dv[i - 1] / tv } else { dx };
        s[i] = s[i - 1] + 0.5 * dx + 0.5 * dvi;
    }
    let total = s[fine_n - 1];
    let mut out = Vec::with_capacity(n);
    let mut j = 1;
    for k in 0..n {
        let target = total * k as f64 / (n - 1) as f64;
        while j < fine_n - 1 && s[j] < target {
            j += 1;
        }
        let (s0, s1) = (s[j - 1], s[j]);
        let th = if s1 > s0 { ((target - s0) / (s1 - s0)).clamp(0.0, 1.0) } else { 0.0 };
        out.push(fine[j - 1] + th * (fine[j] - fine[j - 1]));
    }
    out[0] = lo;
    out[n - 1] = hi;
    // Snap the nearest node to the peak so kinks sit on a node.
    if peak > lo && peak < hi {
        let k = out.partition_point(|&x| x < peak).clamp(1, n - 2);
        let nearest = if (out[k] - peak).abs() < (out[k - 1] - peak).abs() { k } else { k - 1 };
        if nearest > 0 && nearest < n - 1 {
            out[nearest] = peak;
        }
    }
    out.dedup();
    out
}

fn convex_on_grid(grid: &[f64], v: &[f64]) -> bool {
    let finite: Vec<(f64, f64)> = grid
        .iter()
        .zip(v)
        .filter(|(_, v)| v.is_finite())
        .map(|(x, v)| (*x, *v))
        .collect();
    let scale = finite.iter().fold(0.0f64, |m, (_, v)| m.max(v.abs()));
    let tol = 1e-9 * (1.0 + scale);
    finite.windows(3).all(|w| {
        let ((x0, v0), (x1, v1), (x2, v2)) = (w[0], w[1], w[2]);
        let chord = ((x2 - x1) * v0 + (x1 - x0) * v2) / (x2 - x0);
        v1 <= chord + tol
    })
}
