//! Entropy profiles `F`, the `F_τ` family, the `ψ_{τ,β}` perturbation and the
//! conjugate `Φ = (yF(y) - y)*`.
//!
//! Every profile is evaluated through `u ↦ F(e^u)` so that arguments far
//! outside the range of `f64` (as needed by `Φ` of slowly growing `F`) stay
//! representable.

use serde::Serialize;

use crate::convex::{legendre_transform_refined, ConjugateTable, ConvexSamples, GridSpacing};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::quad::{bisect_increasing, golden_max, logspace};

/// `log x₁` for the `log² log` base, where `x₁ = exp(e²)`.
const LOGLOG_SWITCH: f64 = std::f64::consts::E * std::f64::consts::E;
/// Coefficient `e²/4` making the `log² log` base C¹ at `x₁`.
const LOGLOG_COEF: f64 = LOGLOG_SWITCH / 4.0;

#[derive(Debug, Clone, PartialEq)]
pub enum EntropyBase {
    /// `φ(x) = log x`.
    Log,
    /// `log x` up to `x₁ = exp(e²)`, then `log x₁ + (e²/4)(log²(log x) - 4)`.
    /// Concave, C¹, and `~ (e²/4) log²(log x)` at infinity.
    LogLogSquared,
    /// User expression in `x`.
    Expr(Expr),
}

impl EntropyBase {
    /// `φ(e^u)`; NaN when a user expression is undefined there.
    pub fn at_log(&self, u: f64) -> f64 {
        match self {
            EntropyBase::Log => u,
            EntropyBase::LogLogSquared => {
                if u <= LOGLOG_SWITCH {
                    u
                } else {
                    let l = u.ln();
                    LOGLOG_SWITCH + LOGLOG_COEF * (l * l - 4.0)
                }
            }
            EntropyBase::Expr(e) => e.eval(u.exp()).unwrap_or(f64::NAN),
        }
    }

    pub fn name(&self) -> String {
        match self {
            EntropyBase::Log => "log".into(),
            EntropyBase::LogLogSquared => "loglog2".into(),
            EntropyBase::Expr(e) => e.to_string(),
        }
    }
}

/// `ψ_{τ,β}`: identity below 1, `(β/2)([1 + τ(x-1)]^{2/(τβ)} - 1) + 1` above.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Psi {
    pub tau: f64,
    pub beta: f64,
}

impl Psi {
    pub fn new(tau: f64, beta: f64) -> Result<Self> {
        if !(beta > 0.0 && beta.is_finite()) || !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::Argument(format!(
                "psi needs positive tau and beta, got {tau}, {beta}"
            )));
        }
        if tau < 2.0 / beta - 1e-12 {
            return Err(Error::Argument(format!(
                "psi needs tau >= 2/beta = {}, got {tau}",
                2.0 / beta
            )));
        }
        Ok(Psi { tau, beta })
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= 1.0 {
            x
        } else {
            let e = 2.0 / (self.tau * self.beta);
            0.5 * self.beta * ((1.0 + self.tau * (x - 1.0)).powf(e) - 1.0) + 1.0
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        if x <= 1.0 {
            1.0
        } else {
            let e = 2.0 / (self.tau * self.beta);
            (1.0 + self.tau * (x - 1.0)).powf(e - 1.0)
        }
    }
}

pub fn eval_psi_tau_beta(tau: f64, beta: f64, x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::Domain(format!("psi evaluated at {x}")));
    }
    Ok(Psi::new(tau, beta)?.eval(x))
}

/// An entropy profile `F = ψ(F_τ(φ))`, with `ψ` optional.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyFunction {
    base: EntropyBase,
    tau: f64,
    x0: f64,
    psi: Option<Psi>,
}

/// `log Φ(x)` together with a flag for when the sup could not be bracketed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhiValue {
    pub log_value: f64,
    pub argmax_log: f64,
    pub truncated: bool,
}

impl PhiValue {
    pub fn value(&self) -> f64 {
        self.log_value.exp()
    }
}

impl EntropyFunction {
    /// `F_τ` over `base`; `x₀` solves `φ(x₀) = 1` on `[1, 1e9]`.
    pub fn new(base: EntropyBase, tau: f64) -> Result<Self> {
        if !(tau > 0.0 && tau <= 1.0) {
            return Err(Error::Argument(format!("tau must lie in (0, 1], got {tau}")));
        }
        let x0 = solve_x0(&base)?;
        Ok(EntropyFunction {
            base,
            tau,
            x0,
            psi: None,
        })
    }

    pub fn log() -> Self {
        EntropyFunction::new(EntropyBase::Log, 1.0).expect("log entropy")
    }

    pub fn f_tau(tau: f64) -> Result<Self> {
        EntropyFunction::new(EntropyBase::Log, tau)
    }

    pub fn loglog_squared() -> Self {
        EntropyFunction::new(EntropyBase::LogLogSquared, 1.0).expect("loglog entropy")
    }

    pub fn with_psi(mut self, tau: f64, beta: f64) -> Result<Self> {
        self.psi = Some(Psi::new(tau, beta)?);
        Ok(self)
    }

    pub fn base(&self) -> &EntropyBase {
        &self.base
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn psi(&self) -> Option<Psi> {
        self.psi
    }

    pub fn name(&self) -> String {
        let mut s = self.base.name();
        if self.tau != 1.0 {
            s = format!("tau:{}({s})", self.tau);
        }
        if let Some(p) = self.psi {
            s = format!("psi:{}:{}({s})", p.tau, p.beta);
        }
        s
    }

    /// `F(e^u)`.
    pub fn at_log(&self, u: f64) -> f64 {
        let p = self.base.at_log(u);
        let f = if self.tau == 1.0 || p <= 1.0 {
            p
        } else {
            (p.powf(self.tau) - 1.0) / self.tau + 1.0
        };
        match self.psi {
            Some(psi) => psi.eval(f),
            None => f,
        }
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(x > 0.0) {
            return Err(Error::Domain(format!("entropy evaluated at x = {x}")));
        }
        let v = self.at_log(x.ln());
        if v.is_nan() {
            return Err(Error::Domain(format!("entropy undefined at x = {x}")));
        }
        Ok(v)
    }

    /// `x F'(x)` at `x = e^u`, by a central difference in `u`.
    pub fn log_slope(&self, u: f64) -> f64 {
        let h = 1e-4 * (1.0 + u.abs());
        (self.at_log(u + h) - self.at_log(u - h)) / (2.0 * h)
    }

    pub fn derivative(&self, x: f64) -> f64 {
        self.log_slope(x.ln()) / x
    }

    /// `log F⁻¹(v)`, or `None` when `F` stays below `v` up to `e^{1e6}`.
    pub fn log_inverse(&self, v: f64) -> Option<f64> {
        let mut hi = 1.0;
        while !(self.at_log(hi) >= v) {
            hi *= 2.0;
            if hi > 1e6 {
                return None;
            }
        }
        let mut lo = -1.0;
        while self.at_log(lo) >= v {
            lo *= 2.0;
            if lo < -1e6 {
                return Some(lo);
            }
        }
        Some(bisect_increasing(lo, hi, v, |u| self.at_log(u)))
    }

    /// `log Φ(x)` with `Φ(x) = sup_{y>0} y (x + 1 - F(y))`, maximized over
    /// `u = log y` below the root of `F(e^u) = x + 1`.
    pub fn log_phi(&self, x: f64) -> PhiValue {
        let target = x + 1.0;
        let (u_hi, truncated) = match self.log_inverse(target) {
            Some(u) => (u, false),
            None => (1e6, true),
        };
        let g = |u: f64| {
            let gap = target - self.at_log(u);
            if gap > 0.0 {
                u + gap.ln()
            } else {
                f64::NEG_INFINITY
            }
        };
        // Geometric scan of the distance below u_hi, then a golden refinement.
        let mut pts = Vec::with_capacity(160);
        let mut d = 1e-8;
        while u_hi - d > -745.0 {
            pts.push(u_hi - d);
            d *= std::f64::consts::SQRT_2;
        }
        pts.push(-745.0);
        let mut best = 0;
        let mut best_v = f64::NEG_INFINITY;
        let vals: Vec<f64> = pts.iter().map(|&u| g(u)).collect();
        for (k, &v) in vals.iter().enumerate() {
            if v > best_v {
                best_v = v;
                best = k;
            }
        }
        if best_v == f64::NEG_INFINITY {
            return PhiValue {
                log_value: f64::NEG_INFINITY,
                argmax_log: f64::NEG_INFINITY,
                truncated,
            };
        }
        let lo = pts[(best + 1).min(pts.len() - 1)];
        let hi = if best == 0 { u_hi } else { pts[best - 1] };
        let (u, v) = golden_max(lo, hi, 200, g);
        let (u, v) = if v >= best_v { (u, v) } else { (pts[best], best_v) };
        PhiValue {
            log_value: v,
            argmax_log: u,
            truncated,
        }
    }

    pub fn phi(&self, x: f64) -> f64 {
        self.log_phi(x).value()
    }
}

fn solve_x0(base: &EntropyBase) -> Result<f64> {
    let (lo, hi) = (0.0, 1e9f64.ln());
    let (flo, fhi) = (base.at_log(lo), base.at_log(hi));
    if !(flo <= 1.0 && fhi >= 1.0) {
        return Err(Error::Construction(format!(
            "phi(x0) = 1 has no solution on [1, 1e9] (phi(1) = {flo}, phi(1e9) = {fhi})"
        )));
    }
    Ok(bisect_increasing(lo, hi, 1.0, |u| base.at_log(u)).exp())
}

/// `F_τ(x)` for base `φ`.
pub fn eval_f_tau(base: &EntropyBase, tau: f64, x: f64) -> Result<f64> {
    EntropyFunction::new(base.clone(), tau)?.eval(x)
}

/// Tabulated `Φ = (yF(y) - y)*` on `x_grid`, via the grid transform on
/// `{0} ∪ [1e-8, 1e8]`. Saturated entries mark requested slopes the primal
/// range cannot reach.
pub fn conjugate_phi(f: &EntropyFunction, x_grid: &[f64]) -> Result<ConjugateTable> {
    let mut ys = vec![0.0];
    ys.extend(logspace(1e-8, 1e8, 16 * 512 + 1));
    let g = |y: f64| {
        if y == 0.0 {
            0.0
        } else {
            y * f.at_log(y.ln()) - y
        }
    };
    let primal = ConvexSamples::from_fn(ys, GridSpacing::Log, g)?;
    legendre_transform_refined(&primal, x_grid, &g)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub pass: bool,
    /// Grid point of the first failure.
    pub witness: Option<f64>,
}

impl Check {
    fn ok() -> Self {
        Check {
            pass: true,
            witness: None,
        }
    }

    fn fail(at: f64) -> Self {
        Check {
            pass: false,
            witness: Some(at),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AssumptionReport {
    pub a1: Check,
    pub a2: Check,
    pub a3: Check,
    pub a4: Check,
    /// Largest sampled `Δ ≤ 9` with `yF(y)` convex on `[0, 1 + Δ]`.
    pub delta: Option<f64>,
    /// Smallest sampled `y₀ ≥ 1` for A4.
    pub y0: Option<f64>,
}

const PER_DECADE: usize = 4096;

fn decade_grid(lo_exp: i32, hi_exp: i32) -> Vec<f64> {
    let n = (hi_exp - lo_exp) as usize * PER_DECADE + 1;
    logspace(10f64.powi(lo_exp), 10f64.powi(hi_exp), n)
}

/// Sampled checks of A1)-A4).
pub fn check_assumptions(f: &EntropyFunction) -> AssumptionReport {
    let (a3, delta) = check_a3(f);
    let (a4, y0) = check_a4(f);
    AssumptionReport {
        a1: check_a1(f),
        a2: check_a2(f),
        a3,
        a4,
        delta,
        y0,
    }
}

fn check_a1(f: &EntropyFunction) -> Check {
    if !(f.at_log(0.0).abs() <= 1e-10) {
        return Check::fail(1.0);
    }
    let xs = decade_grid(-8, 8);
    let vals: Vec<f64> = xs.iter().map(|x| f.at_log(x.ln())).collect();
    for k in 0..xs.len() {
        if vals[k].is_nan() {
            return Check::fail(xs[k]);
        }
        if k + 1 < xs.len() && vals[k + 1] < vals[k] - 1e-12 * (1.0 + vals[k].abs()) {
            return Check::fail(xs[k + 1]);
        }
        if k > 0 && k + 1 < xs.len() {
            let (x0, x1, x2) = (xs[k - 1], xs[k], xs[k + 1]);
            let chord = ((x2 - x1) * vals[k - 1] + (x1 - x0) * vals[k + 1]) / (x2 - x0);
            let tol = 1e-12 * (1.0 + vals[k - 1].abs().max(vals[k + 1].abs()));
            if vals[k] < chord - tol {
                return Check::fail(x1);
            }
        }
    }
    Check::ok()
}

fn check_a2(f: &EntropyFunction) -> Check {
    let mut prev = f64::INFINITY;
    for k in 1..=12 {
        let y = 10f64.powi(-k);
        let v = (y * f.at_log(y.ln())).abs();
        if v.is_nan() || (k >= 6 && v > prev + 1e-15) {
            return Check::fail(y);
        }
        prev = v;
    }
    if prev > 1e-8 {
        return Check::fail(1e-12);
    }
    let (u_mid, u_far) = (1e30f64.ln(), 1e300f64.ln());
    if !(f.at_log(u_far) - f.at_log(u_mid) > 1.0) {
        return Check::fail(1e300);
    }
    Check::ok()
}

fn check_a3(f: &EntropyFunction) -> (Check, Option<f64>) {
    let ys = decade_grid(-8, 1);
    let vals: Vec<f64> = ys.iter().map(|&y| y * f.at_log(y.ln())).collect();
    let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let tol = 1e-12 * (1.0 + scale);
    for k in 1..ys.len() - 1 {
        let (y0, y1, y2) = (ys[k - 1], ys[k], ys[k + 1]);
        let chord = ((y2 - y1) * vals[k - 1] + (y1 - y0) * vals[k + 1]) / (y2 - y0);
        if !(vals[k] <= chord + tol) {
            if y1 <= 1.0 {
                return (Check::fail(y1), None);
            }
            return (Check::ok(), Some(y0 - 1.0));
        }
    }
    (Check::ok(), Some(9.0))
}

fn check_a4(f: &EntropyFunction) -> (Check, Option<f64>) {
    let us: Vec<f64> = decade_grid(0, 12).iter().map(|y| y.ln()).collect();
    let slopes: Vec<f64> = us.iter().map(|&u| f.log_slope(u)).collect();
    let tol = 1e-9;
    // Walk back from the far end while the suffix stays nonincreasing and <= 1.
    let n = us.len();
    let mut start = n - 1;
    if !(slopes[start] <= 1.0 + tol) {
        return (Check::fail(us[start].exp()), None);
    }
    while start > 0 {
        let k = start - 1;
        let ok = slopes[k] <= 1.0 + tol && slopes[k] >= slopes[k + 1] - tol * (1.0 + slopes[k].abs());
        if !ok {
            break;
        }
        start = k;
    }
    let y0 = us[start].exp();
    if y0 <= 1e6 {
        (Check::ok(), Some(y0))
    } else {
        (Check::fail(us[start - 1].exp()), None)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum BoundStatus {
    Holds,
    Violated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma32Report {
    pub delta: f64,
    /// Smallest sampled `T` with a nonnegative margin on `[T, y_max]`.
    pub t: Option<f64>,
    /// Minimum of `y^{2δ} - Φ(δF(y))` over sampled `y ≥ T`.
    pub min_margin: f64,
    /// Minimum of the margin relative to `y^{2δ}`.
    pub min_relative_margin: f64,
    pub status: BoundStatus,
}

/// Sweeps `y^{2δ} - Φ(δF(y))` over log-spaced `y ∈ [y_min, y_max]`.
pub fn lemma32_bound_check(
    f: &EntropyFunction,
    delta: f64,
    y_min: f64,
    y_max: f64,
) -> Result<Lemma32Report> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::Argument(format!("delta must lie in (0, 1/2], got {delta}")));
    }
    if !(y_min > 0.0 && y_max > y_min) {
        return Err(Error::Argument("need 0 < y_min < y_max".into()));
    }
    let decades = (y_max / y_min).log10().ceil().max(1.0) as usize;
    let ys = logspace(y_min, y_max, decades * 512 + 1);
    let mut margins = Vec::with_capacity(ys.len());
    for &y in &ys {
        let u = y.ln();
        let p = f.log_phi(delta * f.at_log(u));
        if p.truncated {
            return Ok(Lemma32Report {
                delta,
                t: None,
                min_margin: f64::NAN,
                min_relative_margin: f64::NAN,
                status: BoundStatus::Inconclusive,
            });
        }
        let bound = 2.0 * delta * u;
        // Margin relative to y^{2δ}, computed from the log difference.
        let rel = -(p.log_value - bound).exp_m1();
        margins.push((rel * (bound).exp(), rel, (bound).exp()));
    }
    let tol = |b: f64| 1e-9 * (1.0 + b);
    let mut first = ys.len();
    for k in (0..ys.len()).rev() {
        if margins[k].0 >= -tol(margins[k].2) {
            first = k;
        } else {
            break;
        }
    }
    if first == ys.len() {
        let min = margins.iter().map(|m| m.0).fold(f64::INFINITY, f64::min);
        let min_rel = margins.iter().map(|m| m.1).fold(f64::INFINITY, f64::min);
        return Ok(Lemma32Report {
            delta,
            t: None,
            min_margin: min,
            min_relative_margin: min_rel,
            status: BoundStatus::Violated,
        });
    }
    let tail = &margins[first..];
    Ok(Lemma32Report {
        delta,
        t: Some(ys[first]),
        min_margin: tail.iter().map(|m| m.0).fold(f64::INFINITY, f64::min),
        min_relative_margin: tail.iter().map(|m| m.1).fold(f64::INFINITY, f64::min),
        status: BoundStatus::Holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::linspace;

    #[test]
    fn f_tau_examples() {
        assert!((eval_f_tau(&EntropyBase::Log, 1.0, 7.5).unwrap() - 7.5f64.ln()).abs() < 1e-15);
        let e = std::f64::consts::E;
        assert!((eval_f_tau(&EntropyBase::Log, 0.5, e).unwrap() - 1.0).abs() < 1e-12);
        let v = eval_f_tau(&EntropyBase::Log, 0.5, 4f64.exp()).unwrap();
        assert!((v - (2.0 * (4f64.sqrt() - 1.0) + 1.0)).abs() < 1e-12);
        assert!((v - 3.0).abs() < 1e-12);
        assert!(matches!(
            eval_f_tau(&EntropyBase::Log, 0.5, 0.0),
            Err(Error::Domain(_))
        ));
        let f = EntropyFunction::f_tau(0.5).unwrap();
        assert!((f.x0() - e).abs() < 1e-9 * e);
    }

    #[test]
    fn unsolvable_x0_is_construction_error() {
        let base = EntropyBase::Expr(Expr::parse("log(x)/100").unwrap());
        assert!(matches!(
            EntropyFunction::new(base, 0.5),
            Err(Error::Construction(_))
        ));
    }

    #[test]
    fn psi_examples() {
        assert_eq!(eval_psi_tau_beta(0.5, 4.0, 7.0).unwrap(), 7.0);
        assert!((eval_psi_tau_beta(2.0 / 3.0, 3.0, 7.0).unwrap() - 7.0).abs() < 1e-12);
        assert_eq!(eval_psi_tau_beta(0.8, 3.0, 1.0).unwrap(), 1.0);
        let v = eval_psi_tau_beta(1.0, 4.0, 5.0).unwrap();
        assert!((v - (2.0 * (5f64.sqrt() - 1.0) + 1.0)).abs() < 1e-12);
        assert!((v - 3.47214).abs() < 1e-5);
        assert!(matches!(
            eval_psi_tau_beta(0.3, 4.0, 2.0),
            Err(Error::Argument(_))
        ));
    }

    #[test]
    fn loglog_base_is_c1_at_switch() {
        let b = EntropyBase::LogLogSquared;
        let h = 1e-6;
        let left = (b.at_log(LOGLOG_SWITCH) - b.at_log(LOGLOG_SWITCH - h)) / h;
        let right = (b.at_log(LOGLOG_SWITCH + h) - b.at_log(LOGLOG_SWITCH)) / h;
        assert!((left - right).abs() < 1e-5);
        assert!((b.at_log(LOGLOG_SWITCH) - LOGLOG_SWITCH).abs() < 1e-12);
    }

    #[test]
    fn phi_of_log_is_exponential() {
        let f = EntropyFunction::log();
        for x in linspace(0.0, 5.0, 51) {
            let p = f.phi(x);
            assert!(((p - x.exp()) / x.exp()).abs() < 1e-9, "x={x} p={p}");
        }
        assert!((f.phi(1.0) - std::f64::consts::E).abs() < 1e-9);
        let t = conjugate_phi(&f, &linspace(0.0, 5.0, 101)).unwrap();
        for (x, v) in t.grid.iter().zip(&t.values) {
            assert!(((v - x.exp()) / x.exp()).abs() < 1e-9);
        }
        assert!(!t.any_saturated());
    }

    #[test]
    fn phi_below_inverse_bound() {
        let f = EntropyFunction::f_tau(0.5).unwrap();
        for x in [5.0, 20.0, 80.0] {
            let p = f.log_phi(x);
            let inv = f.log_inverse(1.0 + x).unwrap();
            assert!(p.log_value <= inv + 1e-9, "x={x}");
        }
    }

    #[test]
    fn assumptions_for_log() {
        let r = check_assumptions(&EntropyFunction::log());
        assert!(r.a1.pass && r.a2.pass && r.a3.pass && r.a4.pass, "{r:?}");
        assert_eq!(r.delta, Some(9.0));
        assert!((r.y0.unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn assumptions_for_linear() {
        let f = EntropyFunction::new(EntropyBase::Expr(Expr::parse("x - 1").unwrap()), 1.0).unwrap();
        let r = check_assumptions(&f);
        assert!(r.a1.pass);
        assert!(!r.a4.pass);
        assert!(r.a4.witness.is_some());
    }

    #[test]
    fn assumptions_for_f_tau() {
        let r = check_assumptions(&EntropyFunction::f_tau(0.5).unwrap());
        assert!(r.a1.pass && r.a2.pass && r.a3.pass && r.a4.pass, "{r:?}");
        let r = check_assumptions(&EntropyFunction::loglog_squared());
        assert!(r.a1.pass && r.a2.pass && r.a3.pass && r.a4.pass, "{r:?}");
    }

    #[test]
    fn lemma32_log_cases() {
        let f = EntropyFunction::log();
        for delta in [0.25, 0.5] {
            let r = lemma32_bound_check(&f, delta, 1.0, 1e6).unwrap();
            assert_eq!(r.status, BoundStatus::Holds);
            assert!((r.t.unwrap() - 1.0).abs() < 1e-12);
            assert!(r.min_margin >= -1e-9);
        }
    }
}
