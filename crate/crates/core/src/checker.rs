//! Numerical verdicts on the integrability conditions
//! `∫_0^{1/K} Φ(δ c(t F(1/t) / I(t))) dt < ∞` and on the growth criterion
//! `g(r) / φ^{1-1/α}(e^{g(r)}) ≥ C r`.
//!
//! The integral is computed after the substitution `t = e^{-s}` with
//! composite Simpson panels, one group per decade of `t`. Finiteness itself
//! is undecidable from finitely many samples, so the verdict combines the
//! decay of the per-decade partial sums with a fitted tail model
//! `h(t) ≈ exp(log^p(1/t))`.

use serde::Serialize;

use crate::convex::CostFunction;
use crate::entropy::EntropyFunction;
use crate::error::{Error, Result};
use crate::measure1d::{log_j_f, Measure1D, Potential, Truncation};
use crate::quad::{log_add_exp, log_sum_exp, logspace};

/// Simpson intervals per decade of `t`.
pub const NODES_PER_DECADE: usize = 256;
/// Partial sums over the last three decades must shrink at least this fast.
const GEOMETRIC_RATIO: f64 = 0.9;
/// Half-width of the slope band classified as a power law.
const POWER_BAND: f64 = 0.1;
/// Default δ sweep.
pub const DELTA_SWEEP: [f64; 5] = [1.0, 0.5, 0.25, 0.125, 0.0625];

#[derive(Debug, Clone, PartialEq)]
pub enum CostModel {
    /// `c(x) = x²`.
    Quadratic,
    Cost(CostFunction),
}

impl CostModel {
    fn eval(&self, x: f64) -> f64 {
        match self {
            CostModel::Quadratic => x * x,
            CostModel::Cost(c) => c.value(x).unwrap_or(f64::NAN),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ProfileChoice {
    /// Half-line profile `Ĩ_μ`.
    Tilde,
    /// `k t φ(1/t)^{1-1/α}`.
    LowerBound {
        k: f64,
        alpha: f64,
        phi: EntropyFunction,
    },
}

#[derive(Debug, Clone)]
pub struct ConditionSpec<'a> {
    pub measure: &'a Measure1D,
    pub entropy: &'a EntropyFunction,
    pub cost: CostModel,
    pub delta: f64,
    pub k: f64,
    pub profile: ProfileChoice,
    pub t_min: f64,
}

impl<'a> ConditionSpec<'a> {
    pub fn new(
        measure: &'a Measure1D,
        entropy: &'a EntropyFunction,
        cost: CostModel,
        delta: f64,
        k: f64,
    ) -> Self {
        ConditionSpec {
            measure,
            entropy,
            cost,
            delta,
            k,
            profile: ProfileChoice::Tilde,
            t_min: 1e-12,
        }
    }

    pub fn with_t_min(mut self, t_min: f64) -> Self {
        self.t_min = t_min;
        self
    }

    pub fn with_profile(mut self, profile: ProfileChoice) -> Self {
        self.profile = profile;
        self
    }

    pub fn with_delta(&self, delta: f64) -> Self {
        let mut s = self.clone();
        s.delta = delta;
        s
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta.is_finite()) {
            return Err(Error::Argument(format!("delta must be positive, got {}", self.delta)));
        }
        if !(self.k > 1.0 && self.k.is_finite()) {
            return Err(Error::Argument(format!("K must exceed 1, got {}", self.k)));
        }
        if !(self.t_min > 0.0 && self.t_min < 1.0 / self.k) {
            return Err(Error::Argument(format!(
                "t_min must lie in (0, 1/K), got {}",
                self.t_min
            )));
        }
        if let ProfileChoice::LowerBound { k, alpha, .. } = &self.profile {
            if !(*k > 0.0) || !(*alpha > 1.0) {
                return Err(Error::Argument("lower-bound model needs k > 0, alpha > 1".into()));
            }
        }
        Ok(())
    }

    /// `log J(t)` for the chosen profile.
    fn log_j(&self, log_t: f64) -> f64 {
        match &self.profile {
            ProfileChoice::Tilde => log_j_f(self.measure, self.entropy, log_t),
            ProfileChoice::LowerBound { k, alpha, phi } => {
                let fv = self.entropy.at_log(-log_t);
                let ph = phi.at_log(-log_t);
                if !(fv > 0.0) {
                    return f64::NEG_INFINITY;
                }
                if !(ph > 0.0) {
                    return f64::INFINITY;
                }
                fv.ln() - k.ln() - (1.0 - 1.0 / alpha) * ph.ln()
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Finite,
    DivergentLikely,
    Inconclusive,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum TailBranch {
    /// The integrand does not grow as `t → 0`.
    Bounded,
    /// `exp(log^p(1/t))` with `p < 1`.
    Stretched,
    /// `t^{-rate}`.
    PowerLaw,
    /// `exp(log^p(1/t))` with `p > 1`.
    Super,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decade {
    pub t_lo: f64,
    pub t_hi: f64,
    pub partial_sum: f64,
    pub log_partial_sum: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub verdict: Verdict,
    pub integral_estimate: f64,
    pub log_integral_estimate: f64,
    pub delta: f64,
    #[serde(rename = "K")]
    pub k: f64,
    pub t_min: f64,
    pub tail_p: f64,
    /// `d log h / d log(1/t)` at `t_min`.
    pub tail_rate: f64,
    pub tail_branch: TailBranch,
    pub decades: Vec<Decade>,
    pub flags: Vec<String>,
    pub offending_t: Option<f64>,
}

struct Node {
    s: f64,
    log_h: f64,
}

/// Decides the integrability condition described by `spec`.
pub fn check_condition(spec: &ConditionSpec) -> Result<ConditionReport> {
    spec.validate()?;
    let s_lo = spec.k.ln();
    let s_hi = -spec.t_min.ln();
    let ln10 = std::f64::consts::LN_10;
    let mut flags = Vec::new();
    if matches!(spec.profile, ProfileChoice::Tilde)
        && matches!(spec.cost, CostModel::Quadratic)
        && spec.k <= 2.0
    {
        flags.push("K_at_most_2_for_half_line_profile".to_string());
    }

    // Decade boundaries in s: ln K, then multiples of ln 10, then ln(1/t_min).
    let mut bounds = vec![s_lo];
    let mut j = (s_lo / ln10).floor() + 1.0;
    while j * ln10 < s_hi - 1e-9 {
        bounds.push(j * ln10);
        j += 1.0;
    }
    bounds.push(s_hi);

    let mut offending = None;
    let mut divergent_integrand = false;
    let mut eval = |s: f64| -> f64 {
        let log_t = -s;
        let lj = spec.log_j(log_t);
        if lj == f64::INFINITY || lj.is_nan() {
            divergent_integrand = true;
            offending.get_or_insert(log_t.exp());
            return f64::INFINITY;
        }
        let arg = spec.delta * spec.cost.eval(lj.exp());
        if !arg.is_finite() {
            divergent_integrand = true;
            offending.get_or_insert(log_t.exp());
            return f64::INFINITY;
        }
        let p = spec.entropy.log_phi(arg);
        if p.truncated {
            offending.get_or_insert(log_t.exp());
        }
        p.log_value
    };

    let mut decades = Vec::with_capacity(bounds.len());
    let mut tail_nodes: Vec<Node> = Vec::new();
    let tail_start = s_hi - 3.0 * ln10;
    let mut log_total = f64::NEG_INFINITY;
    for w in bounds.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mut m = ((b - a) / ln10 * NODES_PER_DECADE as f64).ceil() as usize;
        m = m.max(16);
        m += m % 2;
        let h = (b - a) / m as f64;
        let mut terms = Vec::with_capacity(m + 1);
        for i in 0..=m {
            let s = if i == m { b } else { a + i as f64 * h };
            let lh = eval(s);
            let coef: f64 = if i == 0 || i == m {
                1.0
            } else if i % 2 == 1 {
                4.0
            } else {
                2.0
            };
            terms.push(coef.ln() + lh - s);
            if s >= tail_start - 1e-9 && i % 8 == 0 {
                tail_nodes.push(Node { s, log_h: lh });
            }
        }
        let lp = log_sum_exp(terms) + (h / 3.0).ln();
        log_total = log_add_exp(log_total, lp);
        decades.push(Decade {
            t_lo: (-b).exp(),
            t_hi: (-a).exp(),
            partial_sum: lp.exp(),
            log_partial_sum: lp,
        });
    }
    if offending.is_some() && !divergent_integrand {
        flags.push("phi_truncated".to_string());
    }
    if divergent_integrand {
        flags.push("divergent_integrand".to_string());
    }

    let (branch, p, rate) = fit_tail(&tail_nodes);
    let model_finite = match branch {
        TailBranch::Bounded | TailBranch::Stretched => true,
        TailBranch::PowerLaw => rate < 1.0,
        TailBranch::Super => false,
    };
    let last: Vec<f64> = decades.iter().rev().take(4).map(|d| d.log_partial_sum).collect();
    // last[0] is the deepest decade; ratios compare each decade to the one above it.
    let ratios: Vec<f64> = last.windows(2).map(|w| (w[0] - w[1]).exp()).collect();
    let geometric = ratios.len() >= 3 && ratios.iter().all(|&r| r <= GEOMETRIC_RATIO);
    let nondecreasing = ratios.first().is_some_and(|&r| r >= 1.0);
    let verdict = if offending.is_some() && !divergent_integrand {
        Verdict::Inconclusive
    } else if divergent_integrand {
        Verdict::DivergentLikely
    } else if model_finite && geometric {
        Verdict::Finite
    } else if !model_finite || nondecreasing {
        Verdict::DivergentLikely
    } else {
        Verdict::Inconclusive
    };
    Ok(ConditionReport {
        verdict,
        integral_estimate: log_total.exp(),
        log_integral_estimate: log_total,
        delta: spec.delta,
        k: spec.k,
        t_min: spec.t_min,
        tail_p: p,
        tail_rate: rate,
        tail_branch: branch,
        decades,
        flags,
        offending_t: offending,
    })
}

/// Classifies `L(s) = log h(e^{-s})` on the last three decades by the slope
/// of `log L'(s)` against `log s`, so that `p = 1 + slope`.
fn fit_tail(nodes: &[Node]) -> (TailBranch, f64, f64) {
    let mut pts: Vec<(f64, f64)> = Vec::new();
    let mut any_nonpositive = false;
    let mut max_abs = 0.0f64;
    for w in nodes.windows(3) {
        let (a, b) = (&w[0], &w[2]);
        if !(a.log_h.is_finite() && b.log_h.is_finite()) || b.s <= a.s {
            continue;
        }
        let d = (b.log_h - a.log_h) / (b.s - a.s);
        max_abs = max_abs.max(d.abs());
        if d <= 0.0 {
            any_nonpositive = true;
        } else {
            pts.push((w[1].s.ln(), d.ln()));
        }
    }
    let rate = nodes
        .windows(2)
        .last()
        .map(|w| (w[1].log_h - w[0].log_h) / (w[1].s - w[0].s))
        .unwrap_or(f64::NAN);
    if max_abs < 1e-3 || any_nonpositive || pts.len() < 2 {
        return (TailBranch::Bounded, 0.0, rate);
    }
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    let slope = sxy / sxx;
    let p = 1.0 + slope;
    let branch = if slope.abs() <= POWER_BAND {
        TailBranch::PowerLaw
    } else if slope < 0.0 {
        TailBranch::Stretched
    } else {
        TailBranch::Super
    };
    (branch, p, rate)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DeltaSweep {
    pub reports: Vec<ConditionReport>,
    /// Largest sampled δ with a FINITE verdict.
    pub largest_finite_delta: Option<f64>,
}

pub fn delta_sweep(spec: &ConditionSpec, deltas: &[f64]) -> Result<DeltaSweep> {
    let reports = deltas
        .iter()
        .map(|&d| check_condition(&spec.with_delta(d)))
        .collect::<Result<Vec<_>>>()?;
    let largest_finite_delta = reports
        .iter()
        .filter(|r| r.verdict == Verdict::Finite)
        .map(|r| r.delta)
        .fold(None, |m: Option<f64>, d| Some(m.map_or(d, |m| m.max(d))));
    Ok(DeltaSweep {
        reports,
        largest_finite_delta,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExpPowerReport {
    pub alpha: f64,
    pub tau: f64,
    pub a: f64,
    /// Exponent of the cost in the inequality, `ατ/(α-1)`.
    pub inequality_exponent: f64,
    /// Exponent of the condition cost, its conjugate exponent.
    pub condition_exponent: f64,
    pub entropy_cost: ConditionReport,
    pub perturbed_quadratic: ConditionReport,
}

/// The two integrability checks behind the `e^{-|x|^α}` inequalities with
/// entropy `F_τ`: `(F_τ, c_{A,β_τ}*)` with `β_τ = ατ/(α-1)`, and
/// `(F_{2/β}, x²)` with `β = α/(α-1)`.
pub fn check_exp_power(
    alpha: f64,
    tau: f64,
    a: f64,
    delta: f64,
    k: f64,
) -> Result<ExpPowerReport> {
    let mu = Measure1D::build(Potential::ExpPower(alpha), Truncation::default())?;
    check_exp_power_on(&mu, alpha, tau, a, delta, k)
}

pub fn check_exp_power_on(
    mu: &Measure1D,
    alpha: f64,
    tau: f64,
    a: f64,
    delta: f64,
    k: f64,
) -> Result<ExpPowerReport> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::Argument(format!("alpha must lie in (1, 2], got {alpha}")));
    }
    let beta = alpha / (alpha - 1.0);
    if !(tau <= 1.0 && tau >= 2.0 / beta - 1e-12) {
        return Err(Error::Argument(format!(
            "tau must lie in [{}, 1], got {tau}",
            2.0 / beta
        )));
    }
    let beta_tau = alpha * tau / (alpha - 1.0);
    let cond_exp = beta_tau / (beta_tau - 1.0);
    let f_tau = EntropyFunction::f_tau(tau)?;
    let cost = CostModel::Cost(CostFunction::closed_form(a, cond_exp)?);
    let first = check_condition(&ConditionSpec::new(mu, &f_tau, cost, delta, k))?;
    let f_perturbed = EntropyFunction::f_tau((2.0 / beta).min(1.0))?;
    let second = check_condition(&ConditionSpec::new(
        mu,
        &f_perturbed,
        CostModel::Quadratic,
        delta,
        k,
    ))?;
    Ok(ExpPowerReport {
        alpha,
        tau,
        a,
        inequality_exponent: beta_tau,
        condition_exponent: cond_exp,
        entropy_cost: first,
        perturbed_quadratic: second,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GrowthReport {
    /// `log ∫ e^{g(|x|)} dμ`, subtracted from `g`.
    pub shift: f64,
    /// Infimum of the ratio over the last two sampled decades of `r`.
    pub c: f64,
    pub c_last_decade: f64,
    pub c_previous_decade: f64,
    pub bounded_away: bool,
    pub r_max: f64,
}

/// Samples `g(r) / (r φ^{1-1/α}(e^{g(r)}))` after normalizing
/// `∫ e^{g(|x|)} dμ = 1`, on log-spaced `r ∈ [R_{1/2}, r_max]`.
pub fn verify_growth_condition(
    mu: &Measure1D,
    g: &dyn Fn(f64) -> f64,
    phi: &EntropyFunction,
    alpha: f64,
    r_max: f64,
) -> Result<GrowthReport> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::Argument(format!("alpha must lie in (1, 2], got {alpha}")));
    }
    let shift = mu.log_expectation_radial(g).map_err(|_| {
        Error::Construction("e^{g(|x|)} is not integrable against the measure".into())
    })?;
    let r_half = mu.radius_for_outside_mass(0.5f64.ln())?.max(1e-3);
    if !(r_max > 100.0 * r_half) {
        return Err(Error::Argument(format!(
            "r_max must exceed 100 R_1/2 = {}",
            100.0 * r_half
        )));
    }
    let ratio = |r: f64| {
        let gt = g(r) - shift;
        if gt <= 0.0 {
            return f64::NAN;
        }
        let ph = phi.at_log(gt);
        if !(ph > 0.0) {
            return f64::NAN;
        }
        gt / (r * ph.powf(1.0 - 1.0 / alpha))
    };
    let inf_on = |lo: f64, hi: f64| {
        logspace(lo, hi, 257)
            .into_iter()
            .map(ratio)
            .filter(|v| !v.is_nan())
            .fold(f64::INFINITY, f64::min)
    };
    let c_last = inf_on(r_max / 10.0, r_max);
    let c_prev = inf_on(r_max / 100.0, r_max / 10.0);
    Ok(GrowthReport {
        shift,
        c: c_last.min(c_prev),
        c_last_decade: c_last,
        c_previous_decade: c_prev,
        bounded_away: c_last.is_finite() && c_last > 0.0 && c_last >= 0.5 * c_prev,
        r_max,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn build(p: Potential) -> Measure1D {
        Measure1D::build(p, Truncation::default()).unwrap()
    }

    #[test]
    fn gaussian_quadratic_is_finite() {
        let mu = build(Potential::Gauss);
        let f = EntropyFunction::log();
        let r = check_condition(&ConditionSpec::new(&mu, &f, CostModel::Quadratic, 0.5, 2.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Finite, "{r:?}");
        assert_eq!(r.tail_branch, TailBranch::PowerLaw);
        assert!((r.tail_rate - 0.25).abs() < 0.05, "{}", r.tail_rate);
    }

    #[test]
    fn laplace_quadratic_diverges() {
        let mu = build(Potential::Laplace);
        let f = EntropyFunction::log();
        for delta in [0.5, 0.0625] {
            let r = check_condition(&ConditionSpec::new(&mu, &f, CostModel::Quadratic, delta, 2.0))
                .unwrap();
            assert_eq!(r.verdict, Verdict::DivergentLikely, "delta={delta}");
            assert!((r.tail_p - 2.0).abs() < 0.1);
        }
    }

    #[test]
    fn quadratic_cost_matches_power_cost() {
        let mu = build(Potential::Gauss);
        let f = EntropyFunction::log();
        let a = check_condition(&ConditionSpec::new(&mu, &f, CostModel::Quadratic, 0.5, 2.0)).unwrap();
        let c = CostModel::Cost(CostFunction::power(1.0, 2.0).unwrap());
        let b = check_condition(&ConditionSpec::new(&mu, &f, c, 0.5, 2.0)).unwrap();
        let rel = ((a.integral_estimate - b.integral_estimate) / a.integral_estimate).abs();
        assert!(rel < 1e-8);
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mu = build(Potential::Gauss);
        let f = EntropyFunction::log();
        let bad = ConditionSpec::new(&mu, &f, CostModel::Quadratic, 0.5, 1.0);
        assert!(matches!(check_condition(&bad), Err(Error::Argument(_))));
        let bad = ConditionSpec::new(&mu, &f, CostModel::Quadratic, 0.5, 2.0).with_t_min(0.6);
        assert!(check_condition(&bad).is_err());
    }

    #[test]
    fn growth_gaussian_square() {
        let mu = build(Potential::Gauss);
        let eps = 0.1;
        let r = verify_growth_condition(&mu, &|r| eps * r * r, &EntropyFunction::log(), 2.0, 1000.0)
            .unwrap();
        assert!((r.c - eps.sqrt()).abs() < 0.01 * eps.sqrt(), "{r:?}");
        assert!(r.bounded_away);
    }

    #[test]
    fn growth_too_slow() {
        let mu = build(Potential::ExpPower(1.5));
        let r = verify_growth_condition(&mu, &|r| (1.0 + r).ln(), &EntropyFunction::log(), 1.5, 1000.0)
            .unwrap();
        assert!(!r.bounded_away);
    }

    #[test]
    fn loglog_measure_is_finite_with_small_p() {
        let mu = build(Potential::LogLog);
        let f = EntropyFunction::loglog_squared();
        let r = check_condition(&ConditionSpec::new(&mu, &f, CostModel::Quadratic, 0.1, 3.0)).unwrap();
        assert_eq!(r.verdict, Verdict::Finite, "{r:?}");
        assert!(r.tail_p < 1.0);
    }

    #[test]
    fn exp_power_pairs_are_finite() {
        let mu = build(Potential::ExpPower(1.5));
        for tau in [1.0, 2.0 / 3.0] {
            let r = check_exp_power_on(&mu, 1.5, tau, 1.0, 0.25, 2.0).unwrap();
            assert_eq!(r.entropy_cost.verdict, Verdict::Finite, "tau={tau} {r:?}");
            assert_eq!(r.perturbed_quadratic.verdict, Verdict::Finite, "tau={tau}");
        }
        assert!(check_exp_power_on(&mu, 1.5, 0.5, 1.0, 0.25, 2.0).is_err());
        let g = check_exp_power(2.0, 1.0, 1.0, 0.5, 2.0).unwrap();
        assert_eq!(g.condition_exponent, 2.0);
        assert_eq!(g.entropy_cost.verdict, Verdict::Finite);
    }

    #[test]
    fn delta_sweep_is_monotone() {
        let mu = build(Potential::Gauss);
        let f = EntropyFunction::log();
        let spec = ConditionSpec::new(&mu, &f, CostModel::Quadratic, 1.0, 2.0);
        let sw = delta_sweep(&spec, &DELTA_SWEEP).unwrap();
        assert_eq!(sw.largest_finite_delta, Some(1.0));
        assert!(sw.reports.iter().all(|r| r.verdict == Verdict::Finite));
    }
}
