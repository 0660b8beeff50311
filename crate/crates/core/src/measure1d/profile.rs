//! Half-line isoperimetric profile `Ĩ_μ`, the functions `J_F` and `I_F`, the
//! Cheeger constant and the lower-bound model `k t φ(1/t)^{1-1/α}`.

use serde::Serialize;

use super::Measure1D;
use crate::entropy::EntropyFunction;
use crate::error::{Error, Result};
use crate::quad::{linspace, logspace};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IsoProfile {
    pub t: Vec<f64>,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub tilde_i: Vec<f64>,
    pub log_tilde_i: Vec<f64>,
}

impl IsoProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,u,v,tilde_I\n");
        for k in 0..self.t.len() {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e}\n",
                self.t[k], self.u[k], self.v[k], self.tilde_i[k]
            ));
        }
        s
    }
}

/// `(u, v, log Ĩ)` at `t = e^{log_t} ≤ 1/2`: the boundary density
/// `min(ρ(u), ρ(v))` of the two half-lines of mass `t`.
pub(crate) fn log_tilde_i(mu: &Measure1D, log_t: f64) -> (f64, f64, f64) {
    let u = mu.quantile_log(log_t);
    let v = mu.upper_quantile_log(log_t);
    (u, v, mu.log_density(u).min(mu.log_density(v)))
}

/// `log Ĩ(s)` for any `s ∈ (0, 1)`, using `Ĩ(s) = Ĩ(1 - s)` above one half.
pub(crate) fn log_tilde_i_any(mu: &Measure1D, log_s: f64) -> f64 {
    let half = 0.5f64.ln();
    let lt = if log_s <= half { log_s } else { (-log_s.exp()).ln_1p() };
    log_tilde_i(mu, lt).2
}

pub fn tilde_profile(mu: &Measure1D, t_grid: &[f64]) -> Result<IsoProfile> {
    if let Some(t) = t_grid.iter().find(|&&t| !(t > 0.0 && t <= 0.5)) {
        return Err(Error::Argument(format!("profile needs t in (0, 1/2], got {t}")));
    }
    let mut p = IsoProfile {
        t: t_grid.to_vec(),
        u: Vec::with_capacity(t_grid.len()),
        v: Vec::with_capacity(t_grid.len()),
        tilde_i: Vec::with_capacity(t_grid.len()),
        log_tilde_i: Vec::with_capacity(t_grid.len()),
    };
    for &t in t_grid {
        let (u, v, li) = log_tilde_i(mu, t.ln());
        p.u.push(u);
        p.v.push(v);
        p.tilde_i.push(li.exp());
        p.log_tilde_i.push(li);
    }
    Ok(p)
}

/// `log J_F(s)` with `J_F(s) = s F(1/s) / Ĩ(s)`; `-∞` where `F(1/s) ≤ 0`.
pub fn log_j_f(mu: &Measure1D, f: &EntropyFunction, log_s: f64) -> f64 {
    let fv = f.at_log(-log_s);
    if !(fv > 0.0) || log_s >= 0.0 {
        return f64::NEG_INFINITY;
    }
    log_s + fv.ln() - log_tilde_i_any(mu, log_s)
}

pub fn j_f(mu: &Measure1D, f: &EntropyFunction, s: f64) -> Result<f64> {
    if !(s > 0.0 && s <= 1.0) {
        return Err(Error::Domain(format!("J_F needs s in (0, 1], got {s}")));
    }
    Ok(log_j_f(mu, f, s.ln()).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IfProfile {
    pub r: Vec<f64>,
    /// Outside mass `μ(|x - c| > r)`.
    pub s: Vec<f64>,
    pub log_s: Vec<f64>,
    pub value: Vec<f64>,
    /// The outside mass underflowed and the value was set to 0.
    pub zero_mass: Vec<bool>,
}

impl IfProfile {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("r,s,I_F\n");
        for k in 0..self.r.len() {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e}\n",
                self.r[k], self.s[k], self.value[k]
            ));
        }
        s
    }
}

/// `I_F(r) = J_F(μ(|x - c| > r))` on `r_grid`.
pub fn i_f_profile(mu: &Measure1D, f: &EntropyFunction, r_grid: &[f64]) -> Result<IfProfile> {
    if let Some(r) = r_grid.iter().find(|&&r| !(r >= 0.0)) {
        return Err(Error::Argument(format!("radii must be nonnegative, got {r}")));
    }
    let mut p = IfProfile {
        r: r_grid.to_vec(),
        s: vec![],
        log_s: vec![],
        value: vec![],
        zero_mass: vec![],
    };
    for &r in r_grid {
        let ls = mu.log_outside_ball(r);
        let zero = ls == f64::NEG_INFINITY;
        let val = if zero || ls >= 0.0 {
            0.0
        } else {
            log_j_f(mu, f, ls).exp()
        };
        p.s.push(ls.exp());
        p.log_s.push(ls);
        p.value.push(val);
        p.zero_mass.push(zero);
    }
    Ok(p)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheegerReport {
    pub lambda: f64,
    pub t_at_sup: f64,
    /// The sampled supremum is reached at `t = 1/2` (to 1e-9 relative).
    pub attained_at_half: bool,
    /// Half-line sets only give a lower bound unless the measure is
    /// log-concave.
    pub exact_for_half_lines: bool,
}

fn default_t_grid() -> Vec<f64> {
    let mut t = logspace(1e-10, 0.05, 200);
    t.extend(linspace(0.05, 0.5, 201).into_iter().skip(1));
    t
}

/// `λ₁ = sup_t min(t, 1 - t)/Ĩ(t)` over half-line sets.
pub fn cheeger_constant(mu: &Measure1D) -> CheegerReport {
    let ts = default_t_grid();
    let mut best = (f64::NEG_INFINITY, 0.5);
    let mut at_half = f64::NEG_INFINITY;
    for &t in &ts {
        let li = log_tilde_i(mu, t.ln()).2;
        let ratio = (t.ln() - li).exp();
        if ratio > best.0 {
            best = (ratio, t);
        }
        if t == 0.5 {
            at_half = ratio;
        }
    }
    CheegerReport {
        lambda: best.0,
        t_at_sup: best.1,
        attained_at_half: at_half >= best.0 * (1.0 - 1e-9),
        exact_for_half_lines: mu.is_log_concave(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundFit {
    /// `inf_t Ĩ(t) / (t φ(1/t)^{1-1/α})` over the sampled grid.
    pub k: f64,
    pub t_at_inf: f64,
    pub positive: bool,
}

/// Largest `k` with `Ĩ(t) ≥ k t φ(1/t)^{1-1/α}` on `t_grid ⊂ (0, 1/2]`.
pub fn fit_lower_bound(
    mu: &Measure1D,
    phi: &EntropyFunction,
    alpha: f64,
    t_grid: &[f64],
) -> Result<LowerBoundFit> {
    if !(alpha > 1.0) {
        return Err(Error::Argument(format!("alpha must exceed 1, got {alpha}")));
    }
    let mut best = (f64::INFINITY, 0.5);
    for &t in t_grid {
        if !(t > 0.0 && t <= 0.5) {
            return Err(Error::Argument(format!("t must lie in (0, 1/2], got {t}")));
        }
        let ph = phi.at_log(-t.ln());
        if !(ph > 0.0) {
            continue;
        }
        let li = log_tilde_i(mu, t.ln()).2;
        let ratio = (li - t.ln() - (1.0 - 1.0 / alpha) * ph.ln()).exp();
        if ratio < best.0 {
            best = (ratio, t);
        }
    }
    Ok(LowerBoundFit {
        k: best.0,
        t_at_inf: best.1,
        positive: best.0 > 0.0 && best.0.is_finite(),
    })
}
