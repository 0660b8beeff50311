//! Bobkov-Götze line criterion, the convex-measure bound (35) on half-lines,
//! and the growth of `I_log(r)/r`.

use serde::Serialize;

use super::profile::log_j_f;
use super::Measure1D;
use crate::entropy::EntropyFunction;
use crate::error::{Error, Result};
use crate::quad::{gl_log_integrate, linspace, log_add_exp};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    Left,
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GoetzeStatus {
    Finite,
    Divergent,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GoetzeReport {
    pub side: Side,
    /// Sampled supremum over the window and the probes beyond it.
    pub value: f64,
    pub arg: f64,
    pub status: GoetzeStatus,
    /// `log g(m ∓ 4D) - log g(m ∓ D)` with `D` the distance from the median
    /// to the window edge.
    pub log_growth: f64,
}

/// `sup_{x<m} F(x) log(1/F(x)) ∫_x^m dx/ρ` (left), or the mirrored quantity.
pub fn bobkov_goetze(mu: &Measure1D, side: Side) -> GoetzeReport {
    let m = mu.median();
    let grid = mu.grid();
    let n = grid.len();
    let inv = |a: f64, b: f64| gl_log_integrate(a, b, |x| mu.potential().eval(x) + mu.log_z());
    let log_g = |log_mass: f64, log_int: f64| {
        if log_mass >= 0.0 || log_mass == f64::NEG_INFINITY {
            f64::NEG_INFINITY
        } else {
            log_mass + (-log_mass).ln() + log_int
        }
    };
    let mut best = (f64::NEG_INFINITY, m);
    let edge_int;
    let edge;
    match side {
        Side::Left => {
            let k_m = grid.partition_point(|&x| x < m);
            let mut acc = f64::NEG_INFINITY;
            let mut right = m;
            for k in (0..k_m).rev() {
                acc = log_add_exp(acc, inv(grid[k], right));
                right = grid[k];
                let lg = log_g(mu.log_cdf(grid[k]), acc);
                if lg > best.0 {
                    best = (lg, grid[k]);
                }
            }
            edge_int = acc;
            edge = grid[0];
        }
        Side::Right => {
            let k_m = grid.partition_point(|&x| x <= m);
            let mut acc = f64::NEG_INFINITY;
            let mut left = m;
            for &x in grid.iter().take(n).skip(k_m) {
                acc = log_add_exp(acc, inv(left, x));
                left = x;
                let lg = log_g(mu.log_sf(x), acc);
                if lg > best.0 {
                    best = (lg, x);
                }
            }
            edge_int = acc;
            edge = grid[n - 1];
        }
    }
    let d = (edge - m).abs();
    let probe = |dist: f64| -> f64 {
        let (lm, extra) = match side {
            Side::Left => {
                let x = m - dist;
                (mu.log_cdf(x), mu.log_inverse_density_integral(x, edge))
            }
            Side::Right => {
                let x = m + dist;
                (mu.log_sf(x), mu.log_inverse_density_integral(edge, x))
            }
        };
        log_g(lm, log_add_exp(edge_int, extra))
    };
    let g1 = probe(d);
    let g2 = probe(2.0 * d);
    let g4 = probe(4.0 * d);
    for (g, dist) in [(g2, 2.0 * d), (g4, 4.0 * d)] {
        if g > best.0 {
            best = (g, if side == Side::Left { m - dist } else { m + dist });
        }
    }
    let log_growth = g4 - g1;
    let status = if !(log_growth <= 1.25f64.ln()) {
        GoetzeStatus::Divergent
    } else {
        GoetzeStatus::Finite
    };
    GoetzeReport {
        side,
        value: best.0.exp(),
        arg: best.1,
        status,
        log_growth,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BobkovRow {
    pub t: f64,
    pub v: f64,
    pub r: f64,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BobkovBoundReport {
    pub rows: Vec<BobkovRow>,
    pub min_margin: f64,
    pub t_at_min: f64,
}

/// Margins of `2rμ⁺(A) ≥ μ(A)log(1/μ(A)) + (1-μ(A))log(1/(1-μ(A))) + log μ(B_r)`
/// for `A = [v(t), ∞)` and `r` with `μ(B_r^c) = t`.
pub fn bobkov_bound_check(mu: &Measure1D, t_grid: &[f64]) -> Result<BobkovBoundReport> {
    if !mu.is_log_concave() {
        return Err(Error::Argument(
            "the bound needs a log-concave measure".into(),
        ));
    }
    let mut rows = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        if !(t > 0.0 && t <= 0.5) {
            return Err(Error::Argument(format!("t must lie in (0, 1/2], got {t}")));
        }
        let v = mu.upper_quantile_log(t.ln());
        let r = mu.radius_for_outside_mass(t.ln())?;
        let rhs = t * (1.0 / t).ln() + (1.0 - t) * (1.0 / (1.0 - t)).ln() + (-t).ln_1p();
        let margin = 2.0 * r * mu.density(v) - rhs;
        rows.push(BobkovRow { t, v, r, margin });
    }
    let (min_margin, t_at_min) = rows
        .iter()
        .map(|r| (r.margin, r.t))
        .fold((f64::INFINITY, f64::NAN), |a, b| if b.0 < a.0 { b } else { a });
    Ok(BobkovBoundReport {
        rows,
        min_margin,
        t_at_min,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma41Row {
    pub r_lo: f64,
    pub r_hi: f64,
    pub sup: f64,
    pub argmax: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Lemma41Report {
    /// `R_{1/2}`: the radius with `μ(B_R) = 1/2`.
    pub r_half: f64,
    pub rows: Vec<Lemma41Row>,
    /// The window suprema are nonincreasing (to 1e-6 relative).
    pub stabilized: bool,
}

/// `sup_{r ∈ [R, 2R]} I_log(r)/r` for each `R` in `starts`.
pub fn lemma41_ratio(mu: &Measure1D, starts: &[f64]) -> Result<Lemma41Report> {
    if !mu.is_log_concave() {
        return Err(Error::Argument("the ratio bound needs a log-concave measure".into()));
    }
    let log = EntropyFunction::log();
    let r_half = mu.radius_for_outside_mass(0.5f64.ln())?;
    let mut rows = Vec::with_capacity(starts.len());
    for &r0 in starts {
        if !(r0 > 0.0) {
            return Err(Error::Argument(format!("window start must be positive, got {r0}")));
        }
        let mut best = (f64::NEG_INFINITY, r0);
        for r in linspace(r0, 2.0 * r0, 65) {
            let v = i_log_over_r(mu, &log, r);
            if v > best.0 {
                best = (v, r);
            }
        }
        rows.push(Lemma41Row {
            r_lo: r0,
            r_hi: 2.0 * r0,
            sup: best.0,
            argmax: best.1,
        });
    }
    let stabilized = rows.windows(2).all(|w| w[1].sup <= w[0].sup * (1.0 + 1e-6));
    Ok(Lemma41Report {
        r_half,
        rows,
        stabilized,
    })
}

pub(crate) fn i_log_over_r(mu: &Measure1D, log: &EntropyFunction, r: f64) -> f64 {
    let ls = mu.log_outside_ball(r);
    if ls >= 0.0 || ls == f64::NEG_INFINITY {
        return 0.0;
    }
    log_j_f(mu, log, ls).exp() / r
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure1d::{Potential, Truncation};
    use crate::quad::linspace;

    fn build(p: Potential, points: usize) -> Measure1D {
        Measure1D::build(p, Truncation::Auto { points }).unwrap()
    }

    #[test]
    fn goetze_gaussian_is_finite_and_stable() {
        let a = build(Potential::Gauss, 4096);
        let b = build(Potential::Gauss, 16384);
        for side in [Side::Left, Side::Right] {
            let ra = bobkov_goetze(&a, side);
            let rb = bobkov_goetze(&b, side);
            assert_eq!(rb.status, GoetzeStatus::Finite);
            assert!(((ra.value - rb.value) / rb.value).abs() < 0.05);
        }
        let l = bobkov_goetze(&b, Side::Left).value;
        let r = bobkov_goetze(&b, Side::Right).value;
        assert!(((l - r) / r).abs() < 1e-6);
    }

    #[test]
    fn goetze_laplace_diverges() {
        let m = build(Potential::Laplace, 16384);
        assert_eq!(bobkov_goetze(&m, Side::Right).status, GoetzeStatus::Divergent);
    }

    #[test]
    fn bobkov_margins_laplace_closed_form() {
        let m = build(Potential::Laplace, 16384);
        let ts = linspace(0.01, 0.5, 50);
        let rep = bobkov_bound_check(&m, &ts).unwrap();
        for row in &rep.rows {
            // r = log(1/t), ρ(v) = t.
            let t = row.t;
            let closed = 2.0 * (1.0 / t).ln() * t - t * (1.0 / t).ln() - t * (1.0 - t).ln();
            assert!((row.margin - closed).abs() < 1e-9, "t={t}");
        }
        assert!(rep.min_margin >= 0.0);
    }

    #[test]
    fn lemma41_laplace_is_flat() {
        let m = build(Potential::Laplace, 16384);
        let rep = lemma41_ratio(&m, &[2.0, 4.0, 8.0]).unwrap();
        for row in &rep.rows {
            assert!((row.sup - 1.0).abs() < 1e-8);
        }
        assert!(rep.stabilized);
    }
}
