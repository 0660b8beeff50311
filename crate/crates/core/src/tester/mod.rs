//! Empirical checks of the inequalities on discretized measures: best
//! constants over finite families of test functions. Every constant reported
//! here is a lower bound for the true constant, never a certificate.

mod family;
mod functionals;

pub use family::{parameter_grid, FamilyKind, FamilySummary, Member, TestFamily, DEFAULT_FLOOR};
pub use functionals::{
    centred_modified_energy, classical_entropy, dual_cost, entropy_functional, grad_energy,
    integrate, mean, median, median_energy, modified_energy, restricted_modified_energy,
    second_moment, set_fractions, variance,
};

use rayon::prelude::*;
use serde::Serialize;

use crate::convex::CostFunction;
use crate::entropy::EntropyFunction;
use crate::error::{Error, Result};
use crate::measure1d::{Measure1D, Potential, SampledFunction, Truncation};

/// Relative gap below the family supremum that still counts as saturating.
const SATURATION_GAP: f64 = 1e-3;
/// Allowed relative drift of a best constant under family enrichment.
pub const ENRICHMENT_TOLERANCE: f64 = 0.1;
/// Constants `C` at which the variance-form frontier `B(C)` is sampled.
pub const FRONTIER_C: [f64; 7] = [0.0, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestRow {
    pub label: String,
    pub param: f64,
    pub entropy_f: f64,
    pub classical_entropy: f64,
    pub second_moment: f64,
    pub variance: f64,
    pub grad_energy: f64,
    pub modified_energy: f64,
    pub median: f64,
    pub median_energy: f64,
    /// Left side over right side of the inequality under test.
    pub ratio: Option<f64>,
    pub saturated: bool,
    pub skipped: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FrontierPoint {
    pub c: f64,
    pub b: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Margin {
    pub label: String,
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub test: String,
    pub measure: String,
    pub entropy: String,
    pub cost: Option<String>,
    #[serde(rename = "K")]
    pub k: Option<f64>,
    pub family: FamilySummary,
    pub rows: Vec<TestRow>,
    /// Supremum of the ratios: `Ĉ`.
    pub best_constant: Option<f64>,
    /// Smallest additive constant `B̂` making the tested display hold.
    pub b_hat: Option<f64>,
    pub frontier: Vec<FrontierPoint>,
    pub margins: Vec<Margin>,
    pub min_margin: Option<f64>,
    /// `Ĉ` on the enriched family, when stability was tested.
    pub enriched_constant: Option<f64>,
    pub stable: Option<bool>,
}

impl TestReport {
    fn new(test: &str, mu: &Measure1D, entropy: &EntropyFunction, family: &TestFamily) -> Self {
        TestReport {
            test: test.to_string(),
            measure: mu.potential().name(),
            entropy: entropy.name(),
            cost: None,
            k: None,
            family: family.summary(),
            rows: vec![],
            best_constant: None,
            b_hat: None,
            frontier: vec![],
            margins: vec![],
            min_margin: None,
            enriched_constant: None,
            stable: None,
        }
    }

    fn finish_ratios(&mut self) {
        let best = self
            .rows
            .iter()
            .filter_map(|r| r.ratio)
            .filter(|r| r.is_finite())
            .fold(None, |m: Option<f64>, r| Some(m.map_or(r, |m| m.max(r))));
        if let Some(b) = best {
            for r in &mut self.rows {
                r.saturated = r.ratio.is_some_and(|x| x >= b * (1.0 - SATURATION_GAP));
            }
        }
        self.best_constant = best;
        self.min_margin = self
            .margins
            .iter()
            .map(|m| m.value)
            .fold(None, |m: Option<f64>, v| Some(m.map_or(v, |m| m.min(v))));
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from(
            "label,param,entropy_F,classical_entropy,variance,grad_energy,modified_energy,median_energy,ratio,saturated\n",
        );
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{},{}\n",
                csv_field(&r.label),
                r.param,
                r.entropy_f,
                r.classical_entropy,
                r.variance,
                r.grad_energy,
                r.modified_energy,
                r.median_energy,
                r.ratio.map_or(String::new(), |x| format!("{x:.16e}")),
                r.saturated
            ));
        }
        s
    }

    /// `param,ratio` rows for plotting.
    pub fn ratio_csv(&self) -> String {
        let mut s = String::from("param,ratio\n");
        for r in self.rows.iter().filter(|r| !r.skipped) {
            if let Some(x) = r.ratio {
                s.push_str(&format!("{:.16e},{:.16e}\n", r.param, x));
            }
        }
        s
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// The functionals shared by every row.
fn base_row(
    mu: &Measure1D,
    m: &Member,
    entropy: &EntropyFunction,
    cost: Option<&CostFunction>,
) -> Result<TestRow> {
    let f = &m.f;
    Ok(TestRow {
        label: m.label.clone(),
        param: m.param,
        entropy_f: entropy_functional(mu, f, entropy)?,
        classical_entropy: classical_entropy(mu, f)?,
        second_moment: second_moment(mu, f),
        variance: variance(mu, f),
        grad_energy: grad_energy(mu, f, 2.0),
        modified_energy: match cost {
            Some(c) => modified_energy(mu, f, c)?,
            None => f64::NAN,
        },
        median: median(mu, f),
        median_energy: median_energy(mu, f),
        ratio: None,
        saturated: false,
        skipped: false,
    })
}

/// `lhs / rhs`, or `None` when both vanish to rounding.
fn ratio(lhs: f64, rhs: f64, scale: f64) -> Option<f64> {
    let tol = 1e-12 * scale.max(f64::MIN_POSITIVE);
    if rhs.abs() <= tol {
        if lhs.abs() <= tol {
            None
        } else {
            Some(f64::INFINITY)
        }
    } else {
        Some(lhs / rhs)
    }
}

/// `[(4(K+1)² + 2) + (√K + 1)²] F'(1)`.
pub fn step1_constant(entropy: &EntropyFunction, k: f64) -> f64 {
    ((4.0 * (k + 1.0).powi(2) + 2.0) + (k.sqrt() + 1.0).powi(2)) * entropy.derivative(1.0)
}

/// `I₁ = ∫ F(f²/μ(f²)) min(f², Kμ(f²)) dμ`.
pub fn step1_integral(mu: &Measure1D, f: &SampledFunction, entropy: &EntropyFunction, k: f64) -> f64 {
    let m2 = second_moment(mu, f);
    let lm = m2.ln();
    integrate(mu, |i| {
        let v = f.values[i];
        if v == 0.0 {
            return 0.0;
        }
        entropy.at_log(2.0 * v.abs().ln() - lm) * (v * v).min(k * m2)
    })
}

fn check_k(k: f64) -> Result<()> {
    if !(k > 1.0 && k.is_finite()) {
        return Err(Error::Argument(format!("K must exceed 1, got {k}")));
    }
    Ok(())
}

fn par_members<T: Send>(
    members: &[Member],
    f: impl Fn(&Member) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    members.par_iter().map(f).collect()
}

/// Both forms of the defective inequality: `B̂` for the form with the
/// constant 4 on the restricted modified energy, and the frontier `B(C)` of
/// the variance form.
pub fn verify_theorem_2_1(
    mu: &Measure1D,
    entropy: &EntropyFunction,
    cost: &CostFunction,
    k: f64,
    family: &TestFamily,
) -> Result<TestReport> {
    check_k(k)?;
    let members = family.members(mu)?;
    struct Out {
        row: TestRow,
        restricted: f64,
        centred: f64,
    }
    let outs = par_members(&members, |m| {
        let mut row = base_row(mu, m, entropy, Some(cost))?;
        let restricted = restricted_modified_energy(mu, &m.f, cost, k)?;
        let centred = centred_modified_energy(mu, &m.f, cost)?;
        row.ratio = ratio(row.entropy_f, 4.0 * restricted + row.second_moment, row.second_moment);
        Ok(Out {
            row,
            restricted,
            centred,
        })
    })?;
    let mut rep = TestReport::new("theorem_2_1", mu, entropy, family);
    rep.cost = Some(format!("{cost:?}"));
    rep.k = Some(k);
    let mut b_hat = 0.0f64;
    for o in &outs {
        let excess = o.row.entropy_f - 4.0 * o.restricted;
        if excess > 0.0 {
            b_hat = b_hat.max(excess / o.row.second_moment);
        }
    }
    rep.b_hat = Some(b_hat);
    rep.frontier = FRONTIER_C
        .iter()
        .map(|&c| {
            let b = outs.iter().fold(0.0f64, |b, o| {
                let excess = o.row.entropy_f - c * o.centred;
                if excess <= 1e-12 * o.row.second_moment {
                    b
                } else if o.row.variance > 0.0 {
                    b.max(excess / o.row.variance)
                } else {
                    f64::INFINITY
                }
            });
            FrontierPoint { c, b }
        })
        .collect();
    rep.rows = outs.into_iter().map(|o| o.row).collect();
    rep.finish_ratios();
    Ok(rep)
}

/// Margins of the explicit first-step bound
/// `I₁ ≤ [(4(K+1)² + 2) + (√K + 1)²] F'(1) Var_μ f` per member.
pub fn step1_check(
    mu: &Measure1D,
    entropy: &EntropyFunction,
    k: f64,
    family: &TestFamily,
) -> Result<TestReport> {
    check_k(k)?;
    let members = family.members(mu)?;
    let c = step1_constant(entropy, k);
    let outs = par_members(&members, |m| {
        let mut row = base_row(mu, m, entropy, None)?;
        let i1 = step1_integral(mu, &m.f, entropy, k);
        let bound = c * row.variance;
        row.ratio = ratio(i1, bound, row.second_moment);
        Ok((
            row,
            Margin {
                label: m.label.clone(),
                name: "step1".into(),
                value: bound - i1,
            },
        ))
    })?;
    let mut rep = TestReport::new("step1", mu, entropy, family);
    rep.k = Some(k);
    for (row, margin) in outs {
        rep.rows.push(row);
        rep.margins.push(margin);
    }
    rep.finish_ratios();
    Ok(rep)
}

/// Both displays of the restricted-entropy lemma. The first uses the
/// first-step constant; `b_hat` is the smallest `B` for the second.
pub fn lemma_3_4_check(
    mu: &Measure1D,
    entropy: &EntropyFunction,
    k: f64,
    family: &TestFamily,
) -> Result<TestReport> {
    check_k(k)?;
    let members = family.members(mu)?;
    let c = step1_constant(entropy, k);
    let outs = par_members(&members, |m| {
        let row = base_row(mu, m, entropy, None)?;
        let f = &m.f;
        let m2 = row.second_moment;
        let lm = m2.ln();
        let level = k * m2;
        let sq: Vec<f64> = f.values.iter().map(|v| v * v).collect();
        let frac = set_fractions(&f.grid, &sq, level);
        let g = |i: usize| entropy.at_log(2.0 * f.values[i].ln() - lm);
        let restricted = integrate(mu, |i| frac[i] * sq[i] * g(i));
        let cut = level.sqrt();
        let excess = integrate(mu, |i| (f.values[i] - cut).max(0.0).powi(2) * g(i));
        let first = c * row.variance + row.entropy_f - restricted;
        let b = if row.entropy_f - 2.0 * excess <= 1e-12 * m2 {
            0.0
        } else if row.variance > 0.0 {
            (row.entropy_f - 2.0 * excess) / row.variance
        } else {
            f64::INFINITY
        };
        Ok((row, m.label.clone(), first, b))
    })?;
    let mut rep = TestReport::new("lemma_3_4", mu, entropy, family);
    rep.k = Some(k);
    let mut b_hat = 0.0f64;
    for (row, label, first, b) in outs {
        rep.margins.push(Margin {
            label,
            name: "first_display".into(),
            value: first,
        });
        b_hat = b_hat.max(b);
        rep.rows.push(row);
    }
    rep.b_hat = Some(b_hat);
    rep.finish_ratios();
    Ok(rep)
}

/// `Ĉ = sup_{f,g} [∫ f² F(g²/μ(g²)) - 2∫ f² F(f²/μ(f²))] / μ(f²)` over
/// ordered pairs of members.
pub fn lemma_3_3_constant(mu: &Measure1D, entropy: &EntropyFunction, family: &TestFamily) -> Result<f64> {
    let members = family.members(mu)?;
    let dens: Vec<(f64, Vec<f64>)> = members
        .iter()
        .map(|m| {
            let m2 = second_moment(mu, &m.f);
            let lm = m2.ln();
            let g = m
                .f
                .values
                .iter()
                .map(|&v| entropy.at_log(2.0 * v.ln() - lm))
                .collect();
            (m2, g)
        })
        .collect();
    let mut best = f64::NEG_INFINITY;
    for (i, mf) in members.iter().enumerate() {
        let own = integrate(mu, |k| mf.f.values[k].powi(2) * dens[i].1[k]);
        for d in &dens {
            let cross = integrate(mu, |k| mf.f.values[k].powi(2) * d.1[k]);
            best = best.max((cross - 2.0 * own) / dens[i].0);
        }
    }
    Ok(best)
}

fn ratio_report(
    test: &str,
    mu: &Measure1D,
    entropy: &EntropyFunction,
    family: &TestFamily,
    row_fn: &(dyn Fn(&Member) -> Result<TestRow> + Sync),
) -> Result<TestReport> {
    let members = family.members(mu)?;
    let mut rep = TestReport::new(test, mu, entropy, family);
    rep.rows = par_members(&members, row_fn)?;
    for r in &mut rep.rows {
        r.skipped = r.ratio.is_none();
    }
    rep.finish_ratios();
    Ok(rep)
}

fn with_enrichment(
    mut rep: TestReport,
    enriched: Result<TestReport>,
) -> Result<TestReport> {
    let e = enriched?;
    rep.enriched_constant = e.best_constant;
    rep.stable = match (rep.best_constant, e.best_constant) {
        (Some(a), Some(b)) if a.is_finite() && b.is_finite() && a > 0.0 => {
            Some((b - a).abs() <= ENRICHMENT_TOLERANCE * a)
        }
        _ => Some(false),
    };
    Ok(rep)
}

/// The measure `e^{-|x|^α}` on the default grid.
pub fn exp_power_measure(alpha: f64) -> Result<Measure1D> {
    Measure1D::build(Potential::ExpPower(alpha), Truncation::default())
}

/// `Ĉ_τ = sup ∫ f² F_τ(f²/μ(f²)) dμ / ∫ f² c_{A,ατ/(α-1)}(|f'|/f) dμ` on
/// `e^{-|x|^α}`, with its stability under family enrichment.
pub fn verify_theorem_1_1(
    alpha: f64,
    tau: f64,
    a: f64,
    family: &TestFamily,
) -> Result<TestReport> {
    let mu = exp_power_measure(alpha)?;
    verify_theorem_1_1_on(&mu, alpha, tau, a, family)
}

pub fn verify_theorem_1_1_on(
    mu: &Measure1D,
    alpha: f64,
    tau: f64,
    a: f64,
    family: &TestFamily,
) -> Result<TestReport> {
    if !(alpha > 1.0 && alpha <= 2.0) {
        return Err(Error::Argument(format!("alpha must lie in (1, 2], got {alpha}")));
    }
    if !(tau <= 1.0 && tau >= 2.0 * (1.0 - 1.0 / alpha) - 1e-12) {
        return Err(Error::Argument(format!(
            "tau must lie in [{}, 1], got {tau}",
            2.0 * (1.0 - 1.0 / alpha)
        )));
    }
    let f_tau = EntropyFunction::f_tau(tau)?;
    let beta_tau = alpha * tau / (alpha - 1.0);
    // The energy integrand is c_{A,β_τ} = c*, with c its conjugate.
    let cost = CostFunction::closed_form(a, beta_tau / (beta_tau - 1.0))?;
    let row_fn = |m: &Member| -> Result<TestRow> {
        let mut row = base_row(mu, m, &f_tau, Some(&cost))?;
        row.ratio = ratio(row.entropy_f, row.modified_energy, row.second_moment);
        Ok(row)
    };
    let mut rep = ratio_report("theorem_1_1", mu, &f_tau, family, &row_fn)?;
    rep.cost = Some(format!("c_{{{a},{beta_tau}}}"));
    let enriched = ratio_report("theorem_1_1", mu, &f_tau, &family.enriched(), &row_fn);
    with_enrichment(rep, enriched)
}

/// `Ĉ = sup Ent_μ|f|^β / (∫|f'|^β dμ + Var_μ|f|^{β/2})` with `β = α/(α-1)`.
pub fn verify_theorem_4_4(mu: &Measure1D, alpha: f64, family: &TestFamily) -> Result<TestReport> {
    if !mu.is_log_concave() {
        return Err(Error::Argument("the inequality needs a log-concave measure".into()));
    }
    if !(alpha > 1.0) {
        return Err(Error::Argument(format!("alpha must exceed 1, got {alpha}")));
    }
    let integrable = (0..8).any(|j| {
        let eps = 0.5f64.powi(j);
        mu.log_expectation_radial(&|r| eps * r.powf(alpha))
            .is_ok_and(|v| v.is_finite())
    });
    if !integrable {
        return Err(Error::Argument(format!(
            "exp(eps |x|^{alpha}) is not integrable for any sampled eps"
        )));
    }
    let beta = alpha / (alpha - 1.0);
    let log = EntropyFunction::log();
    let row_fn = |m: &Member| -> Result<TestRow> {
        let g = m.f.map(
            |v| v.abs().powf(0.5 * beta),
            |v| 0.5 * beta * v.abs().powf(0.5 * beta - 1.0) * v.signum(),
        );
        let mut row = base_row(mu, m, &log, None)?;
        let ent = classical_entropy(mu, &g)?;
        let grad = grad_energy(mu, &m.f, beta);
        let var = variance(mu, &g);
        row.entropy_f = ent;
        row.grad_energy = grad;
        row.variance = var;
        row.ratio = ratio(ent, grad + var, second_moment(mu, &g));
        Ok(row)
    };
    let mut rep = ratio_report("theorem_4_4", mu, &log, family, &row_fn)?;
    let enriched = ratio_report("theorem_4_4", mu, &log, &family.enriched(), &row_fn);
    rep = with_enrichment(rep, enriched)?;
    Ok(rep)
}
