//! Quadratures of entropies and energies against the node weights of a
//! discretized measure.

use std::cmp::Ordering;

use crate::convex::CostFunction;
use crate::entropy::EntropyFunction;
use crate::error::{Error, Result};
use crate::measure1d::{Measure1D, SampledFunction};

fn aligned(mu: &Measure1D, f: &SampledFunction) -> Result<()> {
    if f.len() != mu.len() {
        return Err(Error::Argument("function and measure grids differ".into()));
    }
    Ok(())
}

pub fn integrate(mu: &Measure1D, g: impl Fn(usize) -> f64) -> f64 {
    mu.weights().iter().enumerate().map(|(k, w)| w * g(k)).sum()
}

pub fn mean(mu: &Measure1D, f: &SampledFunction) -> f64 {
    integrate(mu, |k| f.values[k])
}

pub fn second_moment(mu: &Measure1D, f: &SampledFunction) -> f64 {
    integrate(mu, |k| f.values[k] * f.values[k])
}

pub fn variance(mu: &Measure1D, f: &SampledFunction) -> f64 {
    let m = mean(mu, f);
    integrate(mu, |k| (f.values[k] - m).powi(2))
}

/// `∫ |f'|^p dμ`.
pub fn grad_energy(mu: &Measure1D, f: &SampledFunction, p: f64) -> f64 {
    integrate(mu, |k| f.derivs[k].abs().powf(p))
}

/// `F(f²/μ(f²))` at every node; `y F(y) → 0` as `y → 0` so zero nodes give 0.
fn entropy_density(f: &SampledFunction, ent: &EntropyFunction, m2: f64) -> Vec<f64> {
    let lm = m2.ln();
    f.values
        .iter()
        .map(|&v| {
            if v == 0.0 {
                0.0
            } else {
                ent.at_log(2.0 * v.abs().ln() - lm)
            }
        })
        .collect()
}

/// `∫ f² F(f²/μ(f²)) dμ`.
pub fn entropy_functional(mu: &Measure1D, f: &SampledFunction, ent: &EntropyFunction) -> Result<f64> {
    aligned(mu, f)?;
    let m2 = second_moment(mu, f);
    if !(m2 > 0.0) {
        return Err(Error::Argument("entropy of a function with zero mass".into()));
    }
    let g = entropy_density(f, ent, m2);
    Ok(integrate(mu, |k| {
        if f.values[k] == 0.0 {
            0.0
        } else {
            f.values[k] * f.values[k] * g[k]
        }
    }))
}

pub fn classical_entropy(mu: &Measure1D, f: &SampledFunction) -> Result<f64> {
    entropy_functional(mu, f, &EntropyFunction::log())
}

/// `c*` as a callable: the closed form when the cost has one.
pub fn dual_cost(cost: &CostFunction) -> Box<dyn Fn(f64) -> f64 + Send + Sync + '_> {
    match cost.closed_dual() {
        Some(d) => Box::new(move |x| d.value(x).unwrap_or(f64::NAN)),
        None => Box::new(move |x| cost.conjugate_at(x).map(|v| v.0).unwrap_or(f64::NAN)),
    }
}

/// Fraction of each node's dual cell where the piecewise-linear interpolant
/// of `values` is at least `level`.
pub fn set_fractions(grid: &[f64], values: &[f64], level: f64) -> Vec<f64> {
    let n = grid.len();
    let half = |k: usize, j: usize| -> (f64, f64) {
        let h = 0.5 * (grid[j] - grid[k]).abs();
        let (a, b) = (values[k] - level, values[j] - level);
        let mid = 0.5 * (a + b);
        let frac = if a >= 0.0 && mid >= 0.0 {
            1.0
        } else if a < 0.0 && mid < 0.0 {
            0.0
        } else {
            // Linear crossing inside [x_k, midpoint]; `a` and `mid` differ in sign.
            let z = a / (a - mid);
            if a >= 0.0 {
                z
            } else {
                1.0 - z
            }
        };
        (h, frac)
    };
    (0..n)
        .map(|k| {
            let mut num = 0.0;
            let mut den = 0.0;
            for j in [k.wrapping_sub(1), k + 1] {
                if j < n {
                    let (h, fr) = half(k, j);
                    num += h * fr;
                    den += h;
                }
            }
            if den > 0.0 {
                num / den
            } else if values[k] >= level {
                1.0
            } else {
                0.0
            }
        })
        .collect()
}

/// `∫ f² c*(|f'|/f) dμ`.
pub fn modified_energy(mu: &Measure1D, f: &SampledFunction, cost: &CostFunction) -> Result<f64> {
    restricted(mu, f, cost, None)
}

/// `∫_{f² ≥ Kμ(f²)} f² c*(|f'|/f) dμ`.
pub fn restricted_modified_energy(
    mu: &Measure1D,
    f: &SampledFunction,
    cost: &CostFunction,
    k: f64,
) -> Result<f64> {
    restricted(mu, f, cost, Some(k))
}

fn restricted(mu: &Measure1D, f: &SampledFunction, cost: &CostFunction, k: Option<f64>) -> Result<f64> {
    aligned(mu, f)?;
    if let Some(i) = f.values.iter().position(|&v| !(v > 0.0)) {
        return Err(Error::Domain(format!(
            "modified energy needs f > 0, got {} at x = {}",
            f.values[i], f.grid[i]
        )));
    }
    let frac = match k {
        Some(k) => {
            let sq: Vec<f64> = f.values.iter().map(|v| v * v).collect();
            set_fractions(&f.grid, &sq, k * second_moment(mu, f))
        }
        None => vec![1.0; f.len()],
    };
    let cs = dual_cost(cost);
    Ok(integrate(mu, |i| {
        if frac[i] == 0.0 {
            return 0.0;
        }
        let r = f.ratio(i);
        let c = if r == 0.0 { 0.0 } else { cs(r) };
        frac[i] * f.values[i] * f.values[i] * c
    }))
}

/// `∫ (f - μ(f))² c*(|f'|/|f - μ(f)|) dμ`.
pub fn centred_modified_energy(mu: &Measure1D, f: &SampledFunction, cost: &CostFunction) -> Result<f64> {
    aligned(mu, f)?;
    let m = mean(mu, f);
    let cs = dual_cost(cost);
    Ok(integrate(mu, |i| {
        let d = (f.values[i] - m).abs();
        let g = f.derivs[i].abs();
        if d == 0.0 || g == 0.0 {
            0.0
        } else {
            d * d * cs(g / d)
        }
    }))
}

/// `m_f = inf{t : μ(f > t) ≤ 1/2}` from the sorted value table.
pub fn median(mu: &Measure1D, f: &SampledFunction) -> f64 {
    let w = mu.weights();
    let mut idx: Vec<usize> = (0..f.len()).collect();
    idx.sort_by(|&a, &b| f.values[a].partial_cmp(&f.values[b]).unwrap_or(Ordering::Equal));
    // Mass strictly above each distinct value, walking down from the top.
    let mut above = 0.0;
    let mut best = f.values[idx[idx.len() - 1]];
    let mut i = idx.len();
    while i > 0 {
        let v = f.values[idx[i - 1]];
        if above > 0.5 {
            break;
        }
        best = v;
        while i > 0 && f.values[idx[i - 1]] == v {
            above += w[idx[i - 1]];
            i -= 1;
        }
    }
    best
}

/// `∫ (f - m_f)² dμ`.
pub fn median_energy(mu: &Measure1D, f: &SampledFunction) -> f64 {
    let m = median(mu, f);
    integrate(mu, |k| (f.values[k] - m).powi(2))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure1d::{Potential, Truncation};
    use crate::tester::family::TestFamily;

    fn gauss() -> Measure1D {
        Measure1D::build(
            Potential::Gauss,
            Truncation::Explicit {
                lo: -12.0,
                hi: 12.0,
                points: 4001,
            },
        )
        .unwrap()
    }

    #[test]
    fn gaussian_exponential_entropy() {
        let mu = gauss();
        let f = &TestFamily::exponential(&[1.0]).members(&mu).unwrap()[0].f;
        // Ent e^{λx} under N(0,1) is (λ²/2) e^{λ²/2}.
        let e = classical_entropy(&mu, f).unwrap();
        assert!((e - 0.5 * 0.5f64.exp()).abs() < 1e-5, "{e}");
        let e2 = classical_entropy(&mu, &f.scaled(2.0)).unwrap();
        assert!((e2 - 4.0 * e).abs() < 1e-10 * e2);
    }

    #[test]
    fn constant_functionals_vanish() {
        let mu = gauss();
        let f = SampledFunction::from_fn(mu.grid().clone(), |_| 2.0, |_| 0.0).unwrap();
        let c = CostFunction::closed_form(1.0, 1.5).unwrap();
        assert!(classical_entropy(&mu, &f).unwrap().abs() < 1e-14);
        assert_eq!(modified_energy(&mu, &f, &c).unwrap(), 0.0);
        assert!(variance(&mu, &f) < 1e-24);
        assert_eq!(median(&mu, &f), 2.0);
    }

    #[test]
    fn modified_energy_gaussian_mgf() {
        let mu = gauss();
        let f = &TestFamily::exponential(&[0.5]).members(&mu).unwrap()[0].f;
        let c = CostFunction::closed_form(1.0, 2.0).unwrap();
        let v = modified_energy(&mu, f, &c).unwrap();
        assert!((v - (0.125f64).exp() / 32.0).abs() < 1e-8, "{v}");
        let q = grad_energy(&mu, f, 2.0);
        assert!((v - 0.5 * q).abs() < 1e-12);
    }

    #[test]
    fn median_of_linear_and_set_fractions() {
        let mu = gauss();
        let f = SampledFunction::from_fn(mu.grid().clone(), |x| x + 5.0, |_| 1.0).unwrap();
        assert!((median(&mu, &f) - 5.0).abs() <= mu.max_cell());
        let fr = set_fractions(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0], 1.5);
        assert_eq!(fr, vec![0.0, 0.0, 1.0]);
        let fr = set_fractions(&[0.0, 1.0, 2.0], &[0.0, 1.0, 2.0], 1.25);
        assert!((fr[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn restricted_plus_complement_is_full() {
        let mu = gauss();
        let f = &TestFamily::exponential(&[1.0]).members(&mu).unwrap()[0].f;
        let c = CostFunction::closed_form(1.0, 2.0).unwrap();
        let full = modified_energy(&mu, f, &c).unwrap();
        let big = restricted_modified_energy(&mu, f, &c, 1e-300).unwrap();
        assert!((full - big).abs() < 1e-14);
        let part = restricted_modified_energy(&mu, f, &c, 2.0).unwrap();
        assert!(part > 0.0 && part < full);
    }
}
