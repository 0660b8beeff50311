//! Monotone rearrangement `f̃(x) = g(|x - c|)` with `g = G_{μ∘f⁻¹} ∘ F_{μ∘|x-c|⁻¹}`.

use std::cmp::Ordering;

use super::sampled::{finite_differences, SampledFunction};
use super::Measure1D;
use crate::error::{Error, Result};

/// The equimeasurable function nondecreasing in `|x - c|`, built on the node
/// law of `μ`: nodes sorted by distance receive the values of `f` sorted by
/// size, matched through the midpoints of their cumulative weights.
pub fn rearrange(mu: &Measure1D, f: &SampledFunction) -> Result<SampledFunction> {
    let w = mu.weights();
    let grid = mu.grid();
    if f.grid.len() != grid.len() {
        return Err(Error::Argument("function and measure grids differ".into()));
    }
    if let Some(k) = f.values.iter().position(|&v| v < 0.0) {
        return Err(Error::Domain(format!(
            "rearrangement needs f >= 0, got {} at x = {}",
            f.values[k], grid[k]
        )));
    }
    let n = grid.len();
    let c = mu.centre();
    let mut by_value: Vec<usize> = (0..n).collect();
    by_value.sort_by(|&a, &b| f.values[a].partial_cmp(&f.values[b]).unwrap_or(Ordering::Equal));
    // Prefix and suffix sums; the upper half is matched through suffixes so
    // tail weights far below the unit roundoff still count.
    let prefix = |order: &[usize]| {
        let mut acc = 0.0;
        order
            .iter()
            .map(|&k| {
                acc += w[k];
                acc
            })
            .collect::<Vec<f64>>()
    };
    let suffix = |order: &[usize]| {
        let mut out = vec![0.0; order.len()];
        let mut acc = 0.0;
        for (i, &k) in order.iter().enumerate().rev() {
            acc += w[k];
            out[i] = acc;
        }
        out
    };
    let (cum_v, suf_v) = (prefix(&by_value), suffix(&by_value));
    let mut by_radius: Vec<usize> = (0..n).collect();
    by_radius.sort_by(|&a, &b| {
        let (ra, rb) = ((grid[a] - c).abs(), (grid[b] - c).abs());
        ra.partial_cmp(&rb).unwrap_or(Ordering::Equal).then(a.cmp(&b))
    });
    let (cum_r, suf_r) = (prefix(&by_radius), suffix(&by_radius));
    let mut out = vec![0.0; n];
    for (i, &k) in by_radius.iter().enumerate() {
        let before = cum_r[i] - w[k];
        let j = if before + 0.5 * w[k] <= 0.5 {
            let p = before + 0.5 * w[k];
            cum_v.partition_point(|&c| c < p).min(n - 1)
        } else {
            let q = (suf_r[i] - w[k]) + 0.5 * w[k];
            suf_v.partition_point(|&s| s >= q).saturating_sub(1)
        };
        out[k] = f.values[by_value[j]];
    }
    let derivs = finite_differences(grid, &out);
    SampledFunction::new(grid.clone(), out, derivs)
}

/// Kolmogorov distance between the laws of `a` and `b` under the node
/// weights `w`.
pub fn kolmogorov_distance(w: &[f64], a: &[f64], b: &[f64]) -> f64 {
    let mut events: Vec<(f64, f64)> = a
        .iter()
        .zip(w)
        .map(|(&v, &wt)| (v, wt))
        .chain(b.iter().zip(w).map(|(&v, &wt)| (v, -wt)))
        .collect();
    events.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap_or(Ordering::Equal));
    let mut acc = 0.0f64;
    let mut worst = 0.0f64;
    let mut i = 0;
    while i < events.len() {
        let v = events[i].0;
        while i < events.len() && events[i].0 == v {
            acc += events[i].1;
            i += 1;
        }
        worst = worst.max(acc.abs());
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure1d::{Potential, Truncation};

    fn gauss() -> Measure1D {
        Measure1D::build(
            Potential::Gauss,
            Truncation::Explicit {
                lo: -10.0,
                hi: 10.0,
                points: 2001,
            },
        )
        .unwrap()
    }

    #[test]
    fn radial_function_is_fixed() {
        let mu = gauss();
        let f = SampledFunction::from_fn(mu.grid().clone(), |x| x * x, |x| 2.0 * x).unwrap();
        let g = rearrange(&mu, &f).unwrap();
        let cell = mu.max_cell();
        for (k, &x) in mu.grid().iter().enumerate() {
            let slack = 2.0 * x.abs() * cell + cell * cell;
            assert!((g.values[k] - f.values[k]).abs() <= slack + 1e-12, "x={x}");
        }
    }

    #[test]
    fn constant_is_fixed() {
        let mu = gauss();
        let f = SampledFunction::from_fn(mu.grid().clone(), |_| 3.0, |_| 0.0).unwrap();
        let g = rearrange(&mu, &f).unwrap();
        assert!(g.values.iter().all(|&v| v == 3.0));
    }

    #[test]
    fn shifted_linear_keeps_its_law() {
        let mu = gauss();
        let f = SampledFunction::from_fn(
            mu.grid().clone(),
            |x| (1.0 + x).max(0.0),
            |x| if x > -1.0 { 1.0 } else { 0.0 },
        )
        .unwrap();
        let g = rearrange(&mu, &f).unwrap();
        let wmax = mu.weights().iter().cloned().fold(0.0, f64::max);
        assert!(kolmogorov_distance(mu.weights(), &f.values, &g.values) <= wmax + 1e-15);
        for k in 1..mu.len() {
            let (x0, x1) = (mu.grid()[k - 1], mu.grid()[k]);
            if x0 >= 0.0 {
                assert!(g.values[k] >= g.values[k - 1]);
            }
            if x1 <= 0.0 {
                assert!(g.values[k] <= g.values[k - 1]);
            }
        }
    }

    #[test]
    fn negative_input_is_domain_error() {
        let mu = gauss();
        let f = SampledFunction::from_fn(mu.grid().clone(), |x| x, |_| 1.0).unwrap();
        assert!(matches!(rearrange(&mu, &f), Err(Error::Domain(_))));
    }
}
