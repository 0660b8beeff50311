//! Small numerical kernels shared by the rest of the crate: Gauss-Legendre
//! panels, log-space accumulation, and one-dimensional root/max finders.

use std::f64::consts::PI;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub(crate) const GL_ORDER: usize = 16;

struct GaussLegendre {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl GaussLegendre {
    fn new(n: usize) -> Self {
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..(n + 1) / 2 {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, z);
                for k in 2..=n {
                    let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n as f64 * (z * p1 - p0) / (z * z - 1.0);
                let dz = p1 / dp;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        GaussLegendre { nodes, weights }
    }
}

fn gl() -> &'static GaussLegendre {
    static GL: OnceLock<GaussLegendre> = OnceLock::new();
    GL.get_or_init(|| GaussLegendre::new(GL_ORDER))
}

/// `∫_a^b f` with one 16-point Gauss-Legendre panel.
pub fn gl_integrate(a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let g = gl();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    g.nodes
        .iter()
        .zip(&g.weights)
        .map(|(&z, &w)| w * f(mid + half * z))
        .sum::<f64>()
        * half
}

/// `log ∫_a^b exp(w)` on one panel, shifted by the panel maximum of `w`.
/// Requires `a <= b`; returns `-inf` for an empty panel.
pub(crate) fn gl_log_integrate(a: f64, b: f64, w: impl Fn(f64) -> f64) -> f64 {
    if b <= a {
        return f64::NEG_INFINITY;
    }
    let g = gl();
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    let mut vals = [0.0f64; GL_ORDER];
    let mut shift = f64::NEG_INFINITY;
    for (v, &z) in vals.iter_mut().zip(&g.nodes) {
        *v = w(mid + half * z);
        if *v > shift {
            shift = *v;
        }
    }
    if shift == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if !shift.is_finite() {
        return shift;
    }
    let s: f64 = vals
        .iter()
        .zip(&g.weights)
        .map(|(&v, &wt)| wt * (v - shift).exp())
        .sum();
    shift + (s * half).ln()
}

pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

pub fn log_sum_exp(xs: impl IntoIterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.into_iter().collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY || !m.is_finite() {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// `log(exp(a) - exp(b))` for `a >= b`.
pub fn log_sub_exp(a: f64, b: f64) -> f64 {
    if b == f64::NEG_INFINITY {
        return a;
    }
    if b >= a {
        return f64::NEG_INFINITY;
    }
    a + (-(b - a).exp()).ln_1p()
}

/// Which way an improper integral runs from its finite endpoint.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Direction {
    Up,
    Down,
}

/// `log ∫ exp(w)` from `a` to `±∞`, accumulated on panels of growing width.
///
/// Fails with [`Error::NonIntegrable`] when the panel contributions do not die
/// out before the abscissa leaves `[-1e15, 1e15]`.
pub(crate) fn log_integral_to_infinity(
    w: impl Fn(f64) -> f64,
    a: f64,
    dir: Direction,
) -> Result<f64> {
    let sign = match dir {
        Direction::Up => 1.0,
        Direction::Down => -1.0,
    };
    let w0 = w(a);
    let probe = 1e-4 * (1.0 + a.abs());
    let slope = ((w(a + sign * probe) - w0) / probe).abs();
    let mut h = if slope.is_finite() && slope > 0.0 {
        (2.0 / slope).clamp(1e-6, 1.0)
    } else {
        1.0
    };
    let mut x = a;
    let mut total = f64::NEG_INFINITY;
    let mut quiet = 0;
    for _ in 0..2000 {
        let next = x + sign * h;
        let (lo, hi) = if sign > 0.0 { (x, next) } else { (next, x) };
        let part = gl_log_integrate(lo, hi, &w);
        total = log_add_exp(total, part);
        let decaying = w(next) <= w(x);
        if decaying && (part < total - 45.0 || part == f64::NEG_INFINITY) {
            quiet += 1;
            if quiet >= 3 {
                return Ok(total);
            }
        } else {
            quiet = 0;
        }
        x = next;
        if x.abs() > 1e15 {
            break;
        }
        h *= 1.3;
    }
    Err(Error::NonIntegrable(format!(
        "integrand does not decay starting from {a}"
    )))
}

/// Maximizes `f` on `[a, b]` by golden-section search; `f` is assumed unimodal.
pub(crate) fn golden_max(mut a: f64, mut b: f64, iters: usize, f: impl Fn(f64) -> f64) -> (f64, f64) {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iters {
        if fc >= fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = f(d);
        }
        if (b - a).abs() <= 1e-15 * (a.abs() + b.abs()) + 1e-300 {
            break;
        }
    }
    let (mut x, mut fx) = if fc >= fd { (c, fc) } else { (d, fd) };
    for e in [a, b] {
        let fe = f(e);
        if fe > fx {
            x = e;
            fx = fe;
        }
    }
    (x, fx)
}

/// Bisection for an increasing `f` with `f(lo) <= target <= f(hi)`.
pub(crate) fn bisect_increasing(
    mut lo: f64,
    mut hi: f64,
    target: f64,
    f: impl Fn(f64) -> f64,
) -> f64 {
    for _ in 0..300 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn linspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    match n {
        0 => vec![],
        1 => vec![a],
        _ => (0..n)
            .map(|i| {
                if i == n - 1 {
                    b
                } else {
                    a + (b - a) * i as f64 / (n - 1) as f64
                }
            })
            .collect(),
    }
}

/// Log-spaced points from `a` to `b` (both positive).
pub fn logspace(a: f64, b: f64, n: usize) -> Vec<f64> {
    let (la, lb) = (a.ln(), b.ln());
    linspace(la, lb, n)
        .into_iter()
        .enumerate()
        .map(|(i, l)| {
            if i == 0 {
                a
            } else if i + 1 == n {
                b
            } else {
                l.exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        let v = gl_integrate(-1.0, 2.0, |x| x.powi(31) - 3.0 * x.powi(4) + 1.0);
        let exact = (2f64.powi(32) - 1.0) / 32.0 - 3.0 * (32.0 + 1.0) / 5.0 + 3.0;
        assert!((v - exact).abs() < 1e-6 * exact.abs());
    }

    #[test]
    fn log_panel_matches_direct_integral() {
        let l = gl_log_integrate(0.0, 1.0, |x| -x);
        assert!((l.exp() - (1.0 - (-1f64).exp())).abs() < 1e-14);
    }

    #[test]
    fn improper_gaussian_tail() {
        // ∫_0^∞ e^{-x²/2} = sqrt(pi/2)
        let l = log_integral_to_infinity(|x| -0.5 * x * x, 0.0, Direction::Up).unwrap();
        assert!((l.exp() - (PI / 2.0).sqrt()).abs() < 1e-12);
        let l = log_integral_to_infinity(|x| x, 0.0, Direction::Down).unwrap();
        assert!((l.exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn improper_divergent_is_reported() {
        let r = log_integral_to_infinity(|x: f64| -(1.0 + x).ln(), 0.0, Direction::Up);
        assert!(matches!(r, Err(Error::NonIntegrable(_))));
    }

    #[test]
    fn golden_finds_parabola_peak() {
        let (x, fx) = golden_max(-3.0, 5.0, 200, |x| -(x - 1.25) * (x - 1.25) + 2.0);
        assert!((x - 1.25).abs() < 1e-7);
        assert!((fx - 2.0).abs() < 1e-14);
    }

    #[test]
    fn log_sums() {
        assert!((log_add_exp(0.0, 0.0) - 2f64.ln()).abs() < 1e-15);
        assert!((log_sum_exp([1.0, 2.0, 3.0]) - (1f64.exp() + 2f64.exp() + 3f64.exp()).ln()).abs() < 1e-14);
        assert!((log_sub_exp(2f64.ln(), 0.0)).abs() < 1e-15);
    }
}
