use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::measure1d::{Measure1D, SampledFunction};
use crate::quad::linspace;

/// Floor added to families that can touch zero.
pub const DEFAULT_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, PartialEq)]
pub enum FamilyKind {
    /// `e^{λx/2}`.
    Exponential { lambdas: Vec<f64> },
    /// `exp(s((1 + x²)^{p/2} - 1))`, a smooth stand-in for `e^{s|x|^p}`.
    RadialPower { exponent: f64, scales: Vec<f64> },
    /// `floor + exp(-(x - c)²/(2w²))`.
    Bump { centres: Vec<f64>, width: f64 },
    /// `floor + (1 + εx)₊`.
    ShiftedLinear { slopes: Vec<f64> },
    /// `exp(Σ_k a_k sin(k x/2 + φ_k))` with coefficients drawn from `seed`.
    RandomSmooth { count: usize, seed: u64, modes: usize },
    Constant { values: Vec<f64> },
    /// `floor + f(x)`, derivatives by finite differences.
    Expression(Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub struct TestFamily {
    pub kind: FamilyKind,
    pub floor: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub label: String,
    pub param: f64,
    pub f: SampledFunction,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FamilySummary {
    pub kind: String,
    pub size: usize,
    pub floor: f64,
}

impl TestFamily {
    pub fn new(kind: FamilyKind) -> Self {
        TestFamily {
            kind,
            floor: DEFAULT_FLOOR,
        }
    }

    pub fn with_floor(mut self, floor: f64) -> Self {
        self.floor = floor;
        self
    }

    pub fn exponential(lambdas: &[f64]) -> Self {
        Self::new(FamilyKind::Exponential {
            lambdas: lambdas.to_vec(),
        })
    }

    pub fn random_smooth(count: usize, seed: u64) -> Self {
        Self::new(FamilyKind::RandomSmooth {
            count,
            seed,
            modes: 4,
        })
    }

    pub fn name(&self) -> &'static str {
        match self.kind {
            FamilyKind::Exponential { .. } => "exponential",
            FamilyKind::RadialPower { .. } => "radial_power",
            FamilyKind::Bump { .. } => "bump",
            FamilyKind::ShiftedLinear { .. } => "shifted_linear",
            FamilyKind::RandomSmooth { .. } => "random_smooth",
            FamilyKind::Constant { .. } => "constant",
            FamilyKind::Expression(_) => "expression",
        }
    }

    pub fn size(&self) -> usize {
        match &self.kind {
            FamilyKind::Exponential { lambdas } => lambdas.len(),
            FamilyKind::RadialPower { scales, .. } => scales.len(),
            FamilyKind::Bump { centres, .. } => centres.len(),
            FamilyKind::ShiftedLinear { slopes } => slopes.len(),
            FamilyKind::RandomSmooth { count, .. } => *count,
            FamilyKind::Constant { values } => values.len(),
            FamilyKind::Expression(_) => 1,
        }
    }

    pub fn summary(&self) -> FamilySummary {
        FamilySummary {
            kind: self.name().to_string(),
            size: self.size(),
            floor: self.floor,
        }
    }

    /// The family with its parameter grid doubled: midpoints inserted, one
    /// extra point past the end, or twice as many random draws.
    pub fn enriched(&self) -> TestFamily {
        let refine = |p: &[f64]| -> Vec<f64> {
            if p.len() < 2 {
                return p.to_vec();
            }
            let mut out = Vec::with_capacity(2 * p.len());
            for w in p.windows(2) {
                out.push(w[0]);
                out.push(0.5 * (w[0] + w[1]));
            }
            out.push(p[p.len() - 1]);
            out
        };
        let kind = match &self.kind {
            FamilyKind::Exponential { lambdas } => FamilyKind::Exponential {
                lambdas: refine(lambdas),
            },
            FamilyKind::RadialPower { exponent, scales } => FamilyKind::RadialPower {
                exponent: *exponent,
                scales: refine(scales),
            },
            FamilyKind::Bump { centres, width } => FamilyKind::Bump {
                centres: refine(centres),
                width: *width,
            },
            FamilyKind::ShiftedLinear { slopes } => FamilyKind::ShiftedLinear {
                slopes: refine(slopes),
            },
            FamilyKind::RandomSmooth { count, seed, modes } => FamilyKind::RandomSmooth {
                count: 2 * count,
                seed: *seed,
                modes: *modes,
            },
            FamilyKind::Constant { values } => FamilyKind::Constant {
                values: refine(values),
            },
            FamilyKind::Expression(e) => FamilyKind::Expression(e.clone()),
        };
        TestFamily {
            kind,
            floor: self.floor,
        }
    }

    /// Samples every member on the grid of `mu`.
    pub fn members(&self, mu: &Measure1D) -> Result<Vec<Member>> {
        if self.size() == 0 {
            return Err(Error::Argument("test family is empty".into()));
        }
        if !(self.floor > 0.0) {
            return Err(Error::Argument(format!("floor must be positive, got {}", self.floor)));
        }
        let grid = mu.grid().clone();
        let fl = self.floor;
        let mut out = Vec::with_capacity(self.size());
        match &self.kind {
            FamilyKind::Exponential { lambdas } => {
                for &l in lambdas {
                    let f = SampledFunction::from_fn(
                        grid.clone(),
                        |x| (0.5 * l * x).exp(),
                        |x| 0.5 * l * (0.5 * l * x).exp(),
                    )?
                    .with_log_derivs(vec![0.5 * l; grid.len()])?;
                    out.push(Member {
                        label: format!("exp(lambda={l})"),
                        param: l,
                        f,
                    });
                }
            }
            FamilyKind::RadialPower { exponent, scales } => {
                let p = *exponent;
                for &s in scales {
                    let inner = move |x: f64| (1.0 + x * x).powf(0.5 * p) - 1.0;
                    let ld = move |x: f64| s * p * x * (1.0 + x * x).powf(0.5 * p - 1.0);
                    let f = SampledFunction::from_fn(
                        grid.clone(),
                        |x| (s * inner(x)).exp(),
                        |x| ld(x) * (s * inner(x)).exp(),
                    )?
                    .with_log_derivs(grid.iter().map(|&x| ld(x)).collect())?;
                    out.push(Member {
                        label: format!("radial_power(p={p},s={s})"),
                        param: s,
                        f,
                    });
                }
            }
            FamilyKind::Bump { centres, width } => {
                let w = *width;
                if !(w > 0.0) {
                    return Err(Error::Argument("bump width must be positive".into()));
                }
                for &c in centres {
                    let b = move |x: f64| (-(x - c) * (x - c) / (2.0 * w * w)).exp();
                    let f = SampledFunction::from_fn(
                        grid.clone(),
                        |x| fl + b(x),
                        |x| -(x - c) / (w * w) * b(x),
                    )?;
                    out.push(Member {
                        label: format!("bump(c={c})"),
                        param: c,
                        f,
                    });
                }
            }
            FamilyKind::ShiftedLinear { slopes } => {
                for &e in slopes {
                    let f = SampledFunction::from_fn(
                        grid.clone(),
                        |x| fl + (1.0 + e * x).max(0.0),
                        |x| if 1.0 + e * x > 0.0 { e } else { 0.0 },
                    )?;
                    out.push(Member {
                        label: format!("shifted_linear(eps={e})"),
                        param: e,
                        f,
                    });
                }
            }
            FamilyKind::RandomSmooth { count, seed, modes } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                for i in 0..*count {
                    let coefs: Vec<(f64, f64)> = (1..=*modes)
                        .map(|k| {
                            let a = rng.gen_range(-0.5..0.5) / k as f64;
                            let ph = rng.gen_range(0.0..std::f64::consts::TAU);
                            (a, ph)
                        })
                        .collect();
                    let ld = |x: f64| {
                        coefs
                            .iter()
                            .enumerate()
                            .map(|(j, &(a, ph))| {
                                let k = (j + 1) as f64;
                                a * 0.5 * k * (0.5 * k * x + ph).cos()
                            })
                            .sum::<f64>()
                    };
                    let lf = |x: f64| {
                        coefs
                            .iter()
                            .enumerate()
                            .map(|(j, &(a, ph))| a * (0.5 * (j + 1) as f64 * x + ph).sin())
                            .sum::<f64>()
                    };
                    let f = SampledFunction::from_fn(
                        grid.clone(),
                        |x| lf(x).exp(),
                        |x| ld(x) * lf(x).exp(),
                    )?
                    .with_log_derivs(grid.iter().map(|&x| ld(x)).collect())?;
                    out.push(Member {
                        label: format!("random_smooth({i})"),
                        param: i as f64,
                        f,
                    });
                }
            }
            FamilyKind::Constant { values } => {
                for &c in values {
                    let f = SampledFunction::from_fn(grid.clone(), |_| c, |_| 0.0)?;
                    out.push(Member {
                        label: format!("constant({c})"),
                        param: c,
                        f,
                    });
                }
            }
            FamilyKind::Expression(e) => {
                let values = grid
                    .iter()
                    .map(|&x| e.eval(x).map(|v| v + fl))
                    .collect::<Result<Vec<f64>>>()?;
                if let Some(k) = values.iter().position(|&v| !(v > 0.0)) {
                    return Err(Error::Domain(format!(
                        "expression member is not positive at x = {}",
                        grid[k]
                    )));
                }
                let f = SampledFunction::from_values(grid.clone(), values)?;
                out.push(Member {
                    label: format!("expr({e})"),
                    param: 0.0,
                    f,
                });
            }
        }
        Ok(out)
    }
}

/// Evenly spaced parameters, used by the CLI for family ranges.
pub fn parameter_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        vec![lo]
    } else {
        linspace(lo, hi, n)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure1d::{Potential, Truncation};

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
    fn members_are_positive_and_consistent() {
        let mu = gauss();
        let fams = [
            TestFamily::exponential(&[0.25, 1.0]),
            TestFamily::random_smooth(5, 0),
            TestFamily::new(FamilyKind::Bump {
                centres: vec![0.0, 1.0],
                width: 0.5,
            }),
            TestFamily::new(FamilyKind::RadialPower {
                exponent: 0.7,
                scales: vec![0.5],
            }),
        ];
        for fam in &fams {
            for m in fam.members(&mu).unwrap() {
                assert!(m.f.min_value() > 0.0, "{}", m.label);
                assert!(m.f.derivative_mismatch(7) < 1e-3, "{}", m.label);
            }
        }
    }

    #[test]
    fn random_family_is_reproducible() {
        let mu = gauss();
        let a = TestFamily::random_smooth(3, 42).members(&mu).unwrap();
        let b = TestFamily::random_smooth(3, 42).members(&mu).unwrap();
        assert_eq!(a, b);
        let c = TestFamily::random_smooth(6, 42).enriched();
        assert_eq!(c.size(), 12);
    }

    #[test]
    fn empty_family_is_rejected() {
        let mu = gauss();
        assert!(TestFamily::exponential(&[]).members(&mu).is_err());
    }
}
