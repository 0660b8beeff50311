//! Run configuration: short spec strings for measures, entropies, costs,
//! families and grids, and a flat `key = value` config file.

use std::collections::BTreeMap;

use crate::checker::CostModel;
use crate::convex::CostFunction;
use crate::entropy::{EntropyBase, EntropyFunction};
use crate::error::{Error, Result};
use crate::expr::Expr;
use crate::measure1d::{Potential, Truncation, DEFAULT_POINTS};
use crate::quad::linspace;
use crate::tester::{FamilyKind, TestFamily};

fn num(s: &str, what: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Config(format!("{what}: expected a number, got '{s}'")))
}

fn nums(s: &str, what: &str) -> Result<Vec<f64>> {
    s.split(',').map(|p| num(p, what)).collect()
}

fn expr(s: &str) -> Result<Expr> {
    Expr::parse(s).map_err(|e| Error::Config(format!("expression '{s}': {e}")))
}

/// `gauss | exp | exp_power:α | loglog | expr:<text> | <text>`.
pub fn parse_measure(s: &str) -> Result<Potential> {
    let s = s.trim();
    Ok(match s {
        "gauss" => Potential::Gauss,
        "exp" => Potential::Laplace,
        "loglog" => Potential::LogLog,
        _ => {
            if let Some(a) = s.strip_prefix("exp_power:") {
                let a = num(a, "exp_power")?;
                if !(a > 0.0) {
                    return Err(Error::Config(format!("exp_power needs alpha > 0, got {a}")));
                }
                Potential::ExpPower(a)
            } else {
                Potential::Expr(expr(s.strip_prefix("expr:").unwrap_or(s))?)
            }
        }
    })
}

/// `log | loglog2 | tau:τ[:base] | expr:<text>`, optionally wrapped as
/// `psi:τ:β:<entropy>`.
pub fn parse_entropy(s: &str) -> Result<EntropyFunction> {
    let s = s.trim();
    let cfg = |e: Error| Error::Config(format!("entropy '{s}': {e}"));
    if let Some(rest) = s.strip_prefix("psi:") {
        let mut it = rest.splitn(3, ':');
        let tau = num(it.next().unwrap_or(""), "psi tau")?;
        let beta = num(it.next().unwrap_or(""), "psi beta")?;
        let inner = parse_entropy(it.next().unwrap_or("log"))?;
        return inner.with_psi(tau, beta).map_err(cfg);
    }
    let base = |b: &str| -> Result<EntropyBase> {
        Ok(match b {
            "log" => EntropyBase::Log,
            "loglog2" => EntropyBase::LogLogSquared,
            other => EntropyBase::Expr(expr(other.strip_prefix("expr:").unwrap_or(other))?),
        })
    };
    if let Some(rest) = s.strip_prefix("tau:") {
        let (t, b) = rest.split_once(':').unwrap_or((rest, "log"));
        let tau = num(t, "tau")?;
        return EntropyFunction::new(base(b)?, tau).map_err(cfg);
    }
    EntropyFunction::new(base(s)?, 1.0).map_err(cfg)
}

/// `quadratic[:δ] | c:A:α | power:k:p | expr:<text>`. Returns the cost
/// model and the δ carried by `quadratic:δ`, if any.
pub fn parse_cost(s: &str) -> Result<(CostModel, Option<f64>)> {
    let s = s.trim();
    let cfg = |e: Error| Error::Config(format!("cost '{s}': {e}"));
    if s == "quadratic" {
        return Ok((CostModel::Quadratic, None));
    }
    if let Some(d) = s.strip_prefix("quadratic:") {
        return Ok((CostModel::Quadratic, Some(num(d, "quadratic delta")?)));
    }
    Ok((CostModel::Cost(parse_cost_function(s).map_err(cfg)?), None))
}

pub fn parse_cost_function(s: &str) -> Result<CostFunction> {
    let s = s.trim();
    if s == "quadratic" || s.starts_with("quadratic:") {
        return CostFunction::power(1.0, 2.0);
    }
    if let Some(rest) = s.strip_prefix("c:") {
        let v = rest.split(':').map(|p| num(p, "c:A:alpha")).collect::<Result<Vec<_>>>()?;
        if v.len() != 2 {
            return Err(Error::Config(format!("expected c:A:alpha, got '{s}'")));
        }
        return CostFunction::closed_form(v[0], v[1]);
    }
    if let Some(rest) = s.strip_prefix("power:") {
        let v = rest.split(':').map(|p| num(p, "power:k:p")).collect::<Result<Vec<_>>>()?;
        if v.len() != 2 {
            return Err(Error::Config(format!("expected power:k:p, got '{s}'")));
        }
        return CostFunction::power(v[0], v[1]);
    }
    let e = expr(s.strip_prefix("expr:").unwrap_or(s))?;
    let grid = linspace(0.0, 100.0, 4097);
    let values = grid.iter().map(|&x| e.eval(x)).collect::<Result<Vec<_>>>()?;
    CostFunction::sampled(grid, values)
}

/// `lo:hi:n`.
pub fn parse_grid(s: &str) -> Result<(f64, f64, usize)> {
    let p: Vec<&str> = s.split(':').collect();
    if p.len() != 3 {
        return Err(Error::Config(format!("expected lo:hi:n, got '{s}'")));
    }
    let n: usize = p[2]
        .trim()
        .parse()
        .map_err(|_| Error::Config(format!("grid size must be an integer, got '{}'", p[2])))?;
    let (lo, hi) = (num(p[0], "grid lo")?, num(p[1], "grid hi")?);
    if !(lo <= hi) || n < 1 {
        return Err(Error::Config(format!("invalid grid '{s}'")));
    }
    Ok((lo, hi, n))
}

/// `exponential:λ,… | radial_power:p:s,… | bump:w:c,… | shifted_linear:ε,…
/// | random_smooth:count | constant:v,… | expr:<text>`.
pub fn parse_family(s: &str, seed: u64, floor: Option<f64>) -> Result<TestFamily> {
    let s = s.trim();
    let (head, rest) = s.split_once(':').unwrap_or((s, ""));
    let kind = match head {
        "exponential" => FamilyKind::Exponential {
            lambdas: nums(rest, "exponential")?,
        },
        "radial_power" => {
            let (p, sc) = rest
                .split_once(':')
                .ok_or_else(|| Error::Config("expected radial_power:p:s,…".into()))?;
            FamilyKind::RadialPower {
                exponent: num(p, "radial_power exponent")?,
                scales: nums(sc, "radial_power scales")?,
            }
        }
        "bump" => {
            let (w, c) = rest
                .split_once(':')
                .ok_or_else(|| Error::Config("expected bump:width:c,…".into()))?;
            FamilyKind::Bump {
                width: num(w, "bump width")?,
                centres: nums(c, "bump centres")?,
            }
        }
        "shifted_linear" => FamilyKind::ShiftedLinear {
            slopes: nums(rest, "shifted_linear")?,
        },
        "random_smooth" => FamilyKind::RandomSmooth {
            count: rest
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("random_smooth count: '{rest}'")))?,
            seed,
            modes: 4,
        },
        "constant" => FamilyKind::Constant {
            values: nums(rest, "constant")?,
        },
        "expr" => FamilyKind::Expression(expr(rest)?),
        _ => return Err(Error::Config(format!("unknown family '{head}'"))),
    };
    let mut fam = TestFamily::new(kind);
    if let Some(f) = floor {
        fam = fam.with_floor(f);
    }
    Ok(fam)
}

/// Flat `key = value` lines; `#` starts a comment. Keys use the long flag
/// names without dashes.
pub fn parse_config_text(text: &str) -> Result<BTreeMap<String, String>> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        let k = k.trim().trim_start_matches("--").replace('_', "-");
        if map.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: duplicate key '{k}'", i + 1)));
        }
    }
    Ok(map)
}

pub fn truncation(points: Option<usize>, support: Option<&str>) -> Result<Truncation> {
    let points = points.unwrap_or(DEFAULT_POINTS);
    match support {
        None => Ok(Truncation::Auto { points }),
        Some(s) => {
            let (lo, hi) = s
                .split_once(':')
                .ok_or_else(|| Error::Config(format!("support must be lo:hi, got '{s}'")))?;
            Ok(Truncation::Explicit {
                lo: num(lo, "support lo")?,
                hi: num(hi, "support hi")?,
                points,
            })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_strings() {
        assert_eq!(parse_measure("exp_power:1.5").unwrap(), Potential::ExpPower(1.5));
        assert!(matches!(parse_measure("abs(x)*log(1+x^2)").unwrap(), Potential::Expr(_)));
        assert!(parse_measure("exp_power:-1").is_err());
        assert_eq!(parse_entropy("tau:0.5").unwrap().tau(), 0.5);
        assert!(parse_entropy("psi:1:2:log").unwrap().psi().is_some());
        let (c, d) = parse_cost("quadratic:0.5").unwrap();
        assert_eq!((c, d), (CostModel::Quadratic, Some(0.5)));
        assert!(parse_cost("c:1:1.5").is_ok());
        assert!(parse_cost("c:1").is_err());
        assert_eq!(parse_grid("0:10:2000").unwrap(), (0.0, 10.0, 2000));
        assert!(parse_family("exponential:0.25,0.5", 0, None).is_ok());
        assert!(parse_family("nope:1", 0, None).is_err());
    }

    #[test]
    fn config_text() {
        let m = parse_config_text("# run\nmeasure = gauss\nt_min = 1e-12 # comment\n").unwrap();
        assert_eq!(m["measure"], "gauss");
        assert_eq!(m["t-min"], "1e-12");
        assert!(parse_config_text("measure gauss").is_err());
        assert!(parse_config_text("a=1\na=2").is_err());
    }
}
