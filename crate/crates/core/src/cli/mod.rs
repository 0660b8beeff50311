//! Command-line front end.
//!
//! Exit codes: 0 success, 1 numerical failure, 2 configuration error,
//! 3 inconclusive verdict, 4 divergent verdict or violated margin under
//! `certify`.

pub mod config;
pub mod output;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};
use serde::Serialize;

use crate::checker::{
    check_condition, check_exp_power_on, delta_sweep, ConditionReport, ConditionSpec, CostModel,
    DeltaSweep, ExpPowerReport, Verdict, DELTA_SWEEP,
};
use crate::entropy::EntropyFunction;
use crate::error::{Error, Result};
use crate::measure1d::{
    i_f_profile, kolmogorov_distance, rearrange, tilde_profile, Measure1D, MeasureSummary,
    Potential, Truncation,
};
use crate::quad::{linspace, logspace};
use crate::tester::{
    lemma_3_4_check, step1_check, verify_theorem_1_1_on, verify_theorem_2_1, verify_theorem_4_4,
    FamilyKind, TestFamily, TestReport,
};

use config::{parse_cost, parse_cost_function, parse_entropy, parse_family, parse_grid, parse_measure};
pub use output::{format_float, to_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INCONCLUSIVE: i32 = 3;
pub const EXIT_VIOLATION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "isocert", version, about = "Integrability verdicts and empirical constants for log-Sobolev type inequalities")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the Legendre conjugate of a cost as CSV.
    Conjugate(RunArgs),
    /// Tabulate the half-line profile or I_F as CSV.
    Profile(RunArgs),
    /// Decide an integrability condition; JSON report.
    Check(RunArgs),
    /// Evaluate an inequality over a test family; JSON and CSV reports.
    Test(RunArgs),
    /// Check, then test; succeeds only on a finite verdict with nonnegative margins.
    Certify(RunArgs),
    /// Run the fixed suite of worked examples.
    PaperExamples(RunArgs),
}

/// Every flag may also be given in the `--config` file as `key = value`;
/// flags override the file.
#[derive(Debug, Clone, Default, clap::Args)]
pub struct RunArgs {
    /// Flat key = value config file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// gauss | exp | exp_power:ALPHA | loglog | expression in x.
    #[arg(long)]
    pub measure: Option<String>,
    /// log | loglog2 | tau:TAU[:BASE] | psi:TAU:BETA:ENTROPY | expression.
    #[arg(long)]
    pub entropy: Option<String>,
    /// quadratic[:DELTA] | c:A:ALPHA | power:K:P | expression.
    #[arg(long)]
    pub cost: Option<String>,
    #[arg(long)]
    pub delta: Option<String>,
    #[arg(long = "K")]
    pub k: Option<String>,
    #[arg(long = "t-min")]
    pub t_min: Option<String>,
    /// Rerun the check over a halving δ sweep.
    #[arg(long)]
    pub sweep: bool,
    /// Measure grid size.
    #[arg(long)]
    pub points: Option<String>,
    /// Explicit support LO:HI instead of the automatic window.
    #[arg(long)]
    pub support: Option<String>,
    /// Output grid LO:HI:N.
    #[arg(long)]
    pub grid: Option<String>,
    /// Profile kind: tilde | if.
    #[arg(long)]
    pub kind: Option<String>,
    /// theorem_2_1 | step1 | lemma_3_4 | theorem_1_1 | theorem_4_4.
    #[arg(long)]
    pub test: Option<String>,
    /// exponential:L,... | radial_power:P:S,... | bump:W:C,... |
    /// shifted_linear:E,... | random_smooth:N | constant:V,... | expr:TEXT.
    #[arg(long)]
    pub family: Option<String>,
    #[arg(long)]
    pub floor: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub alpha: Option<String>,
    #[arg(long)]
    pub tau: Option<String>,
    /// The threshold A of the cost c_{A,α}.
    #[arg(long = "A")]
    pub a: Option<String>,
    /// Output path for the main artifact; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Output path for the per-member CSV of `test`.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

/// Flags merged over the config file.
struct Settings {
    map: BTreeMap<String, String>,
}

impl Settings {
    fn resolve(args: &RunArgs) -> Result<Self> {
        let mut map = match &args.config {
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("{}: {e}", p.display())))?;
                config::parse_config_text(&text)?
            }
            None => BTreeMap::new(),
        };
        let flags: [(&str, &Option<String>); 17] = [
            ("measure", &args.measure),
            ("entropy", &args.entropy),
            ("cost", &args.cost),
            ("delta", &args.delta),
            ("K", &args.k),
            ("t-min", &args.t_min),
            ("points", &args.points),
            ("support", &args.support),
            ("grid", &args.grid),
            ("kind", &args.kind),
            ("test", &args.test),
            ("family", &args.family),
            ("floor", &args.floor),
            ("seed", &args.seed),
            ("alpha", &args.alpha),
            ("tau", &args.tau),
            ("A", &args.a),
        ];
        for (k, v) in flags {
            if let Some(v) = v {
                map.insert(k.to_string(), v.clone());
            }
        }
        if args.sweep {
            map.insert("sweep".into(), "true".into());
        }
        if let Some(p) = &args.out {
            map.insert("out".into(), p.display().to_string());
        }
        if let Some(p) = &args.csv {
            map.insert("csv".into(), p.display().to_string());
        }
        const KNOWN: [&str; 20] = [
            "measure", "entropy", "cost", "delta", "K", "t-min", "points", "support", "grid",
            "kind", "test", "family", "floor", "seed", "alpha", "tau", "A", "out", "csv", "sweep",
        ];
        if let Some(k) = map.keys().find(|k| !KNOWN.contains(&k.as_str())) {
            return Err(Error::Config(format!("unknown key '{k}'")));
        }
        Ok(Settings { map })
    }

    fn str(&self, k: &str) -> Option<&str> {
        self.map.get(k).map(|s| s.as_str())
    }

    fn f64(&self, k: &str, default: f64) -> Result<f64> {
        match self.str(k) {
            None => Ok(default),
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{k}: expected a number, got '{s}'"))),
        }
    }

    fn u64(&self, k: &str, default: u64) -> Result<u64> {
        match self.str(k) {
            None => Ok(default),
            Some(s) => s
                .trim()
                .parse()
                .map_err(|_| Error::Config(format!("{k}: expected an integer, got '{s}'"))),
        }
    }

    fn flag(&self, k: &str) -> bool {
        matches!(self.str(k), Some("true" | "1" | "yes"))
    }

    fn measure(&self, default: &str) -> Result<Measure1D> {
        let pot = parse_measure(self.str("measure").unwrap_or(default))?;
        let points = match self.str("points") {
            Some(_) => Some(self.u64("points", 0)? as usize),
            None => None,
        };
        let tr = config::truncation(points, self.str("support"))?;
        Measure1D::build(pot, tr)
    }

    fn entropy(&self) -> Result<EntropyFunction> {
        parse_entropy(self.str("entropy").unwrap_or("log"))
    }

    fn family(&self, default: &str) -> Result<TestFamily> {
        let floor = match self.str("floor") {
            Some(_) => Some(self.f64("floor", 0.0)?),
            None => None,
        };
        parse_family(self.str("family").unwrap_or(default), self.u64("seed", 0)?, floor)
    }
}

fn emit(path: Option<&str>, text: &str, stdout: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| Error::Io(format!("{p}: {e}"))),
        None => stdout.write_all(text.as_bytes()).map_err(Error::from),
    }
}

fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Config(_) | Error::Parse { .. } | Error::Argument(_) => EXIT_CONFIG,
        _ => EXIT_FAILURE,
    }
}

/// Caps the global rayon pool at `ISOCERT_THREADS` when set.
pub fn init_threads() {
    if let Some(n) = std::env::var("ISOCERT_THREADS")
        .ok()
        .and_then(|s| s.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}

/// Parses `args` (including the program name) and runs the command,
/// writing artifacts without `--out` to `stdout`. Returns the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
                return EXIT_CONFIG;
            }
            let _ = write!(stdout, "{}", e.render());
            return EXIT_OK;
        }
    };
    init_threads();
    match dispatch(&cli.command, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "isocert: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cmd: &Command, stdout: &mut dyn Write) -> Result<i32> {
    match cmd {
        Command::Conjugate(a) => conjugate(&Settings::resolve(a)?, stdout),
        Command::Profile(a) => profile(&Settings::resolve(a)?, stdout),
        Command::Check(a) => check(&Settings::resolve(a)?, stdout),
        Command::Test(a) => test(&Settings::resolve(a)?, stdout),
        Command::Certify(a) => certify(&Settings::resolve(a)?, stdout),
        Command::PaperExamples(a) => paper_examples(&Settings::resolve(a)?, stdout),
    }
}

fn conjugate(s: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    let cost = parse_cost_function(
        s.str("cost")
            .ok_or_else(|| Error::Config("conjugate needs --cost".into()))?,
    )?;
    let (lo, hi, n) = parse_grid(s.str("grid").unwrap_or("0:10:2000"))?;
    let grid = if n == 1 { vec![lo] } else { linspace(lo, hi, n) };
    let table = cost.conjugate(&grid)?;
    let mut out = String::from("x,conjugate,argmax,saturated\n");
    for k in 0..table.len() {
        out.push_str(&format!(
            "{},{},{},{}\n",
            format_float(table.grid[k]),
            format_float(table.values[k]),
            format_float(table.argmax[k]),
            table.saturated[k]
        ));
    }
    emit(s.str("out"), &out, stdout)?;
    Ok(EXIT_OK)
}

fn profile(s: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    let mu = s.measure("gauss")?;
    let csv = match s.str("kind").unwrap_or("tilde") {
        "tilde" => {
            let (lo, hi, n) = parse_grid(s.str("grid").unwrap_or("1e-12:0.5:200"))?;
            if !(lo > 0.0) {
                return Err(Error::Config("profile t grid must start above 0".into()));
            }
            tilde_profile(&mu, &logspace(lo, hi, n))?.to_csv()
        }
        "if" => {
            let (lo, hi, n) = parse_grid(s.str("grid").unwrap_or("0:5:101"))?;
            i_f_profile(&mu, &s.entropy()?, &linspace(lo, hi, n))?.to_csv()
        }
        k => return Err(Error::Config(format!("unknown profile kind '{k}'"))),
    };
    emit(s.str("out"), &csv, stdout)?;
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CheckOutput {
    measure: MeasureSummary,
    entropy: String,
    cost: String,
    #[serde(flatten)]
    report: ConditionReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    sweep: Option<DeltaSweep>,
}

fn cost_and_delta(s: &Settings) -> Result<(CostModel, f64)> {
    let (cost, d) = parse_cost(s.str("cost").unwrap_or("quadratic"))?;
    let delta = match s.str("delta") {
        Some(_) => s.f64("delta", 0.5)?,
        None => d.unwrap_or(0.5),
    };
    Ok((cost, delta))
}

fn run_check(s: &Settings, mu: &Measure1D, f: &EntropyFunction) -> Result<CheckOutput> {
    let (cost, delta) = cost_and_delta(s)?;
    let spec = ConditionSpec::new(mu, f, cost.clone(), delta, s.f64("K", 2.0)?)
        .with_t_min(s.f64("t-min", 1e-12)?);
    let report = check_condition(&spec)?;
    let sweep = if s.flag("sweep") {
        let ds: Vec<f64> = DELTA_SWEEP.iter().map(|d| d * delta).collect();
        Some(delta_sweep(&spec, &ds)?)
    } else {
        None
    };
    Ok(CheckOutput {
        measure: mu.summary(),
        entropy: f.name(),
        cost: match &cost {
            CostModel::Quadratic => "quadratic".into(),
            CostModel::Cost(c) => format!("{:?}", c.kind()),
        },
        report,
        sweep,
    })
}

fn check(s: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    let mu = s.measure("gauss")?;
    let f = s.entropy()?;
    let out = run_check(s, &mu, &f)?;
    emit(s.str("out"), &to_json(&out)?, stdout)?;
    Ok(if out.report.verdict == Verdict::Inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    })
}

fn run_test(s: &Settings) -> Result<TestReport> {
    let which = s.str("test").unwrap_or("theorem_2_1");
    let alpha = s.f64("alpha", 1.5)?;
    match which {
        "theorem_2_1" | "step1" | "lemma_3_4" => {
            let mu = s.measure("gauss")?;
            let f = s.entropy()?;
            let k = s.f64("K", 2.0)?;
            let fam = s.family("exponential:0.25,0.5,1")?;
            match which {
                "theorem_2_1" => {
                    let cost = parse_cost_function(s.str("cost").unwrap_or("quadratic"))?;
                    verify_theorem_2_1(&mu, &f, &cost, k, &fam)
                }
                "step1" => step1_check(&mu, &f, k, &fam),
                _ => lemma_3_4_check(&mu, &f, k, &fam),
            }
        }
        "theorem_1_1" => {
            let alpha = s.f64("alpha", 2.0)?;
            let mu = s.measure(&format!("exp_power:{alpha}"))?;
            let fam = s.family("exponential:0.25,0.5,1")?;
            verify_theorem_1_1_on(&mu, alpha, s.f64("tau", 1.0)?, s.f64("A", 1.0)?, &fam)
        }
        "theorem_4_4" => {
            let mu = s.measure(&format!("exp_power:{alpha}"))?;
            let fam = s.family("radial_power:0.7:0.25,0.5,1")?;
            verify_theorem_4_4(&mu, alpha, &fam)
        }
        t => Err(Error::Config(format!("unknown test '{t}'"))),
    }
}

fn test(s: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    let rep = run_test(s)?;
    emit(s.str("out"), &to_json(&rep)?, stdout)?;
    if let Some(p) = s.str("csv") {
        emit(Some(p), &rep.to_csv(), stdout)?;
    }
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct CertifyOutput {
    check: CheckOutput,
    theorem_2_1: Option<TestReport>,
    step1: Option<TestReport>,
    lemma_3_4: Option<TestReport>,
    certified: bool,
}

fn certify(s: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    let mu = s.measure("gauss")?;
    let f = s.entropy()?;
    let chk = run_check(s, &mu, &f)?;
    let verdict = chk.report.verdict;
    let mut out = CertifyOutput {
        check: chk,
        theorem_2_1: None,
        step1: None,
        lemma_3_4: None,
        certified: false,
    };
    let mut code = match verdict {
        Verdict::Finite => EXIT_OK,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
        Verdict::DivergentLikely => EXIT_VIOLATION,
    };
    if verdict == Verdict::Finite {
        let k = s.f64("K", 2.0)?;
        let fam = s.family("exponential:0.25,0.5,1")?;
        let cost = parse_cost_function(s.str("cost").unwrap_or("quadratic"))?;
        let t21 = verify_theorem_2_1(&mu, &f, &cost, k, &fam)?;
        let st = step1_check(&mu, &f, k, &fam)?;
        let l34 = lemma_3_4_check(&mu, &f, k, &fam)?;
        let ok = [&st, &l34]
            .iter()
            .all(|r| r.min_margin.is_none_or(|m| m >= 0.0))
            && t21.b_hat.is_some_and(f64::is_finite);
        if !ok {
            code = EXIT_VIOLATION;
        }
        out.theorem_2_1 = Some(t21);
        out.step1 = Some(st);
        out.lemma_3_4 = Some(l34);
    }
    out.certified = code == EXIT_OK;
    emit(s.str("out"), &to_json(&out)?, stdout)?;
    Ok(code)
}

#[derive(Debug, Serialize)]
pub struct PaperExamples {
    pub seed: u64,
    pub gaussian_quadratic: ConditionReport,
    pub laplace_quadratic: ConditionReport,
    pub loglog_example: ConditionReport,
    pub exp_power_tau_one: ExpPowerReport,
    pub exp_power_endpoint: ExpPowerReport,
    pub theorem_1_1: TestReport,
    pub theorem_4_4: TestReport,
    pub rearrangement_kolmogorov: Vec<f64>,
}

/// The fixed example suite; deterministic for a given seed.
pub fn paper_examples_report(seed: u64) -> Result<PaperExamples> {
    let build = |p| Measure1D::build(p, Truncation::default());
    let log = EntropyFunction::log();
    let gauss = build(Potential::Gauss)?;
    let gaussian_quadratic =
        check_condition(&ConditionSpec::new(&gauss, &log, CostModel::Quadratic, 0.5, 2.0))?;
    let lap = build(Potential::Laplace)?;
    let laplace_quadratic =
        check_condition(&ConditionSpec::new(&lap, &log, CostModel::Quadratic, 0.5, 2.0))?;
    let ll = build(Potential::LogLog)?;
    let ll_f = EntropyFunction::loglog_squared();
    let loglog_example =
        check_condition(&ConditionSpec::new(&ll, &ll_f, CostModel::Quadratic, 0.1, 3.0))?;
    let ep = build(Potential::ExpPower(1.5))?;
    let exp_power_tau_one = check_exp_power_on(&ep, 1.5, 1.0, 1.0, 0.25, 2.0)?;
    let exp_power_endpoint = check_exp_power_on(&ep, 1.5, 2.0 / 3.0, 1.0, 0.25, 2.0)?;
    let radial = TestFamily::new(FamilyKind::RadialPower {
        exponent: 0.75,
        scales: vec![0.25, 0.5, 1.0],
    });
    let theorem_1_1 = verify_theorem_1_1_on(&ep, 1.5, 1.0, 1.0, &radial)?;
    let fam44 = TestFamily::new(FamilyKind::RadialPower {
        exponent: 0.7,
        scales: vec![0.25, 0.5, 1.0],
    });
    let theorem_4_4 = verify_theorem_4_4(&ep, 1.5, &fam44)?;
    let rearrangement_kolmogorov = TestFamily::random_smooth(20, seed)
        .members(&gauss)?
        .iter()
        .map(|m| {
            rearrange(&gauss, &m.f).map(|g| kolmogorov_distance(gauss.weights(), &m.f.values, &g.values))
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(PaperExamples {
        seed,
        gaussian_quadratic,
        laplace_quadratic,
        loglog_example,
        exp_power_tau_one,
        exp_power_endpoint,
        theorem_1_1,
        theorem_4_4,
        rearrangement_kolmogorov,
    })
}

fn paper_examples(s: &Settings, stdout: &mut dyn Write) -> Result<i32> {
    let rep = paper_examples_report(s.u64("seed", 0)?)?;
    emit(s.str("out"), &to_json(&rep)?, stdout)?;
    Ok(EXIT_OK)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            std::iter::once("isocert").chain(args.iter().copied()),
            &mut out,
            &mut err,
        );
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn bad_config_exits_two() {
        assert_eq!(run_str(&["check", "--measure", "exp_power:oops"]).0, EXIT_CONFIG);
        assert_eq!(run_str(&["check", "--K", "0.5"]).0, EXIT_CONFIG);
        assert_eq!(run_str(&["bogus"]).0, EXIT_CONFIG);
    }

    #[test]
    fn check_gauss_is_finite() {
        let (code, out, _) = run_str(&["check", "--measure", "gauss", "--cost", "quadratic:0.5", "--K", "2"]);
        assert_eq!(code, EXIT_OK);
        let v: serde_json::Value = serde_json::from_str(&out).unwrap();
        assert_eq!(v["verdict"], "FINITE");
    }
}
