//! Command implementations behind the `wmnc` binary.
//!
//! Each command returns a [`RunReport`]; `passed = false` means an asserted
//! property was falsified (exit code 1). Input and solver errors surface
//! as `Err` (exit code 2).

use std::path::Path;
use std::time::Instant;

use serde_json::{json, Value};

use crate::acceptance::{self, SuiteOptions};
use crate::bracket::BRACKET_TOL;
use crate::error::{Error, Result};
use crate::families::{counterexample_family, MeasureFamily};
use crate::integrability::{default_centers, mu_ui, verify_theorem46, Theorem46Options};
use crate::io;
use crate::limitops::{theorem34_gap, SequenceWindow};
use crate::lipschitz::LipschitzFn;
use crate::measure::DiscreteMeasure;
use crate::noncompactness::{
    default_pool, distance_matrix, mnc_bracket, replay, CoverMode, MncOptions,
};
use crate::report::{to_value, InputDigest, RunReport};
use crate::wasserstein::{w1, w1_1d, w1_dual, w1_primal, Method};

/// Phase timer; seconds go to the `timings` field.
struct Timings(Vec<(String, f64)>, Instant);

impl Timings {
    fn new() -> Self {
        Self(Vec::new(), Instant::now())
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.0
            .push((name.to_string(), (now - self.1).as_secs_f64()));
        self.1 = now;
    }

    fn into_value(self) -> Value {
        Value::Object(self.0.into_iter().map(|(k, v)| (k, json!(v))).collect())
    }
}

fn read_pair(p: &Path, q: &Path) -> Result<(DiscreteMeasure, DiscreteMeasure)> {
    let a = io::read_measure(p, None)?;
    let b = io::read_measure(q, Some(a.space()))?;
    Ok((a, b))
}

pub fn cmd_w1(
    command: Vec<String>,
    p: &Path,
    q: &Path,
    method: Method,
    coupling: bool,
) -> Result<RunReport> {
    let mut t = Timings::new();
    let inputs = vec![InputDigest::of(p)?, InputDigest::of(q)?];
    let (a, b) = read_pair(p, q)?;
    t.lap("parse");
    let used = match method {
        Method::Auto if a.is_dirac() || b.is_dirac() => "dirac",
        Method::Auto if a.real_atoms().is_ok() => "1d",
        Method::Auto | Method::Primal => "primal",
        Method::Dual => "dual",
        Method::OneD => "1d",
    };
    let mut results = json!({ "method": used });
    let passed;
    match used {
        "primal" => {
            let r = w1_primal(&a, &b)?;
            passed = r.gap.abs() <= 1e-8 * r.value.max(1.0);
            results["value"] = to_value(&r.value);
            results["gap"] = to_value(&r.gap);
            results["dual_value"] = to_value(&r.dual_value);
            results["iterations"] = json!(r.iterations);
            if coupling {
                results["coupling"] = to_value(&r.coupling.matrix());
                results["potential"] =
                    potential(r.dual_potential.domain(), r.dual_potential.values());
            }
        }
        "dual" => {
            let d = w1_dual(&a, &b)?;
            let primal = w1_primal(&a, &b)?.value;
            let gap = primal - d.value;
            passed = gap.abs() <= 1e-8 * primal.max(1.0);
            results["value"] = to_value(&d.value);
            results["gap"] = to_value(&gap);
            results["iterations"] = json!(d.iterations);
            if coupling {
                results["potential"] = potential(d.potential.domain(), d.potential.values());
            }
        }
        "1d" => {
            let v = w1_1d(&a, &b)?;
            passed = v >= 0.0;
            results["value"] = to_value(&v);
            results["gap"] = Value::Null;
        }
        _ => {
            let v = w1(&a, &b, Method::Auto)?;
            passed = v >= 0.0;
            results["value"] = to_value(&v);
            results["gap"] = Value::Null;
        }
    }
    t.lap("solve");
    Ok(RunReport::new(
        command,
        inputs,
        passed,
        results,
        t.into_value(),
    ))
}

fn potential(domain: &[crate::space::Point], values: &[f64]) -> Value {
    Value::Array(
        domain
            .iter()
            .zip(values)
            .map(|(x, v)| json!({ "point": to_value(x), "value": to_value(v) }))
            .collect(),
    )
}

pub struct MncArgs<'a> {
    pub k: usize,
    pub mode: CoverMode,
    pub centers: Option<&'a Path>,
    pub eps: Option<f64>,
}

fn read_centers(
    path: Option<&Path>,
    family: &MeasureFamily,
    inputs: &mut Vec<InputDigest>,
) -> Result<Vec<DiscreteMeasure>> {
    let Some(path) = path else { return Ok(vec![]) };
    inputs.push(InputDigest::of(path)?);
    let v = io::read_json(path)?;
    io::parse_measure_list(
        &v,
        "",
        family.space(),
        path.parent().unwrap_or(Path::new(".")),
    )
}

pub fn cmd_mnc(command: Vec<String>, family_path: &Path, args: &MncArgs) -> Result<RunReport> {
    let mut t = Timings::new();
    let mut inputs = vec![InputDigest::of(family_path)?];
    let family = io::read_family(family_path)?;
    let centers = read_centers(args.centers, &family, &mut inputs)?;
    t.lap("parse");
    let options = MncOptions {
        k: args.k,
        mode: args.mode,
        centers,
        eps: args.eps,
        use_ui_lower: true,
    };
    let result = mnc_bracket(&family, &options)?;
    t.lap("bracket");
    let rep = replay(&family, &result)?;
    t.lap("replay");
    let members = family.members()?;
    let pool = default_pool(&members, &options.centers)?;
    let distances = distance_matrix(&members, &pool)?;
    t.lap("distances");
    let results = json!({
        "family": family.name(),
        "horizon": family.horizon(),
        "certificates": to_value(family.certificates()),
        "mnc": to_value(&result),
        "replay": to_value(&rep),
        "pool": to_value(&pool),
        "member_pool_distances": to_value(&distances),
    });
    Ok(RunReport::new(
        command,
        inputs,
        rep.ok(),
        results,
        t.into_value(),
    ))
}

pub struct UiArgs<'a> {
    pub centers: Option<&'a Path>,
    pub radii: Option<Vec<f64>>,
    pub horizon: Option<usize>,
}

pub fn cmd_ui(command: Vec<String>, family_path: &Path, args: &UiArgs) -> Result<RunReport> {
    let mut t = Timings::new();
    let mut inputs = vec![InputDigest::of(family_path)?];
    let family = io::read_family(family_path)?;
    let centers = match args.centers {
        Some(path) => {
            inputs.push(InputDigest::of(path)?);
            let v = io::read_json(path)?;
            let list = v.get("centers").unwrap_or(&v);
            let ptr = if v.get("centers").is_some() {
                "/centers"
            } else {
                ""
            };
            io::parse_points(family.space(), list, ptr)?
        }
        None => default_centers(
            &family
                .with_horizon(args.horizon.unwrap_or(family.horizon()))?
                .members()?,
        ),
    };
    t.lap("parse");
    let est = mu_ui(&family, &centers, args.radii.clone(), args.horizon)?;
    t.lap("estimate");
    let results = json!({
        "family": family.name(),
        "horizon": est.prefix,
        "ui": to_value(&est),
    });
    Ok(RunReport::new(
        command,
        inputs,
        true,
        results,
        t.into_value(),
    ))
}

pub struct LimitopArgs<'a> {
    pub family: &'a Path,
    pub target: &'a Path,
    pub tail_start: usize,
    pub horizon: usize,
    pub test_fns: Option<&'a Path>,
}

pub fn cmd_limitop(command: Vec<String>, args: &LimitopArgs) -> Result<RunReport> {
    let mut t = Timings::new();
    let mut inputs = vec![InputDigest::of(args.family)?, InputDigest::of(args.target)?];
    let family = io::read_family(args.family)?;
    let target = io::read_measure(args.target, Some(family.space()))?;
    let fns: Vec<LipschitzFn> = match args.test_fns {
        Some(path) => {
            inputs.push(InputDigest::of(path)?);
            io::parse_lipschitz_list(family.space(), &io::read_json(path)?)?
        }
        // distances to the target's atoms
        None => target
            .support()
            .iter()
            .cloned()
            .map(LipschitzFn::DistanceTo)
            .collect(),
    };
    let horizon = if family.is_infinite() {
        args.horizon
    } else {
        args.horizon.min(family.horizon())
    };
    let fam = family.clone();
    let seq = SequenceWindow::new(horizon, args.tail_start, move |n| fam.member(n))?;
    t.lap("parse");
    let report = theorem34_gap(&seq, &target, &fns)?;
    t.lap("limits");
    let passed = report.gap >= -1e-9 && report.enriched_gap >= -1e-9;
    let results = json!({
        "lambda_w": to_value(&report.lambda_w.value),
        "lambda_kappa_lower": to_value(&report.lambda_kappa_lower.value),
        "gap": to_value(&report.gap),
        "enriched_gap": to_value(&report.enriched_gap),
        "detail": to_value(&report),
        "test_functions": fns.iter().map(io::lipschitz_to_json).collect::<Vec<_>>(),
    });
    Ok(RunReport::new(
        command,
        inputs,
        passed,
        results,
        t.into_value(),
    ))
}

pub fn cmd_verify(command: Vec<String>, family_path: &Path) -> Result<RunReport> {
    let mut t = Timings::new();
    let inputs = vec![InputDigest::of(family_path)?];
    let family = io::read_family(family_path)?;
    t.lap("parse");
    let report = verify_theorem46(&family, &Theorem46Options::default())?;
    t.lap("verify");
    let rep = replay(&family, &report.mnc)?;
    t.lap("replay");
    let results = json!({
        "family": family.name(),
        "horizon": family.horizon(),
        "certificates": to_value(family.certificates()),
        "theorem": to_value(&report),
        "replay": to_value(&rep),
    });
    Ok(RunReport::new(
        command,
        inputs,
        report.passed && rep.ok(),
        results,
        t.into_value(),
    ))
}

/// Outcome of the bounded counterexample run, also used by the acceptance suite.
pub struct CounterexampleCheck {
    pub ui: (f64, f64),
    pub mnc: (f64, f64),
    pub replay_ok: bool,
    pub passed: bool,
    pub results: Value,
}

pub fn counterexample_check(m: f64, n: usize) -> Result<CounterexampleCheck> {
    if !(m > 0.0 && m.is_finite()) {
        return Err(Error::InvalidParameter(format!("M = {m} must be positive")));
    }
    let family = counterexample_family(m, n)?;
    let report = verify_theorem46(&family, &Theorem46Options::default())?;
    let rep = replay(&family, &report.mnc)?;
    let ui = (report.ui.bracket.lower, report.ui.bracket.upper);
    let mnc = (report.mnc.bracket.lower, report.mnc.bracket.upper);
    let close = |x: f64, y: f64| (x - y).abs() <= BRACKET_TOL * y.abs().max(1.0);
    let passed = ui == (0.0, 0.0)
        && close(mnc.0, m)
        && close(mnc.1, m)
        && rep.ok()
        && report.passed
        && !report.tight;
    let results = json!({
        "M": to_value(&m),
        "N": n,
        "ui_bracket": to_value(&[ui.0, ui.1]),
        "mnc_bracket": to_value(&[mnc.0, mnc.1]),
        "certified_gap": to_value(&report.certified_gap),
        "tight": report.tight,
        "replay": to_value(&rep),
        "theorem": to_value(&report),
    });
    Ok(CounterexampleCheck {
        ui,
        mnc,
        replay_ok: rep.ok(),
        passed,
        results,
    })
}

pub fn cmd_counterexample(command: Vec<String>, m: f64, n: usize) -> Result<RunReport> {
    let mut t = Timings::new();
    let check = counterexample_check(m, n)?;
    t.lap("run");
    Ok(RunReport::new(
        command,
        vec![],
        check.passed,
        check.results,
        t.into_value(),
    ))
}

pub fn cmd_selftest(command: Vec<String>, seed: u64) -> Result<RunReport> {
    let mut t = Timings::new();
    let results = acceptance::run_all(&SuiteOptions { seed });
    t.lap("suite");
    let passed = results.iter().all(|r| r.passed);
    let mut timings = t.into_value();
    for r in &results {
        timings[format!("criterion_{}", r.id)] = json!(r.elapsed);
    }
    let list: Vec<Value> = results
        .iter()
        .map(|r| {
            json!({
                "id": r.id,
                "name": r.name,
                "passed": r.passed,
                "budget_seconds": r.budget,
                "detail": r.detail,
            })
        })
        .collect();
    Ok(RunReport::new(
        command,
        vec![],
        passed,
        json!({ "seed": seed, "criteria": list }),
        timings,
    ))
}
