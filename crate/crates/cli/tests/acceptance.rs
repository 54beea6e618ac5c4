//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.
//!
//! Every suite runs at its full size (10^6 Monte Carlo samples, seed 42).
//! Besides each record passing, the harness checks that the suite actually
//! produced the required number of instances and that no record was judged
//! against a looser tolerance than the criterion allows.

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use wiener_chaos::verify::{run_suite, run_suites, Record, Suite, VerifyOptions};

type Check = Result<String, String>;
type Criterion = (&'static str, fn(&VerifyOptions) -> Check);

/// What one identity must satisfy inside a suite's records.
struct Need {
    identity: String,
    min_count: usize,
    /// `None` for Monte Carlo records, whose tolerance is k·SE.
    max_tol: Option<f64>,
}

fn need(identity: &str, min_count: usize, max_tol: f64) -> Need {
    Need {
        identity: identity.to_string(),
        min_count,
        max_tol: Some(max_tol),
    }
}

fn mc_need(identity: &str, min_count: usize) -> Need {
    Need {
        identity: identity.to_string(),
        min_count,
        max_tol: None,
    }
}

fn timed_suite(suite: Suite, opts: &VerifyOptions) -> Result<(Vec<Record>, Duration), String> {
    let start = Instant::now();
    let records = run_suite(suite, opts).map_err(|e| format!("{} suite errored: {e}", suite.name()))?;
    Ok((records, start.elapsed()))
}

fn judge(records: &[Record], needs: &[Need]) -> Check {
    let mut by_id: BTreeMap<&str, Vec<&Record>> = BTreeMap::new();
    for r in records {
        by_id.entry(r.identity.as_str()).or_default().push(r);
    }
    let mut worst = 0.0f64;
    let mut total = 0;
    for n in needs {
        let rs = by_id.get(n.identity.as_str()).map(Vec::as_slice).unwrap_or(&[]);
        if rs.len() < n.min_count {
            return Err(format!("{}: {} instances, need {}", n.identity, rs.len(), n.min_count));
        }
        for r in rs {
            if !r.pass {
                return Err(format!(
                    "{} [{}]: residual {:e} > tolerance {:e}",
                    r.identity, r.instance, r.residual, r.tolerance
                ));
            }
            if let Some(t) = n.max_tol {
                if r.tolerance > t {
                    return Err(format!("{} judged at {:e}, criterion allows {:e}", r.identity, r.tolerance, t));
                }
            } else if r.tolerance > 0.0 {
                worst = worst.max(r.residual / r.tolerance);
            }
        }
        total += rs.len();
    }
    let mc = if worst > 0.0 {
        format!(", worst MC deviation {:.2} of the 4·SE band", worst)
    } else {
        String::new()
    };
    Ok(format!("{total} checks{mc}"))
}

fn criterion_1(opts: &VerifyOptions) -> Check {
    let (records, t) = timed_suite(Suite::Isserlis, opts)?;
    let verdict = judge(
        &records,
        &[
            need("ISSERLIS-PAIRINGS", 1, 0.0),
            need("ISSERLIS-RECURSION", 100, 1e-9),
            mc_need("ISSERLIS-MC", 100),
        ],
    )?;
    if t > Duration::from_secs(60) {
        return Err(format!("took {:.1}s, limit 60s", t.as_secs_f64()));
    }
    Ok(format!("{verdict}, {:.1}s", t.as_secs_f64()))
}

fn criterion_2(opts: &VerifyOptions) -> Check {
    let (records, _) = timed_suite(Suite::Hermite, opts)?;
    judge(
        &records,
        &[
            need("HERMITE-CLOSED-FORM", 6, 1e-12),
            need("HERMITE-DERIVATIVE", 20, 1e-12),
            // one record per n collects the worst pair over m ≤ 12
            need("HERMITE-ORTHOGONALITY", 13, 1e-9),
            need("HERMITE-GENERATING", 9, 1e-8),
        ],
    )
}

fn criterion_3(opts: &VerifyOptions) -> Check {
    let (records, _) = timed_suite(Suite::Chaos, opts)?;
    judge(
        &records,
        &[
            need("CHAOS-PARSEVAL", 500, 1e-9),
            need("CHAOS-ROUND-TRIP", 500, 1e-9),
            need("CHAOS-L2-DUAL", 500, 1e-9),
        ],
    )
}

fn criterion_4(opts: &VerifyOptions) -> Check {
    let (records, _) = timed_suite(Suite::Operators, opts)?;
    let ids = [
        "IBP",
        "IBP-PRODUCT",
        "DUALITY",
        "COMMUTE",
        "ENERGY",
        "DELTA-D-L",
        "L-SECOND-ORDER",
        "L-EIGEN",
        "CAUCHY-NORM",
    ];
    let needs: Vec<Need> = ids.iter().map(|id| need(id, 200, 1e-9)).collect();
    judge(&records, &needs)
}

fn criterion_5(opts: &VerifyOptions) -> Check {
    let (records, _) = timed_suite(Suite::Semigroup, opts)?;
    let mut needs = Vec::new();
    for p in ["OU", "CAUCHY"] {
        needs.push(need(&format!("{p}-IDENTITY-AT-ZERO"), 1, 0.0));
        needs.push(need(&format!("{p}-SEMIGROUP"), 50, 1e-12));
        needs.push(need(&format!("{p}-CONTRACTION"), 1, 0.0));
        // |ratio - 10| ≤ 2, i.e. the ratio lies in [8, 12]
        needs.push(need(&format!("{p}-GENERATOR-RATE"), 1, 2.0));
    }
    judge(&records, &needs)
}

fn criterion_6(opts: &VerifyOptions) -> Check {
    let (records, _) = timed_suite(Suite::Sobolev, opts)?;
    // 100 functionals, k = 0..=3 each
    judge(&records, &[need("SOBOLEV-CHAOS-VS-TENSOR", 400, 1e-9)])
}

fn criterion_7(opts: &VerifyOptions) -> Check {
    let (records, _) = timed_suite(Suite::Skorokhod, opts)?;
    judge(
        &records,
        &[
            need("SKOROKHOD-EQUALS-ITO", 100, 1e-9),
            need("ISOMETRY-ADAPTED", 100, 1e-9),
            need("ISOMETRY-ANTICIPATING", 100, 1e-9),
            need("DERIVATIVE-OF-SKOROKHOD", 100, 1e-9),
            need("ADAPTED-CORRECTION-ZERO", 100, 0.0),
        ],
    )
}

fn criterion_8(opts: &VerifyOptions) -> Check {
    let (records, t) = timed_suite(Suite::Density, opts)?;
    // two norms × 11 grid points; rejection must be exactly zero
    let verdict = judge(
        &records,
        &[mc_need("DENSITY-NORMAL", 22), need("DENSITY-REJECTION", 2, 0.0)],
    )?;
    if t > Duration::from_secs(120) {
        return Err(format!("took {:.1}s, limit 120s", t.as_secs_f64()));
    }
    Ok(format!("{verdict}, {:.1}s", t.as_secs_f64()))
}

fn criterion_9(opts: &VerifyOptions) -> Check {
    let (records, _) = timed_suite(Suite::CameronMartin, opts)?;
    judge(
        &records,
        &[
            need("CM-CHANGE-OF-VARIABLES", 100, 1e-9),
            need("CM-GRADIENT-RELATION", 100, 1e-12),
            need("GAUSSIAN-IBP", 100, 1e-9),
            need("HHAT-EQUALS-WHITE-NOISE", 100, 1e-10),
        ],
    )
}

fn criterion_10(opts: &VerifyOptions) -> Check {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_wce"))
            .args(["verify", "--suite", "all", "--seed", "42"])
            .env_remove("WCE_SEED")
            .output()
            .map_err(|e| format!("cannot run wce: {e}"))
    };
    let a = run()?;
    let b = run()?;
    if a.status.code() != Some(0) || b.status.code() != Some(0) {
        return Err(format!("exit status {:?} / {:?}", a.status.code(), b.status.code()));
    }
    if a.stdout != b.stdout {
        return Err("reports differ between runs".into());
    }

    // every Monte Carlo estimate enters its record's residual and tolerance,
    // so equal records mean equal estimates
    let mc_suites = [Suite::Isserlis, Suite::Density, Suite::CameronMartin, Suite::Mc];
    let base = run_suites(&mc_suites, opts).map_err(|e| e.to_string())?;
    let mut compared = 0;
    for workers in [2, 4] {
        let other = VerifyOptions {
            n_workers: workers,
            ..opts.clone()
        };
        let r = run_suites(&mc_suites, &other).map_err(|e| e.to_string())?;
        if r.records.len() != base.records.len() {
            return Err(format!("{workers} workers produced a different record count"));
        }
        for (x, y) in base.records.iter().zip(&r.records) {
            let d = (x.residual - y.residual).abs().max((x.tolerance - y.tolerance).abs());
            if !(d <= 1e-12) {
                return Err(format!("{} [{}] moved by {d:e} with {workers} workers", x.identity, x.instance));
            }
            compared += 1;
        }
    }
    Ok(format!("{} identical bytes twice, {compared} records stable across 1/2/4 workers", a.stdout.len()))
}

fn main() {
    let opts = VerifyOptions::default();
    let criteria: [Criterion; 10] = [
        ("Isserlis cross-oracle", criterion_1),
        ("Hermite suite", criterion_2),
        ("chaos decomposition", criterion_3),
        ("operator identities", criterion_4),
        ("semigroup axioms", criterion_5),
        ("Sobolev norms", criterion_6),
        ("Skorokhod suite", criterion_7),
        ("density formula", criterion_8),
        ("Cameron-Martin suite", criterion_9),
        ("reproducibility", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check(&opts) {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
