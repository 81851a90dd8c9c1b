//! Acceptance criteria 1-8, one line each. Runs sequentially so the timings are meaningful.

use std::process::Command;
use std::time::{Duration, Instant};

use parabolic_uniqueness::report::VerificationReport;
use parabolic_uniqueness::suite::{
    carleman_suite, coeffs_suite, counterexample_suite, lp_suite, paraproduct_suite,
    spectral_suite, weight_suite, Params,
};
use parabolic_uniqueness::Result;

struct Outcome {
    id: usize,
    title: &'static str,
    pass: bool,
    note: String,
}

fn judge(
    id: usize,
    title: &'static str,
    budget: Duration,
    run: impl FnOnce() -> Result<Vec<VerificationReport>>,
) -> Outcome {
    let start = Instant::now();
    let res = run();
    let took = start.elapsed();
    let (pass, mut note) = match res {
        Ok(reports) => {
            let n: usize = reports.iter().map(|r| r.checks.len()).sum();
            let failed: Vec<String> = reports
                .iter()
                .flat_map(|r| r.failures().map(|c| format!("{} = {:e}", c.name, c.value)))
                .collect();
            (
                failed.is_empty() && n > 0,
                if failed.is_empty() {
                    format!("{n} checks")
                } else {
                    failed.join("; ")
                },
            )
        }
        Err(e) => (false, format!("error: {e}")),
    };
    let in_time = took <= budget;
    if !in_time {
        note.push_str(&format!("; over budget {:?}", budget));
    }
    Outcome {
        id,
        title,
        pass: pass && in_time,
        note: format!("{note}; {:.1}s", took.as_secs_f64()),
    }
}

fn only(report: VerificationReport, prefixes: &[&str]) -> VerificationReport {
    let checks = report
        .checks
        .into_iter()
        .filter(|c| prefixes.iter().any(|p| c.name.starts_with(p)))
        .collect();
    VerificationReport::new(
        report.suite,
        checks,
        report.provenance,
        serde_json::Value::Null,
    )
}

fn run_cli_all(seed: &str) -> std::io::Result<(Option<i32>, Vec<u8>)> {
    let dir = std::env::temp_dir().join(format!("acceptance-all-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join(format!("all-{}.json", Instant::now().elapsed().as_nanos()));
    let out = Command::new(env!("CARGO_BIN_EXE_cli"))
        .args(["all", "--seed", seed, "--report"])
        .arg(&path)
        .output()?;
    let bytes = std::fs::read(&path).unwrap_or_default();
    let _ = std::fs::remove_dir_all(&dir);
    Ok((out.status.code(), bytes))
}

fn main() {
    let secs = Duration::from_secs;
    let p = Params::default();
    let mut out = Vec::new();

    out.push(judge(1, "spectral identities", secs(5), || {
        Ok(vec![spectral_suite(0)?])
    }));
    out.push(judge(2, "littlewood-paley", secs(30), || {
        Ok(vec![lp_suite(&p)?])
    }));
    out.push(judge(3, "paraproduct", secs(120), || {
        Ok(vec![paraproduct_suite(&p)?])
    }));
    out.push(judge(4, "weight", secs(30), || Ok(vec![weight_suite(&p)?])));
    out.push(judge(5, "mollifier", secs(60), || {
        let q = Params {
            family: Some("synthetic".into()),
            alpha: Some(0.5),
            mu: Some("log".into()),
            verify: Some("all".into()),
            ..Params::default()
        };
        Ok(vec![only(
            coeffs_suite(&q)?,
            &["mollifier/c1", "mollifier/c2"],
        )])
    }));
    out.push(judge(6, "carleman harness", secs(600), || {
        Ok(vec![carleman_suite(&p)?])
    }));
    out.push(judge(7, "counterexample", secs(120), || {
        Ok(vec![counterexample_suite(&p)?])
    }));

    let start = Instant::now();
    let e2e = run_cli_all("7").and_then(|a| Ok((a, run_cli_all("7")?)));
    let took = start.elapsed();
    out.push(match e2e {
        Ok(((c1, r1), (c2, r2))) => {
            let same = !r1.is_empty() && r1 == r2;
            let pass = c1 == Some(0) && c2 == Some(0) && same && took <= secs(1200);
            Outcome {
                id: 8,
                title: "cli all --seed 7 twice",
                pass,
                note: format!(
                    "exit {c1:?}/{c2:?}, identical {same}, {} bytes; {:.1}s",
                    r1.len(),
                    took.as_secs_f64()
                ),
            }
        }
        Err(e) => Outcome {
            id: 8,
            title: "cli all --seed 7 twice",
            pass: false,
            note: format!("error: {e}"),
        },
    });

    for o in &out {
        println!(
            "criterion {}: {} [{}] {}",
            o.id,
            if o.pass { "PASS" } else { "FAIL" },
            o.title,
            o.note
        );
    }
    let failed: Vec<usize> = out.iter().filter(|o| !o.pass).map(|o| o.id).collect();
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
    println!("acceptance: all {} criteria pass", out.len());
}
