//! Runs the weight suite through the library entry point and writes the JSON
//! report and the check table.

use parabolic_uniqueness::suite::{run_suite, SuiteConfig, SuiteName};

fn main() -> parabolic_uniqueness::Result<()> {
    let dir = std::env::temp_dir();
    let mut cfg = SuiteConfig::new(SuiteName::Weight);
    cfg.params.seed = Some(7);
    cfg.output_path = Some(dir.join("weight.json"));
    let report = run_suite(&cfg)?;
    report.write_checks_csv(dir.join("weight_checks.csv"))?;
    println!("{} checks, passed: {}", report.checks.len(), report.passed);
    for c in report.checks.iter().take(5) {
        println!("  {:<45} {:.3e}", c.name, c.value);
    }
    println!("report in {}", dir.display());
    Ok(())
}
