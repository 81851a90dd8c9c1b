//! Runs a small Carleman harness for the identity coefficient.

use parabolic_uniqueness::carleman::{run_harness, HarnessConfig};
use parabolic_uniqueness::coefficients::CoefficientField;

fn main() -> parabolic_uniqueness::Result<()> {
    let cfg = HarnessConfig {
        ensemble: 4,
        gammas: vec![8.0, 16.0],
        grid_points: 256,
        h_max: 4,
        ..HarnessConfig::default()
    };
    let a = CoefficientField::identity(1, cfg.mu, cfg.alpha, cfg.t_horizon)?;
    let r = run_harness(&cfg, &a)?;
    println!("m = {}", r.m);
    for g in &r.gammas {
        println!(
            "gamma {:>5}: ratio in [{:.4}, {:.4}], form error {:.1e}, final3 {}",
            g.gamma, g.min_ratio, g.max_ratio, g.max_form_disagreement, g.final3_pass
        );
    }
    println!(
        "C_hat = {:.4}, gamma0_hat = {}",
        r.fitted.c_hat, r.fitted.gamma0_hat
    );
    Ok(())
}
