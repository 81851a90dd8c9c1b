//! Builds the non-uniqueness counterexample and samples the solution and the
//! coefficient on a few points.

use parabolic_uniqueness::counterexample::{build, eval_l, eval_solution, flip_time};

fn main() -> parabolic_uniqueness::Result<()> {
    let data = build(None, 1000)?;
    let seq = data.sequences();
    println!("j0 = {}, intervals = {}", seq.j0(), seq.len());
    for n in [1, 2, 10, 100] {
        println!(
            "n = {n:>3}: a_n = {:.6e}  z_n = {:.6e}  q_n = {:.6e}",
            seq.a(n),
            seq.z(n),
            seq.q(n)
        );
    }
    // the forward-time solution lives on -(a_n, a_{n+1})
    let fwd = flip_time(&data);
    for n in [1, 10, 100] {
        let t = -0.5 * (seq.a(n) + seq.a(n + 1));
        let jet = eval_solution(&fwd, t, 0.3, 0.7);
        let (l, dl) = eval_l(&fwd, t);
        println!(
            "t = {t:.6e}: ln-scale {:.4e}, l = {l:.6}, l' = {dl:.3e}",
            jet.log_scale
        );
    }
    Ok(())
}
