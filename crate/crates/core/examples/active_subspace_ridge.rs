//! Active subspace of a ridge function `f(x) = g(a . x)`: one dominant
//! eigenvalue whose eigenvector is `a / |a|`.
//!
//! cargo run --release --example active_subspace_ridge -- [n_gradients]

use tumorsim::sensitivity::{active_subspace, DEFAULT_REL_STEP};

fn main() -> tumorsim::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(500);
    let a = [0.9, -0.4, 0.2, 0.05, 0.0];
    let f = |x: &[f64]| {
        let t: f64 = x.iter().zip(&a).map(|(x, a)| x * a).sum();
        Ok(t.sin() + 0.5 * t * t)
    };
    let r = active_subspace(&f, &[(-1.0, 1.0); 5], n, 4, DEFAULT_REL_STEP)?;

    println!("eigenvalues:");
    for l in &r.eigenvalues {
        println!("  {l:.3e}");
    }
    let norm = a.iter().map(|v| v * v).sum::<f64>().sqrt();
    let w = &r.eigenvectors[0];
    let cos: f64 = w.iter().zip(&a).map(|(w, a)| w * a).sum::<f64>().abs() / norm;
    println!("|cos(w_1, a)| = {cos:.12}");
    println!("relative activity vs a_i^2 / |a|^2:");
    for (rel, ai) in r.relative_activity().iter().zip(&a) {
        println!("  {rel:.5}  {:.5}", ai * ai / (norm * norm));
    }
    Ok(())
}
