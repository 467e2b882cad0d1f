//! Sobol indices of the Ishigami function against their closed forms.
//!
//! cargo run --release --example sobol_analytic -- [n]

use std::f64::consts::PI;

use tumorsim::sensitivity::{sample_box, sobol_indices};

fn ishigami(x: &[f64]) -> f64 {
    let (a, b) = (7.0, 0.1);
    x[0].sin() + a * x[1].sin().powi(2) + b * x[2].powi(4) * x[0].sin()
}

fn main() -> tumorsim::Result<()> {
    let n: usize = std::env::args().nth(1).and_then(|s| s.parse().ok()).unwrap_or(100_000);
    let design = sample_box(n, &[(-PI, PI); 3], 1)?;
    let ya: Vec<f64> = design.a.iter().map(|r| ishigami(r)).collect();
    let yb: Vec<f64> = design.b.iter().map(|r| ishigami(r)).collect();
    let yc: Vec<Vec<f64>> = (0..3).map(|i| design.c(i).iter().map(|r| ishigami(r)).collect()).collect();
    let s = sobol_indices(&ya, &yb, &yc)?;

    // variance decomposition with a = 7, b = 0.1
    let (a, b) = (7.0f64, 0.1f64);
    let v1 = 0.5 * (1.0 + b * PI.powi(4) / 5.0).powi(2);
    let v2 = a * a / 8.0;
    let v13 = b * b * PI.powi(8) * (1.0 / 18.0 - 1.0 / 50.0);
    let var = v1 + v2 + v13;
    let exact_first = [v1 / var, v2 / var, 0.0];
    let exact_total = [(v1 + v13) / var, v2 / var, v13 / var];

    println!("N = {n}");
    println!("x    S_i      exact    S_Ti     exact");
    for i in 0..3 {
        println!(
            "x{}  {:>7.4}  {:>7.4}  {:>7.4}  {:>7.4}",
            i + 1,
            s.first_order[i],
            exact_first[i],
            s.total[i],
            exact_total[i]
        );
    }
    Ok(())
}
