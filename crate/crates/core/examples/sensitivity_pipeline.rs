//! Variance-based and active-subspace sensitivities of the radial model,
//! followed by a side-by-side ranking.
//!
//! cargo run --release --example sensitivity_pipeline -- [n_sobol] [n_gradients] [seed]

use std::time::Instant;

use tumorsim::sensitivity::{
    compare_parameter_sensitivities, misfit_active_subspace, sobol_study, MisfitSpec, PriorSpec, SimulationSetup,
    DEFAULT_REL_STEP,
};

fn main() -> tumorsim::Result<()> {
    env_logger::init();
    let mut args = std::env::args().skip(1);
    let n_sobol: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(200);
    let n_gradients: usize = args.next().and_then(|s| s.parse().ok()).unwrap_or(20);
    let seed: u64 = args.next().and_then(|s| s.parse().ok()).unwrap_or(0);

    let priors = PriorSpec::default();
    let setup = SimulationSetup::default();

    let start = Instant::now();
    let sobol = sobol_study(&priors, &setup, n_sobol, seed)?;
    println!("sobol (N = {n_sobol}) in {:.1?}", start.elapsed());

    let start = Instant::now();
    let asub = misfit_active_subspace(&priors, &MisfitSpec::default(), &setup, n_gradients, seed, DEFAULT_REL_STEP)?;
    println!("active subspace ({n_gradients} gradients) in {:.1?}", start.elapsed());

    let cmp = compare_parameter_sensitivities(&sobol.aggregate, &asub)?;
    println!("{:<14}{:>12}{:>12}", "parameter", "variance", "activity");
    for &i in &cmp.activity_ranking {
        println!("{:<14}{:>12.5}{:>12.5}", cmp.names[i], cmp.variance_based[i], cmp.activity[i]);
    }
    let top: Vec<String> = asub.eigenvalues.iter().take(3).map(|v| format!("{v:.3e}")).collect();
    println!("leading eigenvalues: {}", top.join(", "));
    println!("rank agreement: {:.3}", cmp.rank_agreement);
    Ok(())
}
