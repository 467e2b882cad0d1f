//! Parses a run configuration, reports the model assumptions and evaluates
//! the data misfit of the configured parameters.
//!
//! cargo run --release --example config_and_data

use std::path::Path;

use tumorsim::io::{load_dataset, RunConfig};
use tumorsim::sensitivity::{misfit, MisfitSpec};

const CONFIG: &str = r#"
seed = 3

[model]
variant = "I"
lambda_T = 0.4
lambda_A = 0.02

[sensitivity]
n_cells = 64
dt = 0.2
"#;

fn main() -> tumorsim::Result<()> {
    let config = RunConfig::from_toml(CONFIG, Path::new("inline.toml"))?;
    println!("{}", config.assumptions()?);

    let spec = MisfitSpec::with_noise(load_dataset(), config.sensitivity.noise_std);
    let setup = config.simulation_setup();
    let predictions = spec.predict(config.parameters(), &setup)?;
    for (series, q) in spec.series.iter().zip(&predictions) {
        let (day, observed) = *series.observations.last().expect("series are non-empty");
        println!(
            "seeded at {:.5}: day {day:.2} observed {observed:.4}, predicted {:.4}",
            series.initial_confluence,
            q.last().copied().unwrap_or(f64::NAN)
        );
    }
    println!("misfit: {:.3}", misfit(config.parameters(), &spec, &setup)?);
    println!("\nnormalized config:\n{}", config.to_toml()?);
    Ok(())
}
