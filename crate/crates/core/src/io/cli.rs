//! Command-line interface.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use toml::{Table, Value};

use crate::error::{Error, Result};
use crate::io::config::{MeshKind, RunConfig};
use crate::io::contour::isoperimetric_ratio;
use crate::io::mesh_text::write_mesh;
use crate::io::tables::{
    read_activity, read_sobol, write_activity, write_comparison, write_eigenpairs, write_fit, write_series,
    write_snapshot, write_sobol, write_sobol_per_time, write_text, write_trajectory, write_velocity,
};
use crate::model::PARAMETER_NAMES;
use crate::sensitivity::{
    compare_parameter_sensitivities, compare_scores, misfit_active_subspace, sobol_study, MethodComparison,
    MisfitSpec,
};
use crate::stepper::{confluence, Stepper};

#[derive(Parser, Debug)]
#[command(name = "tumorsim", version, about = "Phase-field tumor growth simulation and sensitivity analysis")]
#[command(arg_required_else_help = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one simulation and write the trajectory and snapshots.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Model variant: I, II, III or nonlocal.
        #[arg(long)]
        variant: Option<String>,
        /// Initial shape on the disk (a, b, c or d); selects the disk mesh.
        #[arg(long)]
        shape: Option<String>,
        /// Mesh kind: radial, disk or interval.
        #[arg(long)]
        mesh: Option<String>,
        /// Time step in days.
        #[arg(long)]
        dt: Option<f64>,
        /// Final time in days.
        #[arg(long)]
        t_end: Option<f64>,
    },
    /// Variance-based indices of the confluence QoI.
    Sobol {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Active subspace of the data misfit.
    Asub {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
    },
    /// Compare variance-based and active-subspace rankings.
    Compare {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        sampling: Sampling,
        /// Existing `parameter,S_i,S_Ti` table instead of a new study.
        #[arg(long, requires = "activity_csv")]
        sobol_csv: Option<PathBuf>,
        /// Existing `parameter,activity,relative_activity` table.
        #[arg(long, requires = "sobol_csv")]
        activity_csv: Option<PathBuf>,
    },
    /// Print the assumption report of a configuration.
    Validate {
        #[command(flatten)]
        common: Common,
    },
    /// Misfit of the configured parameters against the embedded data.
    FitData {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug)]
struct Common {
    /// Configuration file, or `default`.
    #[arg(long, default_value = "default")]
    config: String,
    /// Override a configuration key, e.g. `--set model.lambda_T=0.6`.
    #[arg(long = "set", value_name = "SECTION.KEY=VALUE")]
    overrides: Vec<String>,
    /// Output directory (overrides `output_dir`).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Sampling {
    /// Random seed (overrides `seed`).
    #[arg(long)]
    seed: Option<u64>,
    /// Sample count (overrides `n_sobol` or `n_gradients`).
    #[arg(long)]
    n: Option<usize>,
}

/// Runs the CLI on `argv` (including the program name) and returns the
/// process exit code: 0 on success, 1 on a failed run or failed checks, 2
/// on usage errors.
pub fn cli_main<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let _ = env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).try_init();
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return e.exit_code();
        }
    };
    match std::panic::catch_unwind(|| run(cli.command)) {
        Ok(Ok(code)) => code,
        Ok(Err(e)) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            1
        }
        Err(_) => {
            eprintln!("error: internal failure (see the message above)");
            1
        }
    }
}

fn set(table: &mut Table, key: &str, value: Value) -> Result<()> {
    let mut parts: Vec<&str> = key.split('.').collect();
    let leaf = parts.pop().filter(|k| !k.is_empty()).ok_or_else(|| Error::Argument(format!("empty key in {key:?}")))?;
    let mut t = table;
    for p in parts {
        t = t
            .entry(p)
            .or_insert_with(|| Value::Table(Table::new()))
            .as_table_mut()
            .ok_or_else(|| Error::Argument(format!("{p} is not a section")))?;
    }
    t.insert(leaf.to_string(), value);
    Ok(())
}

fn parse_value(text: &str) -> Value {
    // bare words (variant names, shapes) are taken as strings
    toml::from_str::<Table>(&format!("v = {text}"))
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(text.to_string()))
}

/// Loads the configuration with command-line overrides applied. Assumption
/// checks are left to the caller.
fn load(common: &Common, extra: Vec<(&str, Value)>) -> Result<RunConfig> {
    let (text, origin) = if common.config == "default" {
        (String::new(), PathBuf::from("<default>"))
    } else {
        let p = PathBuf::from(&common.config);
        (std::fs::read_to_string(&p).map_err(|e| Error::io(&p, e))?, p)
    };
    let mut table: Table = toml::from_str(&text).map_err(|e| Error::Parse {
        path: origin.clone(),
        message: e.to_string(),
    })?;
    for o in &common.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Argument(format!("--set expects SECTION.KEY=VALUE, got {o:?}")))?;
        set(&mut table, k.trim(), parse_value(v.trim()))?;
    }
    for (k, v) in extra {
        set(&mut table, k, v)?;
    }
    if let Some(out) = &common.out {
        set(&mut table, "output_dir", Value::String(out.to_string_lossy().into_owned()))?;
    }
    let merged = toml::to_string(&table).map_err(|e| Error::Config(e.to_string()))?;
    RunConfig::from_toml_unchecked(&merged, &origin)
}

fn sampling_overrides(s: &Sampling, count_key: &'static str) -> Vec<(&'static str, Value)> {
    let mut v = Vec::new();
    if let Some(seed) = s.seed {
        v.push(("seed", Value::Integer(seed as i64)));
    }
    if let Some(n) = s.n {
        v.push((count_key, Value::Integer(n as i64)));
    }
    v
}

fn run(command: Command) -> Result<i32> {
    match command {
        Command::Simulate {
            common,
            variant,
            shape,
            mesh,
            dt,
            t_end,
        } => {
            let mut extra = Vec::new();
            if let Some(v) = variant {
                extra.push(("model.variant", Value::String(v)));
            }
            if let Some(s) = shape {
                extra.push(("initial.shape", Value::String(s)));
                if mesh.is_none() {
                    extra.push(("mesh.kind", Value::String("disk".into())));
                }
            }
            if let Some(m) = mesh {
                extra.push(("mesh.kind", Value::String(m)));
            }
            if let Some(dt) = dt {
                extra.push(("stepper.dt", Value::Float(dt)));
            }
            if let Some(t) = t_end {
                extra.push(("stepper.t_end", Value::Float(t)));
            }
            let config = load(&common, extra)?;
            config.validate()?;
            simulate(&config)
        }
        Command::Sobol { common, sampling } => {
            let config = load(&common, sampling_overrides(&sampling, "sensitivity.n_sobol"))?;
            config.validate()?;
            let study = sobol_study(
                &config.priors.0,
                &config.simulation_setup(),
                config.sensitivity.n_sobol,
                config.seed,
            )?;
            let dir = &config.output_dir;
            write_sobol(&PARAMETER_NAMES, &study.aggregate, dir.join("sobol.csv"))?;
            write_sobol_per_time(&PARAMETER_NAMES, &study, dir.join("sobol_per_time.csv"))?;
            write_text(&config.to_toml()?, dir.join("config.toml"))?;
            for (name, (s, st)) in PARAMETER_NAMES.iter().zip(study.aggregate.first_order.iter().zip(&study.aggregate.total)) {
                println!("{name:>12}  S_i {s:>9.5}  S_Ti {st:>9.5}");
            }
            Ok(0)
        }
        Command::Asub { common, sampling } => {
            let config = load(&common, sampling_overrides(&sampling, "sensitivity.n_gradients"))?;
            config.validate()?;
            let asub = run_asub(&config)?;
            let dir = &config.output_dir;
            write_activity(&PARAMETER_NAMES, &asub, dir.join("activity.csv"))?;
            write_eigenpairs(&PARAMETER_NAMES, &asub, dir.join("eigenpairs.csv"))?;
            write_text(&config.to_toml()?, dir.join("config.toml"))?;
            for (name, a) in PARAMETER_NAMES.iter().zip(asub.relative_activity()) {
                println!("{name:>12}  activity {a:>9.5}");
            }
            Ok(0)
        }
        Command::Compare {
            common,
            sampling,
            sobol_csv,
            activity_csv,
        } => {
            let config = load(&common, sampling_overrides(&sampling, "sensitivity.n_sobol"))?;
            let cmp = match (sobol_csv, activity_csv) {
                (Some(s), Some(a)) => compare_files(&s, &a)?,
                _ => {
                    config.validate()?;
                    let study = sobol_study(
                        &config.priors.0,
                        &config.simulation_setup(),
                        config.sensitivity.n_sobol,
                        config.seed,
                    )?;
                    let asub = run_asub(&config)?;
                    let dir = &config.output_dir;
                    write_sobol(&PARAMETER_NAMES, &study.aggregate, dir.join("sobol.csv"))?;
                    write_activity(&PARAMETER_NAMES, &asub, dir.join("activity.csv"))?;
                    compare_parameter_sensitivities(&study.aggregate, &asub)?
                }
            };
            write_comparison(&cmp, config.output_dir.join("comparison.csv"))?;
            print!("{}", comparison_report(&cmp));
            Ok(0)
        }
        Command::Validate { common } => {
            let config = load(&common, Vec::new())?;
            let report = config.assumptions()?;
            print!("{report}");
            match config.validate() {
                Ok(()) => {
                    println!("configuration valid");
                    Ok(0)
                }
                Err(e) => {
                    println!("configuration invalid: {e}");
                    Ok(1)
                }
            }
        }
        Command::FitData { common } => {
            let config = load(&common, Vec::new())?;
            config.validate()?;
            let spec = MisfitSpec::with_noise(crate::io::load_dataset(), config.sensitivity.noise_std);
            let predictions = spec.predict(config.parameters(), &config.simulation_setup())?;
            let value = spec.evaluate(&predictions)?;
            write_fit(&spec.series, &predictions, config.output_dir.join("fit.csv"))?;
            println!("misfit {value:.10e}");
            Ok(0)
        }
    }
}

fn run_asub(config: &RunConfig) -> Result<crate::sensitivity::ActiveSubspaceResult> {
    let spec = MisfitSpec::with_noise(crate::io::load_dataset(), config.sensitivity.noise_std);
    misfit_active_subspace(
        &config.priors.0,
        &spec,
        &config.simulation_setup(),
        config.sensitivity.n_gradients,
        config.seed,
        config.sensitivity.rel_step,
    )
}

fn compare_files(sobol: &Path, activity: &Path) -> Result<MethodComparison> {
    let (names, _, total) = read_sobol(sobol)?;
    let (names_a, act) = read_activity(activity)?;
    if names != names_a {
        return Err(Error::Dimension("the two tables list different parameters".into()));
    }
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    compare_scores(&refs, &total, &act)
}

fn comparison_report(cmp: &MethodComparison) -> String {
    let mut s = String::from("parameter     variance  rank   activity  rank\n");
    for &i in &cmp.variance_ranking {
        s += &format!(
            "{:<12} {:>9.5}  {:>4}  {:>9.5}  {:>4}\n",
            cmp.names[i],
            cmp.variance_based[i],
            MethodComparison::rank_of(&cmp.variance_ranking, i) + 1,
            cmp.activity[i],
            MethodComparison::rank_of(&cmp.activity_ranking, i) + 1
        );
    }
    s += &format!(
        "rank agreement {:.3}, top-3 overlap {}\n",
        cmp.rank_agreement, cmp.top3_overlap
    );
    s
}

fn simulate(config: &RunConfig) -> Result<i32> {
    let mesh = Arc::new(config.mesh.build()?);
    let stepper_config = config.stepper_config();
    let kernel = if stepper_config.variant.is_nonlocal() {
        Some(config.kernel(&mesh)?)
    } else {
        None
    };
    let params = *config.parameters();
    let mobility = crate::model::MobilityModel::constant(&params);
    let mut stepper = Stepper::with_models(mesh.clone(), params, stepper_config, mobility, kernel)?;
    let initial = stepper.initial_state(config.initial.field(mesh.clone())?)?;
    log::info!(
        "simulating variant {} on {} vertices, {} steps",
        stepper_config.variant,
        mesh.n_vertices(),
        stepper_config.n_steps()
    );
    let traj = stepper.run(initial)?;

    let dir = &config.output_dir;
    write_text(&config.to_toml()?, dir.join("config.toml"))?;
    write_mesh(&mesh, dir.join("mesh.txt"))?;
    write_trajectory(&traj.records, dir.join("trajectory.csv"))?;
    let mut shape = Vec::new();
    for (k, snap) in traj.snapshots.iter().enumerate() {
        write_snapshot(snap, dir.join(format!("snapshots/phi_{k:04}.csv")))?;
        if mesh.dim() == 2 {
            if stepper_config.variant.has_velocity() {
                write_velocity(snap, dir.join(format!("snapshots/velocity_{k:04}.csv")))?;
            }
            if let Ok(r) = isoperimetric_ratio(&snap.phi_t) {
                shape.push((snap.time, r));
            }
        }
    }
    if mesh.dim() == 2 {
        write_series("t,isoperimetric_ratio", &shape, dir.join("shape.csv"))?;
    }
    let fin = &traj.final_state;
    println!(
        "t = {:.4}  confluence {:.6e}  ({} steps, output in {})",
        fin.time,
        confluence(fin),
        traj.records.len().saturating_sub(1),
        dir.display()
    );
    if config.mesh.kind == MeshKind::Disk {
        if let Some((_, r)) = shape.last() {
            println!("isoperimetric ratio of the 0.5 contour {r:.6}");
        }
    }
    Ok(0)
}
