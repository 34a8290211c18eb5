//! `archrefit`: reconstruct layered architectures from code models and
//! migrate models toward them.
//!
//! Exit codes: 0 success, 1 validation diagnostics, 2 unreadable or
//! malformed input (or unknown experiment), 3 violations remain, 4 the
//! architecture does not cover the model's units.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use archrefit_core::fitness::{check_conformance, solution_quality, LayeredAssignment};
use archrefit_core::lab::{
    build_mvc_fixture, inject_violations, reconstruction_experiment, refactoring_experiment,
    FixtureSpec, InjectionPlan, MAX_INJECTED,
};
use archrefit_core::report::{
    factors_line, reflexion_dot, summary_line, violations_json, violations_text,
};
use archrefit_core::{
    load_model, migrate, reconstruct, unit_dependency_graph, CodeModel, FitnessConfig,
    MigrationConfig, ModelError, ReconstructionConfig, RefactorError,
};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

#[derive(Parser, Debug)]
#[command(
    name = "archrefit",
    version,
    about = "Layered architecture reconstruction and migration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Options,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check a model document; diagnostics go to standard error.
    Validate { model: PathBuf },
    /// Search a layered architecture and write architecture.json and
    /// violations.json.
    Reconstruct { model: PathBuf },
    /// Report violations of a model against a given architecture.
    Check {
        model: PathBuf,
        architecture: PathBuf,
    },
    /// Transform a model toward an architecture; writes migrated.json and
    /// migration_log.json.
    Migrate {
        model: PathBuf,
        architecture: PathBuf,
    },
    /// Run the `reconstruction` or `refactoring` experiment.
    Experiment { name: String },
    /// Dependency graph in DOT, clustered by layer when an architecture is given.
    ExportDot {
        model: PathBuf,
        architecture: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct Options {
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    #[arg(long, global = true, default_value_t = 3)]
    max_layers: usize,
    #[arg(long, global = true, default_value_t = 5)]
    restarts: usize,
    #[arg(long, global = true, default_value_t = 0.25)]
    factor_resolvable: f64,
    #[arg(long, global = true, default_value_t = 2.0)]
    factor_unresolvable: f64,
    #[arg(long, global = true, default_value_t = 100)]
    max_generations: usize,
    #[arg(long, global = true, default_value_t = 10_000)]
    max_candidates: usize,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write intermediate model documents here.
    #[arg(long, global = true)]
    emit_models: Option<PathBuf>,
    /// Directory for result files.
    #[arg(long, global = true, default_value = ".")]
    out_dir: PathBuf,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
enum Format {
    Text,
    Structured,
    Dot,
}

impl Options {
    fn reconstruction(&self) -> ReconstructionConfig {
        ReconstructionConfig {
            max_layers: self.max_layers,
            restarts: self.restarts,
            seed: self.seed,
            factor_resolvable: self.factor_resolvable,
            factor_unresolvable: self.factor_unresolvable,
            ..ReconstructionConfig::default()
        }
    }

    fn fitness(&self) -> FitnessConfig {
        self.reconstruction().fitness()
    }

    fn migration(&self) -> MigrationConfig {
        MigrationConfig {
            max_generations: self.max_generations,
            max_candidates: self.max_candidates,
            fitness: self.fitness(),
        }
    }
}

/// A message for standard error plus the process exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type Outcome = Result<u8, Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| Failure::new(2, format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

fn load(path: &Path) -> Result<CodeModel, Failure> {
    match load_model(&read(path)?) {
        Ok(m) => Ok(m),
        Err(ModelError::Validation(diags)) => {
            let lines: Vec<String> = diags.iter().map(ToString::to_string).collect();
            Err(Failure::new(1, lines.join("\n")))
        }
        Err(e) => Err(Failure::new(2, format!("{}: {e}", path.display()))),
    }
}

fn load_architecture(path: &Path, opts: &Options) -> Result<LayeredAssignment, Failure> {
    LayeredAssignment::from_json(&read(path)?, opts.max_layers)
        .map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))
}

fn mismatch(e: impl ToString) -> Failure {
    Failure::new(4, e.to_string())
}

fn cmd_validate(path: &Path) -> Outcome {
    load(path).map(|_| 0)
}

fn cmd_reconstruct(path: &Path, opts: &Options) -> Outcome {
    let model = load(path)?;
    let config = opts.reconstruction();
    let r = reconstruct(&model, &config).map_err(|e| Failure::new(2, e.to_string()))?;
    let fitness = config.fitness();
    let violations = violations_json(&r.report, &r.architecture, &r.quality, &fitness);
    write(
        &opts.out_dir,
        "architecture.json",
        &r.architecture.to_json(),
    )?;
    write(&opts.out_dir, "violations.json", &violations)?;
    match opts.format {
        Format::Text => {
            println!("{}", factors_line(&fitness));
            println!("{}", summary_line(&r));
        }
        Format::Structured => {
            let doc = json!({
                "schema_version": 1,
                "factors": fitness,
                "layers": r.architecture.layer_count(),
                "violations": r.violation_count(),
                "quality": r.quality.value,
                "architecture": r.architecture.to_document(),
            });
            println!(
                "{}",
                serde_json::to_string_pretty(&doc).expect("serializable")
            );
        }
        Format::Dot => {
            let graph = unit_dependency_graph(&model);
            print!("{}", reflexion_dot(&graph, &r.architecture, &r.report));
        }
    }
    Ok(0)
}

fn cmd_check(model: &Path, architecture: &Path, opts: &Options) -> Outcome {
    let model = load(model)?;
    let arch = load_architecture(architecture, opts)?;
    let graph = unit_dependency_graph(&model);
    let (report, table) = check_conformance(&model, &graph, &arch).map_err(mismatch)?;
    let fitness = opts.fitness();
    match opts.format {
        Format::Text => print!("{}", violations_text(&report, &fitness)),
        Format::Structured => {
            let quality = solution_quality(&graph, &arch, &table, &fitness).map_err(mismatch)?;
            print!("{}", violations_json(&report, &arch, &quality, &fitness));
        }
        Format::Dot => print!("{}", reflexion_dot(&graph, &arch, &report)),
    }
    Ok(if report.violation_count() == 0 { 0 } else { 3 })
}

fn cmd_migrate(model: &Path, architecture: &Path, opts: &Options) -> Outcome {
    let model = load(model)?;
    let arch = load_architecture(architecture, opts)?;
    let config = opts.migration();
    let outcome = migrate(&model, &arch, &config).map_err(|e| match e {
        RefactorError::ArchitectureMismatch(_) => mismatch(e),
        other => Failure::new(2, other.to_string()),
    })?;
    write(&opts.out_dir, "migrated.json", &outcome.model.to_json())?;
    write(
        &opts.out_dir,
        "migration_log.json",
        &outcome.log.to_json(&config.fitness),
    )?;
    if let Some(dir) = &opts.emit_models {
        for (i, snapshot) in outcome.snapshots.iter().enumerate() {
            write(
                dir,
                &format!("generation_{}.json", i + 2),
                &snapshot.to_json(),
            )?;
        }
    }
    match opts.format {
        Format::Structured => print!("{}", outcome.log.to_json(&config.fitness)),
        _ => {
            println!("{}", factors_line(&config.fitness));
            print!("{}", outcome.log.to_table());
        }
    }
    Ok(if outcome.log.final_violations() == 0 {
        0
    } else {
        3
    })
}

fn cmd_experiment(name: &str, opts: &Options) -> Outcome {
    let config = opts.reconstruction();
    match name {
        "reconstruction" => {
            let table = reconstruction_experiment(opts.seed, &config)
                .map_err(|e| Failure::new(2, e.to_string()))?;
            if let Some(dir) = &opts.emit_models {
                let (fixture, intended) = build_mvc_fixture(&FixtureSpec::default());
                write(dir, "intended_architecture.json", &intended.to_json())?;
                for k in 0..=MAX_INJECTED {
                    let plan = InjectionPlan {
                        count: k,
                        seed: opts.seed,
                    };
                    let (eroded, _) = inject_violations(&fixture, &plan)
                        .map_err(|e| Failure::new(2, e.to_string()))?;
                    write(dir, &format!("eroded_{k}.json"), &eroded.to_json())?;
                }
            }
            match opts.format {
                Format::Structured => print!("{}", table.to_json(&config)),
                _ => print!("{}", table.to_text(&config)),
            }
            Ok(0)
        }
        "refactoring" => {
            let migration = opts.migration();
            let run = refactoring_experiment(opts.seed, &config, &migration)
                .map_err(|e| Failure::new(2, e.to_string()))?;
            if let Some(dir) = &opts.emit_models {
                write(dir, "eroded.json", &run.reflexion.model.to_json())?;
                write(
                    dir,
                    "architecture.json",
                    &run.reflexion.architecture.to_json(),
                )?;
                write(dir, "migrated.json", &run.outcome.model.to_json())?;
            }
            match opts.format {
                Format::Structured => print!("{}", run.log().to_json(&migration.fitness)),
                _ => {
                    println!(
                        "# refactoring experiment seed={} injected={}",
                        opts.seed,
                        run.injections.len()
                    );
                    println!("{}", factors_line(&migration.fitness));
                    print!("{}", run.log().to_table());
                }
            }
            Ok(0)
        }
        other => Err(Failure::new(
            2,
            format!("unknown experiment {other:?}; expected reconstruction or refactoring"),
        )),
    }
}

fn cmd_export_dot(model: &Path, architecture: Option<&Path>, opts: &Options) -> Outcome {
    let model = load(model)?;
    let graph = unit_dependency_graph(&model);
    match architecture {
        None => print!("{}", graph.to_dot()),
        Some(path) => {
            let arch = load_architecture(path, opts)?;
            let (report, _) = check_conformance(&model, &graph, &arch).map_err(mismatch)?;
            print!("{}", reflexion_dot(&graph, &arch, &report));
        }
    }
    Ok(0)
}

fn run(cli: &Cli) -> Outcome {
    let opts = &cli.opts;
    match &cli.command {
        Command::Validate { model } => cmd_validate(model),
        Command::Reconstruct { model } => cmd_reconstruct(model, opts),
        Command::Check {
            model,
            architecture,
        } => cmd_check(model, architecture, opts),
        Command::Migrate {
            model,
            architecture,
        } => cmd_migrate(model, architecture, opts),
        Command::Experiment { name } => cmd_experiment(name, opts),
        Command::ExportDot {
            model,
            architecture,
        } => cmd_export_dot(model, architecture.as_deref(), opts),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("{}", f.message);
            ExitCode::from(f.code)
        }
    }
}
