//! Argument definitions and subcommand dispatch.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use kgframe::constructions::{example1, example2, random_kg_system};
use kgframe::duals::{
    approx_defect_with, canonical_kg_dual_with, exactify_dual_with, lift_to_vector_frames,
    neumann_reconstruct_with, truncated_neumann_dual_with, DEFAULT_NEUMANN_STEPS,
};
use kgframe::linops::{Svd, DEFAULT_RANK_TOL};
use kgframe::redundancy::{brute_force_report, erasure_invertibility, erasure_norm_count};
use kgframe::{GSystem, KGSystem, Tolerances};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{CliError, CliResult};
use crate::files::{self, vector_to_pairs, Loaded};
use crate::report::{digest, InputDigest, ReportFile, REPORT_SCHEMA, REPORT_VERSION};

#[derive(Debug, Parser)]
#[command(
    name = "kgframe",
    version,
    about = "Bounds, duals, reconstruction and erasure analysis for K-g-frames"
)]
pub struct Cli {
    /// Relative singular-value cutoff used for ranks, ranges and pseudo-inverses.
    #[arg(long, global = true, default_value_t = DEFAULT_RANK_TOL)]
    pub tol_rank: f64,
    /// Defect at or below which a dual pair counts as exact.
    #[arg(long, global = true, default_value_t = Tolerances::default().dual)]
    pub tol_dual: f64,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Generator {
    Example1,
    Example2,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Criterion {
    Norm,
    Invert,
    Brute,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a system and write it as a SystemFile.
    Gen {
        #[arg(value_enum)]
        generator: Generator,
        #[arg(long)]
        n: usize,
        /// Block dimensions, comma separated (random only).
        #[arg(long, value_delimiter = ',')]
        dims: Vec<usize>,
        /// Rank of K (random only, defaults to n).
        #[arg(long)]
        rank_k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Optimal frame bounds.
    Bounds {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Frame class with the bounds behind it.
    Classify {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Canonical K-g-dual, written as a SystemFile.
    Dual {
        file: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Defect of a candidate dual.
    Defect {
        file: PathBuf,
        theta: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Turn an approximate dual into an exact one.
    Exactify {
        file: PathBuf,
        theta: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Truncated Neumann dual with N + 1 terms.
    NeumannDual {
        file: PathBuf,
        theta: PathBuf,
        #[arg(long = "N")]
        terms: usize,
        #[arg(short, long)]
        output: PathBuf,
    },
    /// Neumann reconstruction of a vector in R(K).
    Reconstruct {
        file: PathBuf,
        theta: PathBuf,
        #[arg(long = "vec")]
        vector: PathBuf,
        #[arg(long = "N", default_value_t = DEFAULT_NEUMANN_STEPS)]
        steps: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Lift a dual pair to vector frames through per-index frames.
    Lift {
        file: PathBuf,
        theta: PathBuf,
        #[arg(long)]
        frames: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Decide whether removing blocks keeps a K-g-frame.
    Erase {
        file: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        indices: Vec<usize>,
        #[arg(long, value_enum)]
        criterion: Criterion,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

/// Finished run: the report and where it goes (`None` means stdout).
pub struct Outcome {
    pub report: ReportFile,
    pub destination: Option<PathBuf>,
}

struct Inputs(Vec<InputDigest>);

impl Inputs {
    fn track<T>(&mut self, path: &Path, loaded: Loaded<T>) -> T {
        self.0
            .push(digest(&path.display().to_string(), &loaded.bytes));
        loaded.value
    }
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("serializable payload")
}

fn tolerances(cli: &Cli) -> CliResult<Tolerances> {
    for (name, v) in [("--tol-rank", cli.tol_rank), ("--tol-dual", cli.tol_dual)] {
        if !v.is_finite() || v < 0.0 {
            return Err(CliError::Input(format!(
                "{name} must be finite and non-negative, got {v}"
            )));
        }
    }
    Ok(Tolerances {
        rank: cli.tol_rank,
        dual: cli.tol_dual,
        ..Tolerances::default()
    })
}

fn load_theta(path: &Path, ksys: &KGSystem, inputs: &mut Inputs) -> CliResult<GSystem> {
    let theta = inputs.track(path, files::load_system(path)?);
    let theta = theta.system().clone();
    if !ksys.system().same_shape(&theta) {
        return Err(kgframe::Error::DimMismatch(format!(
            "{}: blocks {:?} do not match the system's {:?}",
            path.display(),
            theta.block_dims(),
            ksys.system().block_dims()
        ))
        .into());
    }
    Ok(theta)
}

/// Writes `theta` with the source system's `K` and returns its digest entry.
fn save_dual(ksys: &KGSystem, theta: GSystem, path: &Path) -> CliResult<Value> {
    let out = ksys.with_system(theta)?;
    files::save_system(&out, path)?;
    let bytes = files::read_bytes(path)?;
    Ok(to_value(&digest(&path.display().to_string(), &bytes)))
}

pub fn run(cli: &Cli, argv: Vec<String>) -> CliResult<Outcome> {
    let start = Instant::now();
    let tol = tolerances(cli)?;
    let mut inputs = Inputs(Vec::new());
    let (kind, payload, destination) = match &cli.command {
        Command::Gen {
            generator,
            n,
            dims,
            rank_k,
            seed,
            output,
        } => {
            if *generator != Generator::Random && (!dims.is_empty() || rank_k.is_some()) {
                return Err(CliError::Input(
                    "--dims and --rank-k apply to the random generator only".into(),
                ));
            }
            let ksys = match generator {
                Generator::Example1 => example1(*n)?,
                Generator::Example2 => example2(*n)?,
                Generator::Random => {
                    if dims.is_empty() {
                        return Err(CliError::Input("random generation needs --dims".into()));
                    }
                    random_kg_system(*n, dims, rank_k.unwrap_or(*n), *seed)?
                }
            };
            files::save_system(&ksys, output)?;
            let bytes = files::read_bytes(output)?;
            let payload = json!({
                "generator": format!("{generator:?}").to_lowercase(),
                "ambientDim": ksys.ambient_dim(),
                "blockDims": ksys.system().block_dims(),
                "rankK": Svd::new(ksys.k()).rank(tol.rank),
                "seed": (*generator == Generator::Random).then_some(*seed),
                "output": digest(&output.display().to_string(), &bytes),
            });
            ("gen", payload, None)
        }
        Command::Bounds { file, output } => {
            let ksys = inputs.track(file, files::load_system(file)?);
            (
                "bounds",
                to_value(&ksys.optimal_bounds_with(&tol)),
                output.clone(),
            )
        }
        Command::Classify { file, output } => {
            let ksys = inputs.track(file, files::load_system(file)?);
            (
                "classify",
                to_value(&ksys.classify_with(&tol)),
                output.clone(),
            )
        }
        Command::Dual { file, output } => {
            let ksys = inputs.track(file, files::load_system(file)?);
            let theta = canonical_kg_dual_with(&ksys, &tol)?;
            let cert = approx_defect_with(ksys.system(), &theta, ksys.k(), &tol)?;
            let written = save_dual(&ksys, theta, output)?;
            (
                "dual",
                json!({ "certificate": cert, "output": written }),
                None,
            )
        }
        Command::Defect {
            file,
            theta,
            output,
        } => {
            let ksys = inputs.track(file, files::load_system(file)?);
            let theta = load_theta(theta, &ksys, &mut inputs)?;
            let cert = approx_defect_with(ksys.system(), &theta, ksys.k(), &tol)?;
            ("defect", to_value(&cert), output.clone())
        }
        Command::Exactify {
            file,
            theta,
            output,
        } => {
            let ksys = inputs.track(file, files::load_system(file)?);
            let theta = load_theta(theta, &ksys, &mut inputs)?;
            let before = approx_defect_with(ksys.system(), &theta, ksys.k(), &tol)?;
            let exact = exactify_dual_with(ksys.system(), &theta, ksys.k(), &tol)?;
            let after = approx_defect_with(ksys.system(), &exact, ksys.k(), &tol)?;
            let written = save_dual(&ksys, exact, output)?;
            let payload = json!({
                "inputCertificate": before,
                "outputCertificate": after,
                "output": written,
            });
            ("exactify", payload, None)
        }
        Command::NeumannDual {
            file,
            theta,
            terms,
            output,
        } => {
            let ksys = inputs.track(file, files::load_system(file)?);
            let theta = load_theta(theta, &ksys, &mut inputs)?;
            let before = approx_defect_with(ksys.system(), &theta, ksys.k(), &tol)?;
            let truncated =
                truncated_neumann_dual_with(ksys.system(), &theta, ksys.k(), *terms, &tol)?;
            let after = approx_defect_with(ksys.system(), &truncated, ksys.k(), &tol)?;
            let exponent = i32::try_from(*terms + 1).unwrap_or(i32::MAX);
            let written = save_dual(&ksys, truncated, output)?;
            let payload = json!({
                "terms": terms,
                "inputCertificate": before,
                "outputCertificate": after,
                "predictedDefectBound": before.defect.powi(exponent),
                "output": written,
            });
            ("neumann-dual", payload, None)
        }
        Command::Reconstruct {
            file,
            theta,
            vector,
            steps,
            output,
        } => {
            let ksys = inputs.track(file, files::load_system(file)?);
            let theta = load_theta(theta, &ksys, &mut inputs)?;
            let f = inputs.track(vector, files::load_vector(vector)?);
            let trace =
                neumann_reconstruct_with(ksys.system(), &theta, ksys.k(), &f, *steps, &tol)?;
            let iterates: Vec<_> = trace.iterates.iter().map(vector_to_pairs).collect();
            let payload = json!({
                "defect": trace.defect,
                "steps": trace.errors.len(),
                "errors": trace.errors,
                "predictedBound": trace.predicted_bound,
                "iterates": iterates,
            });
            ("reconstruct", payload, output.clone())
        }
        Command::Lift {
            file,
            theta,
            frames,
            output,
        } => {
            let ksys = inputs.track(file, files::load_system(file)?);
            let theta = load_theta(theta, &ksys, &mut inputs)?;
            let fams = inputs.track(frames, files::load_families(frames)?);
            let lift = lift_to_vector_frames(&ksys, &theta, &fams)?;
            let payload = json!({
                "residual": lift.residual,
                "gDefect": lift.g_defect,
                "vectorDefect": lift.vector_defect,
                "restrictedDefect": lift.restricted_defect,
                "gApproxDual": lift.g_approx_dual,
                "vectorApproxDual": lift.vector_approx_dual,
                "e": lift.e.iter().map(vector_to_pairs).collect::<Vec<_>>(),
                "f": lift.f.iter().map(vector_to_pairs).collect::<Vec<_>>(),
            });
            ("lift", payload, output.clone())
        }
        Command::Erase {
            file,
            indices,
            criterion,
            output,
        } => {
            let ksys = inputs.track(file, files::load_system(file)?);
            let report = match criterion {
                Criterion::Norm => erasure_norm_count(&ksys, indices)?,
                Criterion::Invert => erasure_invertibility(&ksys, indices)?,
                Criterion::Brute => brute_force_report(&ksys, indices)?,
            };
            ("erase", to_value(&report), output.clone())
        }
    };
    let report = ReportFile {
        schema: REPORT_SCHEMA.into(),
        version: REPORT_VERSION.into(),
        command: argv,
        inputs: inputs.0,
        tolerances: tol,
        kind: kind.into(),
        payload,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    };
    Ok(Outcome {
        report,
        destination,
    })
}
