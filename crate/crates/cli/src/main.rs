//! Command-line front end: every library operation on matrix files, for
//! scripting and CI.
//!
//! Exit codes: 0 on success, 1 on mathematical negative results (a
//! non-factorizable input with its witness, a failed verification, a found
//! counterexample), 2 on usage or format errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use tropmat::{
    detect_shift_counterexample, entry_conditions, factor_2x2, factor_3x3, factor_star,
    factor_triangular, normal_form, parse_factorization, render_factorization, run_property, Error,
    Factorization, GeneratorConfig, Matrix, Mode, PropertyReport, SUITE_NAMES,
};

#[derive(Parser)]
#[command(
    name = "tropmat",
    version,
    about = "Exact supertropical (max-plus) matrix algebra and factorization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum ModeArg {
    /// Full supertropical semantics.
    Super,
    /// Tropical semantics: the input is projected onto its ghost-free image
    /// and preconditions relax accordingly.
    Trop,
}

impl From<ModeArg> for Mode {
    fn from(arg: ModeArg) -> Mode {
        match arg {
            ModeArg::Super => Mode::Supertropical,
            ModeArg::Trop => Mode::Tropical,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Print the determinant (the permanent) and the singularity class.
    Det {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Super)]
        mode: ModeArg,
    },
    /// Print the singularity class only.
    Classify {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Super)]
        mode: ModeArg,
    },
    /// Print the determinant and the permutations attaining it.
    Tracks {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Super)]
        mode: ModeArg,
    },
    /// Print the adjoint matrix.
    Adjoint {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Super)]
        mode: ModeArg,
    },
    /// Print the quasi-inverse adj(A)/det(A).
    Nabla {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Super)]
        mode: ModeArg,
    },
    /// Print the k-th power.
    Power {
        file: PathBuf,
        #[arg(long)]
        k: u32,
        #[arg(long, value_enum, default_value_t = ModeArg::Super)]
        mode: ModeArg,
    },
    /// Print the Kleene star (requires 1 on the diagonal).
    Star {
        file: PathBuf,
        /// Iteration cap; defaults to the dimension plus one.
        #[arg(long)]
        cap: Option<u32>,
        #[arg(long, value_enum, default_value_t = ModeArg::Super)]
        mode: ModeArg,
    },
    /// Print the invertible factor list and the normal form.
    NormalForm {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Super)]
        mode: ModeArg,
    },
    /// Factor the matrix into elementary matrices (2x2, 3x3, or triangular).
    Factor {
        file: PathBuf,
        /// Write the factorization here instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::Super)]
        mode: ModeArg,
    },
    /// Factor the quasi-inverse of the matrix (any dimension).
    FactorStar {
        file: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value_t = ModeArg::Super)]
        mode: ModeArg,
    },
    /// Re-check a factorization file against its target and mode.
    Verify { file: PathBuf },
    /// Look for the shift-permutation non-factorizability witness.
    DetectShift {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Super)]
        mode: ModeArg,
    },
    /// Print the entry-condition relations and values of a 3x3 normal form.
    EntryConditions {
        file: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Super)]
        mode: ModeArg,
    },
    /// Run registered property suites.
    Props {
        /// Suite name, or `all`.
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 3)]
        n: usize,
        #[arg(long, default_value_t = 200)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        density: Option<f64>,
        #[arg(long)]
        ghost_rate: Option<f64>,
    },
}

/// A command that ran to completion but answered in the negative.
struct Negative;

enum Failure {
    Math(String),
    Usage(String),
}

type CmdResult = Result<Option<Negative>, Failure>;

fn classify_error(e: Error) -> Failure {
    match e {
        Error::Parse(_)
        | Error::DimensionMismatch { .. }
        | Error::DimensionTooLarge { .. }
        | Error::UnknownProperty(_) => Failure::Usage(e.to_string()),
        other => Failure::Math(other.to_string()),
    }
}

fn load_matrix(path: &Path, mode: ModeArg) -> Result<Matrix, Failure> {
    let text = fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", path.display())))?;
    let matrix: Matrix = text
        .parse()
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    Ok(match mode {
        ModeArg::Super => matrix,
        ModeArg::Trop => matrix.project(),
    })
}

fn emit_factorization(f: &Factorization, output: Option<&Path>) -> CmdResult {
    // Never print an unverified factorization.
    match f.verify() {
        Ok(true) => {}
        Ok(false) => {
            return Err(Failure::Math(
                "refusing to emit: factorization failed its own verification".into(),
            ))
        }
        Err(e) => return Err(classify_error(e)),
    }
    let text = render_factorization(f);
    match output {
        Some(path) => fs::write(path, text)
            .map_err(|e| Failure::Usage(format!("cannot write {}: {e}", path.display())))?,
        None => print!("{text}"),
    }
    Ok(None)
}

fn run(cli: Cli) -> CmdResult {
    match cli.command {
        Command::Det { file, mode } => {
            let m = load_matrix(&file, mode)?;
            let det = m.determinant();
            println!("{det}");
            println!("class={}", m.classify());
            Ok(None)
        }
        Command::Classify { file, mode } => {
            let m = load_matrix(&file, mode)?;
            println!("{}", m.classify());
            Ok(None)
        }
        Command::Tracks { file, mode } => {
            let m = load_matrix(&file, mode)?;
            let report = m.dominant_tracks();
            println!("weight={}", report.weight);
            println!("unique={}", !report.multiple);
            if !report.exhaustive {
                println!("representative=true");
            }
            for perm in &report.permutations {
                let images: Vec<String> = perm
                    .one_based_images()
                    .iter()
                    .map(|i| i.to_string())
                    .collect();
                println!("perm {}", images.join(" "));
            }
            Ok(None)
        }
        Command::Adjoint { file, mode } => {
            let m = load_matrix(&file, mode)?;
            print!("{}", m.adjoint());
            Ok(None)
        }
        Command::Nabla { file, mode } => {
            let m = load_matrix(&file, mode)?;
            let nabla = m.quasi_inverse(mode.into()).map_err(classify_error)?;
            print!("{nabla}");
            Ok(None)
        }
        Command::Power { file, k, mode } => {
            let m = load_matrix(&file, mode)?;
            print!("{}", m.pow(k));
            Ok(None)
        }
        Command::Star { file, cap, mode } => {
            let m = load_matrix(&file, mode)?;
            let cap = cap.unwrap_or(m.dim() as u32 + 1);
            let star = m.kleene_star(cap).map_err(classify_error)?;
            print!("{star}");
            Ok(None)
        }
        Command::NormalForm { file, mode } => {
            let m = load_matrix(&file, mode)?;
            let nf = normal_form(&m, mode.into()).map_err(classify_error)?;
            println!("n {}", m.dim());
            for factor in &nf.p.factors {
                println!("{factor}");
            }
            println!("abar");
            print!("{}", nf.abar);
            Ok(None)
        }
        Command::Factor { file, output, mode } => {
            let m = load_matrix(&file, mode)?;
            let result = match m.dim() {
                2 => factor_2x2(&m, mode.into()),
                3 => factor_3x3(&m, mode.into()),
                _ if m.triangularity().is_some() => factor_triangular(&m),
                n => {
                    return Err(Failure::Usage(format!(
                        "no decision procedure for general {n}x{n} input; try `factor-star`"
                    )))
                }
            };
            match result {
                Ok(f) => emit_factorization(&f, output.as_deref()),
                Err(Error::NotFactorizable(witness)) => {
                    println!("{witness}");
                    Ok(Some(Negative))
                }
                Err(e) => Err(classify_error(e)),
            }
        }
        Command::FactorStar { file, output, mode } => {
            let m = load_matrix(&file, mode)?;
            let star = factor_star(&m, mode.into()).map_err(classify_error)?;
            emit_factorization(&star.factorization, output.as_deref())
        }
        Command::Verify { file } => {
            let text = fs::read_to_string(&file)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", file.display())))?;
            let base = file.parent().map(Path::to_path_buf).unwrap_or_default();
            let f = parse_factorization(&text, |target_path| {
                let resolved = base.join(target_path);
                fs::read_to_string(&resolved)
                    .map_err(|e| Error::Parse(format!("cannot read {}: {e}", resolved.display())))?
                    .parse()
            })
            .map_err(classify_error)?;
            if f.verify().map_err(classify_error)? {
                println!("verified mode={}", f.mode);
                Ok(None)
            } else {
                println!("verification failed mode={}", f.mode);
                Ok(Some(Negative))
            }
        }
        Command::DetectShift { file, mode } => {
            let m = load_matrix(&file, mode)?;
            match detect_shift_counterexample(&m) {
                Some(witness) => {
                    println!("{witness}");
                    Ok(Some(Negative))
                }
                None => {
                    println!("none");
                    Ok(None)
                }
            }
        }
        Command::EntryConditions { file, mode } => {
            let m = load_matrix(&file, mode)?;
            let conditions = entry_conditions(&m).map_err(classify_error)?;
            println!("relations");
            print!("{}", conditions.render_relations());
            println!("values");
            print!("{}", conditions.values);
            Ok(None)
        }
        Command::Props {
            suite,
            n,
            trials,
            seed,
            density,
            ghost_rate,
        } => {
            let mut cfg = GeneratorConfig::new(n, seed);
            if let Some(d) = density {
                cfg.density = d;
            }
            if let Some(g) = ghost_rate {
                cfg.ghost_rate = g;
            }
            let names: Vec<&str> = if suite == "all" {
                SUITE_NAMES.to_vec()
            } else {
                vec![suite.as_str()]
            };
            let mut all_passed = true;
            for name in names {
                let report: PropertyReport =
                    run_property(name, &cfg, trials).map_err(classify_error)?;
                print!("{report}");
                all_passed &= report.passed();
            }
            if all_passed {
                Ok(None)
            } else {
                Ok(Some(Negative))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(Negative)) => ExitCode::from(1),
        Err(Failure::Math(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
