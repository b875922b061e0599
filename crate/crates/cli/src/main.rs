use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use pgcodes::blocking::{
    baer_cone, baer_subgeometry, bounds, companion_blocking_set, line_profile, linear_blocking_set, max_exponent,
    redei_blocking_set, redei_dual_word, reduce_to_minimal, PointSet,
};
use pgcodes::codes::{incidence_matrix, Code, Codeword, Provenance};
use pgcodes::fplinalg::{FpMatrix, FpVector};
use pgcodes::gfq::Field;
use pgcodes::projgeom::{gaussian_binomial, parse_spread_file, ProjSpace, Spread};
use pgcodes::verify::{companion_subspace, dimension_formula, run_suite, Suite};
use pgcodes::wsearch::{
    code_min_weight, dual_min_weight, gap_scan, hull_min_weight, line_difference, SearchBudget, WeightReport,
};
use pgcodes::Error;

const EXIT_ASSERTION: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_BUDGET: u8 = 3;
const EXIT_IO: u8 = 4;

/// Codes of points and hyperplanes of PG(n,q), blocking sets and their checks.
#[derive(Parser, Debug)]
#[command(name = "pgcodes", version)]
struct Cli {
    /// Worker threads for searches (results do not depend on it).
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Largest number of codewords an enumeration may visit.
    #[arg(long, global = true, default_value_t = 2_000_000)]
    budget: u64,
    /// Largest support size examined by the dual search.
    #[arg(long, global = true, default_value_t = 64)]
    max_support: usize,
    /// Node limit per root of the dual search.
    #[arg(long, global = true, default_value_t = 100_000_000)]
    max_combinations: u64,
    /// Print the JSON report instead of the human-readable summary.
    #[arg(long, global = true)]
    json: bool,
    /// Also write the JSON report to this file.
    #[arg(long, global = true)]
    report: Option<PathBuf>,
    /// Directory for cached incidence matrices, keyed by p, h, n and modulus.
    #[arg(long, global = true, env = "PGCODES_CACHE_DIR")]
    cache_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug, Clone, Copy)]
struct SpaceArgs {
    #[arg(long)]
    p: u32,
    #[arg(long, default_value_t = 1)]
    h: u32,
    #[arg(long, default_value_t = 2)]
    n: usize,
}

#[derive(Args, Debug, Clone, Copy)]
struct OptSpaceArgs {
    #[arg(long)]
    p: Option<u32>,
    #[arg(long)]
    h: Option<u32>,
    #[arg(long)]
    n: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// θ values and point/hyperplane counts of PG(n,q).
    Space(SpaceArgs),
    /// Hyperplane/point incidence matrix.
    Matrix {
        #[command(flatten)]
        space: SpaceArgs,
        /// Write the matrix file here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Dimensions of C, its dual and its hull.
    CodeDim(SpaceArgs),
    /// Minimum weight of C ∩ C⊥ by enumeration.
    Hull(SpaceArgs),
    /// Minimum weight of C by enumeration.
    MinWeight(SpaceArgs),
    /// Minimum weight of the dual code by support search.
    DualMinWeight {
        #[command(flatten)]
        space: SpaceArgs,
        /// Resumable checkpoint file.
        #[arg(long)]
        checkpoint: Option<PathBuf>,
    },
    /// Weights of C strictly between two bounds.
    GapScan {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        lo: usize,
        #[arg(long)]
        hi: usize,
    },
    /// Blocking-set constructions and analyses.
    Blocking {
        #[command(subcommand)]
        command: BlockingCommand,
    },
    /// Run a verification suite.
    Verify {
        suite: SuiteArg,
        #[command(flatten)]
        space: OptSpaceArgs,
    },
    /// Write an object to a file.
    Export {
        object: Object,
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long)]
        out: PathBuf,
        /// Point set or codeword construction.
        #[arg(long, value_enum, default_value_t = Kind::Hyperplane)]
        kind: Kind,
        /// Exponent for Rédei-type constructions.
        #[arg(long, default_value_t = 1)]
        e: u32,
    },
    /// Read an object back, validate it and optionally re-export it.
    Import {
        object: Object,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Subcommand, Debug)]
enum BlockingCommand {
    /// Build a point set.
    Build {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, default_value_t = 1)]
        e: u32,
        /// Vertex dimension of a Baer cone (-1 for none).
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        t: i64,
        /// Dimension of the Baer base of a cone.
        #[arg(long, default_value_t = 2)]
        base_dim: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reduce a blocking set to its essential points.
    Reduce {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Line intersection profile, exponent and size bounds.
    Profile {
        #[arg(long)]
        input: PathBuf,
        /// Modulus E; defaults to p.
        #[arg(long)]
        modulus: Option<u64>,
    },
    /// Companion linear blocking set meeting B(U) in 2 mod p points.
    Companion(SpaceArgs),
    /// Rédei-type blocking set and its dual word.
    Redei {
        #[command(flatten)]
        space: SpaceArgs,
        #[arg(long, default_value_t = 1)]
        e: u32,
        /// Write the codeword file here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Object {
    Matrix,
    Spread,
    Pointset,
    Codeword,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Hyperplane,
    Baer,
    Cone,
    Redei,
    Linear,
    LineDifference,
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
enum SuiteArg {
    Orthogonality,
    Hull,
    Gaps,
    BlockingLemmas,
    Dual,
    The5,
    Table1,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Suite {
        match s {
            SuiteArg::Orthogonality => Suite::Orthogonality,
            SuiteArg::Hull => Suite::Hull,
            SuiteArg::Gaps => Suite::Gaps,
            SuiteArg::BlockingLemmas => Suite::BlockingLemmas,
            SuiteArg::Dual => Suite::Dual,
            SuiteArg::The5 => Suite::The5,
            SuiteArg::Table1 => Suite::Table1,
        }
    }
}

/// Failure with its exit code.
struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Failure {
        let code = match &e {
            Error::BudgetExceeded(_) => EXIT_BUDGET,
            Error::Io(_) => EXIT_IO,
            Error::NonPrime(_)
            | Error::NoModulusKnown(..)
            | Error::ReducibleModulus(_)
            | Error::UnsupportedField(_)
            | Error::DimensionMismatch(_)
            | Error::PreconditionFailed(_)
            | Error::PrimeFieldInput
            | Error::BadExponent { .. }
            | Error::NotSquareOrder(_)
            | Error::WrongDimension { .. }
            | Error::Parse(_) => EXIT_USAGE,
            _ => EXIT_ASSERTION,
        };
        Failure { code, message: e.to_string() }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: EXIT_IO, message: format!("{}: {e}", path.display()) }
}

type Outcome = Result<(Value, String, u8), Failure>;

struct Ctx {
    budget: SearchBudget,
    cache_dir: Option<PathBuf>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut budget = SearchBudget {
        max_enumeration: cli.budget,
        max_support: cli.max_support,
        max_combinations: cli.max_combinations,
        ..SearchBudget::default()
    };
    if let Some(w) = cli.workers {
        budget.workers = w;
    }
    if let Err(e) = budget.validate() {
        eprintln!("error: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    let ctx = Ctx { budget, cache_dir: cli.cache_dir.clone() };
    let start = std::time::Instant::now();
    match run(&ctx, cli.command) {
        Ok((report, human, code)) => {
            let text = serde_json::to_string_pretty(&report).expect("report serializes");
            if cli.json {
                println!("{text}");
            } else if !human.is_empty() {
                print!("{human}");
            }
            if let Some(path) = &cli.report {
                if let Err(e) = fs::write(path, format!("{text}\n")) {
                    let f = io_failure(path, e);
                    eprintln!("error: {}", f.message);
                    return ExitCode::from(f.code);
                }
            }
            eprintln!("runtime_ms: {}", start.elapsed().as_millis());
            ExitCode::from(code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn field(a: &SpaceArgs) -> Result<Arc<Field>, Failure> {
    Ok(Arc::new(Field::new(a.p, a.h)?))
}

fn space(a: &SpaceArgs) -> Result<Arc<ProjSpace>, Failure> {
    Ok(Arc::new(ProjSpace::new(field(a)?, a.n)?))
}

/// Builds C, reading and writing the incidence matrix through the cache.
fn code(ctx: &Ctx, a: &SpaceArgs) -> Result<Code, Failure> {
    let sp = space(a)?;
    let Some(dir) = &ctx.cache_dir else {
        return Ok(Code::from_space(sp)?);
    };
    let key = format!("incidence-{}-{}-{}-{}.txt", a.p, a.h, a.n, sp.field().cache_key());
    let path = dir.join(key);
    if let Ok(text) = fs::read_to_string(&path) {
        if let Ok(m) = FpMatrix::from_file_string(&text) {
            if m == incidence_matrix(&sp) {
                return Ok(Code::with_incidence(sp, m)?);
            }
        }
    }
    let c = Code::from_space(sp)?;
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    fs::write(&path, c.incidence().to_file_string()).map_err(|e| io_failure(&path, e))?;
    Ok(c)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| io_failure(path, e))
}

fn weight_outcome(r: &WeightReport) -> Outcome {
    let min = r.min.map_or("none".to_string(), |m| m.to_string());
    let mut human = format!("{} {}: min = {min}", r.space, r.mode);
    if let Some(c) = r.min_count {
        human += &format!(", {c} minimum words");
    }
    if let Some(s) = r.structure_verified {
        human += &format!(", predicted shape {}", if s { "confirmed" } else { "NOT confirmed" });
    }
    if let Some(p) = &r.present {
        human += &format!(", weights present in interval: {p:?}");
    }
    human += if r.exhaustive { " (exhaustive)\n" } else { " (incomplete)\n" };
    let code = if !r.exhaustive {
        EXIT_BUDGET
    } else if r.structure_verified == Some(false) || r.present.as_ref().is_some_and(|p| !p.is_empty()) {
        EXIT_ASSERTION
    } else {
        0
    };
    Ok((serde_json::to_value(r).expect("report serializes"), human, code))
}

fn run(ctx: &Ctx, cmd: Command) -> Outcome {
    match cmd {
        Command::Space(a) => {
            let sp = space(&a)?;
            let q = sp.q() as u64;
            let thetas = sp.thetas().to_vec();
            let mut human = format!("PG({},{})\n", a.n, q);
            for (m, t) in thetas.iter().enumerate() {
                human += &format!("theta_{m} = {t}\n");
            }
            human += &format!("points = {}\nhyperplanes = {}\n", sp.num_points(), sp.num_points());
            let subspaces: Vec<u64> = (0..=a.n as u32).map(|k| gaussian_binomial(a.n as u32 + 1, k + 1, q)).collect();
            let v = json!({ "p": a.p, "h": a.h, "n": a.n, "q": q, "theta": thetas,
                            "points": sp.num_points(), "hyperplanes": sp.num_points(),
                            "subspaces_by_dimension": subspaces });
            Ok((v, human, 0))
        }
        Command::Matrix { space: a, out } => {
            let c = code(ctx, &a)?;
            let m = c.incidence();
            let weights: Vec<usize> = (0..m.rows()).map(|r| m.row_vector(r).weight()).collect();
            let human = match &out {
                Some(path) => {
                    write(path, &m.to_file_string())?;
                    format!("wrote {}x{} matrix to {}\n", m.rows(), m.cols(), path.display())
                }
                None => m.pretty(),
            };
            Ok((json!({ "rows": m.rows(), "cols": m.cols(), "row_weights": weights }), human, 0))
        }
        Command::CodeDim(a) => {
            let c = code(ctx, &a)?;
            let formula = dimension_formula(a.p, a.h, a.n);
            let hull = c.hull_basis().rows();
            let v = json!({ "length": c.length(), "dim": c.dimension(), "formula": formula,
                            "dual_dim": c.dual_basis().rows(), "hull_dim": hull });
            let human = format!(
                "length {}, dim C = {} (formula {formula}), dim C⊥ = {}, dim hull = {hull}\n",
                c.length(),
                c.dimension(),
                c.dual_basis().rows()
            );
            let code = if c.dimension() as u64 == formula { 0 } else { EXIT_ASSERTION };
            Ok((v, human, code))
        }
        Command::Hull(a) => weight_outcome(&hull_min_weight(&code(ctx, &a)?, &ctx.budget)?),
        Command::MinWeight(a) => weight_outcome(&code_min_weight(&code(ctx, &a)?, &ctx.budget)?),
        Command::DualMinWeight { space: a, checkpoint } => {
            let r = dual_min_weight(field(&a)?, a.n, &ctx.budget, checkpoint.as_deref())?;
            weight_outcome(&r)
        }
        Command::GapScan { space: a, lo, hi } => weight_outcome(&gap_scan(&code(ctx, &a)?, lo, hi, &ctx.budget)?),
        Command::Blocking { command } => blocking(command),
        Command::Verify { suite, space: o } => {
            let suite: Suite = suite.into();
            let (dp, dh, dn) = suite.default_params();
            let r = run_suite(suite, o.p.unwrap_or(dp), o.h.unwrap_or(dh), o.n.unwrap_or(dn), &ctx.budget)?;
            let mut human = format!("{} on {}\n", r.suite, r.space);
            for c in &r.checks {
                human += &format!("{} {}\n", if c.pass { "PASS" } else { "FAIL" }, c.name);
            }
            let code = if !r.complete {
                EXIT_BUDGET
            } else if !r.pass {
                EXIT_ASSERTION
            } else {
                0
            };
            Ok((serde_json::to_value(&r).expect("report serializes"), human, code))
        }
        Command::Export { object, space: a, out, kind, e } => export(ctx, object, &a, &out, kind, e),
        Command::Import { object, input, out } => import(object, &input, out.as_deref()),
    }
}

fn build_pointset(a: &SpaceArgs, kind: Kind, e: u32, t: i64, base_dim: usize) -> Result<PointSet, Failure> {
    let sp = space(a)?;
    Ok(match kind {
        Kind::Hyperplane => PointSet::new(sp.clone(), sp.hyperplane_points()[0].clone())?,
        Kind::Baer => baer_subgeometry(sp)?,
        Kind::Cone => baer_cone(sp, t, base_dim)?,
        Kind::Redei => redei_blocking_set(sp, e)?.0,
        Kind::Linear => {
            let spread = Spread::field_reduce(sp)?;
            linear_blocking_set(&companion_subspace(&spread)?, &spread)?
        }
        Kind::LineDifference => {
            return Err(Failure { code: EXIT_USAGE, message: "line-difference is a codeword".into() })
        }
    })
}

fn load_pointset(path: &Path) -> Result<PointSet, Failure> {
    let text = read(path)?;
    let header: Vec<usize> = text
        .lines()
        .next()
        .unwrap_or("")
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| Failure { code: EXIT_USAGE, message: "bad header".into() }))
        .collect::<Result<_, _>>()?;
    if header.len() != 4 {
        return Err(Failure { code: EXIT_USAGE, message: "point set header must be \"p h n count\"".into() });
    }
    let sp = space(&SpaceArgs { p: header[0] as u32, h: header[1] as u32, n: header[2] })?;
    Ok(PointSet::from_file_string(sp, &text)?)
}

fn pointset_summary(b: &PointSet) -> Value {
    json!({ "size": b.len(), "blocking": b.is_blocking(), "minimal": b.is_minimal(),
            "hyperplane": b.is_hyperplane(), "members": b.members() })
}

fn blocking(cmd: BlockingCommand) -> Outcome {
    match cmd {
        BlockingCommand::Build { space: a, kind, e, t, base_dim, out } => {
            let b = build_pointset(&a, kind, e, t, base_dim)?;
            let human = match &out {
                Some(path) => {
                    write(path, &b.to_file_string())?;
                    format!("wrote {} points to {}\n", b.len(), path.display())
                }
                None => b.to_file_string(),
            };
            Ok((pointset_summary(&b), human, 0))
        }
        BlockingCommand::Reduce { input, out } => {
            let b = load_pointset(&input)?;
            let r = reduce_to_minimal(&b)?;
            if let Some(path) = &out {
                write(path, &r.set.to_file_string())?;
            }
            let human = format!("{} -> {} points (unique: {})\n", b.len(), r.set.len(), r.uniqueness_guaranteed);
            let v = json!({ "input_size": b.len(), "reduced": pointset_summary(&r.set),
                            "uniqueness_guaranteed": r.uniqueness_guaranteed });
            Ok((v, human, 0))
        }
        BlockingCommand::Profile { input, modulus } => {
            let b = load_pointset(&input)?;
            let sp = b.space();
            let e_mod = modulus.unwrap_or(sp.p() as u64);
            let prof = line_profile(&b, e_mod)?;
            let exp = max_exponent(&b).ok();
            let bd = exp.as_ref().and_then(|x| bounds(sp.q() as u64, sp.n() as u32, x.e).ok());
            let human = format!(
                "|B| = {}, line sizes {:?}, 1 mod {e_mod}: {}, identities exact: {}\n",
                b.len(),
                prof.histogram,
                prof.one_mod_e,
                prof.identities_hold()
            );
            let v = json!({ "profile": prof, "exponent": exp, "bounds": bd });
            Ok((v, human, 0))
        }
        BlockingCommand::Companion(a) => {
            let sp = space(&a)?;
            let spread = Spread::field_reduce(sp)?;
            let u = companion_subspace(&spread)?;
            let b = linear_blocking_set(&u, &spread)?;
            let comp = companion_blocking_set(&u, &spread)?;
            let human = format!(
                "|B| = {}, |B'| = {}, |B ∩ B'| = {} (mod {} = {}), rejected choices: {}\n",
                b.len(),
                comp.b_prime.len(),
                comp.intersection_size,
                comp.p,
                comp.intersection_size % comp.p as usize,
                comp.rejected_choices
            );
            let v = json!({ "b": b.members(), "companion": comp });
            Ok((v, human, 0))
        }
        BlockingCommand::Redei { space: a, e, out } => {
            let sp = space(&SpaceArgs { n: 2, ..a })?;
            let (b, line) = redei_blocking_set(sp, e)?;
            let w = redei_dual_word(&b, line)?;
            if let Some(path) = &out {
                write_codeword(path, &w)?;
            }
            let human = format!("|B| = {}, dual word weight {}\n", b.len(), w.weight());
            let v = json!({ "set": b.members(), "line": line, "weight": w.weight(),
                            "word": w.vector.digit_string(), "provenance": w.provenance });
            Ok((v, human, 0))
        }
    }
}

fn write_codeword(path: &Path, w: &Codeword) -> Result<(), Failure> {
    let (word, prov) = w.to_files();
    write(path, &word)?;
    write(&provenance_path(path), &format!("{prov}\n"))
}

fn provenance_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".provenance.json");
    PathBuf::from(s)
}

fn export(ctx: &Ctx, object: Object, a: &SpaceArgs, out: &Path, kind: Kind, e: u32) -> Outcome {
    let (v, text) = match object {
        Object::Matrix => {
            let c = code(ctx, a)?;
            let m = c.incidence();
            let weights: Vec<usize> = (0..m.rows()).map(|r| m.row_vector(r).weight()).collect();
            (json!({ "rows": m.rows(), "cols": m.cols(), "row_weights": weights }), m.to_file_string())
        }
        Object::Spread => {
            let spread = Spread::field_reduce(space(a)?)?;
            (json!({ "elements": spread.len(), "ambient_dim": spread.ambient().n() }), spread.to_file_string())
        }
        Object::Pointset => {
            let b = build_pointset(a, kind, e, -1, 2)?;
            (pointset_summary(&b), b.to_file_string())
        }
        Object::Codeword => {
            let w = match kind {
                Kind::Hyperplane => code(ctx, a)?.word_from_hyperplanes(&[(0, 1)])?,
                Kind::LineDifference => {
                    let plane = space(&SpaceArgs { n: 2, ..*a })?;
                    Codeword::new(
                        line_difference(&plane),
                        Provenance::Difference { description: "line 0 minus line 1".into() },
                    )
                }
                Kind::Redei => {
                    let (b, line) = redei_blocking_set(space(&SpaceArgs { n: 2, ..*a })?, e)?;
                    redei_dual_word(&b, line)?
                }
                _ => {
                    return Err(Failure {
                        code: EXIT_USAGE,
                        message: "codewords: hyperplane, line-difference or redei".into(),
                    })
                }
            };
            write_codeword(out, &w)?;
            let v = json!({ "length": w.vector.len(), "weight": w.weight(), "provenance": w.provenance });
            return Ok((v, format!("wrote codeword of weight {} to {}\n", w.weight(), out.display()), 0));
        }
    };
    write(out, &text)?;
    Ok((v, format!("wrote {}\n", out.display()), 0))
}

fn import(object: Object, input: &Path, out: Option<&Path>) -> Outcome {
    let text = read(input)?;
    let (v, again) = match object {
        Object::Matrix => {
            let m = FpMatrix::from_file_string(&text)?;
            let weights: Vec<usize> = (0..m.rows()).map(|r| m.row_vector(r).weight()).collect();
            (
                json!({ "rows": m.rows(), "cols": m.cols(), "rank": m.rank(), "row_weights": weights }),
                m.to_file_string(),
            )
        }
        Object::Spread => {
            let (header, elements) = parse_spread_file(&text)?;
            let sp = space(&SpaceArgs { p: header[0] as u32, h: header[1] as u32, n: header[2] })?;
            let spread = Spread::field_reduce(sp)?;
            spread.check_file(&text)?;
            (json!({ "elements": elements.len() }), spread.to_file_string())
        }
        Object::Pointset => {
            let b = load_pointset(input)?;
            (pointset_summary(&b), b.to_file_string())
        }
        Object::Codeword => {
            let vector = FpVector::from_file_string(&text)?;
            let prov_path = provenance_path(input);
            let mut v = json!({ "length": vector.len(), "weight": vector.weight() });
            if let Ok(prov) = fs::read_to_string(&prov_path) {
                let w = Codeword::from_files(&text, &prov)?;
                v["provenance"] = serde_json::to_value(&w.provenance).expect("provenance serializes");
                if let Some(o) = out {
                    write(&provenance_path(o), &prov)?;
                }
            }
            (v, vector.to_file_string())
        }
    };
    let mut human = format!("{} ok\n", input.display());
    if let Some(o) = out {
        write(o, &again)?;
        human += &format!("wrote {}\n", o.display());
    }
    Ok((v, human, 0))
}
