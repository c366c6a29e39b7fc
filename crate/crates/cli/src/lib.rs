//! Command-line front end. Every command parses its inputs, calls into
//! `fostat_core` and prints the result, either as text or (with `--json`)
//! as JSON lines.
//!
//! Exit codes: 0 on success, 1 when an input file, formula or argument
//! value is rejected by the library, 2 on malformed command lines.

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use fostat_core::analysis::{
    break_cover, convergence_report, dispersion_profile, parse_rational, pseudo_distance,
    residual_index, split_by_centers,
};
use fostat_core::eval::{Assignment, EvalOptions, Evaluator, DEFAULT_MAX_WORK};
use fostat_core::forest::{check_fmtp, check_smtp, skeleton_decompose};
use fostat_core::generators::{generate, Family};
use fostat_core::interpret::{verify_pairing_identity, BasicScheme};
use fostat_core::syntax::{parse_with_signature, Formula};
use fostat_core::{Fraction, Structure, VertexSet};
use num_rational::BigRational;
use serde_json::{json, Map, Value};

#[derive(Debug, Parser)]
#[command(name = "fostat", version, about = "Exact first-order statistics for finite structures")]
pub struct Cli {
    /// Worker threads (falls back to FOSTAT_THREADS, then all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Cap on n^(|Fv|+qrank) per evaluation; 0 disables the cap.
    #[arg(long, global = true)]
    pub max_work: Option<u128>,
    /// Emit JSON lines instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Truth value of a formula under an assignment.
    Eval(EvalArgs),
    /// Stone pairings of one or more formulas.
    Pairing(PairingArgs),
    /// Catalog approximation of the pairing pseudometric.
    Dist(DistArgs),
    /// Greedy cover by heavy, disjoint balls.
    Break(BreakArgs),
    /// Cut induced balls around centers.
    Split(SplitArgs),
    /// Largest relative r-ball.
    Residual(ResidualArgs),
    /// Relative ball sizes around a root.
    Profile(ProfileArgs),
    /// Apply an interpretation scheme.
    Interpret(InterpretArgs),
    /// Rewrite a formula through a scheme.
    Rewrite(RewriteArgs),
    /// Finitary mass transport check for definable sets.
    Fmtp(FmtpArgs),
    /// Mass transport check for explicit vertex sets.
    Smtp(SmtpArgs),
    /// Skeleton decomposition of a rooted tree.
    Skeleton(SkeletonArgs),
    /// Generate a structure from a family.
    Gen(GenArgs),
    /// Pairing and residual trajectories along a family.
    Converge(ConvergeArgs),
}

#[derive(Debug, Args)]
pub struct StructureArg {
    /// Structure file, or `-` for stdin.
    #[arg(long, short = 's')]
    pub structure: PathBuf,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    #[command(flatten)]
    pub input: StructureArg,
    #[arg(long, short = 'f')]
    pub formula: String,
    /// Assignments `i=v`, comma separated (x_i gets vertex v).
    #[arg(long, default_value = "")]
    pub assign: String,
}

#[derive(Debug, Args)]
pub struct PairingArgs {
    #[command(flatten)]
    pub input: StructureArg,
    /// Formula; may be repeated.
    #[arg(long, short = 'f')]
    pub formula: Vec<String>,
    /// File with one formula per line (blank lines and `#` comments skipped).
    #[arg(long)]
    pub catalog: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct DistArgs {
    #[arg(long)]
    pub left: PathBuf,
    #[arg(long)]
    pub right: PathBuf,
    #[arg(long, default_value_t = 2)]
    pub n_max: u32,
    #[arg(long, default_value_t = 2000)]
    pub budget: usize,
}

#[derive(Debug, Args)]
pub struct BreakArgs {
    #[command(flatten)]
    pub input: StructureArg,
    /// Rational `a/b` or integer.
    #[arg(long)]
    pub eps: String,
    #[arg(long)]
    pub r: usize,
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[command(flatten)]
    pub input: StructureArg,
    /// Comma separated center vertices.
    #[arg(long, default_value = "")]
    pub centers: String,
    #[arg(long)]
    pub d: usize,
    /// Directory receiving `part_<i>.json` and `residue.json`.
    #[arg(long)]
    pub out_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ResidualArgs {
    #[command(flatten)]
    pub input: StructureArg,
    #[arg(long)]
    pub r: usize,
}

#[derive(Debug, Args)]
pub struct ProfileArgs {
    #[command(flatten)]
    pub input: StructureArg,
    #[arg(long)]
    pub root: usize,
    #[arg(long)]
    pub d_max: usize,
}

#[derive(Debug, Args)]
pub struct SchemeArg {
    /// Scheme file, or one of `builtin:y_to_f`, `builtin:f_to_y`,
    /// `builtin:complement`.
    #[arg(long)]
    pub scheme: String,
}

#[derive(Debug, Args)]
pub struct InterpretArgs {
    #[command(flatten)]
    pub scheme: SchemeArg,
    #[command(flatten)]
    pub input: StructureArg,
    /// Output file, `-` for stdout.
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
    /// Also check the pairing identity for this target formula.
    #[arg(long)]
    pub check: Option<String>,
}

#[derive(Debug, Args)]
pub struct RewriteArgs {
    #[command(flatten)]
    pub scheme: SchemeArg,
    #[arg(long, short = 'f')]
    pub formula: String,
}

#[derive(Debug, Args)]
pub struct FmtpArgs {
    #[command(flatten)]
    pub input: StructureArg,
    #[arg(long)]
    pub phi: String,
    #[arg(long)]
    pub psi: String,
    #[arg(long)]
    pub a: usize,
    #[arg(long)]
    pub b: usize,
}

#[derive(Debug, Args)]
pub struct SmtpArgs {
    #[command(flatten)]
    pub input: StructureArg,
    /// Comma separated vertices of X.
    #[arg(long, default_value = "")]
    pub x: String,
    /// Comma separated vertices of Y.
    #[arg(long, default_value = "")]
    pub y: String,
    #[arg(long)]
    pub a: usize,
    #[arg(long)]
    pub b: usize,
}

#[derive(Debug, Args)]
pub struct SkeletonArgs {
    #[command(flatten)]
    pub input: StructureArg,
    #[arg(long)]
    pub eps: String,
    #[arg(long, default_value_t = 8)]
    pub max_depth: usize,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(long)]
    pub family: String,
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub m: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long)]
    pub branching: Option<usize>,
    #[arg(long)]
    pub height: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = "-")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[arg(long)]
    pub family: String,
    /// `lo..hi:step` or a comma separated list.
    #[arg(long)]
    pub grid: String,
    #[arg(long, short = 'f')]
    pub formula: Vec<String>,
    /// Radii for residual trajectories; may be repeated.
    #[arg(long)]
    pub radius: Vec<usize>,
    #[arg(long, default_value_t = 3)]
    pub window: usize,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Failure of a command, mapped to an exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Domain(String),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Usage(_) => 2,
            Failure::Domain(_) => 1,
        }
    }
}

impl From<fostat_core::Error> for Failure {
    fn from(e: fostat_core::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Domain(e.to_string())
    }
}

type Outcome = Result<(), Failure>;

/// Parses `argv` (including the program name) and runs the command.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 {
                write!(out, "{text}")
            } else {
                write!(err, "{text}")
            };
            return code;
        }
    };
    let threads = match cli.threads {
        Some(t) => Some(t),
        None => match std::env::var("FOSTAT_THREADS") {
            Ok(v) if !v.trim().is_empty() => match v.trim().parse() {
                Ok(t) => Some(t),
                Err(_) => {
                    let _ = writeln!(err, "error: FOSTAT_THREADS must be a positive integer, got `{v}`");
                    return 2;
                }
            },
            _ => None,
        },
    };
    if threads == Some(0) {
        let _ = writeln!(err, "error: thread count must be positive");
        return 2;
    }
    // Output is buffered so the command can run inside a sized pool.
    let mut buf = Vec::new();
    let result = match threads {
        Some(t) => match rayon::ThreadPoolBuilder::new().num_threads(t).build() {
            Ok(pool) => pool.install(|| dispatch(&cli, &mut buf)),
            Err(e) => Err(Failure::Domain(e.to_string())),
        },
        None => dispatch(&cli, &mut buf),
    };
    if let Err(e) = out.write_all(&buf).and_then(|_| out.flush()) {
        let _ = writeln!(err, "error: {e}");
        return 1;
    }
    match result {
        Ok(()) => 0,
        Err(f) => {
            let msg = match &f {
                Failure::Usage(m) | Failure::Domain(m) => m,
            };
            let _ = writeln!(err, "error: {msg}");
            f.code()
        }
    }
}

fn options(cli: &Cli) -> EvalOptions {
    EvalOptions {
        max_work: match cli.max_work {
            Some(0) => None,
            Some(w) => Some(w),
            None => Some(DEFAULT_MAX_WORK),
        },
        ..EvalOptions::default()
    }
}

fn read_input(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut text = String::new();
        io::stdin().read_to_string(&mut text)?;
        Ok(text)
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
    }
}

fn write_output(path: &Path, text: &str, out: &mut dyn Write) -> Outcome {
    if path.as_os_str() == "-" {
        out.write_all(text.as_bytes())?;
        Ok(())
    } else {
        fs::write(path, text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
    }
}

fn load_structure(path: &Path) -> Result<Structure, Failure> {
    let text = read_input(path)?;
    Structure::from_json_str(&text).map_err(|e| Failure::Domain(format!("{}: {e}", path.display())))
}

fn parse_formula(text: &str, s: &Structure) -> Result<Formula, Failure> {
    parse_with_signature(text, s.signature())
        .map_err(|e| Failure::Domain(format!("formula `{text}`: {e}")))
}

fn parse_eps(text: &str) -> Result<BigRational, Failure> {
    parse_rational(text).map_err(|e| Failure::Usage(format!("--eps: {e}")))
}

fn parse_list(flag: &str, text: &str) -> Result<Vec<usize>, Failure> {
    text.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse()
                .map_err(|_| Failure::Usage(format!("{flag}: expected comma separated vertices, got `{t}`")))
        })
        .collect()
}

fn show(f: &Fraction) -> String {
    format!("{} {}", f, f.to_decimal(12))
}

fn record(command: &str, fields: Vec<(&str, Value)>) -> Map<String, Value> {
    let mut map = Map::new();
    map.insert("command".into(), json!(command));
    for (k, v) in fields {
        map.insert(k.into(), v);
    }
    map
}

fn emit(out: &mut dyn Write, mut rec: Map<String, Value>, value: Option<&Fraction>) -> Outcome {
    if let Some(f) = value {
        if let Value::Object(v) = f.to_json() {
            rec.extend(v);
        }
    }
    writeln!(out, "{}", Value::Object(rec))?;
    Ok(())
}

fn dispatch(cli: &Cli, out: &mut Vec<u8>) -> Outcome {
    let json = cli.json;
    match &cli.command {
        Command::Eval(a) => {
            let s = load_structure(&a.input.structure)?;
            let f = parse_formula(&a.formula, &s)?;
            let mut asg = Assignment::new();
            for part in a.assign.split(',').map(str::trim).filter(|p| !p.is_empty()) {
                let (var, v) = part
                    .split_once('=')
                    .and_then(|(x, v)| {
                        let x = x.trim().trim_start_matches('x');
                        Some((x.parse::<u32>().ok()?, v.trim().parse::<usize>().ok()?))
                    })
                    .ok_or_else(|| Failure::Usage(format!("--assign: expected `i=v`, got `{part}`")))?;
                asg = asg.with(var, v);
            }
            let value = Evaluator::with_options(&s, options(cli)).satisfies(&f, &asg)?;
            if json {
                emit(out, record("eval", vec![("formula", json!(f.to_string())), ("value", json!(value))]), None)
            } else {
                writeln!(out, "{value}")?;
                Ok(())
            }
        }
        Command::Pairing(a) => {
            let s = load_structure(&a.input.structure)?;
            let mut texts = a.formula.clone();
            if let Some(path) = &a.catalog {
                let body = read_input(path)?;
                texts.extend(
                    body.lines()
                        .map(str::trim)
                        .filter(|l| !l.is_empty() && !l.starts_with('#'))
                        .map(String::from),
                );
            }
            if texts.is_empty() {
                return Err(Failure::Usage("pairing needs --formula or --catalog".into()));
            }
            let formulas = texts.iter().map(|t| parse_formula(t, &s)).collect::<Result<Vec<_>, _>>()?;
            let eval = Evaluator::with_options(&s, options(cli));
            for (f, value) in eval.pairing_vector(&formulas)? {
                if json {
                    emit(out, record("pairing", vec![("formula", json!(f.to_string()))]), Some(&value))?;
                } else if formulas.len() == 1 {
                    writeln!(out, "{}", show(&value))?;
                } else {
                    writeln!(out, "{}\t{}", show(&value), f)?;
                }
            }
            Ok(())
        }
        Command::Dist(a) => {
            let l = load_structure(&a.left)?;
            let r = load_structure(&a.right)?;
            let d = pseudo_distance(&l, &r, a.n_max, a.budget)?;
            let witness = d.witness.as_ref().map(|(f, _)| f.to_string());
            if json {
                emit(
                    out,
                    record(
                        "dist",
                        vec![
                            ("level", json!(d.level)),
                            ("catalog_size", json!(d.catalog_size)),
                            ("witness", json!(witness)),
                        ],
                    ),
                    Some(&d.value),
                )
            } else {
                writeln!(out, "{}", show(&d.value))?;
                writeln!(out, "level {} (catalog of {} formulas)", d.level, d.catalog_size)?;
                if let Some(w) = witness {
                    writeln!(out, "witness {w}")?;
                }
                Ok(())
            }
        }
        Command::Break(a) => {
            let eps = parse_eps(&a.eps)?;
            let s = load_structure(&a.input.structure)?;
            let b = break_cover(&s, &eps, a.r)?;
            let checks = b.check(&s);
            let status = if checks.all() { "ok" } else { "violated" };
            if json {
                emit(
                    out,
                    record(
                        "break",
                        vec![
                            ("centers", json!(b.centers)),
                            ("cover", json!(b.cover.as_slice())),
                            ("invariants", json!(status)),
                        ],
                    ),
                    None,
                )
            } else {
                writeln!(out, "centers {}", list(&b.centers))?;
                writeln!(out, "cover {}", b.cover)?;
                writeln!(out, "invariants {status}")?;
                Ok(())
            }
        }
        Command::Split(a) => {
            let centers = parse_list("--centers", &a.centers)?;
            let s = load_structure(&a.input.structure)?;
            let split = split_by_centers(&s, &centers, a.d)?;
            if let Some(dir) = &a.out_dir {
                fs::create_dir_all(dir)?;
                for (i, p) in split.parts.iter().enumerate() {
                    fs::write(dir.join(format!("part_{i}.json")), p.structure.to_json_string())?;
                }
                fs::write(dir.join("residue.json"), split.residue.to_json_string())?;
            }
            if json {
                for p in &split.parts {
                    emit(
                        out,
                        record("split", vec![("center", json!(p.center)), ("vertices", json!(p.vertices))]),
                        None,
                    )?;
                }
                emit(out, record("split", vec![("residue", json!(split.residue_vertices))]), None)
            } else {
                for p in &split.parts {
                    writeln!(out, "part center {} vertices {}", p.center, list(&p.vertices))?;
                }
                writeln!(out, "residue {}", list(&split.residue_vertices))?;
                writeln!(out, "mark {}", split.mark)?;
                Ok(())
            }
        }
        Command::Residual(a) => {
            let s = load_structure(&a.input.structure)?;
            let v = residual_index(&s, a.r)?;
            if json {
                emit(out, record("residual", vec![("r", json!(a.r))]), Some(&v))
            } else {
                writeln!(out, "{}", show(&v))?;
                Ok(())
            }
        }
        Command::Profile(a) => {
            let s = load_structure(&a.input.structure)?;
            let values = dispersion_profile(&s, a.root, a.d_max)?;
            for (d, v) in values.iter().enumerate() {
                if json {
                    emit(out, record("profile", vec![("d", json!(d))]), Some(v))?;
                } else {
                    writeln!(out, "{d}\t{}", show(v))?;
                }
            }
            Ok(())
        }
        Command::Interpret(a) => {
            let scheme = load_scheme(&a.scheme.scheme)?;
            let s = load_structure(&a.input.structure)?;
            let t = scheme.apply_with(&s, &options(cli))?;
            if let Some(text) = &a.check {
                let f = parse_with_signature(text, scheme.target())
                    .map_err(|e| Failure::Domain(format!("formula `{text}`: {e}")))?;
                let rep = verify_pairing_identity(&scheme, &s, &f)?;
                let rec = record(
                    "interpret",
                    vec![
                        ("formula", json!(f.to_string())),
                        ("rewritten", json!(rep.rewritten.to_string())),
                        ("lhs", rep.lhs.to_json()),
                        ("rhs", rep.rhs.to_json()),
                        ("equal", json!(rep.equal)),
                    ],
                );
                if json {
                    emit(out, rec, None)?;
                } else {
                    writeln!(out, "lhs {}", show(&rep.lhs))?;
                    writeln!(out, "rhs {}", show(&rep.rhs))?;
                    writeln!(out, "identity {}", if rep.equal { "holds" } else { "fails" })?;
                }
            }
            write_output(&a.out, &t.to_json_string(), out)
        }
        Command::Rewrite(a) => {
            let scheme = load_scheme(&a.scheme.scheme)?;
            let f = parse_with_signature(&a.formula, scheme.target())
                .map_err(|e| Failure::Domain(format!("formula `{}`: {e}", a.formula)))?;
            let r = scheme.rewrite(&f)?;
            if json {
                emit(out, record("rewrite", vec![("formula", json!(f.to_string())), ("rewritten", json!(r.to_string()))]), None)
            } else {
                writeln!(out, "{r}")?;
                Ok(())
            }
        }
        Command::Fmtp(a) => {
            let s = load_structure(&a.input.structure)?;
            let phi = parse_formula(&a.phi, &s)?;
            let psi = parse_formula(&a.psi, &s)?;
            let r = check_fmtp(&s, &phi, &psi, a.a, a.b)?;
            let fields = vec![
                ("premise1", json!(r.premise1)),
                ("premise2", json!(r.premise2)),
                ("conclusion", json!(r.conclusion)),
                ("vacuous", json!(r.vacuous)),
                ("phi_count", json!(r.phi_count)),
                ("psi_count", json!(r.psi_count)),
                ("phi_to_psi", json!(r.phi_to_psi)),
                ("psi_to_phi", json!(r.psi_to_phi)),
            ];
            report(out, json, "fmtp", fields)
        }
        Command::Smtp(a) => {
            let s = load_structure(&a.input.structure)?;
            let x: VertexSet = parse_list("--x", &a.x)?.into_iter().collect();
            let y: VertexSet = parse_list("--y", &a.y)?.into_iter().collect();
            let r = check_smtp(&s, &x, &y, a.a, a.b)?;
            let fields = vec![
                ("premise1", json!(r.premise1)),
                ("premise2", json!(r.premise2)),
                ("conclusion", json!(r.conclusion)),
                ("vacuous", json!(r.vacuous)),
                ("min_y_neighbors", json!(r.min_y_neighbors)),
                ("max_x_neighbors", json!(r.max_x_neighbors)),
                ("edge_count", json!(r.edge_count)),
            ];
            report(out, json, "smtp", fields)
        }
        Command::Skeleton(a) => {
            let eps = parse_eps(&a.eps)?;
            let s = load_structure(&a.input.structure)?;
            let sk = skeleton_decompose(&s, &eps, a.max_depth)?;
            writeln!(out, "{}", sk.to_json())?;
            Ok(())
        }
        Command::Gen(a) => {
            let params: Vec<usize> = match a.family.as_str() {
                "path" | "random_tree" => vec![need("--n", a.n)?],
                "star" => vec![need("--m", a.m.or(a.n))?],
                "star_of_stars" | "path_of_stars" => vec![need("--k", a.k)?, need("--m", a.m)?],
                "balanced_tree" => vec![need("--branching", a.branching)?, need("--height", a.height)?],
                other => {
                    return Err(Failure::Usage(format!(
                        "unknown family `{other}` (expected one of {})",
                        Family::NAMES.join(", ")
                    )))
                }
            };
            let family = Family::from_parts(&a.family, &params, a.seed)
                .map_err(|e| Failure::Usage(e.to_string()))?;
            write_output(&a.out, &generate(&family).to_json_string(), out)
        }
        Command::Converge(a) => {
            let grid = parse_grid(&a.grid)?;
            if a.formula.is_empty() && a.radius.is_empty() {
                return Err(Failure::Usage("converge needs --formula or --radius".into()));
            }
            let first = *grid.first().ok_or_else(|| Failure::Usage("--grid is empty".into()))?;
            let probe = generate(
                &Family::scaled(&a.family, first, a.seed).map_err(|e| Failure::Usage(e.to_string()))?,
            );
            let catalog = a
                .formula
                .iter()
                .map(|t| parse_formula(t, &probe))
                .collect::<Result<Vec<_>, _>>()?;
            let rep = convergence_report(
                |g| Ok(generate(&Family::scaled(&a.family, g, a.seed)?)),
                &grid,
                &catalog,
                &a.radius,
                a.window,
                &options(cli),
            )?;
            if json {
                for line in rep.to_json_lines() {
                    writeln!(out, "{line}")?;
                }
            } else {
                for t in &rep.trajectories {
                    writeln!(out, "formula {}", t.formula)?;
                    for (g, v) in rep.grid.iter().zip(&t.values) {
                        writeln!(out, "  {g}\t{}", show(v))?;
                    }
                    writeln!(out, "  tail {}", t.cauchy_tail)?;
                }
                for rt in &rep.residual {
                    writeln!(out, "residual r={}", rt.r)?;
                    for (g, v) in rep.grid.iter().zip(&rt.values) {
                        writeln!(out, "  {g}\t{}", show(v))?;
                    }
                }
            }
            Ok(())
        }
    }
}

fn list(vs: &[usize]) -> String {
    let parts: Vec<String> = vs.iter().map(usize::to_string).collect();
    format!("[{}]", parts.join(","))
}

fn need(flag: &str, v: Option<usize>) -> Result<usize, Failure> {
    v.ok_or_else(|| Failure::Usage(format!("{flag} is required for this family")))
}

fn report(out: &mut dyn Write, json: bool, command: &str, fields: Vec<(&str, Value)>) -> Outcome {
    if json {
        return emit(out, record(command, fields), None);
    }
    for (k, v) in fields {
        writeln!(out, "{k} {v}")?;
    }
    Ok(())
}

fn parse_grid(text: &str) -> Result<Vec<usize>, Failure> {
    let bad = || Failure::Usage(format!("--grid: expected `lo..hi:step` or a list, got `{text}`"));
    if let Some((range, step)) = text.split_once(':') {
        let (lo, hi) = range.split_once("..").ok_or_else(bad)?;
        let lo: usize = lo.trim().parse().map_err(|_| bad())?;
        let hi: usize = hi.trim().parse().map_err(|_| bad())?;
        let step: usize = step.trim().parse().map_err(|_| bad())?;
        if step == 0 || lo > hi {
            return Err(bad());
        }
        Ok((lo..=hi).step_by(step).collect())
    } else {
        parse_list("--grid", text)
    }
}

fn load_scheme(spec: &str) -> Result<BasicScheme, Failure> {
    match spec {
        "builtin:y_to_f" => Ok(BasicScheme::y_to_f()),
        "builtin:f_to_y" => Ok(BasicScheme::f_to_y()),
        "builtin:complement" => Ok(BasicScheme::complement()),
        path => {
            let text = read_input(Path::new(path))?;
            BasicScheme::from_json_str(&text).map_err(|e| Failure::Domain(format!("{path}: {e}")))
        }
    }
}
