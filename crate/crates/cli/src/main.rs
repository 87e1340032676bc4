use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use ballmap::existence::{self, ExistenceResult, Outcome};
use ballmap::form::RANK_TOL;
use ballmap::lambda::{self, SolverOptions};
use ballmap::mapfile::terms_of;
use ballmap::normal_form::{self, NormalForm};
use ballmap::polyclass::{self, Model};
use ballmap::rational::{self, ValidationOptions};
use ballmap::{Error, Exec, HermForm, MapFile, RationalBallMap, C64};
use clap::{Parser, Subcommand};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

#[derive(Parser, Debug)]
#[command(
    name = "ballmap",
    version,
    about = "Normal forms and invariants of rational proper maps between balls"
)]
struct Cli {
    /// Gradient tolerance for the critical point solver.
    #[arg(long, global = true, env = "BALLMAP_TOL", default_value_t = 1e-10)]
    tol: f64,
    /// Quasi-random sphere samples per source dimension.
    #[arg(long, global = true, default_value_t = 1000)]
    samples: usize,
    /// Offset into the sample sequence.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Print the report as JSON.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check that a map file describes a proper map of the ball.
    Validate { map: PathBuf },
    /// Evaluate the exhaustion function and its derivatives at a point.
    Lambda {
        map: PathBuf,
        /// Comma-separated coordinates, e.g. `0.1+0.2i,-0.3`.
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        at: Vec<String>,
    },
    /// Locate the minimum of the exhaustion function.
    CriticalPoint { map: PathBuf },
    /// Compute the normal form.
    Normalize {
        map: PathBuf,
        /// Write the normalized map here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the spherical invariants.
    Invariants { map: PathBuf },
    /// Decide whether two maps are spherically equivalent.
    Equivalent { a: PathBuf, b: PathBuf },
    /// Classify up to target automorphism as a polynomial map into a model.
    Classify { map: PathBuf },
    /// Build a degree-3 map with prescribed invariants.
    Construct3 {
        #[arg(long, value_delimiter = ',', required = true, allow_hyphen_values = true)]
        sigma: Vec<f64>,
        /// Search the admissible family instead of using the fixed construction.
        #[arg(long)]
        search: bool,
        #[arg(long, default_value_t = 50_000)]
        max_iter: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Usage(String),
    Domain(Value),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Domain(json!({
            "kind": e.kind(),
            "module": e.module(),
            "message": e.to_string(),
            "residual": e.residual(),
        }))
    }
}

struct Ctx {
    tol: f64,
    validation: ValidationOptions,
    inputs: Vec<Value>,
}

impl Ctx {
    fn solver(&self) -> SolverOptions {
        SolverOptions {
            tol: self.tol,
            ..Default::default()
        }
    }

    /// Reads, parses and validates a map file.
    fn load(&mut self, path: &Path) -> Result<RationalBallMap, Failure> {
        let bytes = std::fs::read(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        self.inputs.push(json!({
            "path": path.display().to_string(),
            "sha256": hex::encode(Sha256::digest(&bytes)),
        }));
        let text = String::from_utf8(bytes).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let file = MapFile::from_json(&text).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
        let f = file.to_map()?;
        rational::validate(&f, &self.validation)?;
        Ok(f)
    }
}

fn complex_list(v: &[C64]) -> Value {
    json!(v.iter().map(|c| [c.re, c.im]).collect::<Vec<_>>())
}

fn parse_point(args: &[String]) -> Result<Vec<C64>, Failure> {
    args.iter()
        .map(|s| {
            s.trim()
                .parse::<C64>()
                .map_err(|_| Failure::Usage(format!("cannot parse coordinate `{s}`")))
        })
        .collect()
}

fn write_map(path: &Path, f: &RationalBallMap, name: &str) -> Result<(), Failure> {
    let file = MapFile::from_map(f, Some(name.into()));
    std::fs::write(path, file.to_json() + "\n").map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))
}

fn normal_form_json(nf: &NormalForm) -> Result<Value, Failure> {
    let map = nf.map()?;
    Ok(json!({
        "sigma": nf.sigma,
        "alpha": complex_list(&nf.alpha),
        "degree": nf.degree,
        "residuals": nf.residuals,
        "map": MapFile::from_map(&map, None),
    }))
}

fn existence_json(res: &ExistenceResult) -> Value {
    let mut v = serde_json::to_value(res).expect("existence results serialize");
    if let Some(f) = res.map() {
        v["map"] = json!(MapFile::from_map(&f, None));
    }
    v
}

fn run(cmd: &Command, ctx: &mut Ctx) -> Result<Value, Failure> {
    match cmd {
        Command::Validate { map } => {
            let f = ctx.load(map)?;
            let rep = rational::validate(&f, &ctx.validation)?;
            Ok(json!({ "valid": true, "report": rep }))
        }
        Command::Lambda { map, at } => {
            let f = ctx.load(map)?;
            let z = parse_point(at)?;
            let r = HermForm::underlying_form(&f)?;
            let ev = lambda::lambda_eval(&r, f.degree(), &z)?;
            let (eigs, _) = ballmap::linalg::eigh(&ev.hess_c);
            Ok(json!({
                "at": complex_list(&z),
                "value": ev.value,
                "gradient": complex_list(&ev.grad),
                "gradient_norm": ev.grad_norm(),
                "complex_hessian_eigenvalues": eigs,
                "real_hessian_min_eigenvalue": ballmap::linalg::eigh_real(&ev.hess_r).0.last(),
            }))
        }
        Command::CriticalPoint { map } => {
            let f = ctx.load(map)?;
            let r = HermForm::underlying_form(&f)?;
            let cp = lambda::find_critical_point(&r, f.degree(), &ctx.solver())?;
            Ok(json!({
                "alpha": complex_list(&cp.alpha),
                "criticality_residual": cp.residual,
                "gradient_norm": cp.grad_norm,
                "iterations": cp.iterations,
                "min_value": cp.min_value,
            }))
        }
        Command::Normalize { map, out } => {
            let f = ctx.load(map)?;
            let nf = normal_form::normalize_with(&f, &ctx.solver())?;
            if let Some(path) = out {
                write_map(path, &nf.map()?, "normal form")?;
            }
            normal_form_json(&nf)
        }
        Command::Invariants { map } => {
            let f = ctx.load(map)?;
            let nf = normal_form::normalize_with(&f, &ctx.solver())?;
            Ok(json!({ "sigma": nf.sigma, "echelon_unique": nf.residuals.echelon_unique }))
        }
        Command::Equivalent { a, b } => {
            let fa = ctx.load(a)?;
            let fb = ctx.load(b)?;
            let verdict = normal_form::spherically_equivalent(&fa, &fb)?;
            Ok(serde_json::to_value(&verdict).expect("verdicts serialize"))
        }
        Command::Classify { map } => {
            let f = ctx.load(map)?;
            let mut cls = polyclass::classify_poly_equiv(&f)?;
            cls.residual = polyclass::verify_representative_with(
                &cls,
                ctx.validation.samples_per_dim * f.nvars(),
                ctx.validation.seed,
                Exec::default(),
            );
            let mut v = serde_json::to_value(&cls).expect("classifications serialize");
            v["det_affinity_residual"] = json!(polyclass::det_affinity_residual(&cls.form));
            v["prep"] = json!(cls.prep.components().iter().map(terms_of).collect::<Vec<_>>());
            if let Some(g) = &cls.grep {
                v["grep"] = json!(terms_of(g));
            }
            if cls.model == Model::Heisenberg {
                v["note"] = json!("representative form is Re G - |P|^2");
            }
            Ok(v)
        }
        Command::Construct3 {
            sigma,
            search,
            max_iter,
            out,
        } => {
            let res = if *search {
                existence::feasibility_search(sigma, *max_iter)?
            } else {
                existence::degree3_numerator(sigma)?
            };
            let v = existence_json(&res);
            match res.outcome {
                Outcome::Feasible => {
                    if let (Some(path), Some(f)) = (out, res.map()) {
                        write_map(path, &f, "degree-3 construction")?;
                    }
                    Ok(v)
                }
                Outcome::Infeasible => Err(Error::Infeasible { min_eig: res.min_eig }.into()),
                Outcome::NotConverged => Err(Failure::Domain(json!({
                    "kind": "NotConverged",
                    "module": "existence",
                    "message": format!("no semidefinite point after {} iterations", res.iterations),
                    "residual": res.min_eig,
                }))),
            }
        }
    }
}

fn command_name(cmd: &Command) -> &'static str {
    match cmd {
        Command::Validate { .. } => "validate",
        Command::Lambda { .. } => "lambda",
        Command::CriticalPoint { .. } => "critical-point",
        Command::Normalize { .. } => "normalize",
        Command::Invariants { .. } => "invariants",
        Command::Equivalent { .. } => "equivalent",
        Command::Classify { .. } => "classify",
        Command::Construct3 { .. } => "construct3",
    }
}

fn print_text(v: &Value, indent: usize) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                match x {
                    Value::Object(_) => {
                        println!("{pad}{k}:");
                        print_text(x, indent + 2);
                    }
                    _ => println!("{pad}{k}: {x}"),
                }
            }
        }
        _ => println!("{pad}{v}"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let mut ctx = Ctx {
        tol: cli.tol,
        validation: ValidationOptions {
            samples_per_dim: cli.samples,
            seed: cli.seed,
            ..Default::default()
        },
        inputs: Vec::new(),
    };
    let outcome = if cli.tol > 0.0 && cli.samples > 0 {
        run(&cli.command, &mut ctx)
    } else {
        Err(Failure::Usage("--tol and --samples must be positive".into()))
    };
    let mut report = json!({
        "command": command_name(&cli.command),
        "args": std::env::args().skip(1).collect::<Vec<_>>(),
        "inputs": ctx.inputs,
        "tolerances": {
            "solver_gradient": cli.tol,
            "rank": RANK_TOL,
            "samples_per_dim": cli.samples,
            "seed": cli.seed,
        },
    });
    let code = match outcome {
        Ok(result) => {
            report["status"] = json!("ok");
            report["result"] = result;
            ExitCode::SUCCESS
        }
        Err(Failure::Domain(err)) => {
            report["status"] = json!("error");
            report["error"] = err;
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("ballmap: {msg}");
            return ExitCode::from(2);
        }
    };
    report["wall_time_s"] = json!(start.elapsed().as_secs_f64());
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&report).expect("reports serialize"));
    } else {
        print_text(&report, 0);
    }
    code
}
