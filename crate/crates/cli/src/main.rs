//! `npoint`: trees, transforms and n-point values from the command line.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use npoint_core::algebra::{AlgebraElement, LabelId, LabelRegistry, Parity};
use npoint_core::coalgebra::Truncation;
use npoint_core::export::{trees_dot, trees_json};
use npoint_core::model::{
    complete_from_connected, connected_from_1pi_components, connected_from_complete, load_model, FiniteModel,
    ModelError, NamedFunctional, Role,
};
use npoint_core::oracle::{self, isomorphism_key};
use npoint_core::scalar::{format_scalar, to_f64, Scalar};
use npoint_core::tree::{extract_trees, lambda_graphs, Mode, TreeGraph};

const EXIT_MISMATCH: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_MODEL: u8 = 3;

#[derive(Parser)]
#[command(name = "npoint", version, about = "Trees and n-point functions from the coproduct")]
struct Cli {
    /// Directory searched for relative model paths that do not exist as given
    #[arg(long, global = true, env = "NPOINT_MODEL_DIR")]
    model_dir: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the unordered trees generated by Λ with their weights
    Trees {
        #[arg(long)]
        vertices: usize,
        #[arg(long, default_value_t = 0)]
        min_valence: usize,
        /// Comma-separated external labels, repeats allowed
        #[arg(long, default_value = "")]
        externals: String,
        /// Labels among the externals that are fermionic
        #[arg(long, default_value = "")]
        odd: String,
        #[arg(long, value_enum, default_value_t = Format::Table)]
        format: Format,
    },
    /// Tabulate exp or log of a model functional
    Transform {
        #[arg(long)]
        model: PathBuf,
        #[arg(long, value_enum)]
        direction: Direction,
        /// Highest monomial degree to tabulate
        #[arg(long)]
        degree: usize,
        /// Functional to transform; defaults to the first of the needed role
        #[arg(long)]
        functional: Option<String>,
    },
    /// Connected function of a product of external labels from vertex functions
    Npoint {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        externals: String,
        #[arg(long, default_value = "tree-level")]
        mode: Mode,
        /// Largest vertex number; required in standard mode
        #[arg(long)]
        k_max: Option<usize>,
        /// Also print a floating-point approximation
        #[arg(long)]
        float: bool,
        /// Print each vertex number's contribution
        #[arg(long)]
        per_k: bool,
    },
    /// Check the weights of Λ^{k-1}(1) against brute-force symmetry factors
    VerifyAppendix {
        #[arg(long, default_value_t = 7)]
        max_k: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Table,
    Json,
    Dot,
}

#[derive(Clone, Copy, ValueEnum)]
enum Direction {
    Exp,
    Log,
}

struct Failure {
    code: u8,
    message: String,
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

impl From<ModelError> for Failure {
    fn from(e: ModelError) -> Self {
        let code = match e {
            ModelError::Externals(_) => EXIT_USAGE,
            _ => EXIT_MODEL,
        };
        Failure { code, message: e.to_string() }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut out = String::new();
    let result = run(&cli, &mut out);
    let stdout = std::io::stdout();
    let _ = stdout.lock().write_all(out.as_bytes());
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: &Cli, out: &mut String) -> Result<u8, Failure> {
    match &cli.command {
        Command::Trees { vertices, min_valence, externals, odd, format } => {
            cmd_trees(*vertices, *min_valence, externals, odd, *format, out)
        }
        Command::Transform { model, direction, degree, functional } => {
            let m = open_model(cli, model)?;
            cmd_transform(&m, *direction, *degree, functional.as_deref(), out)
        }
        Command::Npoint { model, externals, mode, k_max, float, per_k } => {
            let m = open_model(cli, model)?;
            cmd_npoint(&m, externals, *mode, *k_max, *float, *per_k, out)
        }
        Command::VerifyAppendix { max_k } => cmd_verify_appendix(*max_k, out),
    }
}

fn open_model(cli: &Cli, path: &Path) -> Result<FiniteModel, Failure> {
    let resolved = match &cli.model_dir {
        Some(dir) if path.is_relative() && !path.exists() => dir.join(path),
        _ => path.to_path_buf(),
    };
    Ok(load_model(resolved)?)
}

/// Registry of the distinct names in `list`, in order of first appearance.
fn ad_hoc_registry(list: &str, odd: &str) -> Result<(Arc<LabelRegistry>, Vec<LabelId>), Failure> {
    let names: Vec<&str> = list.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    let odd: Vec<&str> = odd.split(',').map(str::trim).filter(|s| !s.is_empty()).collect();
    if let Some(o) = odd.iter().find(|o| !names.contains(o)) {
        return Err(usage(format!("--odd label `{o}` is not among the externals")));
    }
    let mut reg = LabelRegistry::new();
    let mut ids = Vec::with_capacity(names.len());
    for name in names {
        let id = match reg.lookup(name) {
            Ok(id) => id,
            Err(_) => {
                let parity = if odd.contains(&name) { Parity::Odd } else { Parity::Even };
                reg.register(name, parity).map_err(|e| usage(e.to_string()))?
            }
        };
        ids.push(id);
    }
    Ok((Arc::new(reg), ids))
}

fn weighted_trees(
    reg: Arc<LabelRegistry>,
    externals: &[LabelId],
    k: usize,
    min_valence: usize,
) -> Result<Vec<TreeGraph>, Failure> {
    // Δ_{≥m} keeps exactly the trees with valences ≥ m + 1
    let trunc = Truncation(min_valence.saturating_sub(1));
    let g = lambda_graphs(reg, externals, k - 1, trunc).map_err(|e| usage(e.to_string()))?;
    let trees = extract_trees(&g).map_err(|e| usage(e.to_string()))?;
    Ok(trees.into_iter().filter(|t| t.min_valence() >= min_valence).collect())
}

fn cmd_trees(k: usize, min_valence: usize, externals: &str, odd: &str, format: Format, out: &mut String) -> Result<u8, Failure> {
    if k == 0 {
        return Err(usage("--vertices must be at least 1"));
    }
    let (reg, ids) = ad_hoc_registry(externals, odd)?;
    let trees = weighted_trees(reg.clone(), &ids, k, min_valence)?;
    match format {
        Format::Json => out.push_str(&trees_json(&reg, &trees)),
        Format::Dot => out.push_str(&trees_dot(&reg, &trees)),
        Format::Table => out.push_str(&tree_table(&reg, &trees)),
    }
    Ok(0)
}

fn tree_table(reg: &LabelRegistry, trees: &[TreeGraph]) -> String {
    let rows: Vec<[String; 3]> = trees
        .iter()
        .map(|t| {
            let vertices = t
                .vertices
                .iter()
                .enumerate()
                .map(|(i, legs)| {
                    let names: Vec<&str> = legs.iter().map(|&id| reg.name(id)).collect();
                    format!("v{}[{}]", i + 1, names.join(","))
                })
                .collect::<Vec<_>>()
                .join(" ");
            let edges = t.edges.iter().map(|&(a, b)| format!("v{}-v{}", a + 1, b + 1)).collect::<Vec<_>>().join(" ");
            [format_scalar(&t.weight), vertices, if edges.is_empty() { "-".into() } else { edges }]
        })
        .collect();
    let header = ["weight".to_string(), "vertices".to_string(), "edges".to_string()];
    let w0 = rows.iter().map(|r| r[0].len()).chain([header[0].len()]).max().unwrap_or(0);
    let w1 = rows.iter().map(|r| r[1].len()).chain([header[1].len()]).max().unwrap_or(0);
    let mut s = String::new();
    for r in std::iter::once(&header).chain(rows.iter()) {
        let _ = writeln!(s, "{:<w0$}  {:<w1$}  {}", r[0], r[1], r[2]);
    }
    s
}

fn cmd_transform(m: &FiniteModel, dir: Direction, degree: usize, name: Option<&str>, out: &mut String) -> Result<u8, Failure> {
    let (source, role, table) = match dir {
        Direction::Exp => {
            let src = m.select(Role::Sigma, name)?;
            (src, Role::Rho, complete_from_connected(m, degree, Some(&src.name))?)
        }
        Direction::Log => {
            let src = m.select(Role::Rho, name)?;
            (src, Role::Sigma, connected_from_complete(m, degree, Some(&src.name))?)
        }
    };
    let replaced = m.with_replaced(&source.name, NamedFunctional { name: source.name.clone(), role, functional: table })?;
    out.push_str(&replaced.to_json_string());
    Ok(0)
}

fn cmd_npoint(
    m: &FiniteModel,
    externals: &str,
    mode: Mode,
    k_max: Option<usize>,
    float: bool,
    per_k: bool,
    out: &mut String,
) -> Result<u8, Failure> {
    let ids = m.parse_externals(externals)?;
    let k_max = match (k_max, mode) {
        (Some(0), _) => return Err(usage("--k-max must be at least 1")),
        (Some(k), _) => k,
        (None, Mode::Standard) => return Err(usage("standard mode needs an explicit --k-max")),
        // valences ≥ 3 allow at most n - 2 vertices
        (None, _) => ids.len().saturating_sub(2).max(1),
    };
    if mode == Mode::Standard {
        eprintln!("warning: standard mode sums an infinite series; the value is truncated at k = {k_max}");
    }
    let a = AlgebraElement::product_of(m.registry().clone(), &ids).map_err(|e| usage(e.to_string()))?;
    let parts = connected_from_1pi_components(m, &a, k_max, mode)?;
    if per_k {
        for (k, v) in parts.iter().enumerate() {
            let _ = writeln!(out, "k={} {}", k + 1, format_scalar(v));
        }
    }
    let total: Scalar = parts.into_iter().sum();
    let _ = writeln!(out, "{}", format_scalar(&total));
    if float {
        let _ = writeln!(out, "{}", to_f64(&total));
    }
    Ok(0)
}

fn cmd_verify_appendix(max_k: usize, out: &mut String) -> Result<u8, Failure> {
    if max_k == 0 || max_k > 7 {
        return Err(usage(format!("--max-k must be between 1 and 7, got {max_k}")));
    }
    let reg = Arc::new(LabelRegistry::new());
    let mut ok = true;
    for k in 1..=max_k {
        let trees = weighted_trees(reg.clone(), &[], k, 0)?;
        let expected = oracle::enumerate_trees(k, &[], 0).map_err(|e| usage(e.to_string()))?;
        let mut bad = Vec::new();
        if trees.len() != expected.len() {
            bad.push(format!("{} trees, oracle has {}", trees.len(), expected.len()));
        }
        for t in &expected {
            let key = isomorphism_key(t);
            let s = oracle::symmetry_factor(t).map_err(|e| usage(e.to_string()))?;
            let want = Scalar::new(1.into(), s.into());
            match trees.iter().find(|g| isomorphism_key(g) == key) {
                Some(g) if g.weight == want => {}
                Some(g) => bad.push(format!("weight {} where 1/s = {}", format_scalar(&g.weight), format_scalar(&want))),
                None => bad.push("an oracle tree is missing".into()),
            }
        }
        let weights: Vec<String> = trees.iter().map(|t| format_scalar(&t.weight)).collect();
        if bad.is_empty() {
            let _ = writeln!(out, "k={k}: ok, {} tree(s), weights {}", trees.len(), weights.join(" "));
        } else {
            ok = false;
            let _ = writeln!(out, "k={k}: MISMATCH, {}", bad.join("; "));
        }
    }
    Ok(if ok { 0 } else { EXIT_MISMATCH })
}
