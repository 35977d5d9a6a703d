//! Command-line front end: input parsing, text/JSON emission, batch search
//! over representations, and memo-cache management.
//!
//! Exit codes: 0 success (regardless of parity), 2 parse/usage error,
//! 3 dimension mismatch, 4 search limit exceeded, 5 table mismatch.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write as _};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use itertools::Itertools;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::obstruction::{DerivationNode, Engine};
use crate::oracles::{count_gram_zeros, family_instance, family_value, Family};
use crate::repcore::{Character, Representation, SphereDims};
use crate::stiefel::{
    fadell_husseini_target, theorem_main2_check, theorem_main_target, variety_check,
    StiefelVerdict, TheoremBacking,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DIMENSION: i32 = 3;
pub const EXIT_LIMIT: i32 = 4;
pub const EXIT_MISMATCH: i32 = 5;

/// Candidate cap for a single search enumeration.
const MAX_ENUMERATION: u128 = 5_000_000;

/// Recursion depth scales with the total sphere dimension, so all work runs
/// on a worker thread with a large (lazily committed) stack.
const WORKER_STACK: usize = 256 * 1024 * 1024;

#[derive(Parser)]
#[command(
    name = "obstructor",
    version,
    about = "Exact mod-2 obstruction calculator for equivariant maps from products of spheres"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the obstruction parity r(dims; alphas)
    R(RArgs),
    /// Evaluate the Stiefel-manifold condition for (n, k)
    Stiefel(StiefelArgs),
    /// Evaluate the orthogonality-variety condition for arbitrary dims
    Variety(VarietyArgs),
    /// Enumerate the representations with parity 1 for fixed dims
    Search(SearchArgs),
    /// Count the zeros of the explicit pairwise-inner-product witness map
    Witness(WitnessArgs),
    /// Tabulate a closed-form family against its independent oracle
    Table(TableArgs),
}

#[derive(Args)]
struct RArgs {
    /// Sphere dimensions, e.g. "2,1,0"
    #[arg(long)]
    dims: String,
    /// Summands as bitstrings with optional multiplicity, e.g. "110,101^2"
    #[arg(long, default_value = "")]
    alphas: String,
    /// Emit the full derivation tree (can be exponentially large)
    #[arg(long)]
    certificate: bool,
    #[arg(long)]
    json: bool,
    /// Persistent memo-cache file (default: $OBSTRUCTOR_CACHE)
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetKind {
    /// (n-j) copies of eps_j, checked at constant dims (n-1, ..., n-1)
    Main,
    /// (n-k) copies of each eps_j, checked on the variety dims (n-k, ..., n-1)
    Fh,
}

#[derive(Args)]
struct StiefelArgs {
    #[arg(long)]
    n: u32,
    #[arg(long)]
    k: u32,
    /// Built-in target representation
    #[arg(long, value_enum, conflicts_with = "alphas")]
    target: Option<TargetKind>,
    /// Explicit target summands (dimension must be k(n-1) - k(k-1)/2)
    #[arg(long, required_unless_present = "target")]
    alphas: Option<String>,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args)]
struct VarietyArgs {
    /// Sphere dimensions of the filtered product carrying the variety
    #[arg(long)]
    dims: String,
    /// Target summands (dimension must be sum(dims) - k(k-1)/2)
    #[arg(long, default_value = "")]
    alphas: String,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args)]
struct SearchArgs {
    #[arg(long)]
    dims: String,
    /// Candidate summands (default: all nonzero characters of rank k)
    #[arg(long)]
    alphabet: Option<String>,
    /// Emit only the lexicographically least multiset of each orbit under
    /// dims-preserving factor permutations
    #[arg(long)]
    up_to_symmetry: bool,
    /// Worker threads (default: one per core)
    #[arg(long)]
    jobs: Option<usize>,
    /// Largest admissible total dimension
    #[arg(long, default_value_t = 10)]
    limit: u64,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    cache: Option<PathBuf>,
}

#[derive(Args)]
struct WitnessArgs {
    #[arg(long)]
    k: usize,
    #[arg(long)]
    json: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyKind {
    /// r((n); eps1^n) for n = 1..max
    #[value(name = "classical_bu", alias = "classical-bu")]
    ClassicalBu,
    /// r((n1,n2); (eps1+eps2)^(n1+n2)) for n1+n2 <= max vs Lucas parity
    #[value(name = "diagonal_k2", alias = "diagonal-k2")]
    DiagonalK2,
    /// r((k-1,...,1,0); gram(k)) for k = 1..max
    #[value(name = "reduction")]
    Reduction,
    /// the 3*2^t family for t = 0..max
    #[value(name = "mani")]
    Mani,
}

#[derive(Args)]
struct TableArgs {
    #[arg(long, value_enum)]
    family: FamilyKind,
    /// Upper bound for the family parameter
    #[arg(long)]
    max: u32,
    #[arg(long)]
    json: bool,
    #[arg(long)]
    cache: Option<PathBuf>,
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    let handle = std::thread::Builder::new()
        .name("obstructor-worker".into())
        .stack_size(WORKER_STACK)
        .spawn(move || dispatch(cli))
        .expect("failed to spawn worker thread");
    match handle.join() {
        Ok(Ok(code)) => code,
        Ok(Err(err)) => {
            eprintln!("error: {err}");
            exit_code(&err)
        }
        Err(payload) => std::panic::resume_unwind(payload),
    }
}

fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Parse(_) | Error::InvalidArgument(_) | Error::Cache(_) => EXIT_USAGE,
        Error::RankMismatch { .. } | Error::DimensionMismatch { .. } => EXIT_DIMENSION,
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::R(args) => cmd_r(args),
        Command::Stiefel(args) => cmd_stiefel(args),
        Command::Variety(args) => cmd_variety(args),
        Command::Search(args) => cmd_search(args),
        Command::Witness(args) => cmd_witness(args),
        Command::Table(args) => cmd_table(args),
    }
}

const VERSION: &str = env!("CARGO_PKG_VERSION");

fn dash(s: String) -> String {
    if s.is_empty() {
        "-".into()
    } else {
        s
    }
}

fn conclusion_text(parity: u8) -> &'static str {
    if parity == 1 {
        "every equivariant map has a zero"
    } else {
        "inconclusive"
    }
}

fn conclusion_tag(parity: u8) -> &'static str {
    if parity == 1 {
        "ZERO_GUARANTEED"
    } else {
        "INCONCLUSIVE"
    }
}

fn alphas_json(rep: &Representation) -> Value {
    Value::Array(
        rep.summands()
            .iter()
            .map(|c| Value::String(c.render()))
            .collect(),
    )
}

fn engine_with_cache(flag: &Option<PathBuf>) -> Result<(Engine, Option<PathBuf>)> {
    let path = flag
        .clone()
        .or_else(|| std::env::var_os("OBSTRUCTOR_CACHE").map(PathBuf::from));
    let engine = Engine::new();
    if let Some(p) = &path {
        if p.exists() {
            let file = File::open(p)
                .map_err(|e| Error::Cache(format!("cannot open {}: {e}", p.display())))?;
            engine.load_cache(BufReader::new(file))?;
        }
    }
    Ok((engine, path))
}

fn save_cache(engine: &Engine, path: &Option<PathBuf>) -> Result<()> {
    let Some(p) = path else { return Ok(()) };
    let file =
        File::create(p).map_err(|e| Error::Cache(format!("cannot write {}: {e}", p.display())))?;
    let mut writer = BufWriter::new(file);
    engine
        .write_cache(&mut writer)
        .and_then(|_| writer.flush())
        .map_err(|e| Error::Cache(format!("cannot write {}: {e}", p.display())))?;
    Ok(())
}

fn cmd_r(args: RArgs) -> Result<i32> {
    let dims = SphereDims::parse(&args.dims)?;
    let rep = Representation::parse(&args.alphas, dims.k())?;
    let (engine, cache_path) = engine_with_cache(&args.cache)?;
    let result = engine.compute_r(&dims, &rep, args.certificate)?;
    save_cache(&engine, &cache_path)?;

    if args.json {
        let mut obj = json!({
            "command": "r",
            "version": VERSION,
            "dims": dims.dims(),
            "alphas": alphas_json(&rep),
            "parity": result.parity,
            "conclusion": conclusion_tag(result.parity),
        });
        if let Some(cert) = &result.certificate {
            obj["certificate"] = certificate_json(cert);
        }
        println!("{obj}");
    } else {
        println!(
            "r({}; {}) = {}",
            dash(dims.render()),
            dash(rep.render_compact()),
            result.parity
        );
        println!("{}", conclusion_text(result.parity));
        if let Some(cert) = &result.certificate {
            println!("certificate:");
            let mut out = String::new();
            render_certificate(cert, 0, &mut out);
            print!("{out}");
        }
    }
    Ok(EXIT_OK)
}

fn certificate_json(node: &DerivationNode) -> Value {
    json!({
        "dims": node.dims.dims(),
        "alphas": alphas_json(&node.rep),
        "rule": node.rule.tag(),
        "peeled": node.peeled,
        "parity": node.parity,
        "children": node.children.iter().map(certificate_json).collect::<Vec<_>>(),
    })
}

fn render_certificate(node: &DerivationNode, depth: usize, out: &mut String) {
    let peel = match node.peeled {
        Some(i) => format!(" #{i}"),
        None => String::new(),
    };
    out.push_str(&format!(
        "{}({} | {}) {}{} -> {}\n",
        "  ".repeat(depth),
        dash(node.dims.render()),
        dash(node.rep.render()),
        node.rule.tag(),
        peel,
        node.parity
    ));
    for child in &node.children {
        render_certificate(child, depth + 1, out);
    }
}

fn print_verdict(
    command: &str,
    dims: &SphereDims,
    rep: &Representation,
    target: Option<&str>,
    verdict: &StiefelVerdict,
    json_out: bool,
) {
    if json_out {
        let mut obj = json!({
            "command": command,
            "version": VERSION,
            "n": verdict.n,
            "k": verdict.k,
            "dims": dims.dims(),
            "alphas": alphas_json(rep),
            "m": verdict.m,
            "parity": verdict.condition_parity,
            "conclusion": verdict.conclusion.tag(),
            "backing": verdict.theorem_backing.tag(),
        });
        if let Some(t) = target {
            obj["target"] = Value::String(t.into());
        }
        println!("{obj}");
    } else {
        println!(
            "n={} k={} m={} dims={}",
            verdict.n,
            verdict.k,
            verdict.m,
            dash(dims.render())
        );
        println!("condition parity={}", verdict.condition_parity);
        println!("conclusion={}", verdict.conclusion.tag());
        println!("backing={}", verdict.theorem_backing.tag());
        if verdict.theorem_backing == TheoremBacking::GeneralizedUnproven {
            println!("note: configuration not covered by a proven theorem; parity only");
        }
    }
}

fn cmd_stiefel(args: StiefelArgs) -> Result<i32> {
    let (engine, cache_path) = engine_with_cache(&args.cache)?;
    let (verdict, dims, rep, target_name) = match (args.target, &args.alphas) {
        (Some(TargetKind::Main), None) => {
            let rep = theorem_main_target(args.n, args.k)?;
            let verdict = theorem_main2_check(&engine, args.n, args.k, &rep)?;
            let dims = SphereDims::new(vec![args.n - 1; args.k as usize]);
            (verdict, dims, rep, Some("main"))
        }
        (Some(TargetKind::Fh), None) => {
            // the FH target pairs with the variety dims (n-k, ..., n-1)
            let rep = fadell_husseini_target(args.n, args.k)?;
            let dims = SphereDims::new((0..args.k).map(|i| args.n - args.k + i).collect());
            let verdict = variety_check(&engine, &dims, &rep)?;
            (verdict, dims, rep, Some("fh"))
        }
        (None, Some(alphas)) => {
            let rep = Representation::parse(alphas, args.k as usize)?;
            let verdict = theorem_main2_check(&engine, args.n, args.k, &rep)?;
            let dims = SphereDims::new(vec![args.n - 1; args.k as usize]);
            (verdict, dims, rep, None)
        }
        _ => unreachable!("clap enforces exactly one of --target/--alphas"),
    };
    save_cache(&engine, &cache_path)?;
    print_verdict("stiefel", &dims, &rep, target_name, &verdict, args.json);
    Ok(EXIT_OK)
}

fn cmd_variety(args: VarietyArgs) -> Result<i32> {
    let dims = SphereDims::parse(&args.dims)?;
    let rep = Representation::parse(&args.alphas, dims.k())?;
    let (engine, cache_path) = engine_with_cache(&args.cache)?;
    let verdict = variety_check(&engine, &dims, &rep)?;
    save_cache(&engine, &cache_path)?;
    print_verdict("variety", &dims, &rep, None, &verdict, args.json);
    Ok(EXIT_OK)
}

fn cmd_witness(args: WitnessArgs) -> Result<i32> {
    let count = count_gram_zeros(args.k)?;
    let parity = (count.per_fundamental_domain % 2) as u8;
    if args.json {
        let obj = json!({
            "command": "witness",
            "version": VERSION,
            "k": args.k,
            "total": count.total,
            "per_fundamental_domain": count.per_fundamental_domain,
            "parity": parity,
        });
        println!("{obj}");
    } else {
        println!("k={}", args.k);
        println!("total zeros={}", count.total);
        println!("zeros per fundamental domain={}", count.per_fundamental_domain);
        println!("parity={parity}");
    }
    Ok(EXIT_OK)
}

/// Number of multisets of size `s` over an alphabet of `a` symbols,
/// saturating well above [`MAX_ENUMERATION`].
fn count_multisets(a: u128, s: u128) -> u128 {
    let mut count: u128 = 1;
    for i in 0..s {
        count = count.saturating_mul(a.saturating_add(i)) / (i + 1);
        if count > MAX_ENUMERATION * 1000 {
            return count;
        }
    }
    count
}

fn cmd_search(args: SearchArgs) -> Result<i32> {
    let dims = SphereDims::parse(&args.dims)?;
    let k = dims.k();
    if k == 0 {
        return Err(Error::InvalidArgument(
            "search needs at least one sphere factor".into(),
        ));
    }
    let size = dims.total();
    if size > args.limit {
        eprintln!(
            "search limit exceeded: total dimension {size} > limit {}",
            args.limit
        );
        return Ok(EXIT_LIMIT);
    }

    let alphabet: Vec<u16> = match &args.alphabet {
        Some(text) => {
            let mut masks: Vec<u16> = text
                .split(',')
                .map(|t| Character::parse(t, k).map(|c| c.bits()))
                .collect::<Result<_>>()?;
            masks.sort_unstable();
            masks.dedup();
            masks
        }
        None => (1..(1u32 << k)).map(|m| m as u16).collect(),
    };

    let candidates = count_multisets(alphabet.len() as u128, size as u128);
    if candidates > MAX_ENUMERATION {
        eprintln!(
            "search limit exceeded: {candidates} candidate multisets (cap {MAX_ENUMERATION})"
        );
        return Ok(EXIT_LIMIT);
    }

    let mut combos: Vec<Vec<u16>> = alphabet
        .iter()
        .copied()
        .combinations_with_replacement(size as usize)
        .collect();

    if args.up_to_symmetry {
        let stabilizer = dims_stabilizer(dims.dims())?;
        combos.retain(|combo| is_canonical_under(combo, &stabilizer));
    }

    let (engine, cache_path) = engine_with_cache(&args.cache)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| Error::InvalidArgument(format!("cannot build thread pool: {e}")))?;
    let parities: Vec<u8> = pool.install(|| {
        combos
            .par_iter()
            .map(|masks| engine.parity_masks(dims.dims(), masks))
            .collect()
    });
    save_cache(&engine, &cache_path)?;

    let hits: Vec<&Vec<u16>> = combos
        .iter()
        .zip(&parities)
        .filter(|(_, &p)| p == 1)
        .map(|(c, _)| c)
        .collect();

    let render_combo = |masks: &[u16]| -> String {
        dash(
            masks
                .iter()
                .map(|&m| Character::from_bits(m, k).render())
                .collect::<Vec<_>>()
                .join(","),
        )
    };

    if args.json {
        let obj = json!({
            "command": "search",
            "version": VERSION,
            "dims": dims.dims(),
            "size": size,
            "alphabet_size": alphabet.len(),
            "alphabet": args.alphabet.as_ref().map(|_| {
                alphabet.iter().map(|&m| Character::from_bits(m, k).render()).collect::<Vec<_>>()
            }),
            "up_to_symmetry": args.up_to_symmetry,
            "candidates": combos.len(),
            "results": hits
                .iter()
                .map(|c| c.iter().map(|&m| Character::from_bits(m, k).render()).collect::<Vec<_>>())
                .collect::<Vec<_>>(),
        });
        println!("{obj}");
    } else {
        let alphabet_note = if alphabet.len() <= 64 {
            alphabet
                .iter()
                .map(|&m| Character::from_bits(m, k).render())
                .collect::<Vec<_>>()
                .join(",")
        } else {
            format!("<{} characters>", alphabet.len())
        };
        println!(
            "search dims={} size={size} alphabet={} candidates={} hits={}",
            dash(dims.render()),
            alphabet_note,
            combos.len(),
            hits.len()
        );
        for combo in &hits {
            println!("{}", render_combo(combo));
        }
    }
    Ok(EXIT_OK)
}

/// All factor permutations preserving the dims vector, as position maps.
/// The orbit filter applies each to a multiset and compares.
fn dims_stabilizer(dims: &[u32]) -> Result<Vec<Vec<usize>>> {
    let k = dims.len();
    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut seen: Vec<u32> = Vec::new();
    for value in dims {
        if !seen.contains(value) {
            seen.push(*value);
            groups.push((0..k).filter(|&i| dims[i] == *value).collect());
        }
    }
    let order: u64 = groups
        .iter()
        .map(|g| (1..=g.len() as u64).product::<u64>())
        .product();
    if order > 40_320 {
        return Err(Error::InvalidArgument(format!(
            "--up-to-symmetry needs a symmetry group of order <= 40320, got {order}"
        )));
    }
    let mut perms: Vec<Vec<usize>> = vec![(0..k).collect()];
    for group in &groups {
        let mut extended = Vec::new();
        for base in &perms {
            for image in group.iter().copied().permutations(group.len()) {
                let mut p = base.clone();
                for (slot, &target) in group.iter().zip(&image) {
                    p[*slot] = target;
                }
                extended.push(p);
            }
        }
        perms = extended;
    }
    Ok(perms)
}

fn is_canonical_under(combo: &[u16], stabilizer: &[Vec<usize>]) -> bool {
    for perm in stabilizer {
        let mut image: Vec<u16> = combo
            .iter()
            .map(|&m| {
                let mut out = 0u16;
                for (i, &src) in perm.iter().enumerate() {
                    out |= ((m >> src) & 1) << i;
                }
                out
            })
            .collect();
        image.sort_unstable();
        if image.as_slice() < combo {
            return false;
        }
    }
    true
}

struct TableRow {
    params: Vec<u64>,
    computed: u8,
    oracle: u8,
}

fn cmd_table(args: TableArgs) -> Result<i32> {
    let (engine, cache_path) = engine_with_cache(&args.cache)?;
    let mut rows: Vec<TableRow> = Vec::new();

    let mut push_row = |params: Vec<u64>, family: Family| -> Result<()> {
        let (dims, rep) = family_instance(&family)?;
        let computed = engine.parity(&dims, &rep)?;
        let oracle = family_value(&family)?;
        rows.push(TableRow {
            params,
            computed,
            oracle,
        });
        Ok(())
    };

    let family_name = match args.family {
        FamilyKind::ClassicalBu => {
            for n in 1..=args.max {
                push_row(vec![n as u64], Family::ClassicalBu(vec![n]))?;
            }
            "classical_bu"
        }
        FamilyKind::DiagonalK2 => {
            for s in 0..=args.max as u64 {
                for n1 in 0..=s {
                    push_row(vec![n1, s - n1], Family::DiagonalK2(n1, s - n1))?;
                }
            }
            "diagonal_k2"
        }
        FamilyKind::Reduction => {
            for k in 1..=args.max as usize {
                push_row(vec![k as u64], Family::Reduction(k))?;
            }
            "reduction"
        }
        FamilyKind::Mani => {
            for t in 0..=args.max {
                push_row(vec![t as u64], Family::Mani(t))?;
            }
            "mani"
        }
    };
    save_cache(&engine, &cache_path)?;

    let mismatches = rows.iter().filter(|r| r.computed != r.oracle).count();

    if args.json {
        let obj = json!({
            "command": "table",
            "version": VERSION,
            "family": family_name,
            "max": args.max,
            "rows": rows.iter().map(|r| json!({
                "params": r.params,
                "computed": r.computed,
                "oracle": r.oracle,
                "match": r.computed == r.oracle,
            })).collect::<Vec<_>>(),
            "all_match": mismatches == 0,
        });
        println!("{obj}");
    } else {
        println!("family={family_name} max={}", args.max);
        println!("params computed oracle match");
        for r in &rows {
            println!(
                "{} {} {} {}",
                r.params
                    .iter()
                    .map(|p| p.to_string())
                    .collect::<Vec<_>>()
                    .join(","),
                r.computed,
                r.oracle,
                if r.computed == r.oracle { "ok" } else { "MISMATCH" }
            );
        }
        println!("rows={} mismatches={mismatches}", rows.len());
    }

    if mismatches > 0 {
        Ok(EXIT_MISMATCH)
    } else {
        Ok(EXIT_OK)
    }
}
