use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use pmrc::galois::Field;
use pmrc::pm::{
    build, code_definition_from_text, code_definition_to_text, validate_construction_with,
    CodeMatrices, CodeParams, Construction, IndexMatrix, SubsetPolicy, ValidationReport, Variant,
};
use pmrc::stripe;

use pmrc_cli::bench::{
    format_sparsity_table, run_bench, run_bench_rs, sparsity_rows, sweep_block_size, Algorithm,
    BenchConfig, BenchOp, BenchResult,
};

#[derive(Parser)]
#[command(
    name = "pmrc",
    version,
    about = "Product-matrix regenerating codes: generate, encode, decode, repair, validate, benchmark"
)]
struct Cli {
    /// Seed for all randomized choices (falls back to PMRC_SEED, then entropy).
    #[arg(long, global = true, env = "PMRC_SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build a code, validate it, and write the code definition file.
    Gen(GenArgs),
    /// Split a file into stripes and write one shard file per node.
    Encode(EncodeArgs),
    /// Rebuild the original file from surviving shard files.
    Decode(DecodeArgs),
    /// Regenerate one lost shard from d surviving shard files.
    Repair(RepairArgs),
    /// Re-run the construction validation checks on a code definition.
    Validate(ValidateArgs),
    /// Benchmark encode/decode/repair throughput (CSV output).
    Bench(BenchArgs),
    /// Benchmark one operation across several block sizes (CSV output).
    Sweep(SweepArgs),
    /// Print generator sparsity percentages for the four MSR constructions.
    Sparsity(SparsityArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    variant: String,
    #[arg(long)]
    construction: String,
    #[arg(long)]
    k: usize,
    /// Node count; defaults to 2k-1.
    #[arg(long)]
    n: Option<usize>,
    /// Repair degree; defaults to 2k-2.
    #[arg(long)]
    d: Option<usize>,
    /// Field width in bits (8 or 16).
    #[arg(long, default_value_t = 8)]
    field: u32,
    #[arg(long)]
    out: PathBuf,
    /// Check this many random subsets per family too large to enumerate.
    #[arg(long)]
    sample: Option<usize>,
    /// Also write the generator matrix (canonical text format) here.
    #[arg(long)]
    emit_generator: Option<PathBuf>,
    /// Emit the systematic generator G' instead of G (MSR only).
    #[arg(long, requires = "emit_generator")]
    systematic: bool,
}

#[derive(Args)]
struct EncodeArgs {
    #[arg(long)]
    code: PathBuf,
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long)]
    out_dir: PathBuf,
    #[arg(long, default_value_t = stripe::DEFAULT_BLOCK_SIZE)]
    block_size: usize,
    /// Write the data verbatim on the first k nodes (MBR is natively so).
    #[arg(long)]
    systematic: bool,
}

#[derive(Args)]
struct DecodeArgs {
    /// Shard files, or a single directory containing shard_*.pmrc files.
    shards: Vec<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct RepairArgs {
    /// Surviving shard files, or a single directory of them.
    shards: Vec<PathBuf>,
    /// 1-based node index to regenerate.
    #[arg(long)]
    failed: usize,
    /// Defaults to the directory of the first surviving shard.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    code: PathBuf,
    /// Check this many random subsets per family too large to enumerate.
    #[arg(long)]
    sample: Option<usize>,
}

#[derive(Args)]
struct BenchArgs {
    /// encode, decode, or repair.
    #[arg(long)]
    op: String,
    #[arg(long, conflicts_with = "rs_k")]
    code: Option<PathBuf>,
    /// Benchmark the Reed-Solomon baseline with this k instead of a PM code.
    #[arg(long)]
    rs_k: Option<usize>,
    /// Node count for the RS baseline; defaults to 2k-1.
    #[arg(long, requires = "rs_k")]
    rs_n: Option<usize>,
    /// Field width for the RS baseline.
    #[arg(long, default_value_t = 8)]
    field: u32,
    /// specific (Psi*M algorithms) or linear (generator matrix).
    #[arg(long, default_value = "linear")]
    algorithm: String,
    #[arg(long)]
    systematic: bool,
    #[arg(long, default_value_t = stripe::DEFAULT_BLOCK_SIZE)]
    block_size: usize,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    /// Write CSV here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    op: String,
    #[arg(long)]
    code: PathBuf,
    /// Comma-separated block sizes; k/M suffixes allowed (e.g. 1k,16k,1M).
    #[arg(long)]
    sizes: String,
    #[arg(long, default_value = "linear")]
    algorithm: String,
    #[arg(long)]
    systematic: bool,
    #[arg(long, default_value_t = 1000)]
    runs: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SparsityArgs {
    /// Comma-separated k values.
    #[arg(long, default_value = "4,8,16")]
    k: String,
    #[arg(long, default_value_t = 8)]
    field: u32,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let seed = cli.seed.unwrap_or_else(rand::random);
    match cli.cmd {
        Cmd::Gen(args) => cmd_gen(args, seed),
        Cmd::Encode(args) => cmd_encode(args),
        Cmd::Decode(args) => cmd_decode(args),
        Cmd::Repair(args) => cmd_repair(args),
        Cmd::Validate(args) => cmd_validate(args, seed),
        Cmd::Bench(args) => cmd_bench(args, seed),
        Cmd::Sweep(args) => cmd_sweep(args, seed),
        Cmd::Sparsity(args) => cmd_sparsity(args),
    }
}

fn print_report(report: &ValidationReport) {
    for check in &report.checks {
        let status = if check.passed { "PASS" } else { "FAIL" };
        match &check.witness {
            Some(rows) => println!("{status} {} (rows {rows:?})", check.name),
            None => println!("{status} {}", check.name),
        }
    }
}

fn validate_or_bail(cm: &CodeMatrices, sample: Option<usize>, seed: u64) -> Result<()> {
    let policy = match sample {
        Some(count) => SubsetPolicy::Sample { count, seed },
        None => SubsetPolicy::Exhaustive,
    };
    let report = validate_construction_with(cm, policy)
        .context("validation did not run; for large codes pass --sample N")?;
    print_report(&report);
    if !report.overall {
        bail!("construction failed validation");
    }
    Ok(())
}

fn cmd_gen(args: GenArgs, seed: u64) -> Result<()> {
    let variant = Variant::parse(&args.variant)?;
    let construction = Construction::parse(&args.construction)?;
    let n = args.n.unwrap_or(2 * args.k - 1);
    let d = args.d.unwrap_or(2 * args.k - 2);
    let params = CodeParams::new(n, args.k, d, variant)?;
    let field = Arc::new(Field::new(args.field)?);
    let cm = build(params, construction, &field)?;
    validate_or_bail(&cm, args.sample, seed)?;
    let l = cm.index_matrix();
    fs::write(&args.out, code_definition_to_text(&cm, &l))
        .with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(path) = &args.emit_generator {
        let gm = pmrc::linearize::generator_from_pm(&cm, &l)?;
        let gm = if args.systematic {
            pmrc::linearize::systematize(&gm)?
        } else {
            gm
        };
        fs::write(path, gm.g.to_text()).with_context(|| format!("writing {}", path.display()))?;
    }
    println!(
        "wrote {} ({} {} w{} n{n} k{} d{d}, alpha={} B={})",
        args.out.display(),
        variant.as_str(),
        construction.as_str(),
        args.field,
        args.k,
        params.alpha,
        params.b
    );
    Ok(())
}

fn load_code(path: &Path) -> Result<(CodeMatrices, IndexMatrix)> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let parsed =
        code_definition_from_text(&text).with_context(|| format!("parsing {}", path.display()))?;
    Ok(parsed)
}

fn cmd_encode(args: EncodeArgs) -> Result<()> {
    let (cm, l) = load_code(&args.code)?;
    if l != cm.index_matrix() {
        bail!("code file uses a non-canonical index layout; shard files cannot describe it");
    }
    fs::create_dir_all(&args.out_dir)?;
    let shards = stripe::split_and_encode(
        &args.input,
        &args.out_dir,
        &cm,
        args.block_size,
        args.systematic,
    )?;
    println!(
        "wrote {} shards to {}",
        shards.len(),
        args.out_dir.display()
    );
    Ok(())
}

/// A single directory argument expands to the shard files inside it.
fn gather_shards(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    if paths.is_empty() {
        bail!("no shard files given");
    }
    if paths.len() == 1 && paths[0].is_dir() {
        let mut found: Vec<PathBuf> = fs::read_dir(&paths[0])?
            .filter_map(|e| e.ok())
            .map(|e| e.path())
            .filter(|p| {
                p.file_name()
                    .and_then(|s| s.to_str())
                    .is_some_and(|s| s.starts_with("shard_") && s.ends_with(".pmrc"))
            })
            .collect();
        found.sort();
        if found.is_empty() {
            bail!("no shard_*.pmrc files in {}", paths[0].display());
        }
        return Ok(found);
    }
    Ok(paths.to_vec())
}

fn cmd_decode(args: DecodeArgs) -> Result<()> {
    let shards = gather_shards(&args.shards)?;
    stripe::reassemble(&shards, &args.out)?;
    println!("restored {}", args.out.display());
    Ok(())
}

fn cmd_repair(args: RepairArgs) -> Result<()> {
    let shards = gather_shards(&args.shards)?;
    let out_dir = match args.out_dir {
        Some(dir) => dir,
        None => shards[0]
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from(".")),
    };
    fs::create_dir_all(&out_dir)?;
    let path = stripe::repair_shard(&shards, args.failed, &out_dir)?;
    println!("regenerated {}", path.display());
    Ok(())
}

fn cmd_validate(args: ValidateArgs, seed: u64) -> Result<()> {
    let (cm, _) = load_code(&args.code)?;
    validate_or_bail(&cm, args.sample, seed)
}

fn emit_csv(results: &[BenchResult], out: Option<&Path>) -> Result<()> {
    let mut text = String::from(BenchResult::csv_header());
    text.push('\n');
    for r in results {
        text.push_str(&r.csv_row());
        text.push('\n');
    }
    match out {
        Some(path) => {
            fs::write(path, text).with_context(|| format!("writing {}", path.display()))?
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs, seed: u64) -> Result<()> {
    let cfg = BenchConfig {
        op: BenchOp::parse(&args.op)?,
        algorithm: Algorithm::parse(&args.algorithm)?,
        systematic: args.systematic,
        block_size: args.block_size,
        runs: args.runs,
        seed,
    };
    let result = match (&args.code, args.rs_k) {
        (Some(code), None) => {
            let (cm, l) = load_code(code)?;
            run_bench(&cm, &l, &cfg)?
        }
        (None, Some(k)) => {
            let n = args.rs_n.unwrap_or(2 * k - 1);
            let field = Arc::new(Field::new(args.field)?);
            run_bench_rs(n, k, &field, &cfg)?
        }
        _ => bail!("pass exactly one of --code or --rs-k"),
    };
    emit_csv(&[result], args.out.as_deref())
}

fn parse_sizes(text: &str) -> Result<Vec<usize>> {
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            let (num, mult) = match tok.chars().last() {
                Some('k') | Some('K') => (&tok[..tok.len() - 1], 1024),
                Some('m') | Some('M') => (&tok[..tok.len() - 1], 1024 * 1024),
                _ => (tok, 1),
            };
            num.parse::<usize>()
                .map(|v| v * mult)
                .with_context(|| format!("bad size {tok:?}"))
        })
        .collect()
}

fn cmd_sweep(args: SweepArgs, seed: u64) -> Result<()> {
    let (cm, l) = load_code(&args.code)?;
    let sizes = parse_sizes(&args.sizes)?;
    let cfg = BenchConfig {
        op: BenchOp::parse(&args.op)?,
        algorithm: Algorithm::parse(&args.algorithm)?,
        systematic: args.systematic,
        block_size: sizes.first().copied().unwrap_or(0),
        runs: args.runs,
        seed,
    };
    let results = sweep_block_size(&cm, &l, &cfg, &sizes)?;
    emit_csv(&results, args.out.as_deref())
}

fn cmd_sparsity(args: SparsityArgs) -> Result<()> {
    let ks: Vec<usize> = args
        .k
        .split(',')
        .map(|tok| {
            tok.trim()
                .parse::<usize>()
                .with_context(|| format!("bad k {tok:?}"))
        })
        .collect::<Result<_>>()?;
    let field = Arc::new(Field::new(args.field)?);
    let rows = sparsity_rows(&ks, &field)?;
    print!("{}", format_sparsity_table(&rows));
    Ok(())
}
