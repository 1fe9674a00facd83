//! Benchmark harness. Each operation's running time is split into an
//! initialization phase (matrix builds and inversions, reusable across
//! stripes) and an apply phase (region arithmetic on the data), reported as
//! throughput over the amount of data the operation touches: B blocks for
//! encode/decode, alpha blocks for repair. All runs are single-threaded and
//! averaged over `runs` repetitions; randomized choices come from the seed.

use std::fmt::Write as _;
use std::hint::black_box;
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pmrc::codec::{
    encode_linear, encode_specific, repair_helper, BlockRole, BlockVector, LinearDecoder,
    MbrDecoder, MsrDecoder, MsrPrecoder, RepairContext, RepairPlan, Share,
};
use pmrc::galois::Field;
use pmrc::linearize::{generator_from_pm, sparsity, systematize, GeneratorMatrix};
use pmrc::pm::{build_sparse, build_vanilla, CodeMatrices, CodeParams, IndexMatrix, Variant};
use pmrc::{Error, Result};

use crate::rs::RsCode;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchOp {
    Encode,
    Decode,
    Repair,
}

impl BenchOp {
    pub fn parse(s: &str) -> Result<BenchOp> {
        match s {
            "encode" => Ok(BenchOp::Encode),
            "decode" => Ok(BenchOp::Decode),
            "repair" => Ok(BenchOp::Repair),
            _ => Err(Error::Parse(format!("unknown operation {s:?}"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            BenchOp::Encode => "encode",
            BenchOp::Decode => "decode",
            BenchOp::Repair => "repair",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Specific,
    Linear,
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Algorithm> {
        match s {
            "specific" => Ok(Algorithm::Specific),
            "linear" => Ok(Algorithm::Linear),
            _ => Err(Error::Parse(format!("unknown algorithm {s:?}"))),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Algorithm::Specific => "specific",
            Algorithm::Linear => "linear",
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct BenchConfig {
    pub op: BenchOp,
    pub algorithm: Algorithm,
    pub systematic: bool,
    pub block_size: usize,
    pub runs: usize,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct BenchResult {
    pub operation: String,
    pub code: String,
    pub block_size: usize,
    pub runs: usize,
    /// One-time cost for encode; mean per-pattern cost for decode/repair.
    pub init_seconds: f64,
    pub throughput_mbs: f64,
    pub failure_pattern_summary: String,
}

impl BenchResult {
    pub fn csv_header() -> &'static str {
        "operation,code,block_size,runs,init_seconds,throughput_mbs,failure_patterns"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{:.6},{:.2},{}",
            self.operation,
            self.code,
            self.block_size,
            self.runs,
            self.init_seconds,
            self.throughput_mbs,
            self.failure_pattern_summary
        )
    }
}

fn code_label(cm: &CodeMatrices, cfg: &BenchConfig) -> String {
    let p = cm.params;
    let sys = if cfg.systematic { "/systematic" } else { "" };
    format!(
        "{}/{}/{}{} w{} n{} k{} d{}",
        p.variant.as_str(),
        cm.construction.as_str(),
        cfg.algorithm.as_str(),
        sys,
        cm.field.width(),
        p.n,
        p.k,
        p.d
    )
}

fn check_cfg(cfg: &BenchConfig, field: &Field) -> Result<()> {
    if cfg.runs == 0 {
        return Err(Error::InvalidParams("runs must be at least 1".into()));
    }
    let symbol = field.symbol_bytes();
    if cfg.block_size == 0 || !cfg.block_size.is_multiple_of(symbol) {
        return Err(Error::BadBlockSize {
            size: cfg.block_size,
            reason: format!("must be a positive multiple of the {symbol}-byte symbol"),
        });
    }
    Ok(())
}

fn random_stripe(rng: &mut ChaCha8Rng, b: usize, block_size: usize) -> BlockVector {
    let blocks = (0..b)
        .map(|_| (0..block_size).map(|_| rng.gen()).collect())
        .collect();
    BlockVector::new(blocks, BlockRole::Data).unwrap()
}

fn mbps(bytes_per_run: usize, runs: usize, total: Duration) -> f64 {
    let secs = total.as_secs_f64().max(1e-9);
    (bytes_per_run as f64 * runs as f64) / secs / 1e6
}

/// k survivors, preferring the systematic nodes 1..k.
fn pick_dc_nodes(survivors: &[usize], k: usize) -> Vec<usize> {
    let mut sorted = survivors.to_vec();
    sorted.sort_unstable();
    sorted
        .iter()
        .copied()
        .filter(|&x| x <= k)
        .chain(sorted.iter().copied().filter(|&x| x > k))
        .take(k)
        .collect()
}

fn sample_failures(rng: &mut ChaCha8Rng, n: usize, max_failures: usize) -> Vec<usize> {
    let count = rng.gen_range(1..=max_failures);
    let mut nodes: Vec<usize> = (1..=n).collect();
    for i in 0..count {
        let j = rng.gen_range(i..n);
        nodes.swap(i, j);
    }
    nodes.truncate(count);
    nodes
}

enum Encoder {
    Linear(GeneratorMatrix),
    Specific,
    SpecificSystematic(MsrPrecoder),
}

impl Encoder {
    fn build(cm: &CodeMatrices, l: &IndexMatrix, cfg: &BenchConfig) -> Result<Encoder> {
        match (cfg.algorithm, cfg.systematic, cm.params.variant) {
            (Algorithm::Linear, true, Variant::Msr) => {
                Ok(Encoder::Linear(systematize(&generator_from_pm(cm, l)?)?))
            }
            (Algorithm::Linear, _, _) => Ok(Encoder::Linear(generator_from_pm(cm, l)?)),
            (Algorithm::Specific, true, Variant::Msr) => {
                Ok(Encoder::SpecificSystematic(MsrPrecoder::new(cm, l)?))
            }
            // MBR is natively systematic; specific encode is the same either way.
            (Algorithm::Specific, _, _) => Ok(Encoder::Specific),
        }
    }

    fn encode(&self, cm: &CodeMatrices, l: &IndexMatrix, x: &BlockVector) -> Result<Vec<Share>> {
        match self {
            Encoder::Linear(gm) => encode_linear(gm, x),
            Encoder::Specific => encode_specific(cm, l, x),
            Encoder::SpecificSystematic(pre) => {
                let z = pre.precode(x)?;
                encode_specific(cm, l, &z)
            }
        }
    }
}

enum PatternDecoder {
    Linear(LinearDecoder),
    Msr(MsrDecoder),
    Mbr(MbrDecoder),
}

fn run_encode(cm: &CodeMatrices, l: &IndexMatrix, cfg: &BenchConfig) -> Result<BenchResult> {
    let p = cm.params;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let x = random_stripe(&mut rng, p.b, cfg.block_size);

    let t0 = Instant::now();
    let encoder = Encoder::build(cm, l, cfg)?;
    let init = t0.elapsed();

    let mut apply = Duration::ZERO;
    for _ in 0..cfg.runs {
        let t = Instant::now();
        let shares = encoder.encode(cm, l, &x)?;
        apply += t.elapsed();
        black_box(&shares);
    }

    Ok(BenchResult {
        operation: "encode".into(),
        code: code_label(cm, cfg),
        block_size: cfg.block_size,
        runs: cfg.runs,
        init_seconds: init.as_secs_f64(),
        throughput_mbs: mbps(p.b * cfg.block_size, cfg.runs, apply),
        failure_pattern_summary: "-".into(),
    })
}

fn run_decode(cm: &CodeMatrices, l: &IndexMatrix, cfg: &BenchConfig) -> Result<BenchResult> {
    let p = cm.params;
    if p.n - p.k < 1 {
        return Err(Error::InvalidParams(
            "decode benchmark needs n > k to erase anything".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let x = random_stripe(&mut rng, p.b, cfg.block_size);

    // Encoding and (for the linear path) the generator are precomputable and
    // excluded from decode initialization.
    let encoder = Encoder::build(cm, l, cfg)?;
    let shares = encoder.encode(cm, l, &x)?;
    let gm = match (&encoder, cfg.algorithm) {
        (Encoder::Linear(gm), _) => Some(gm.clone()),
        (_, Algorithm::Linear) => unreachable!(),
        _ => None,
    };
    let systematic_specific_msr =
        cfg.systematic && cfg.algorithm == Algorithm::Specific && p.variant == Variant::Msr;

    let mut init = Duration::ZERO;
    let mut apply = Duration::ZERO;
    let mut failure_histogram = vec![0usize; p.n - p.k + 1];
    let mut checked = false;

    for _ in 0..cfg.runs {
        let failed = sample_failures(&mut rng, p.n, p.n - p.k);
        failure_histogram[failed.len()] += 1;
        let survivors: Vec<usize> = (1..=p.n).filter(|i| !failed.contains(i)).collect();

        let t = Instant::now();
        let decoder = match cfg.algorithm {
            Algorithm::Linear => {
                PatternDecoder::Linear(LinearDecoder::new(gm.as_ref().unwrap(), &survivors)?)
            }
            Algorithm::Specific => {
                let dc = pick_dc_nodes(&survivors, p.k);
                match p.variant {
                    Variant::Msr => PatternDecoder::Msr(MsrDecoder::new(cm, l, &dc)?),
                    Variant::Mbr => PatternDecoder::Mbr(MbrDecoder::new(cm, l, &dc)?),
                }
            }
        };
        init += t.elapsed();

        let t = Instant::now();
        let decoded = match &decoder {
            PatternDecoder::Linear(dec) => {
                let avail: Vec<Share> = survivors
                    .iter()
                    .map(|&node| shares[node - 1].clone())
                    .collect();
                dec.decode_all(&avail)?
            }
            PatternDecoder::Msr(dec) => {
                let picked: Vec<Share> = dec
                    .dc_nodes()
                    .iter()
                    .map(|&node| shares[node - 1].clone())
                    .collect();
                if systematic_specific_msr {
                    dec.decode_systematic(cm, &picked)?
                } else {
                    dec.decode(&picked)?
                }
            }
            PatternDecoder::Mbr(dec) => {
                let picked: Vec<Share> = dec
                    .dc_nodes()
                    .iter()
                    .map(|&node| shares[node - 1].clone())
                    .collect();
                dec.decode(&picked)?
            }
        };
        apply += t.elapsed();
        if !checked {
            if decoded.blocks != x.blocks {
                return Err(Error::ConstructionInvalid(
                    "decode benchmark produced wrong data".into(),
                ));
            }
            checked = true;
        }
        black_box(&decoded);
    }

    let mut summary = String::new();
    for (count, hits) in failure_histogram.iter().enumerate().skip(1) {
        if *hits > 0 {
            let _ = write!(summary, "{count}:{hits};");
        }
    }
    Ok(BenchResult {
        operation: "decode".into(),
        code: code_label(cm, cfg),
        block_size: cfg.block_size,
        runs: cfg.runs,
        init_seconds: init.as_secs_f64() / cfg.runs as f64,
        throughput_mbs: mbps(p.b * cfg.block_size, cfg.runs, apply),
        failure_pattern_summary: summary.trim_end_matches(';').to_string(),
    })
}

fn run_repair(cm: &CodeMatrices, l: &IndexMatrix, cfg: &BenchConfig) -> Result<BenchResult> {
    let p = cm.params;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let x = random_stripe(&mut rng, p.b, cfg.block_size);
    let encoder = Encoder::build(cm, l, cfg)?;
    let shares = encoder.encode(cm, l, &x)?;

    let mut init = Duration::ZERO;
    let mut apply = Duration::ZERO;
    let mut checked = false;
    for _ in 0..cfg.runs {
        let failed = rng.gen_range(1..=p.n);

        let t = Instant::now();
        let plan = RepairPlan::new(cm, failed, None)?;
        let ctx = RepairContext::new(cm, plan)?;
        init += t.elapsed();

        // The helper sub-computations run sequentially on this one thread.
        let t = Instant::now();
        let symbols = ctx
            .plan()
            .helpers
            .iter()
            .map(|&h| repair_helper(&shares[h - 1], ctx.plan()))
            .collect::<Result<Vec<_>>>()?;
        let rebuilt = ctx.collect(&symbols)?;
        apply += t.elapsed();

        if !checked {
            if rebuilt.blocks != shares[failed - 1].blocks {
                return Err(Error::ConstructionInvalid(
                    "repair benchmark produced a wrong share".into(),
                ));
            }
            checked = true;
        }
        black_box(&rebuilt);
    }

    Ok(BenchResult {
        operation: "repair".into(),
        code: code_label(cm, cfg),
        block_size: cfg.block_size,
        runs: cfg.runs,
        init_seconds: init.as_secs_f64() / cfg.runs as f64,
        throughput_mbs: mbps(p.alpha * cfg.block_size, cfg.runs, apply),
        failure_pattern_summary: format!("single-failure uniform 1..={}", p.n),
    })
}

/// Benchmarks one operation on a product-matrix code.
pub fn run_bench(cm: &CodeMatrices, l: &IndexMatrix, cfg: &BenchConfig) -> Result<BenchResult> {
    check_cfg(cfg, &cm.field)?;
    match cfg.op {
        BenchOp::Encode => run_encode(cm, l, cfg),
        BenchOp::Decode => run_decode(cm, l, cfg),
        BenchOp::Repair => run_repair(cm, l, cfg),
    }
}

/// One result per block size, in the given order.
pub fn sweep_block_size(
    cm: &CodeMatrices,
    l: &IndexMatrix,
    cfg: &BenchConfig,
    sizes: &[usize],
) -> Result<Vec<BenchResult>> {
    if sizes.is_empty() {
        return Err(Error::InvalidParams("no block sizes given".into()));
    }
    sizes
        .iter()
        .map(|&size| {
            run_bench(
                cm,
                l,
                &BenchConfig {
                    block_size: size,
                    ..*cfg
                },
            )
        })
        .collect()
}

/// Indicative Reed-Solomon baseline measurement (one block per node).
pub fn run_bench_rs(
    n: usize,
    k: usize,
    field: &Arc<Field>,
    cfg: &BenchConfig,
) -> Result<BenchResult> {
    check_cfg(cfg, field)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let data: Vec<Vec<u8>> = (0..k)
        .map(|_| (0..cfg.block_size).map(|_| rng.gen()).collect())
        .collect();

    let label = format!("rs w{} n{n} k{k}", field.width());
    match cfg.op {
        BenchOp::Encode => {
            let t0 = Instant::now();
            let rs = RsCode::new(n, k, field)?;
            let init = t0.elapsed();
            let mut apply = Duration::ZERO;
            for _ in 0..cfg.runs {
                let t = Instant::now();
                let encoded = rs.encode(&data)?;
                apply += t.elapsed();
                black_box(&encoded);
            }
            Ok(BenchResult {
                operation: "encode".into(),
                code: label,
                block_size: cfg.block_size,
                runs: cfg.runs,
                init_seconds: init.as_secs_f64(),
                throughput_mbs: mbps(k * cfg.block_size, cfg.runs, apply),
                failure_pattern_summary: "-".into(),
            })
        }
        BenchOp::Decode => {
            let rs = RsCode::new(n, k, field)?;
            let encoded = rs.encode(&data)?;
            let mut init = Duration::ZERO;
            let mut apply = Duration::ZERO;
            for _ in 0..cfg.runs {
                let failed = sample_failures(&mut rng, n, n - k);
                let survivors: Vec<usize> = (1..=n).filter(|i| !failed.contains(i)).collect();
                let t = Instant::now();
                let dec = rs.decoder(&survivors)?;
                init += t.elapsed();
                let blocks: Vec<&[u8]> = dec
                    .nodes
                    .iter()
                    .map(|&x| encoded[x - 1].as_slice())
                    .collect();
                let t = Instant::now();
                let out = dec.decode(&blocks)?;
                apply += t.elapsed();
                black_box(&out);
            }
            Ok(BenchResult {
                operation: "decode".into(),
                code: label,
                block_size: cfg.block_size,
                runs: cfg.runs,
                init_seconds: init.as_secs_f64() / cfg.runs as f64,
                throughput_mbs: mbps(k * cfg.block_size, cfg.runs, apply),
                failure_pattern_summary: format!("1..={} failures uniform", n - k),
            })
        }
        BenchOp::Repair => {
            let rs = RsCode::new(n, k, field)?;
            let encoded = rs.encode(&data)?;
            let mut init = Duration::ZERO;
            let mut apply = Duration::ZERO;
            for _ in 0..cfg.runs {
                let failed = rng.gen_range(1..=n);
                let survivors: Vec<usize> = (1..=n).filter(|&i| i != failed).collect();
                let t = Instant::now();
                let plan = rs.repair_plan(failed, &survivors)?;
                init += t.elapsed();
                let blocks: Vec<&[u8]> = plan
                    .nodes
                    .iter()
                    .map(|&x| encoded[x - 1].as_slice())
                    .collect();
                let t = Instant::now();
                let out = plan.rebuild(&blocks)?;
                apply += t.elapsed();
                black_box(&out);
            }
            Ok(BenchResult {
                operation: "repair".into(),
                code: label,
                block_size: cfg.block_size,
                runs: cfg.runs,
                init_seconds: init.as_secs_f64() / cfg.runs as f64,
                throughput_mbs: mbps(cfg.block_size, cfg.runs, apply),
                failure_pattern_summary: format!("single-failure uniform 1..={n}"),
            })
        }
    }
}

/// Sparsity percentages for the four MSR construction/systematic
/// combinations at one k (n = 2k-1 family).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SparsityRow {
    pub k: usize,
    pub vanilla: u32,
    pub sparse: u32,
    pub vanilla_systematic: u32,
    pub sparse_systematic: u32,
}

pub fn sparsity_rows(ks: &[usize], field: &Arc<Field>) -> Result<Vec<SparsityRow>> {
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let params = CodeParams::new(2 * k - 1, k, 2 * k - 2, Variant::Msr)?;
        let vanilla = build_vanilla(params, field)?;
        let sparse = build_sparse(params, field)?;
        let gv = generator_from_pm(&vanilla, &vanilla.index_matrix())?;
        let gs = generator_from_pm(&sparse, &sparse.index_matrix())?;
        rows.push(SparsityRow {
            k,
            vanilla: sparsity(&gv).percent_truncated(),
            sparse: sparsity(&gs).percent_truncated(),
            vanilla_systematic: sparsity(&systematize(&gv)?).percent_truncated(),
            sparse_systematic: sparsity(&systematize(&gs)?).percent_truncated(),
        });
    }
    Ok(rows)
}

pub fn format_sparsity_table(rows: &[SparsityRow]) -> String {
    let mut out = String::from("generator zeros (%), n=2k-1 family\n");
    let mut header = String::from("code");
    for r in rows {
        let _ = write!(header, "\tk={}", r.k);
    }
    out.push_str(&header);
    out.push('\n');
    for (name, get) in [
        (
            "vanilla msr (non-systematic)",
            (|r: &SparsityRow| r.vanilla) as fn(&SparsityRow) -> u32,
        ),
        ("sparse msr (non-systematic)", |r| r.sparse),
        ("vanilla msr (systematic)", |r| r.vanilla_systematic),
        ("sparse msr (systematic)", |r| r.sparse_systematic),
    ] {
        let mut line = String::from(name);
        for r in rows {
            let _ = write!(line, "\t{}", get(r));
        }
        out.push_str(&line);
        out.push('\n');
    }
    out
}
