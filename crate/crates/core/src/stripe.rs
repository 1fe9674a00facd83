//! File striping: split a file into stripes of B blocks, encode each stripe,
//! and persist one self-describing shard file per node. Shards carry enough
//! header to rebuild the code, so any admissible subset of them restores the
//! original file and any d of them regenerate a lost shard.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use crate::codec::{
    encode_linear, repair_helper, BlockRole, BlockVector, LinearDecoder, RepairContext, RepairPlan,
    Share,
};
use crate::galois::Field;
use crate::linearize::{generator_from_pm, systematize, GeneratorMatrix};
use crate::pm::{build, CodeMatrices, CodeParams, Construction, Variant};
use crate::{Error, Result};

pub const SHARD_MAGIC: [u8; 4] = *b"PMRC";
pub const SHARD_VERSION: u8 = 1;
/// Fixed header length in bytes.
pub const HEADER_LEN: usize = 33;
/// Default block size; 16 KB keeps the working set inside L1.
pub const DEFAULT_BLOCK_SIZE: usize = 16384;

/// Fixed-layout little-endian shard header.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ShardHeader {
    pub w: u8,
    pub variant: Variant,
    pub construction: Construction,
    pub n: u16,
    pub k: u16,
    pub d: u16,
    pub node_index: u16,
    pub block_size: u32,
    pub original_length: u64,
    pub stripe_count: u32,
    pub systematic: bool,
}

impl ShardHeader {
    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut out = [0u8; HEADER_LEN];
        out[0..4].copy_from_slice(&SHARD_MAGIC);
        out[4] = SHARD_VERSION;
        out[5] = self.w;
        out[6] = match self.variant {
            Variant::Msr => 0,
            Variant::Mbr => 1,
        };
        out[7] = match self.construction {
            Construction::Vanilla => 0,
            Construction::Sparse => 1,
        };
        out[8..10].copy_from_slice(&self.n.to_le_bytes());
        out[10..12].copy_from_slice(&self.k.to_le_bytes());
        out[12..14].copy_from_slice(&self.d.to_le_bytes());
        out[14..16].copy_from_slice(&self.node_index.to_le_bytes());
        out[16..20].copy_from_slice(&self.block_size.to_le_bytes());
        out[20..28].copy_from_slice(&self.original_length.to_le_bytes());
        out[28..32].copy_from_slice(&self.stripe_count.to_le_bytes());
        out[32] = u8::from(self.systematic);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<ShardHeader> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::BadHeader(format!(
                "{} bytes is too short for a shard header",
                bytes.len()
            )));
        }
        if bytes[0..4] != SHARD_MAGIC {
            return Err(Error::BadHeader("bad magic".into()));
        }
        if bytes[4] != SHARD_VERSION {
            return Err(Error::BadHeader(format!(
                "unsupported version {}",
                bytes[4]
            )));
        }
        let variant = match bytes[6] {
            0 => Variant::Msr,
            1 => Variant::Mbr,
            v => return Err(Error::BadHeader(format!("bad variant byte {v}"))),
        };
        let construction = match bytes[7] {
            0 => Construction::Vanilla,
            1 => Construction::Sparse,
            v => return Err(Error::BadHeader(format!("bad construction byte {v}"))),
        };
        let u16le = |off: usize| u16::from_le_bytes([bytes[off], bytes[off + 1]]);
        let header = ShardHeader {
            w: bytes[5],
            variant,
            construction,
            n: u16le(8),
            k: u16le(10),
            d: u16le(12),
            node_index: u16le(14),
            block_size: u32::from_le_bytes(bytes[16..20].try_into().unwrap()),
            original_length: u64::from_le_bytes(bytes[20..28].try_into().unwrap()),
            stripe_count: u32::from_le_bytes(bytes[28..32].try_into().unwrap()),
            systematic: bytes[32] != 0,
        };
        header.params()?; // parameter sanity
        if header.node_index == 0 || header.node_index > header.n {
            return Err(Error::BadHeader(format!(
                "node index {} out of range 1..={}",
                header.node_index, header.n
            )));
        }
        let symbol = (header.w / 8) as u32;
        if symbol == 0 || header.block_size == 0 || !header.block_size.is_multiple_of(symbol) {
            return Err(Error::BadHeader(format!(
                "block size {} not aligned to the symbol size",
                header.block_size
            )));
        }
        Ok(header)
    }

    pub fn params(&self) -> Result<CodeParams> {
        CodeParams::new(
            self.n as usize,
            self.k as usize,
            self.d as usize,
            self.variant,
        )
    }

    /// Everything but the node index must agree across shards of one encoding.
    fn consistent_with(&self, other: &ShardHeader) -> bool {
        let mut a = *self;
        let mut b = *other;
        a.node_index = 0;
        b.node_index = 0;
        a == b
    }

    /// Rebuilds the (canonical) code and generator this shard was encoded
    /// with.
    pub fn rebuild_code(&self) -> Result<(CodeMatrices, GeneratorMatrix)> {
        let params = self.params()?;
        let field = Arc::new(Field::new(self.w as u32)?);
        let cm = build(params, self.construction, &field)?;
        let l = cm.index_matrix();
        let gm = generator_from_pm(&cm, &l)?;
        let gm = if self.systematic && self.variant == Variant::Msr {
            systematize(&gm)?
        } else {
            gm
        };
        Ok((cm, gm))
    }
}

/// Shard file name for a node: `shard_NNN.pmrc`.
pub fn shard_file_name(node: usize) -> String {
    format!("shard_{node:03}.pmrc")
}

struct ShardFile {
    header: ShardHeader,
    payload: Vec<u8>,
}

impl ShardFile {
    fn read(path: &Path) -> Result<ShardFile> {
        let bytes = fs::read(path)?;
        let header = ShardHeader::from_bytes(&bytes)?;
        let payload = bytes[HEADER_LEN..].to_vec();
        let expect =
            header.stripe_count as usize * header.params()?.alpha * header.block_size as usize;
        if payload.len() != expect {
            return Err(Error::BadHeader(format!(
                "payload is {} bytes, header implies {expect}",
                payload.len()
            )));
        }
        Ok(ShardFile { header, payload })
    }

    fn stripe_share(&self, stripe: usize, alpha: usize) -> Share {
        let bs = self.header.block_size as usize;
        let start = stripe * alpha * bs;
        let blocks = (0..alpha)
            .map(|j| self.payload[start + j * bs..start + (j + 1) * bs].to_vec())
            .collect();
        Share {
            node_index: self.header.node_index as usize,
            blocks,
            stripe_id: stripe as u64,
        }
    }
}

/// Splits `input` into stripes of B blocks (zero-padded), encodes each one,
/// and writes the n shard files into `out_dir`. Returns the shard paths in
/// node order.
///
/// `systematic` selects the G*Gtilde^-1 form for MSR codes; MBR codes are
/// natively systematic and always record the flag as set.
pub fn split_and_encode(
    input: &Path,
    out_dir: &Path,
    cm: &CodeMatrices,
    block_size: usize,
    systematic: bool,
) -> Result<Vec<PathBuf>> {
    let p = cm.params;
    let symbol = cm.field.symbol_bytes();
    if block_size == 0 || !block_size.is_multiple_of(symbol) {
        return Err(Error::BadBlockSize {
            size: block_size,
            reason: format!("must be a positive multiple of the {symbol}-byte symbol"),
        });
    }
    let data = fs::read(input)?;
    let stripe_bytes = p.b * block_size;
    let stripe_count = data.len().div_ceil(stripe_bytes);

    let l = cm.index_matrix();
    let gm = generator_from_pm(cm, &l)?;
    let (gm, systematic_flag) = match (systematic, p.variant) {
        (true, Variant::Msr) => (systematize(&gm)?, true),
        (_, Variant::Mbr) => (gm, true),
        (false, _) => (gm, false),
    };

    let mut payloads: Vec<Vec<u8>> = vec![Vec::new(); p.n];
    let mut stripe = vec![0u8; stripe_bytes];
    for s in 0..stripe_count {
        stripe.fill(0);
        let start = s * stripe_bytes;
        let end = (start + stripe_bytes).min(data.len());
        stripe[..end - start].copy_from_slice(&data[start..end]);
        let blocks: Vec<Vec<u8>> = stripe.chunks(block_size).map(|c| c.to_vec()).collect();
        let x = BlockVector::new(blocks, BlockRole::Data)?;
        for share in encode_linear(&gm, &x)? {
            let node = share.node_index;
            for block in &share.blocks {
                payloads[node - 1].extend_from_slice(block);
            }
        }
    }

    let mut paths = Vec::with_capacity(p.n);
    for node in 1..=p.n {
        let header = ShardHeader {
            w: cm.field.width() as u8,
            variant: p.variant,
            construction: cm.construction,
            n: p.n as u16,
            k: p.k as u16,
            d: p.d as u16,
            node_index: node as u16,
            block_size: block_size as u32,
            original_length: data.len() as u64,
            stripe_count: stripe_count as u32,
            systematic: systematic_flag,
        };
        let path = out_dir.join(shard_file_name(node));
        let mut bytes = Vec::with_capacity(HEADER_LEN + payloads[node - 1].len());
        bytes.extend_from_slice(&header.to_bytes());
        bytes.append(&mut payloads[node - 1]);
        fs::write(&path, bytes)?;
        paths.push(path);
    }
    Ok(paths)
}

fn read_consistent_shards(paths: &[PathBuf]) -> Result<Vec<ShardFile>> {
    if paths.is_empty() {
        return Err(Error::InsufficientShards { have: 0, need: 1 });
    }
    let mut shards = Vec::with_capacity(paths.len());
    for path in paths {
        shards.push(ShardFile::read(path)?);
    }
    let first = shards[0].header;
    for s in &shards[1..] {
        if !s.header.consistent_with(&first) {
            return Err(Error::HeaderMismatch(format!(
                "shard for node {} comes from a different encoding",
                s.header.node_index
            )));
        }
    }
    let mut seen = vec![false; first.n as usize + 1];
    for s in &shards {
        let idx = s.header.node_index as usize;
        if seen[idx] {
            return Err(Error::HeaderMismatch(format!(
                "two shards claim node {idx}"
            )));
        }
        seen[idx] = true;
    }
    Ok(shards)
}

/// Decodes the original file from any admissible subset of shards and
/// writes it to `output`. With all systematic shards present this is a pure
/// copy (no decode arithmetic).
pub fn reassemble(shard_paths: &[PathBuf], output: &Path) -> Result<()> {
    let shards = read_consistent_shards(shard_paths)?;
    let header = shards[0].header;
    let params = header.params()?;
    if shards.len() < params.k {
        return Err(Error::InsufficientShards {
            have: shards.len(),
            need: params.k,
        });
    }
    let (_, gm) = header.rebuild_code()?;
    let nodes: Vec<usize> = shards
        .iter()
        .map(|s| s.header.node_index as usize)
        .collect();
    let decoder = LinearDecoder::new(&gm, &nodes)?;

    let mut out = Vec::with_capacity(header.original_length as usize);
    for stripe in 0..header.stripe_count as usize {
        let shares: Vec<Share> = shards
            .iter()
            .map(|s| s.stripe_share(stripe, params.alpha))
            .collect();
        let decoded = decoder.decode_all(&shares)?;
        for block in decoded.blocks {
            out.extend_from_slice(&block);
        }
    }
    out.truncate(header.original_length as usize);
    fs::write(output, out)?;
    Ok(())
}

/// Regenerates the shard of `failed` from d surviving shards and writes it
/// to `out_dir`. The result is byte-identical to the lost file.
pub fn repair_shard(surviving_paths: &[PathBuf], failed: usize, out_dir: &Path) -> Result<PathBuf> {
    let shards = read_consistent_shards(surviving_paths)?;
    let header = shards[0].header;
    let params = header.params()?;
    if shards
        .iter()
        .any(|s| s.header.node_index as usize == failed)
    {
        return Err(Error::BadRepairPlan(format!(
            "node {failed} is present among the survivors"
        )));
    }
    if failed == 0 || failed > params.n {
        return Err(Error::RowOutOfRange {
            index: failed,
            rows: params.n,
        });
    }
    if shards.len() < params.d {
        return Err(Error::InsufficientShards {
            have: shards.len(),
            need: params.d,
        });
    }
    let (cm, _) = header.rebuild_code()?;

    // d lowest-indexed survivors act as helpers.
    let mut by_index: Vec<&ShardFile> = shards.iter().collect();
    by_index.sort_by_key(|s| s.header.node_index);
    let helpers: Vec<&ShardFile> = by_index.into_iter().take(params.d).collect();
    let helper_nodes: Vec<usize> = helpers
        .iter()
        .map(|s| s.header.node_index as usize)
        .collect();
    let plan = RepairPlan::new(&cm, failed, Some(&helper_nodes))?;
    let ctx = RepairContext::new(&cm, plan)?;

    let mut payload = Vec::new();
    for stripe in 0..header.stripe_count as usize {
        let symbols = helpers
            .iter()
            .map(|s| repair_helper(&s.stripe_share(stripe, params.alpha), ctx.plan()))
            .collect::<Result<Vec<_>>>()?;
        let share = ctx.collect(&symbols)?;
        for block in &share.blocks {
            payload.extend_from_slice(block);
        }
    }

    let mut regenerated = header;
    regenerated.node_index = failed as u16;
    let path = out_dir.join(shard_file_name(failed));
    let mut bytes = Vec::with_capacity(HEADER_LEN + payload.len());
    bytes.extend_from_slice(&regenerated.to_bytes());
    bytes.append(&mut payload);
    fs::write(&path, bytes)?;
    Ok(path)
}
