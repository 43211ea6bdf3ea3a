//! Block-partitioned hypervectors and the geometry that governs them.
//!
//! An `L`-bit hypervector is split into `N` blocks of `q = L / N` bits. Block
//! `b` is a register under its own primitive generator `G_b` and seed; the
//! `(G_b, seed_b)` pair is the block's identity.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::{primitive_polys, BlockState, Gf2Poly, Lfsr};

const FNV_OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
const FNV_PRIME: u64 = 0x0000_0100_0000_01b3;

/// Number of diffusion rounds applied when deriving an item vector.
pub const ITEM_DIFFUSION_ROUNDS: usize = 3;

const CONFIG_MAGIC: &str = "gf2hdc-config v1";

#[derive(Clone, Copy, Debug)]
pub(crate) struct Fnv1a(u64);

impl Fnv1a {
    pub(crate) fn new() -> Self {
        Fnv1a(FNV_OFFSET)
    }

    pub(crate) fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= b as u64;
            self.0 = self.0.wrapping_mul(FNV_PRIME);
        }
    }

    pub(crate) fn finish(self) -> u64 {
        self.0
    }
}

/// FNV-1a, 64-bit.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = Fnv1a::new();
    h.write(bytes);
    h.finish()
}

/// Per-block identity: generator polynomial and seed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct BlockSpec {
    pub generator: Gf2Poly,
    pub seed: BlockState,
}

/// Engine geometry: `L = N * q`, one primitive generator and seed per block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockPolynomialConfig {
    total_bits: usize,
    block_count: usize,
    block_bits: u32,
    blocks: Vec<BlockSpec>,
    lfsrs: Vec<Lfsr>,
    config_id: u64,
}

impl BlockPolynomialConfig {
    /// Derives a geometry from `(L, N, master_seed)`.
    ///
    /// Generators come from the ascending primitive-polynomial library of
    /// degree `q`, cycling when `N` exceeds the library; seeds are drawn from a
    /// ChaCha8 stream keyed by `master_seed` and redrawn until every
    /// `(generator, seed)` pair is unique.
    pub fn new(total_bits: usize, block_count: usize, master_seed: u64) -> Result<Self> {
        let q = check_geometry(total_bits, block_count)?;
        let library = primitive_polys(q, block_count)?;
        let pairs_available = (library.polys.len() as u128) << q;
        if (block_count as u128) > pairs_available {
            return Err(Error::InvalidGeometry(format!(
                "{block_count} blocks need distinct (generator, seed) pairs but only {pairs_available} exist at q={q}"
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
        let mask = state_mask(q);
        let mut used = std::collections::HashSet::with_capacity(block_count);
        let mut blocks = Vec::with_capacity(block_count);
        for b in 0..block_count {
            let generator = library.polys[b % library.polys.len()];
            let seed = loop {
                let candidate = rng.gen::<u32>() & mask;
                if used.insert((generator, candidate)) {
                    break candidate;
                }
            };
            blocks.push(BlockSpec { generator, seed });
        }
        Self::from_blocks(total_bits, block_count, blocks)
    }

    /// Assembles a geometry from explicit per-block specs, validating every
    /// invariant.
    pub fn from_blocks(total_bits: usize, block_count: usize, blocks: Vec<BlockSpec>) -> Result<Self> {
        let q = check_geometry(total_bits, block_count)?;
        if blocks.len() != block_count {
            return Err(Error::InvalidGeometry(format!(
                "expected {block_count} block specs, got {}",
                blocks.len()
            )));
        }
        let mut seen = std::collections::HashSet::with_capacity(block_count);
        let mut lfsrs = Vec::with_capacity(block_count);
        for (b, spec) in blocks.iter().enumerate() {
            if spec.generator.degree() != Some(q) {
                return Err(Error::InvalidGeometry(format!(
                    "block {b}: generator {} does not have degree {q}",
                    spec.generator
                )));
            }
            if !crate::gf2::is_primitive(spec.generator)? {
                return Err(Error::InvalidGeometry(format!(
                    "block {b}: generator {} is not primitive",
                    spec.generator
                )));
            }
            if spec.seed & !state_mask(q) != 0 {
                return Err(Error::InvalidGeometry(format!("block {b}: seed wider than {q} bits")));
            }
            if !seen.insert(*spec) {
                return Err(Error::InvalidGeometry(format!(
                    "block {b}: (generator, seed) pair repeats an earlier block"
                )));
            }
            lfsrs.push(Lfsr::new(spec.generator)?);
        }
        let config_id = fingerprint(total_bits, block_count, q, &blocks);
        Ok(BlockPolynomialConfig {
            total_bits,
            block_count,
            block_bits: q,
            blocks,
            lfsrs,
            config_id,
        })
    }

    /// `paper` (L=1000, N=100) or `default` (L=1024, N=64).
    pub fn named(name: &str, master_seed: u64) -> Result<Self> {
        match name {
            "paper" => Self::new(1000, 100, master_seed),
            "default" => Self::new(1024, 64, master_seed),
            other => Err(Error::InvalidGeometry(format!("unknown named config `{other}`"))),
        }
    }

    pub fn total_bits(&self) -> usize {
        self.total_bits
    }

    pub fn block_count(&self) -> usize {
        self.block_count
    }

    pub fn block_bits(&self) -> u32 {
        self.block_bits
    }

    pub fn blocks(&self) -> &[BlockSpec] {
        &self.blocks
    }

    pub fn lfsr(&self, block: usize) -> &Lfsr {
        &self.lfsrs[block]
    }

    pub fn config_id(&self) -> u64 {
        self.config_id
    }

    pub fn distinct_generators(&self) -> usize {
        let set: std::collections::HashSet<_> = self.blocks.iter().map(|b| b.generator).collect();
        set.len()
    }

    pub fn block_mask(&self) -> BlockState {
        state_mask(self.block_bits)
    }

    fn check(&self, v: &Hypervector) -> Result<()> {
        if v.config_id != self.config_id {
            return Err(Error::ConfigMismatch {
                expected: self.config_id,
                found: v.config_id,
            });
        }
        Ok(())
    }

    pub fn zero(&self) -> Hypervector {
        Hypervector {
            config_id: self.config_id,
            blocks: vec![0; self.block_count],
        }
    }

    /// Wraps raw block values, rejecting any that overflow `q` bits.
    pub fn hypervector(&self, blocks: Vec<BlockState>) -> Result<Hypervector> {
        if blocks.len() != self.block_count {
            return Err(Error::DimensionMismatch {
                left: self.block_count,
                right: blocks.len(),
            });
        }
        let mask = self.block_mask();
        if let Some(b) = blocks.iter().position(|&s| s & !mask != 0) {
            return Err(Error::InvalidGeometry(format!("block {b} wider than {} bits", self.block_bits)));
        }
        Ok(Hypervector {
            config_id: self.config_id,
            blocks,
        })
    }

    fn map_blocks(&self, v: &Hypervector, f: impl Fn(&Lfsr, BlockState) -> BlockState) -> Result<Hypervector> {
        self.check(v)?;
        let blocks = self
            .lfsrs
            .iter()
            .zip(&v.blocks)
            .map(|(lfsr, &s)| f(lfsr, s))
            .collect();
        Ok(Hypervector {
            config_id: self.config_id,
            blocks,
        })
    }

    /// One LFSR step per block under that block's generator.
    pub fn shift(&self, v: &Hypervector) -> Result<Hypervector> {
        self.map_blocks(v, |l, s| l.step(s))
    }

    pub fn shift_inv(&self, v: &Hypervector) -> Result<Hypervector> {
        self.map_blocks(v, |l, s| l.step_inv(s))
    }

    /// Block-wise `x^q * s mod G_b`.
    pub fn diffuse(&self, v: &Hypervector) -> Result<Hypervector> {
        self.map_blocks(v, |l, s| l.diffuse(s))
    }

    pub fn diffuse_inv(&self, v: &Hypervector) -> Result<Hypervector> {
        self.map_blocks(v, |l, s| l.diffuse_inv(s))
    }

    /// Deterministic vocabulary vector for `token`.
    ///
    /// Block `b` starts from `seed_b XOR low_q(FNV-1a-64(token || b_le32))`
    /// and is diffused three times under `G_b`.
    pub fn item_vector(&self, token: &[u8]) -> Result<Hypervector> {
        if token.is_empty() {
            return Err(Error::EmptyToken);
        }
        let mask = self.block_mask() as u64;
        let mut prefix = Fnv1a::new();
        prefix.write(token);
        let blocks = self
            .blocks
            .iter()
            .zip(&self.lfsrs)
            .enumerate()
            .map(|(b, (spec, lfsr))| {
                let mut h = prefix;
                h.write(&(b as u32).to_le_bytes());
                let start = spec.seed ^ (h.finish() & mask) as BlockState;
                (0..ITEM_DIFFUSION_ROUNDS).fold(start, |s, _| lfsr.diffuse(s))
            })
            .collect();
        Ok(Hypervector {
            config_id: self.config_id,
            blocks,
        })
    }

    /// Uniformly random hypervector; used by the trial harness.
    pub fn random<R: Rng + ?Sized>(&self, rng: &mut R) -> Hypervector {
        let mask = self.block_mask();
        Hypervector {
            config_id: self.config_id,
            blocks: (0..self.block_count).map(|_| rng.gen::<u32>() & mask).collect(),
        }
    }

    /// Hex digits per block in the compact encoding.
    pub fn hex_width(&self) -> usize {
        (self.block_bits as usize).div_ceil(4)
    }

    /// Blocks concatenated as fixed-width lowercase hex, block 0 first.
    pub fn encode_hex(&self, v: &Hypervector) -> Result<String> {
        self.check(v)?;
        let w = self.hex_width();
        let mut out = String::with_capacity(w * self.block_count);
        for s in &v.blocks {
            write!(out, "{s:0w$x}").expect("writing to a String");
        }
        Ok(out)
    }

    pub fn decode_hex(&self, text: &str) -> Result<Hypervector> {
        let w = self.hex_width();
        if text.len() != w * self.block_count || !text.is_ascii() {
            return Err(Error::parse(format!(
                "expected {} hex digits, got {}",
                w * self.block_count,
                text.len()
            )));
        }
        let blocks = (0..self.block_count)
            .map(|b| {
                let chunk = &text[b * w..(b + 1) * w];
                BlockState::from_str_radix(chunk, 16).map_err(|_| Error::parse(format!("bad hex block `{chunk}`")))
            })
            .collect::<Result<Vec<_>>>()?;
        self.hypervector(blocks)
    }

    /// `config_id` line, then one line of space-separated block values.
    pub fn to_text(&self, v: &Hypervector) -> Result<String> {
        self.check(v)?;
        let w = self.hex_width();
        let body: Vec<String> = v.blocks.iter().map(|s| format!("{s:0w$x}")).collect();
        Ok(format!("{:#018x}\n{}\n", self.config_id, body.join(" ")))
    }

    pub fn from_text(&self, text: &str) -> Result<Hypervector> {
        let mut lines = text.lines();
        let id_line = lines.next().ok_or_else(|| Error::parse("missing config_id line"))?;
        let id = parse_hex_u64(id_line.trim())?;
        if id != self.config_id {
            return Err(Error::ConfigMismatch {
                expected: self.config_id,
                found: id,
            });
        }
        let body = lines.next().ok_or_else(|| Error::parse("missing block line"))?;
        let blocks = body
            .split_whitespace()
            .map(|t| BlockState::from_str_radix(t, 16).map_err(|_| Error::parse(format!("bad hex block `{t}`"))))
            .collect::<Result<Vec<_>>>()?;
        self.hypervector(blocks)
    }

    /// Full serialization, polynomials in `deg=.. coeffs=0x..` form.
    pub fn to_text_format(&self) -> String {
        let mut out = String::new();
        writeln!(out, "{CONFIG_MAGIC}").unwrap();
        writeln!(
            out,
            "total_bits={} block_count={} block_bits={} config_id={:#018x}",
            self.total_bits, self.block_count, self.block_bits, self.config_id
        )
        .unwrap();
        for (b, spec) in self.blocks.iter().enumerate() {
            writeln!(out, "block={b} {} seed={:#x}", spec.generator, spec.seed).unwrap();
        }
        out
    }

    /// Parses `to_text_format` output; the embedded `config_id` must match
    /// the recomputed fingerprint.
    pub fn parse_text_format(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty() && !l.starts_with('#'));
        if lines.next().map(str::trim) != Some(CONFIG_MAGIC) {
            return Err(Error::parse(format!("missing `{CONFIG_MAGIC}` header")));
        }
        let header = lines.next().ok_or_else(|| Error::parse("missing geometry line"))?;
        let mut total_bits = None;
        let mut block_count = None;
        let mut declared_q = None;
        let mut declared_id = None;
        for field in header.split_whitespace() {
            let (k, v) = field
                .split_once('=')
                .ok_or_else(|| Error::parse(format!("bad field `{field}`")))?;
            match k {
                "total_bits" => total_bits = Some(parse_usize(v)?),
                "block_count" => block_count = Some(parse_usize(v)?),
                "block_bits" => declared_q = Some(parse_usize(v)?),
                "config_id" => declared_id = Some(parse_hex_u64(v)?),
                _ => return Err(Error::parse(format!("unknown geometry field `{k}`"))),
            }
        }
        let (total_bits, block_count) = match (total_bits, block_count) {
            (Some(l), Some(n)) => (l, n),
            _ => return Err(Error::parse("geometry line needs total_bits and block_count")),
        };
        let mut blocks = Vec::with_capacity(block_count);
        for (expected, line) in lines.enumerate() {
            let rest = line
                .strip_prefix("block=")
                .ok_or_else(|| Error::parse(format!("expected block line, got `{line}`")))?;
            let (idx, rest) = rest.split_once(' ').ok_or_else(|| Error::parse("truncated block line"))?;
            if parse_usize(idx)? != expected {
                return Err(Error::parse(format!("block lines out of order at `{line}`")));
            }
            let (poly, seed) = rest
                .rsplit_once(" seed=")
                .ok_or_else(|| Error::parse(format!("block line without seed: `{line}`")))?;
            let generator: Gf2Poly = poly.parse()?;
            let seed = parse_hex_u64(seed)?;
            let seed = BlockState::try_from(seed).map_err(|_| Error::parse("seed exceeds 32 bits"))?;
            blocks.push(BlockSpec { generator, seed });
        }
        let cfg = Self::from_blocks(total_bits, block_count, blocks)?;
        if let Some(q) = declared_q {
            if q != cfg.block_bits as usize {
                return Err(Error::parse(format!("declared block_bits {q} != {}", cfg.block_bits)));
            }
        }
        if let Some(id) = declared_id {
            if id != cfg.config_id {
                return Err(Error::ConfigMismatch {
                    expected: id,
                    found: cfg.config_id,
                });
            }
        }
        Ok(cfg)
    }
}

fn check_geometry(total_bits: usize, block_count: usize) -> Result<u32> {
    if block_count == 0 || !total_bits.is_multiple_of(block_count) {
        return Err(Error::InvalidGeometry(format!(
            "L={total_bits} is not divisible into N={block_count} blocks"
        )));
    }
    let q = total_bits / block_count;
    if !(2..=32).contains(&q) {
        return Err(Error::InvalidGeometry(format!("block width q={q} outside 2..=32")));
    }
    Ok(q as u32)
}

fn state_mask(q: u32) -> BlockState {
    ((1u64 << q) - 1) as BlockState
}

fn fingerprint(total_bits: usize, block_count: usize, q: u32, blocks: &[BlockSpec]) -> u64 {
    let mut h = Fnv1a::new();
    h.write(&(total_bits as u64).to_le_bytes());
    h.write(&(block_count as u64).to_le_bytes());
    h.write(&(q as u64).to_le_bytes());
    for spec in blocks {
        h.write(&spec.generator.mask().to_le_bytes());
        h.write(&spec.seed.to_le_bytes());
    }
    h.finish()
}

pub(crate) fn parse_hex_u64(s: &str) -> Result<u64> {
    let digits = s.strip_prefix("0x").unwrap_or(s);
    u64::from_str_radix(digits, 16).map_err(|_| Error::parse(format!("bad hex value `{s}`")))
}

fn parse_usize(s: &str) -> Result<usize> {
    s.parse().map_err(|_| Error::parse(format!("bad integer `{s}`")))
}

/// An `N`-block value tied to one geometry by its `config_id`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Hypervector {
    config_id: u64,
    blocks: Vec<BlockState>,
}

impl Hypervector {
    pub fn config_id(&self) -> u64 {
        self.config_id
    }

    pub fn blocks(&self) -> &[BlockState] {
        &self.blocks
    }

    pub fn block(&self, b: usize) -> BlockState {
        self.blocks[b]
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.iter().all(|&s| s == 0)
    }

    /// Total popcount.
    pub fn weight(&self) -> u32 {
        self.blocks.iter().map(|s| s.count_ones()).sum()
    }

    fn same_config(&self, other: &Hypervector) -> Result<()> {
        if self.config_id != other.config_id {
            return Err(Error::ConfigMismatch {
                expected: self.config_id,
                found: other.config_id,
            });
        }
        Ok(())
    }

    pub fn xor(&self, other: &Hypervector) -> Result<Hypervector> {
        let mut out = self.clone();
        out.xor_assign(other)?;
        Ok(out)
    }

    pub fn xor_assign(&mut self, other: &Hypervector) -> Result<()> {
        self.same_config(other)?;
        for (a, b) in self.blocks.iter_mut().zip(&other.blocks) {
            *a ^= b;
        }
        Ok(())
    }

    pub fn hamming(&self, other: &Hypervector) -> Result<u32> {
        self.same_config(other)?;
        Ok(self
            .blocks
            .iter()
            .zip(&other.blocks)
            .map(|(a, b)| (a ^ b).count_ones())
            .sum())
    }

    pub fn block_hamming(&self, other: &Hypervector, block: usize) -> Result<u32> {
        self.same_config(other)?;
        if block >= self.blocks.len() {
            return Err(Error::BlockOutOfRange {
                index: block,
                count: self.blocks.len(),
            });
        }
        Ok((self.blocks[block] ^ other.blocks[block]).count_ones())
    }
}

/// Monotone counter behind fresh Entry Address allocation.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct EaAllocator {
    next: u64,
}

impl EaAllocator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Resume from a persisted counter.
    pub fn resume(next: u64) -> Self {
        EaAllocator { next }
    }

    pub fn next_index(&self) -> u64 {
        self.next
    }

    /// Draws the next address. The namespace is `\0ea\0` followed by the
    /// counter, which no printable token can collide with.
    pub fn fresh_ea(&mut self, cfg: &BlockPolynomialConfig) -> Hypervector {
        let mut token = Vec::with_capacity(12);
        token.extend_from_slice(b"\0ea\0");
        token.extend_from_slice(&self.next.to_le_bytes());
        self.next += 1;
        cfg.item_vector(&token).expect("EA token is never empty")
    }
}
