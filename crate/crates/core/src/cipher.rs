//! Symmetric-key cipher induced by a linear list-source code, and the
//! two-phase hybrid protocol built on it.
//!
//! Single block: `Enc(x, K) = (H x, (pos(x) + K) mod q^k)`.
//!
//! Two-phase: the plaintext is cut into blocks of `n` symbols. Phase 1
//! publishes every syndrome `H x`; phase 2 sends the digits `D x` through a
//! separate cipher `Enc'` (a keystream XOR). Since `pos(x)` is the integer
//! value of `D x`, the phase-2 payload of a block is `pos(x)` written in
//! `⌈k log2 q⌉` bits.
//!
//! # Container
//!
//! All integers little-endian.
//!
//! | offset | size | field                                         |
//! |-------:|-----:|-----------------------------------------------|
//! | 0      | 4    | magic `LSC1`                                  |
//! | 4      | 1    | version (1)                                   |
//! | 5      | 1    | field kind: 0 prime, 1 binary extension       |
//! | 6      | 4    | q                                             |
//! | 10     | 2    | n                                             |
//! | 12     | 2    | k                                             |
//! | 14     | 1    | padding length in bytes                       |
//! | 15     | 1    | flags                                         |
//! | 16     | 8    | block count                                   |
//! | 24     | 4    | CRC32 of bytes 0..24                          |
//!
//! Flags: bit 0 phase 2 present, bit 1 phase 2 uses the test keystream,
//! bit 2 phase 1 omitted.
//!
//! Body: phase-1 bytes (per block, the syndrome as a big-endian base-q
//! integer in `⌈⌈(n-k) log2 q⌉ / 8⌉` bytes), then phase-2 bytes (per block,
//! `pos(x)` big-endian in `⌈⌈k log2 q⌉ / 8⌉` bytes, the whole stream XORed
//! with the keystream).
//!
//! Plaintext bytes map to symbols `b = ⌊log2 q⌋` bits at a time, MSB first;
//! a block carries `⌊n b / 8⌋` bytes and the last block is zero-padded.
//! Extension fields always use the default polynomial.
//!
//! The CRC only detects accidental corruption. Nothing here authenticates
//! ciphertexts.

use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::galois::{Field, FieldElement, FieldKind, GaloisError};
use crate::lsc::{digits_to_integer, integer_to_digits, LscCode, LscError, Syndrome};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CipherError {
    #[error("bad container: {0}")]
    BadContainer(String),
    #[error("bad key: {0}")]
    BadKey(String),
    #[error("corrupt {0}")]
    CorruptPhase(String),
    #[error("key has {got} bytes, strict one-time pad needs {needed}")]
    KeyTooShort { needed: usize, got: usize },
    #[error("key out of range (must be below {modulus})")]
    KeyOutOfRange { modulus: BigUint },
    #[error("unsupported parameters: {0}")]
    BadParameters(String),
    #[error("phase 2 missing: each block has q^k = {q}^{k} = {list_size} candidates")]
    Phase2Missing { q: u32, k: usize, list_size: BigUint },
    #[error(transparent)]
    Lsc(#[from] LscError),
    #[error(transparent)]
    Galois(#[from] GaloisError),
}

pub type Result<T> = std::result::Result<T, CipherError>;

pub const MAGIC: &[u8; 4] = b"LSC1";
pub const VERSION: u8 = 1;
pub const HEADER_LEN: usize = 28;

pub const FLAG_PHASE2: u8 = 1;
pub const FLAG_TEST_KEYSTREAM: u8 = 1 << 1;
pub const FLAG_NO_PHASE1: u8 = 1 << 2;

/// Key for the single-block cipher: an integer in `[0, q^k)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LscKey {
    value: BigUint,
}

impl LscKey {
    pub fn new(code: &LscCode, value: BigUint) -> Result<Self> {
        let modulus = code.list_size();
        if value >= modulus {
            return Err(CipherError::KeyOutOfRange { modulus });
        }
        Ok(LscKey { value })
    }

    /// Reads `bytes` as a big-endian integer and reduces it mod `q^k`.
    pub fn from_bytes(code: &LscCode, bytes: &[u8]) -> Result<Self> {
        if bytes.is_empty() {
            return Err(CipherError::BadKey("empty key".into()));
        }
        Ok(LscKey { value: BigUint::from_bytes_be(bytes) % code.list_size() })
    }

    /// Bytes a uniform key needs: `⌈k log2 q / 8⌉`.
    pub fn byte_len(code: &LscCode) -> usize {
        code.position_bits().div_ceil(8) as usize
    }

    pub fn value(&self) -> &BigUint {
        &self.value
    }
}

/// `(H x, (pos(x) + K) mod q^k)`.
pub fn lsc_encrypt(code: &LscCode, x: &[FieldElement], key: &LscKey) -> Result<(Syndrome, BigUint)> {
    let modulus = code.list_size();
    if key.value >= modulus {
        return Err(CipherError::KeyOutOfRange { modulus });
    }
    let sigma = code.encode(x)?;
    let masked = (code.pos(x)? + &key.value) % &modulus;
    Ok((sigma, masked))
}

/// The coset element of `σ` at position `(masked - K) mod q^k`.
pub fn lsc_decrypt(
    code: &LscCode,
    sigma: &Syndrome,
    masked: &BigUint,
    key: &LscKey,
) -> Result<Vec<FieldElement>> {
    let modulus = code.list_size();
    if key.value >= modulus || *masked >= modulus {
        return Err(CipherError::KeyOutOfRange { modulus });
    }
    let index = (masked + &modulus - &key.value) % &modulus;
    Ok(code.coset_element(sigma, &index)?)
}

/// Choice of `Enc'` for phase 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Keystream {
    /// One-time pad: the key must be at least as long as the payload; its
    /// prefix is used.
    #[default]
    StrictOtp,
    /// Deterministic expansion of the key for interoperability tests. Not a
    /// secure stream cipher.
    Test,
}

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `len` keystream bytes.
///
/// Test mode: `seed` is the first 8 bytes (little-endian) of SHA-256 of the
/// key and byte `i` is the low byte of
/// `splitmix64(seed + (i + 1) * 0x9E3779B97F4A7C15)`.
pub fn keystream_default(key: &[u8], len: usize, mode: Keystream) -> Result<Vec<u8>> {
    if key.is_empty() {
        return Err(CipherError::BadKey("empty key".into()));
    }
    match mode {
        Keystream::StrictOtp => {
            if key.len() < len {
                return Err(CipherError::KeyTooShort { needed: len, got: key.len() });
            }
            Ok(key[..len].to_vec())
        }
        Keystream::Test => {
            let digest = Sha256::digest(key);
            let seed = u64::from_le_bytes(digest[..8].try_into().expect("8 bytes"));
            Ok((0..len as u64)
                .map(|i| {
                    let z = seed.wrapping_add((i + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
                    splitmix64(z) as u8
                })
                .collect())
        }
    }
}

/// Byte geometry of a block for a given code.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BlockLayout {
    pub q: u32,
    pub n: usize,
    pub k: usize,
    pub bits_per_symbol: u32,
    pub block_bytes: usize,
    pub syndrome_bytes: usize,
    pub position_bytes: usize,
}

impl BlockLayout {
    pub fn new(code: &LscCode) -> Result<Self> {
        let q = code.q();
        let bits_per_symbol = 31 - q.leading_zeros();
        let block_bytes = code.n() * bits_per_symbol as usize / 8;
        if block_bytes == 0 || block_bytes > 256 {
            return Err(CipherError::BadParameters(format!(
                "a block of {} symbols over GF({q}) holds {block_bytes} bytes; need 1..=256",
                code.n()
            )));
        }
        Ok(BlockLayout {
            q,
            n: code.n(),
            k: code.k(),
            bits_per_symbol,
            block_bytes,
            syndrome_bytes: code.syndrome_bits().div_ceil(8) as usize,
            position_bytes: code.position_bits().div_ceil(8) as usize,
        })
    }

    fn bytes_to_symbols(&self, bytes: &[u8]) -> Vec<FieldElement> {
        let b = self.bits_per_symbol;
        let mut out = Vec::with_capacity(self.n);
        let (mut acc, mut have) = (0u64, 0u32);
        for &byte in bytes {
            acc = (acc << 8) | byte as u64;
            have += 8;
            while have >= b {
                have -= b;
                out.push(((acc >> have) & ((1 << b) - 1)) as u32);
            }
        }
        if have > 0 {
            out.push(((acc << (b - have)) & ((1 << b) - 1)) as u32);
        }
        out.resize(self.n, 0);
        out
    }

    fn symbols_to_bytes(&self, symbols: &[FieldElement]) -> Result<Vec<u8>> {
        let b = self.bits_per_symbol;
        let total_bits = self.block_bytes * 8;
        let mut out = Vec::with_capacity(self.block_bytes);
        let (mut acc, mut have, mut consumed) = (0u64, 0u32, 0usize);
        for &s in symbols {
            if s >> b != 0 {
                return Err(CipherError::CorruptPhase(format!("block: symbol {s} exceeds {b} bits")));
            }
            let take = b.min((total_bits - consumed) as u32);
            let tail = b - take;
            if s & ((1 << tail) - 1) != 0 {
                return Err(CipherError::CorruptPhase("block: nonzero padding bits".into()));
            }
            acc = (acc << take) | (s >> tail) as u64;
            have += take;
            consumed += take as usize;
            while have >= 8 {
                have -= 8;
                out.push((acc >> have) as u8);
            }
        }
        debug_assert_eq!(out.len(), self.block_bytes);
        Ok(out)
    }
}

fn write_integer(value: &BigUint, width: usize, out: &mut Vec<u8>) {
    let bytes = if value.is_zero() { Vec::new() } else { value.to_bytes_be() };
    debug_assert!(bytes.len() <= width);
    out.extend(std::iter::repeat_n(0, width - bytes.len()));
    out.extend_from_slice(&bytes);
}

fn read_digits(bytes: &[u8], q: u32, len: usize, what: &str) -> Result<Vec<FieldElement>> {
    integer_to_digits(&BigUint::from_bytes_be(bytes), q, len)
        .ok_or_else(|| CipherError::CorruptPhase(format!("{what}: value exceeds q^{len}")))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Header {
    pub kind: FieldKind,
    pub q: u32,
    pub n: u16,
    pub k: u16,
    pub pad: u8,
    pub flags: u8,
    pub blocks: u64,
}

impl Header {
    pub fn has_phase1(&self) -> bool {
        self.flags & FLAG_NO_PHASE1 == 0
    }

    pub fn has_phase2(&self) -> bool {
        self.flags & FLAG_PHASE2 != 0
    }

    pub fn keystream(&self) -> Keystream {
        if self.flags & FLAG_TEST_KEYSTREAM != 0 {
            Keystream::Test
        } else {
            Keystream::StrictOtp
        }
    }

    pub fn to_bytes(&self) -> [u8; HEADER_LEN] {
        let mut h = [0u8; HEADER_LEN];
        h[..4].copy_from_slice(MAGIC);
        h[4] = VERSION;
        h[5] = match self.kind {
            FieldKind::Prime => 0,
            FieldKind::BinaryExtension => 1,
        };
        h[6..10].copy_from_slice(&self.q.to_le_bytes());
        h[10..12].copy_from_slice(&self.n.to_le_bytes());
        h[12..14].copy_from_slice(&self.k.to_le_bytes());
        h[14] = self.pad;
        h[15] = self.flags;
        h[16..24].copy_from_slice(&self.blocks.to_le_bytes());
        let crc = crc32fast::hash(&h[..24]);
        h[24..28].copy_from_slice(&crc.to_le_bytes());
        h
    }

    pub fn parse(bytes: &[u8]) -> Result<Self> {
        let bad = |m: &str| CipherError::BadContainer(m.into());
        if bytes.len() < HEADER_LEN {
            return Err(bad("truncated header"));
        }
        if &bytes[..4] != MAGIC {
            return Err(bad("bad magic"));
        }
        let crc = u32::from_le_bytes(bytes[24..28].try_into().expect("4 bytes"));
        if crc != crc32fast::hash(&bytes[..24]) {
            return Err(bad("header checksum mismatch"));
        }
        if bytes[4] != VERSION {
            return Err(CipherError::BadContainer(format!("unsupported version {}", bytes[4])));
        }
        let kind = match bytes[5] {
            0 => FieldKind::Prime,
            1 => FieldKind::BinaryExtension,
            other => return Err(CipherError::BadContainer(format!("unknown field kind {other}"))),
        };
        let flags = bytes[15];
        if flags & !(FLAG_PHASE2 | FLAG_TEST_KEYSTREAM | FLAG_NO_PHASE1) != 0 {
            return Err(CipherError::BadContainer(format!("unknown flags {flags:#04x}")));
        }
        Ok(Header {
            kind,
            q: u32::from_le_bytes(bytes[6..10].try_into().expect("4 bytes")),
            n: u16::from_le_bytes(bytes[10..12].try_into().expect("2 bytes")),
            k: u16::from_le_bytes(bytes[12..14].try_into().expect("2 bytes")),
            pad: bytes[14],
            flags,
            blocks: u64::from_le_bytes(bytes[16..24].try_into().expect("8 bytes")),
        })
    }

    /// Rebuilds the code the header describes.
    pub fn code(&self) -> Result<LscCode> {
        let field = match self.kind {
            FieldKind::Prime => Field::prime(self.q as u64),
            FieldKind::BinaryExtension => {
                if !self.q.is_power_of_two() {
                    return Err(CipherError::BadContainer(format!("q = {} is not a power of two", self.q)));
                }
                Field::binary(self.q.trailing_zeros())
            }
        }
        .map_err(|e| CipherError::BadContainer(e.to_string()))?;
        LscCode::new(&field, self.n as usize, self.k as usize)
            .map_err(|e| CipherError::BadContainer(e.to_string()))
    }
}

/// A two-phase ciphertext. Either phase may be absent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CipherContainer {
    pub header: Header,
    pub phase1: Vec<u8>,
    pub phase2: Vec<u8>,
}

fn expected_len(blocks: u64, per_block: usize) -> Result<usize> {
    usize::try_from(blocks)
        .ok()
        .and_then(|b| b.checked_mul(per_block))
        .ok_or_else(|| CipherError::BadContainer("block count too large".into()))
}

impl CipherContainer {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + self.phase1.len() + self.phase2.len());
        out.extend_from_slice(&self.header.to_bytes());
        out.extend_from_slice(&self.phase1);
        out.extend_from_slice(&self.phase2);
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let header = Header::parse(bytes)?;
        let code = header.code()?;
        let layout = BlockLayout::new(&code).map_err(|e| CipherError::BadContainer(e.to_string()))?;
        if header.pad as usize >= layout.block_bytes
            || (header.blocks == 0 && header.pad != 0)
        {
            return Err(CipherError::BadContainer(format!("padding length {}", header.pad)));
        }
        let p1 = if header.has_phase1() { expected_len(header.blocks, layout.syndrome_bytes)? } else { 0 };
        let p2 = if header.has_phase2() { expected_len(header.blocks, layout.position_bytes)? } else { 0 };
        let body = &bytes[HEADER_LEN..];
        if body.len() != p1 + p2 {
            return Err(CipherError::BadContainer(format!(
                "body has {} bytes, header implies {}",
                body.len(),
                p1 + p2
            )));
        }
        Ok(CipherContainer { header, phase1: body[..p1].to_vec(), phase2: body[p1..].to_vec() })
    }

    /// Plaintext length in bytes.
    pub fn plaintext_len(&self) -> Result<u64> {
        let layout = BlockLayout::new(&self.header.code()?)?;
        Ok(self.header.blocks * layout.block_bytes as u64 - self.header.pad as u64)
    }

    /// Phase 1 alone (what is pre-cached).
    pub fn phase1_only(&self) -> Self {
        let mut header = self.header;
        header.flags &= !(FLAG_PHASE2 | FLAG_TEST_KEYSTREAM);
        CipherContainer { header, phase1: self.phase1.clone(), phase2: Vec::new() }
    }

    /// Phase 2 alone.
    pub fn phase2_only(&self) -> Self {
        let mut header = self.header;
        header.flags |= FLAG_NO_PHASE1;
        CipherContainer { header, phase1: Vec::new(), phase2: self.phase2.clone() }
    }

    /// Recombines a phase-1 container with a phase-2 container for the same
    /// message.
    pub fn merge(phase1: &Self, phase2: &Self) -> Result<Self> {
        let (a, b) = (phase1.header, phase2.header);
        if !a.has_phase1() || !b.has_phase2() {
            return Err(CipherError::BadContainer("merge needs phase 1 and phase 2".into()));
        }
        if (a.kind, a.q, a.n, a.k, a.pad, a.blocks) != (b.kind, b.q, b.n, b.k, b.pad, b.blocks) {
            return Err(CipherError::BadContainer("phase headers disagree".into()));
        }
        let header = Header { flags: b.flags & !FLAG_NO_PHASE1, ..a };
        Ok(CipherContainer { header, phase1: phase1.phase1.clone(), phase2: phase2.phase2.clone() })
    }
}

/// Syndromes and clear positions of every block, with the header fields
/// that do not depend on the key.
fn encode_blocks(code: &LscCode, plaintext: &[u8]) -> Result<(Header, Vec<u8>, Vec<u8>)> {
    if !code.field().is_canonical() {
        return Err(CipherError::BadParameters("extension fields must use the default polynomial".into()));
    }
    let (n, k) = (
        u16::try_from(code.n()).map_err(|_| CipherError::BadParameters("n exceeds 65535".into()))?,
        code.k() as u16,
    );
    let layout = BlockLayout::new(code)?;
    let blocks = plaintext.len().div_ceil(layout.block_bytes);
    let pad = blocks * layout.block_bytes - plaintext.len();

    let encoded: Vec<(Vec<u8>, Vec<u8>)> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let start = b * layout.block_bytes;
            let end = (start + layout.block_bytes).min(plaintext.len());
            let x = layout.bytes_to_symbols(&plaintext[start..end]);
            let sigma = code.encode(&x)?;
            let mut s = Vec::with_capacity(layout.syndrome_bytes);
            write_integer(&sigma.to_index(layout.q), layout.syndrome_bytes, &mut s);
            let mut p = Vec::with_capacity(layout.position_bytes);
            write_integer(&code.pos(&x)?, layout.position_bytes, &mut p);
            Ok((s, p))
        })
        .collect::<Result<_>>()?;

    let mut phase1 = Vec::with_capacity(blocks * layout.syndrome_bytes);
    let mut phase2 = Vec::with_capacity(blocks * layout.position_bytes);
    for (s, p) in encoded {
        phase1.extend_from_slice(&s);
        phase2.extend_from_slice(&p);
    }
    let header = Header {
        kind: code.field().kind(),
        q: layout.q,
        n,
        k,
        pad: pad as u8,
        flags: 0,
        blocks: blocks as u64,
    };
    Ok((header, phase1, phase2))
}

/// Phase 1 only. Needs no key.
pub fn phase1_encrypt(code: &LscCode, plaintext: &[u8]) -> Result<CipherContainer> {
    let (header, phase1, _) = encode_blocks(code, plaintext)?;
    Ok(CipherContainer { header, phase1, phase2: Vec::new() })
}

/// Encrypts `plaintext` block by block: phase 1 carries the syndromes in the
/// clear, phase 2 the coset positions under `Enc'`.
pub fn two_phase_encrypt(
    code: &LscCode,
    plaintext: &[u8],
    key: &[u8],
    keystream: Keystream,
) -> Result<CipherContainer> {
    if key.is_empty() {
        return Err(CipherError::BadKey("empty key".into()));
    }
    let (mut header, phase1, mut phase2) = encode_blocks(code, plaintext)?;
    let stream = keystream_default(key, phase2.len(), keystream)?;
    phase2.iter_mut().zip(&stream).for_each(|(c, s)| *c ^= s);
    header.flags = FLAG_PHASE2;
    if keystream == Keystream::Test {
        header.flags |= FLAG_TEST_KEYSTREAM;
    }
    Ok(CipherContainer { header, phase1, phase2 })
}

/// Length of the phase-2 payload for a plaintext of `len` bytes, i.e. the
/// key length a strict one-time pad needs.
pub fn phase2_len(code: &LscCode, len: usize) -> Result<usize> {
    let layout = BlockLayout::new(code)?;
    Ok(len.div_ceil(layout.block_bytes) * layout.position_bytes)
}

/// Inverts [`two_phase_encrypt`]: solves `[H; D] x = [σ; D x]` per block and
/// strips the padding.
pub fn two_phase_decrypt(container: &CipherContainer, key: &[u8]) -> Result<Vec<u8>> {
    let header = container.header;
    let code = header.code()?;
    let layout = BlockLayout::new(&code)?;
    if !header.has_phase2() {
        return Err(CipherError::Phase2Missing { q: code.q(), k: code.k(), list_size: code.list_size() });
    }
    if !header.has_phase1() {
        return Err(CipherError::BadContainer("phase 1 missing".into()));
    }
    let blocks = usize::try_from(header.blocks)
        .map_err(|_| CipherError::BadContainer("block count too large".into()))?;
    if container.phase1.len() != expected_len(header.blocks, layout.syndrome_bytes)?
        || container.phase2.len() != expected_len(header.blocks, layout.position_bytes)?
    {
        return Err(CipherError::BadContainer("phase lengths disagree with header".into()));
    }
    let stream = keystream_default(key, container.phase2.len(), header.keystream())?;
    let phase2: Vec<u8> = container.phase2.iter().zip(&stream).map(|(c, s)| c ^ s).collect();

    let decoded: Vec<Vec<u8>> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let s = &container.phase1[b * layout.syndrome_bytes..(b + 1) * layout.syndrome_bytes];
            let p = &phase2[b * layout.position_bytes..(b + 1) * layout.position_bytes];
            let sigma = Syndrome(read_digits(s, layout.q, layout.n - layout.k, "phase 1")?);
            let digits = read_digits(p, layout.q, layout.k, "phase 2")?;
            let x = code.solve_block(&sigma, &digits)?;
            layout.symbols_to_bytes(&x)
        })
        .collect::<Result<_>>()?;

    let mut out: Vec<u8> = decoded.concat();
    let len = out.len() - header.pad as usize;
    if out[len..].iter().any(|&b| b != 0) {
        return Err(CipherError::CorruptPhase("padding".into()));
    }
    out.truncate(len);
    Ok(out)
}

/// `D x` digits of a block, for callers that want the raw phase-2 payload.
pub fn position_integer(code: &LscCode, x: &[FieldElement]) -> Result<BigUint> {
    Ok(digits_to_integer(&code.position_digits(x)?, code.q()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infotheory::JointPmf;
    use rand::{Rng, RngCore, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::collections::{HashMap, HashSet};

    fn gf(q: u64) -> Field {
        Field::with_order(q).unwrap()
    }

    fn all_vectors(q: u32, n: usize) -> impl Iterator<Item = Vec<u32>> {
        (0..q.pow(n as u32)).map(move |mut i| {
            let mut v = vec![0; n];
            for slot in v.iter_mut().rev() {
                *slot = i % q;
                i /= q;
            }
            v
        })
    }

    #[test]
    fn zero_key_exposes_position() {
        let code = LscCode::new(&gf(5), 4, 2).unwrap();
        let key = LscKey::new(&code, BigUint::zero()).unwrap();
        let x = vec![1, 4, 0, 2];
        let (_, masked) = lsc_encrypt(&code, &x, &key).unwrap();
        assert_eq!(masked, code.pos(&x).unwrap());
        assert_eq!(position_integer(&code, &x).unwrap(), masked);
    }

    #[test]
    fn single_block_round_trip_exhaustive() {
        let code = LscCode::new(&gf(5), 4, 2).unwrap();
        for kv in 0..25u32 {
            let key = LscKey::new(&code, BigUint::from(kv)).unwrap();
            for x in all_vectors(5, 4) {
                let (sigma, masked) = lsc_encrypt(&code, &x, &key).unwrap();
                assert_eq!(lsc_decrypt(&code, &sigma, &masked, &key).unwrap(), x);
            }
        }
        assert!(matches!(
            LscKey::new(&code, BigUint::from(25u32)),
            Err(CipherError::KeyOutOfRange { .. })
        ));
    }

    #[test]
    fn uniform_key_masks_position() {
        let code = LscCode::new(&gf(5), 4, 2).unwrap();
        // masked_pos given x is uniform on [0, 25) for every x
        for x in all_vectors(5, 4) {
            let seen: HashSet<BigUint> = (0..25u32)
                .map(|kv| {
                    let key = LscKey::new(&code, BigUint::from(kv)).unwrap();
                    lsc_encrypt(&code, &x, &key).unwrap().1
                })
                .collect();
            assert_eq!(seen.len(), 25);
        }
    }

    #[test]
    fn masked_position_adds_no_information() {
        let code = LscCode::new(&gf(5), 4, 2).unwrap();
        let p = 1.0 / (625.0 * 25.0);
        let mut with_pos: HashMap<(Vec<u32>, u32), f64> = HashMap::new();
        let mut pos_only: HashMap<(Vec<u32>, u32), f64> = HashMap::new();
        let mut sigma_only: HashMap<(Vec<u32>, u32), f64> = HashMap::new();
        for x in all_vectors(5, 4) {
            for kv in 0..25u32 {
                let key = LscKey::new(&code, BigUint::from(kv)).unwrap();
                let (sigma, masked) = lsc_encrypt(&code, &x, &key).unwrap();
                let s = digits_to_integer(&sigma.0, 5).try_into().unwrap();
                let m: u32 = masked.try_into().unwrap();
                *with_pos.entry((x.clone(), s * 25 + m)).or_default() += p;
                *pos_only.entry((x.clone(), m)).or_default() += p;
                *sigma_only.entry((x.clone(), s)).or_default() += p;
            }
        }
        let mi = |table: HashMap<(Vec<u32>, u32), f64>, z: u32| {
            let pmf = JointPmf::from_outcomes(vec![5; 4], z, table.into_iter().map(|((x, z), p)| (x, z, p)))
                .unwrap();
            pmf.mutual_information(&[0, 1, 2, 3], &[4]).unwrap()
        };
        assert!(mi(pos_only, 25).abs() < 1e-12);
        let joint = mi(with_pos, 625);
        let sigma = mi(sigma_only, 25);
        assert!((joint - sigma).abs() < 1e-12);
        assert!((sigma - 2.0 * 5f64.log2()).abs() < 1e-12);
    }

    #[test]
    fn stripped_ciphertext_list_is_the_coset() {
        let code = LscCode::new(&gf(5), 4, 2).unwrap();
        let key = LscKey::new(&code, BigUint::from(7u32)).unwrap();
        for x in all_vectors(5, 4).step_by(37) {
            let (sigma, _) = lsc_encrypt(&code, &x, &key).unwrap();
            let list: HashSet<Vec<u32>> = (0..25u32)
                .map(|m| lsc_decrypt(&code, &sigma, &BigUint::from(m), &key).unwrap())
                .collect();
            let coset: HashSet<Vec<u32>> =
                all_vectors(5, 4).filter(|y| code.encode(y).unwrap() == sigma).collect();
            assert_eq!(list, coset);
        }
    }

    #[test]
    fn key_from_bytes_reduces() {
        let code = LscCode::new(&gf(5), 4, 2).unwrap();
        assert_eq!(LscKey::from_bytes(&code, &[1, 0]).unwrap().value(), &BigUint::from(256u32 % 25));
        assert!(matches!(LscKey::from_bytes(&code, &[]), Err(CipherError::BadKey(_))));
        assert_eq!(LscKey::byte_len(&code), 1);
    }

    #[test]
    fn keystreams() {
        let zeros = vec![0u8; 16];
        assert_eq!(keystream_default(&zeros, 16, Keystream::StrictOtp).unwrap(), zeros);
        assert_eq!(
            keystream_default(&[1, 2, 3], 4, Keystream::StrictOtp).unwrap_err(),
            CipherError::KeyTooShort { needed: 4, got: 3 }
        );
        let a = keystream_default(b"key", 64, Keystream::Test).unwrap();
        let b = keystream_default(b"key", 64, Keystream::Test).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, keystream_default(b"kez", 64, Keystream::Test).unwrap());
        assert_eq!(&keystream_default(b"key", 80, Keystream::Test).unwrap()[..64], &a[..]);
    }

    #[test]
    fn strict_otp_with_zero_key_leaves_payload() {
        let code = LscCode::new(&gf(16), 15, 5).unwrap();
        let msg = b"symbol secrecy!";
        let plain = two_phase_encrypt(&code, msg, &[0u8; 64], Keystream::StrictOtp).unwrap();
        let mut payload = Vec::new();
        let layout = BlockLayout::new(&code).unwrap();
        for block in msg.chunks(layout.block_bytes) {
            let x = layout.bytes_to_symbols(block);
            write_integer(&code.pos(&x).unwrap(), layout.position_bytes, &mut payload);
        }
        assert_eq!(plain.phase2, payload);
    }

    #[test]
    fn empty_plaintext() {
        let code = LscCode::new(&gf(256), 255, 64).unwrap();
        let c = two_phase_encrypt(&code, &[], b"k", Keystream::StrictOtp).unwrap();
        assert_eq!(c.header.blocks, 0);
        assert_eq!(c.to_bytes().len(), HEADER_LEN);
        let parsed = CipherContainer::from_bytes(&c.to_bytes()).unwrap();
        assert!(two_phase_decrypt(&parsed, b"k").unwrap().is_empty());
    }

    #[test]
    fn kib_round_trip_gf256() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let code = LscCode::new(&gf(256), 255, 64).unwrap();
        let mut msg = vec![0u8; 1024];
        rng.fill_bytes(&mut msg);
        let mut key = vec![0u8; 5 * 64];
        rng.fill_bytes(&mut key);
        let c = two_phase_encrypt(&code, &msg, &key, Keystream::StrictOtp).unwrap();
        assert_eq!(c.header.blocks, 5);
        assert_eq!(c.phase1.len(), 5 * 191);
        assert_eq!(c.phase2.len(), 5 * 64);
        let bytes = c.to_bytes();
        let back = CipherContainer::from_bytes(&bytes).unwrap();
        assert_eq!(two_phase_decrypt(&back, &key).unwrap(), msg);

        let withheld = back.phase1_only();
        assert_eq!(withheld, phase1_encrypt(&code, &msg).unwrap());
        assert_eq!(phase2_len(&code, msg.len()).unwrap(), 5 * 64);
        match two_phase_decrypt(&withheld, &key).unwrap_err() {
            CipherError::Phase2Missing { list_size, .. } => {
                assert_eq!(list_size, BigUint::from(256u32).pow(64))
            }
            other => panic!("unexpected {other:?}"),
        }
        let merged = CipherContainer::merge(&withheld, &back.phase2_only()).unwrap();
        assert_eq!(merged, back);
    }

    #[test]
    fn random_round_trips_across_fields() {
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let params = [(7u64, 6, 3), (13, 12, 6), (16, 15, 5), (257, 20, 8), (65537, 10, 3), (11, 10, 1)];
        for &(q, n, k) in &params {
            let code = LscCode::new(&gf(q), n, k).unwrap();
            for _ in 0..40 {
                let len = rng.gen_range(0..100);
                let msg: Vec<u8> = (0..len).map(|_| rng.gen()).collect();
                let key: Vec<u8> = (0..rng.gen_range(1..8)).map(|_| rng.gen()).collect();
                let c = two_phase_encrypt(&code, &msg, &key, Keystream::Test).unwrap();
                let back = CipherContainer::from_bytes(&c.to_bytes()).unwrap();
                assert_eq!(two_phase_decrypt(&back, &key).unwrap(), msg, "q={q} n={n} k={k}");
            }
        }
    }

    #[test]
    fn container_rejections() {
        let code = LscCode::new(&gf(16), 15, 5).unwrap();
        let c = two_phase_encrypt(&code, b"hello world", b"key", Keystream::Test).unwrap();
        let bytes = c.to_bytes();

        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(matches!(CipherContainer::from_bytes(&bad), Err(CipherError::BadContainer(_))));
        let mut bad = bytes.clone();
        bad[10] ^= 1;
        assert!(matches!(CipherContainer::from_bytes(&bad), Err(CipherError::BadContainer(_))));
        assert!(matches!(
            CipherContainer::from_bytes(&bytes[..bytes.len() - 1]),
            Err(CipherError::BadContainer(_))
        ));

        // a phase-1 value past q^(n-k) cannot be a syndrome
        let mut bad = c.clone();
        bad.phase1[..c.phase1.len()].fill(0xFF);
        assert!(matches!(two_phase_decrypt(&bad, b"key"), Err(CipherError::CorruptPhase(_))));

        assert!(matches!(two_phase_decrypt(&c, b""), Err(CipherError::BadKey(_))));
        assert!(matches!(
            two_phase_encrypt(&code, b"x", b"", Keystream::Test),
            Err(CipherError::BadKey(_))
        ));
        // n b / 8 must be at least one byte
        let tiny = LscCode::new(&gf(3), 2, 1).unwrap();
        assert!(matches!(
            two_phase_encrypt(&tiny, b"x", b"k", Keystream::Test),
            Err(CipherError::BadParameters(_))
        ));
    }

    #[test]
    fn header_layout() {
        let h = Header {
            kind: FieldKind::BinaryExtension,
            q: 256,
            n: 255,
            k: 64,
            pad: 3,
            flags: FLAG_PHASE2,
            blocks: 2,
        };
        let b = h.to_bytes();
        assert_eq!(&b[..4], b"LSC1");
        assert_eq!(b[4], 1);
        assert_eq!(b[5], 1);
        assert_eq!(&b[6..10], &[0, 1, 0, 0]);
        assert_eq!(&b[10..12], &[255, 0]);
        assert_eq!(&b[12..14], &[64, 0]);
        assert_eq!(b[14], 3);
        assert_eq!(&b[16..24], &[2, 0, 0, 0, 0, 0, 0, 0]);
        assert_eq!(Header::parse(&b).unwrap(), h);
    }
}
