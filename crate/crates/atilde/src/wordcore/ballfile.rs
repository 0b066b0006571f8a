//! Versioned binary layout for Cayley balls.
//!
//! All integers are little-endian. Layout v1:
//!
//! ```text
//! magic      b"ATLB"
//! version    u32 = 1
//! q, n, R    u32 × 3
//! gens       u32            generator count |Π|
//! pres_hash  u8 × 32        SHA-256 of the presentation file
//! vertices   u64
//! per vertex: len u16, letter u32 × len        (canonical id order)
//! per vertex: deg u16, (gen u32, dst u32) × deg
//! ```
//!
//! Encoding a ball twice yields identical bytes. The decoder validates
//! every count against the remaining input and every index against its
//! range, so arbitrary bytes either decode to a structurally sound ball
//! or fail with a parse error; it never panics or overallocates.

use super::ball::CayleyBall;
use super::Rewriter;
use crate::error::{Error, Result};
use crate::tripres::TrianglePresentation;
use std::collections::{BTreeMap, HashMap};
use std::path::Path;

const MAGIC: &[u8; 4] = b"ATLB";
const VERSION: u32 = 1;

pub fn encode_ball(ball: &CayleyBall) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&ball.q.to_le_bytes());
    out.extend_from_slice(&ball.n.to_le_bytes());
    out.extend_from_slice(&ball.radius.to_le_bytes());
    let gens = generator_count_of(ball);
    out.extend_from_slice(&gens.to_le_bytes());
    let hash = hash_bytes(&ball.presentation_hash);
    out.extend_from_slice(&hash);
    out.extend_from_slice(&(ball.words.len() as u64).to_le_bytes());
    for w in &ball.words {
        out.extend_from_slice(&(w.len() as u16).to_le_bytes());
        for &g in w.letters() {
            out.extend_from_slice(&g.to_le_bytes());
        }
    }
    for adj in &ball.adjacency {
        out.extend_from_slice(&(adj.len() as u16).to_le_bytes());
        for &(g, dst) in adj {
            out.extend_from_slice(&g.to_le_bytes());
            out.extend_from_slice(&dst.to_le_bytes());
        }
    }
    out
}

fn generator_count_of(ball: &CayleyBall) -> u32 {
    // largest letter or adjacency label, +1; the decoder only needs an
    // upper bound that the writer and reader agree on
    let mut max = 0u32;
    for w in &ball.words {
        for &g in w.letters() {
            max = max.max(g + 1);
        }
    }
    for adj in &ball.adjacency {
        for &(g, _) in adj {
            max = max.max(g + 1);
        }
    }
    max
}

fn hash_bytes(hex: &str) -> [u8; 32] {
    let mut out = [0u8; 32];
    for (i, chunk) in hex.as_bytes().chunks(2).take(32).enumerate() {
        let s = std::str::from_utf8(chunk).unwrap_or("00");
        out[i] = u8::from_str_radix(s, 16).unwrap_or(0);
    }
    out
}

struct Cursor<'a> {
    data: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.data.len() - self.pos < n {
            return Err(parse_err(format!(
                "truncated: need {n} bytes at offset {}, have {}",
                self.pos,
                self.data.len() - self.pos
            )));
        }
        let s = &self.data[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn u16(&mut self) -> Result<u16> {
        Ok(u16::from_le_bytes(self.take(2)?.try_into().unwrap()))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    fn remaining(&self) -> usize {
        self.data.len() - self.pos
    }
}

fn parse_err(message: String) -> Error {
    Error::Parse {
        context: "ball file".into(),
        message,
    }
}

/// Structurally decoded ball file, prior to binding against a
/// presentation.
pub struct RawBall {
    pub q: u32,
    pub n: u32,
    pub radius: u32,
    pub generator_count: u32,
    pub presentation_hash: String,
    pub words: Vec<Vec<u32>>,
    pub adjacency: Vec<Vec<(u32, u32)>>,
}

/// Decode and structurally validate a ball file: bounds, index ranges,
/// strict canonical word order.
pub fn decode_ball(bytes: &[u8]) -> Result<RawBall> {
    let mut c = Cursor {
        data: bytes,
        pos: 0,
    };
    if c.take(4)? != MAGIC {
        return Err(parse_err("bad magic".into()));
    }
    let version = c.u32()?;
    if version != VERSION {
        return Err(parse_err(format!("unsupported version {version}")));
    }
    let q = c.u32()?;
    let n = c.u32()?;
    let radius = c.u32()?;
    let gens = c.u32()?;
    if n == 0 || n > 64 || q < 2 || gens == 0 || gens > 1 << 24 {
        return Err(parse_err(format!(
            "implausible header: q={q} n={n} gens={gens}"
        )));
    }
    let hash: Vec<u8> = c.take(32)?.to_vec();
    let presentation_hash: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    let vcount = c.u64()?;
    // each vertex costs at least 2 bytes; reject counts the input cannot hold
    if vcount > (c.remaining() as u64) / 2 {
        return Err(parse_err(format!(
            "vertex count {vcount} exceeds what the input can contain"
        )));
    }
    let vcount = vcount as usize;
    let mut words = Vec::with_capacity(vcount);
    for i in 0..vcount {
        let len = c.u16()? as usize;
        if len > radius as usize {
            return Err(parse_err(format!(
                "vertex {i} has length {len} beyond radius {radius}"
            )));
        }
        let mut w = Vec::with_capacity(len);
        for _ in 0..len {
            let g = c.u32()?;
            if g >= gens {
                return Err(parse_err(format!("vertex {i} has letter {g} ≥ {gens}")));
            }
            w.push(g);
        }
        words.push(w);
    }
    for i in 1..words.len() {
        let a = (&words[i - 1].len(), &words[i - 1]);
        let b = (&words[i].len(), &words[i]);
        if a >= b {
            return Err(parse_err(format!("vertex table not in canonical order at {i}")));
        }
    }
    if !words.is_empty() && !words[0].is_empty() {
        return Err(parse_err("vertex 0 must be the identity".into()));
    }
    let mut adjacency = Vec::with_capacity(vcount);
    for i in 0..vcount {
        let deg = c.u16()? as usize;
        if deg > gens as usize {
            return Err(parse_err(format!("vertex {i} has degree {deg} > {gens}")));
        }
        let mut adj = Vec::with_capacity(deg);
        let mut prev: Option<u32> = None;
        for _ in 0..deg {
            let g = c.u32()?;
            let dst = c.u32()?;
            if g >= gens {
                return Err(parse_err(format!("edge label {g} ≥ {gens}")));
            }
            if dst as usize >= vcount {
                return Err(parse_err(format!("edge target {dst} ≥ {vcount}")));
            }
            if prev.is_some_and(|p| p >= g) {
                return Err(parse_err(format!(
                    "adjacency of vertex {i} not sorted by generator"
                )));
            }
            prev = Some(g);
            adj.push((g, dst));
        }
        adjacency.push(adj);
    }
    if c.remaining() != 0 {
        return Err(parse_err(format!("{} trailing bytes", c.remaining())));
    }
    Ok(RawBall {
        q,
        n,
        radius,
        generator_count: gens,
        presentation_hash,
        words,
        adjacency,
    })
}

/// Bind a decoded ball to its presentation: hashes must match, words must
/// be normal, and shapes are recomputed through the rewriter.
pub fn ball_from_raw(
    raw: RawBall,
    pres: &TrianglePresentation,
    rw: &Rewriter,
) -> Result<CayleyBall> {
    if raw.presentation_hash != pres.content_hash() {
        return Err(Error::Usage(format!(
            "ball was built from presentation {} but {} was supplied",
            &raw.presentation_hash[..12.min(raw.presentation_hash.len())],
            &pres.content_hash()[..12]
        )));
    }
    if raw.q != rw.q() || raw.n != rw.n() || raw.generator_count != rw.generator_count() {
        return Err(Error::Usage(
            "ball header does not match the presentation geometry".into(),
        ));
    }
    let mut words = Vec::with_capacity(raw.words.len());
    let mut index = HashMap::with_capacity(raw.words.len());
    let mut sphere_ids: BTreeMap<Vec<u32>, Vec<u32>> = BTreeMap::new();
    for (i, letters) in raw.words.into_iter().enumerate() {
        let w = rw.reduce(&letters)?;
        if w.letters() != letters {
            return Err(parse_err(format!("vertex {i} is not in normal form")));
        }
        sphere_ids.entry(rw.shape(&w)).or_default().push(i as u32);
        index.insert(w.clone(), i as u32);
        words.push(w);
    }
    Ok(CayleyBall {
        q: raw.q,
        n: raw.n,
        radius: raw.radius,
        presentation_hash: raw.presentation_hash,
        words,
        index,
        adjacency: raw.adjacency,
        sphere_ids,
    })
}

pub fn save_ball(ball: &CayleyBall, path: &Path) -> Result<()> {
    std::fs::write(path, encode_ball(ball))?;
    Ok(())
}

pub fn load_ball(path: &Path, pres: &TrianglePresentation, rw: &Rewriter) -> Result<CayleyBall> {
    let bytes = std::fs::read(path)?;
    let raw = decode_ball(&bytes)?;
    ball_from_raw(raw, pres, rw)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgeom::Geometry;
    use crate::tripres::scan_dualities;
    use crate::wordcore::ball::build_ball;

    fn fixture() -> (TrianglePresentation, Rewriter, CayleyBall) {
        let g = Geometry::vector(2, 2).unwrap();
        let p = scan_dualities(&g, 1, 7, 1_000_000, 10_000)
            .unwrap()
            .found
            .remove(0);
        let rw = Rewriter::new(&p).unwrap();
        let ball = build_ball(&p, &rw, 2, 100_000).unwrap();
        (p, rw, ball)
    }

    #[test]
    fn round_trip_is_byte_identical() {
        let (p, rw, ball) = fixture();
        let bytes = encode_ball(&ball);
        let raw = decode_ball(&bytes).unwrap();
        let ball2 = ball_from_raw(raw, &p, &rw).unwrap();
        assert_eq!(encode_ball(&ball2), bytes);
        assert_eq!(ball2.vertex_count(), ball.vertex_count());
    }

    #[test]
    fn wrong_presentation_is_rejected() {
        let (_, _, ball) = fixture();
        let g = Geometry::vector(2, 2).unwrap();
        let other = scan_dualities(&g, 1, 99, 1_000_000, 10_000)
            .unwrap()
            .found
            .remove(0);
        let rw2 = Rewriter::new(&other).unwrap();
        let bytes = encode_ball(&ball);
        let raw = decode_ball(&bytes).unwrap();
        assert!(matches!(
            ball_from_raw(raw, &other, &rw2),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn truncation_and_corruption_fail_cleanly() {
        let (_, _, ball) = fixture();
        let bytes = encode_ball(&ball);
        for cut in [0, 3, 7, 20, 60, bytes.len() - 1] {
            assert!(decode_ball(&bytes[..cut]).is_err(), "cut at {cut}");
        }
        let mut bad = bytes.clone();
        bad[0] = b'X';
        assert!(decode_ball(&bad).is_err());
        // implausible vertex count
        let mut huge = bytes.clone();
        let off = 4 + 4 + 12 + 4 + 32;
        huge[off..off + 8].copy_from_slice(&u64::MAX.to_le_bytes());
        assert!(decode_ball(&huge).is_err());
    }
}
