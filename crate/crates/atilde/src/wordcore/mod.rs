//! Group elements as normal-form words, the rewriting engine, spheres,
//! vertex types, distances, and chamber geometry at the identity.
//!
//! Every group element has a unique normal form u₁u₂…u_l with
//! non-decreasing dims and join(λ(u_i), u_{i+1}) = Π for consecutive
//! letters; the letter-dim counts of the normal form are the sector
//! coordinates of the vertex, and word length is graph distance from the
//! identity.
//!
//! Uniqueness is not assumed: the two-letter exchange table is
//! bootstrapped from length-4 triviality tests that use only the strictly
//! length-reducing rules, and a presentation whose table entries are
//! missing or ambiguous is rejected with a witness.

pub mod ball;
pub mod ballfile;

use crate::error::{Error, Result};
use crate::tripres::TrianglePresentation;
use std::collections::HashMap;
use std::fmt;

/// Sector coordinates: `k[j]` counts normal-form letters of dim j+1.
pub type SphereIndex = Vec<u32>;

/// A word in normal form. Only the rewriting engine constructs these.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct NormalWord {
    letters: Vec<u32>,
}

impl NormalWord {
    pub fn identity() -> NormalWord {
        NormalWord { letters: vec![] }
    }

    pub fn letters(&self) -> &[u32] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }
}

impl PartialOrd for NormalWord {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for NormalWord {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.letters.len(), &self.letters).cmp(&(other.letters.len(), &other.letters))
    }
}

impl fmt::Display for NormalWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", display_word(&self.letters))
    }
}

/// Render a word as the CLI literal syntax: `g3,g11`, or `e` for the
/// identity.
pub fn display_word(letters: &[u32]) -> String {
    if letters.is_empty() {
        "e".to_string()
    } else {
        letters
            .iter()
            .map(|g| format!("g{g}"))
            .collect::<Vec<_>>()
            .join(",")
    }
}

/// Parse the CLI word literal syntax. `e` (or the empty string) is the
/// identity; otherwise comma-separated `g<index>` terms.
pub fn parse_word_literal(s: &str) -> Result<Vec<u32>> {
    let s = s.trim();
    if s.is_empty() || s == "e" {
        return Ok(vec![]);
    }
    let mut out = Vec::new();
    for part in s.split(',') {
        let part = part.trim();
        let idx = part
            .strip_prefix('g')
            .and_then(|d| d.parse::<u32>().ok())
            .ok_or_else(|| Error::Parse {
                context: "word literal".into(),
                message: format!("expected g<index>, got {part:?}"),
            })?;
        out.push(idx);
    }
    Ok(out)
}

/// How an adjacent letter pair rewrites.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PairRule {
    /// Already in normal position.
    Normal,
    /// (u, λ(u)) → ε.
    Cancel,
    /// (u, v) → λ(w) for the triple (u, v, w).
    Contract(u32),
    /// (u, v) → (v′, u′) with a_u a_v = a_{v′} a_{u′}, the result pair
    /// normal.
    Exchange(u32, u32),
}

/// The compiled rewriting engine: per-pair rules plus copies of the
/// geometry tables needed for word and chamber operations. Fully owned and
/// immutable after construction; safe to share across threads.
#[derive(Debug, Clone)]
pub struct Rewriter {
    n: u32,
    q: u32,
    count: u32,
    dims: Vec<u8>,
    lambda: Vec<u32>,
    incidence: Vec<bool>,
    join_whole: Vec<bool>,
    rules: Vec<PairRule>,
}

impl Rewriter {
    /// Build the rule table for a presentation. Exchange entries are found
    /// by the length-4 triviality test `a_{λ(v′)} a_u a_v a_{λ(u′)} = 1`
    /// using cancellation and contraction only; zero or multiple
    /// candidates for any pair rejects the presentation with a witness.
    pub fn new(pres: &TrianglePresentation) -> Result<Rewriter> {
        let g = pres.geometry();
        let count = g.element_count();
        let n = g.n();
        let dims: Vec<u8> = (0..count).map(|i| g.dim(i) as u8).collect();
        let lambda = pres.lambda().map.clone();
        let nn = count as usize;
        let mut incidence = vec![false; nn * nn];
        let mut join_whole = vec![false; nn * nn];
        for i in 0..count {
            for j in 0..count {
                incidence[(i * count + j) as usize] = g.incident_idx(i, j);
                join_whole[(i * count + j) as usize] = g.join_idx(i, j) == crate::pgeom::WHOLE;
            }
        }

        // base rules: everything except exchange
        #[derive(Clone, Copy, PartialEq)]
        enum Base {
            Normal,
            Cancel,
            Contract(u32),
            NeedsExchange,
        }
        let mut base = vec![Base::NeedsExchange; nn * nn];
        for a in 0..count {
            let la = lambda[a as usize];
            for b in 0..count {
                let slot = &mut base[(a * count + b) as usize];
                if b == la {
                    *slot = Base::Cancel;
                } else if incidence[(la * count + b) as usize] {
                    let w = pres.third(a, b).ok_or_else(|| {
                        Error::PresentationRejected(format!(
                            "incident pair ({a},{b}) has no triple; axiom 1 fails"
                        ))
                    })?;
                    *slot = Base::Contract(lambda[w as usize]);
                } else if dims[a as usize] <= dims[b as usize]
                    && join_whole[(la * count + b) as usize]
                {
                    *slot = Base::Normal;
                }
            }
        }

        // bootstrap: candidate normal pairs per letter-dim type sum
        let modulus = n + 1;
        let mut normal_pairs_by_type: Vec<Vec<(u32, u32)>> = vec![vec![]; modulus as usize];
        for a in 0..count {
            for b in 0..count {
                if base[(a * count + b) as usize] == Base::Normal {
                    let t = (dims[a as usize] as u32 + dims[b as usize] as u32) % modulus;
                    normal_pairs_by_type[t as usize].push((a, b));
                }
            }
        }

        let trivially_reducible = |word: Vec<u32>| -> bool {
            fn go(
                w: &[u32],
                count: u32,
                base: &[Base],
                memo: &mut HashMap<Vec<u32>, bool>,
            ) -> bool {
                if w.is_empty() {
                    return true;
                }
                if w.len() == 1 {
                    return false;
                }
                if let Some(&r) = memo.get(w) {
                    return r;
                }
                let mut ok = false;
                for i in 0..w.len() - 1 {
                    let rule = base[(w[i] * count + w[i + 1]) as usize];
                    let next: Option<Vec<u32>> = match rule {
                        Base::Cancel => {
                            let mut v = w.to_vec();
                            v.splice(i..i + 2, []);
                            Some(v)
                        }
                        Base::Contract(c) => {
                            let mut v = w.to_vec();
                            v.splice(i..i + 2, [c]);
                            Some(v)
                        }
                        _ => None,
                    };
                    if let Some(v) = next {
                        if go(&v, count, base, memo) {
                            ok = true;
                            break;
                        }
                    }
                }
                memo.insert(w.to_vec(), ok);
                ok
            }
            let mut memo = HashMap::new();
            go(&word, count, &base, &mut memo)
        };

        let mut rules = vec![PairRule::Normal; nn * nn];
        for a in 0..count {
            for b in 0..count {
                let idx = (a * count + b) as usize;
                rules[idx] = match base[idx] {
                    Base::Normal => PairRule::Normal,
                    Base::Cancel => PairRule::Cancel,
                    Base::Contract(c) => PairRule::Contract(c),
                    Base::NeedsExchange => {
                        let t = (dims[a as usize] as u32 + dims[b as usize] as u32) % modulus;
                        let mut found = None;
                        let mut multiple = false;
                        for &(vp, up) in &normal_pairs_by_type[t as usize] {
                            let word =
                                vec![lambda[vp as usize], a, b, lambda[up as usize]];
                            if trivially_reducible(word) {
                                if found.is_some() {
                                    multiple = true;
                                    break;
                                }
                                found = Some((vp, up));
                            }
                        }
                        match (found, multiple) {
                            (Some((vp, up)), false) => PairRule::Exchange(vp, up),
                            (None, _) => {
                                return Err(Error::PresentationRejected(format!(
                                    "no normal pair equals a_{a} a_{b}; two-letter table incomplete"
                                )))
                            }
                            (_, true) => {
                                return Err(Error::PresentationRejected(format!(
                                    "multiple normal pairs equal a_{a} a_{b}; normal forms not unique"
                                )))
                            }
                        }
                    }
                };
            }
        }

        Ok(Rewriter {
            n,
            q: g.q(),
            count,
            dims,
            lambda,
            incidence,
            join_whole,
            rules,
        })
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Number of generators = |Π|.
    pub fn generator_count(&self) -> u32 {
        self.count
    }

    #[inline]
    pub fn dim(&self, g: u32) -> u32 {
        self.dims[g as usize] as u32
    }

    #[inline]
    pub fn lambda(&self, g: u32) -> u32 {
        self.lambda[g as usize]
    }

    #[inline]
    pub fn incident(&self, i: u32, j: u32) -> bool {
        self.incidence[(i * self.count + j) as usize]
    }

    #[inline]
    pub fn join_is_whole(&self, i: u32, j: u32) -> bool {
        self.join_whole[(i * self.count + j) as usize]
    }

    #[inline]
    pub fn rule(&self, a: u32, b: u32) -> PairRule {
        self.rules[(a * self.count + b) as usize]
    }

    /// Generators of dimension d, in index order.
    pub fn generators_of_dim(&self, d: u32) -> impl Iterator<Item = u32> + '_ {
        (0..self.count).filter(move |&g| self.dim(g) == d)
    }

    /// The exchange entries of the rule table: ((u, v), (v′, u′)) with
    /// a_u a_v = a_{v′} a_{u′}, for every pair that is neither normal nor
    /// cancellable nor contractible.
    pub fn exchange_table(&self) -> Vec<((u32, u32), (u32, u32))> {
        let mut out = Vec::new();
        for a in 0..self.count {
            for b in 0..self.count {
                if let PairRule::Exchange(vp, up) = self.rule(a, b) {
                    out.push(((a, b), (vp, up)));
                }
            }
        }
        out
    }

    fn check_letters(&self, letters: &[u32]) -> Result<()> {
        for &g in letters {
            if g >= self.count {
                return Err(Error::Usage(format!(
                    "letter index {g} out of range (|Π| = {})",
                    self.count
                )));
            }
        }
        Ok(())
    }

    /// Reduce a word to its normal form, applying the leftmost applicable
    /// rule until none remains. A step budget guards against the (never
    /// observed) possibility of non-termination; exceeding it signals an
    /// invalid presentation or table bug.
    pub fn reduce(&self, letters: &[u32]) -> Result<NormalWord> {
        self.check_letters(letters)?;
        self.reduce_with_chooser(letters, |_| 0)
    }

    /// Like [`reduce`](Self::reduce), but the rule position is chosen by
    /// `chooser` among all currently non-normal pair positions (it
    /// receives the count and returns an index below it). Used to verify
    /// that the result is independent of application order.
    pub fn reduce_with_chooser(
        &self,
        letters: &[u32],
        mut chooser: impl FnMut(usize) -> usize,
    ) -> Result<NormalWord> {
        let mut w = letters.to_vec();
        let mut bad = Vec::new();
        let mut fuel = 64 * (w.len() + 2) * (w.len() + 2) + 256;
        loop {
            bad.clear();
            for j in 0..w.len().saturating_sub(1) {
                if self.rule(w[j], w[j + 1]) != PairRule::Normal {
                    bad.push(j);
                }
            }
            if bad.is_empty() {
                return Ok(NormalWord { letters: w });
            }
            fuel -= 1;
            if fuel == 0 {
                return Err(Error::Internal(format!(
                    "reduction budget exhausted on word of length {}",
                    letters.len()
                )));
            }
            let j = bad[chooser(bad.len()).min(bad.len() - 1)];
            match self.rule(w[j], w[j + 1]) {
                PairRule::Normal => unreachable!(),
                PairRule::Cancel => {
                    w.splice(j..j + 2, []);
                }
                PairRule::Contract(c) => {
                    w.splice(j..j + 2, [c]);
                }
                PairRule::Exchange(vp, up) => {
                    w[j] = vp;
                    w[j + 1] = up;
                }
            }
        }
    }

    /// Normal form of x·g. The word length changes by at most one; it can
    /// also stay equal (edges between same-length vertices exist, e.g.
    /// within a chamber at the identity).
    pub fn multiply(&self, x: &NormalWord, g: u32) -> Result<NormalWord> {
        if g >= self.count {
            return Err(Error::Usage(format!("generator index {g} out of range")));
        }
        let mut w = Vec::with_capacity(x.len() + 1);
        w.extend_from_slice(&x.letters);
        w.push(g);
        self.reduce(&w)
    }

    /// Normal form of x·y.
    pub fn concat(&self, x: &NormalWord, y: &NormalWord) -> Result<NormalWord> {
        let mut w = Vec::with_capacity(x.len() + y.len());
        w.extend_from_slice(&x.letters);
        w.extend_from_slice(&y.letters);
        self.reduce(&w)
    }

    /// x⁻¹: reverse the letters and apply λ. The inverse of a normal word
    /// is already normal.
    pub fn inverse(&self, x: &NormalWord) -> NormalWord {
        let letters: Vec<u32> = x
            .letters
            .iter()
            .rev()
            .map(|&g| self.lambda[g as usize])
            .collect();
        debug_assert!(letters
            .windows(2)
            .all(|p| self.rule(p[0], p[1]) == PairRule::Normal));
        NormalWord { letters }
    }

    /// Normal form of x⁻¹·y.
    pub fn between(&self, x: &NormalWord, y: &NormalWord) -> Result<NormalWord> {
        self.concat(&self.inverse(x), y)
    }

    /// Sector coordinates of a word: letter counts per dimension.
    pub fn shape(&self, x: &NormalWord) -> SphereIndex {
        let mut k = vec![0u32; self.n as usize];
        for &g in &x.letters {
            k[(self.dim(g) - 1) as usize] += 1;
        }
        k
    }

    /// Vertex type: Σ dim(u_i) mod (n+1).
    pub fn vertex_type(&self, x: &NormalWord) -> u32 {
        let s: u32 = x.letters.iter().map(|&g| self.dim(g)).sum();
        s % (self.n + 1)
    }

    /// Graph distance d(x, y) = |x⁻¹y|.
    pub fn distance(&self, x: &NormalWord, y: &NormalWord) -> Result<u32> {
        Ok(self.between(x, y)?.len() as u32)
    }

    /// All normal words of shape k, generated by letter-ordered DFS; the
    /// output is deterministic and duplicate-free, and enumerates the
    /// sphere S_k.
    pub fn sphere_words(&self, k: &[u32]) -> Result<Vec<NormalWord>> {
        if k.len() != self.n as usize {
            return Err(Error::Usage(format!(
                "sphere index has {} components, rank is {}",
                k.len(),
                self.n
            )));
        }
        let mut out = Vec::new();
        let mut rem = k.to_vec();
        let mut cur = Vec::new();
        self.sphere_dfs(&mut cur, &mut rem, &mut |w| out.push(NormalWord { letters: w.to_vec() }));
        Ok(out)
    }

    fn sphere_dfs(&self, cur: &mut Vec<u32>, rem: &mut [u32], sink: &mut impl FnMut(&[u32])) {
        if rem.iter().all(|&r| r == 0) {
            sink(cur);
            return;
        }
        for g in 0..self.count {
            let d = (self.dim(g) - 1) as usize;
            if rem[d] == 0 {
                continue;
            }
            if let Some(&last) = cur.last() {
                if self.rule(last, g) != PairRule::Normal {
                    continue;
                }
            }
            rem[d] -= 1;
            cur.push(g);
            self.sphere_dfs(cur, rem, sink);
            cur.pop();
            rem[d] += 1;
        }
    }

    /// First normal word of shape k in DFS order, if the sphere is
    /// non-empty. Cheap even for deep shapes.
    pub fn greedy_word(&self, k: &[u32]) -> Result<NormalWord> {
        if k.len() != self.n as usize {
            return Err(Error::Usage(format!(
                "sphere index has {} components, rank is {}",
                k.len(),
                self.n
            )));
        }
        let mut rem = k.to_vec();
        let mut cur = Vec::new();
        if self.greedy_dfs(&mut cur, &mut rem) {
            Ok(NormalWord { letters: cur })
        } else {
            Err(Error::Range(format!("no normal word of shape {k:?}")))
        }
    }

    fn greedy_dfs(&self, cur: &mut Vec<u32>, rem: &mut [u32]) -> bool {
        if rem.iter().all(|&r| r == 0) {
            return true;
        }
        for g in 0..self.count {
            let d = (self.dim(g) - 1) as usize;
            if rem[d] == 0 {
                continue;
            }
            if let Some(&last) = cur.last() {
                if self.rule(last, g) != PairRule::Normal {
                    continue;
                }
            }
            rem[d] -= 1;
            cur.push(g);
            if self.greedy_dfs(cur, rem) {
                return true;
            }
            cur.pop();
            rem[d] += 1;
        }
        false
    }

    /// All chambers at the identity: one per complete flag
    /// u₁ ⊂ u₂ ⊂ … ⊂ u_n, in lexicographic flag order.
    pub fn chambers_at_identity(&self) -> Vec<Chamber> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(self.n as usize);
        self.flag_dfs(&mut cur, &mut out);
        out
    }

    fn flag_dfs(&self, cur: &mut Vec<u32>, out: &mut Vec<Chamber>) {
        let d = cur.len() as u32 + 1;
        if d > self.n {
            out.push(Chamber { flag: cur.clone() });
            return;
        }
        for g in 0..self.count {
            if self.dim(g) != d {
                continue;
            }
            if cur.last().is_none_or(|&p| self.incident(p, g)) {
                cur.push(g);
                self.flag_dfs(cur, out);
                cur.pop();
            }
        }
    }

    /// The q vertices opposite the identity across the face
    /// C ∖ {identity} of the chamber C. Each lies in S_{(1,0,…,0,1)} and
    /// is adjacent to every non-identity vertex of C.
    pub fn opposite_vertices(&self, chamber: &Chamber) -> Result<Vec<NormalWord>> {
        let flag = &chamber.flag;
        if flag.len() != self.n as usize {
            return Err(Error::Usage(format!(
                "chamber flag has {} elements, rank is {}",
                flag.len(),
                self.n
            )));
        }
        for (i, &u) in flag.iter().enumerate() {
            if u >= self.count || self.dim(u) != i as u32 + 1 {
                return Err(Error::Usage(format!(
                    "flag element {i} must be a dim-{} generator",
                    i + 1
                )));
            }
            if i > 0 && !self.incident(flag[i - 1], u) {
                return Err(Error::Usage(format!(
                    "flag elements {} and {} are not incident",
                    i - 1,
                    i
                )));
            }
        }
        let p1 = flag[0];
        // express each deeper chamber vertex as p1 · u_{i−1}
        let mut chain = Vec::new(); // u_{i−1}, dim i−1
        for i in 1..self.n as usize {
            let rule = self.rule(self.lambda(p1), flag[i]);
            let PairRule::Contract(c) = rule else {
                return Err(Error::Usage(format!(
                    "not a chamber: λ(p1)·p_{} does not contract to a generator",
                    i + 1
                )));
            };
            if self.dim(c) != i as u32 {
                return Err(Error::Internal(format!(
                    "chamber chain element has dim {}, expected {i}",
                    self.dim(c)
                )));
            }
            chain.push(c);
        }
        let top = chain.last().copied();
        let mut out = Vec::new();
        for un in self.generators_of_dim(self.n) {
            if un == self.lambda(p1) {
                continue;
            }
            if let Some(t) = top {
                if !self.incident(t, un) {
                    continue;
                }
            }
            let x = self.reduce(&[p1, un])?;
            let shape = self.shape(&x);
            let mut expect = vec![0u32; self.n as usize];
            expect[0] += 1;
            expect[self.n as usize - 1] += 1;
            if shape != expect {
                return Err(Error::Internal(format!(
                    "opposite vertex has shape {shape:?}, expected {expect:?}"
                )));
            }
            out.push(x);
        }
        if out.len() != self.q as usize {
            return Err(Error::Internal(format!(
                "found {} opposite vertices, expected q = {}",
                out.len(),
                self.q
            )));
        }
        Ok(out)
    }
}

/// A chamber at the identity, named by its complete flag in Π; the vertex
/// set is {ε, [u₁], …, [u_n]}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Chamber {
    pub flag: Vec<u32>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::sphere_size;
    use crate::pgeom::Geometry;
    use crate::tripres::scan_dualities;
    use num_traits::ToPrimitive;
    use rand::{Rng, SeedableRng};
    use std::sync::OnceLock;

    fn fixture() -> &'static (TrianglePresentation, Rewriter) {
        static FIX: OnceLock<(TrianglePresentation, Rewriter)> = OnceLock::new();
        FIX.get_or_init(|| {
            let g = Geometry::vector(2, 2).unwrap();
            let p = scan_dualities(&g, 1, 7, 1_000_000, 10_000)
                .unwrap()
                .found
                .remove(0);
            let rw = Rewriter::new(&p).unwrap();
            (p, rw)
        })
    }

    #[test]
    fn cancellation_and_contraction() {
        let (p, rw) = fixture();
        for g in 0..rw.generator_count() {
            let w = rw.reduce(&[g, rw.lambda(g)]).unwrap();
            assert!(w.is_empty(), "a_g a_{{λg}} must cancel");
        }
        // (u,v,w) in T: a_u a_v = a_{λw}
        for &[u, v, w] in p.triples() {
            let r = rw.reduce(&[u, v]).unwrap();
            assert_eq!(r.letters(), &[rw.lambda(w)]);
        }
    }

    #[test]
    fn reduce_is_idempotent_on_normal_words() {
        let (_, rw) = fixture();
        for k in [vec![1, 0], vec![1, 1], vec![2, 1]] {
            for w in rw.sphere_words(&k).unwrap() {
                let r = rw.reduce(w.letters()).unwrap();
                assert_eq!(r, w);
            }
        }
    }

    #[test]
    fn reduction_is_order_independent_on_random_words() {
        let (_, rw) = fixture();
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        for _ in 0..400 {
            let len = rng.gen_range(1..=8);
            let word: Vec<u32> = (0..len)
                .map(|_| rng.gen_range(0..rw.generator_count()))
                .collect();
            let baseline = rw.reduce(&word).unwrap();
            for _ in 0..4 {
                let r = rw
                    .reduce_with_chooser(&word, |m| rng.gen_range(0..m))
                    .unwrap();
                assert_eq!(r, baseline, "word {word:?}");
            }
        }
    }

    #[test]
    fn exchange_table_covers_its_domain_and_preserves_dim_multiset() {
        let (_, rw) = fixture();
        let table = rw.exchange_table();
        // q=2, n=2: exactly the (line, point) pairs with p ≠ λ(L)
        assert_eq!(table.len(), 42);
        for ((a, b), (vp, up)) in table {
            let mut d1 = [rw.dim(a), rw.dim(b)];
            let mut d2 = [rw.dim(vp), rw.dim(up)];
            d1.sort_unstable();
            d2.sort_unstable();
            assert_eq!(d1, d2);
            // result pair is normal
            assert_eq!(rw.rule(vp, up), PairRule::Normal);
            // pairs already normal are not in the domain
            assert_ne!(rw.rule(a, b), PairRule::Normal);
        }
    }

    #[test]
    fn multiply_steps() {
        let (_, rw) = fixture();
        let e = NormalWord::identity();
        for g in 0..rw.generator_count() {
            let x = rw.multiply(&e, g).unwrap();
            assert_eq!(x.letters(), &[g]);
            let back = rw.multiply(&x, rw.lambda(g)).unwrap();
            assert!(back.is_empty());
        }
        // x·g then ·λ(g) returns to x, for longer x too
        let x = rw.greedy_word(&[2, 1]).unwrap();
        for g in 0..rw.generator_count() {
            let y = rw.multiply(&x, g).unwrap();
            let back = rw.multiply(&y, rw.lambda(g)).unwrap();
            assert_eq!(back, x);
            let delta = y.len() as i64 - x.len() as i64;
            assert!(delta.abs() <= 1);
        }
    }

    #[test]
    fn vertex_types() {
        let (_, rw) = fixture();
        let e = NormalWord::identity();
        assert_eq!(rw.vertex_type(&e), 0);
        let p = rw.generators_of_dim(1).next().unwrap();
        assert_eq!(rw.vertex_type(&rw.reduce(&[p]).unwrap()), 1);
        let w = rw.greedy_word(&[1, 1]).unwrap();
        assert_eq!(rw.vertex_type(&w), 0); // 1 + 2 mod 3
        // additivity along random steps
        let mut rng = rand::rngs::StdRng::seed_from_u64(3);
        let mut x = NormalWord::identity();
        for _ in 0..60 {
            let g = rng.gen_range(0..rw.generator_count());
            let y = rw.multiply(&x, g).unwrap();
            assert_eq!(
                rw.vertex_type(&y),
                (rw.vertex_type(&x) + rw.dim(g)) % (rw.n() + 1)
            );
            x = y;
        }
    }

    #[test]
    fn distance_properties() {
        let (_, rw) = fixture();
        let e = NormalWord::identity();
        assert_eq!(rw.distance(&e, &e).unwrap(), 0);
        for g in 0..rw.generator_count() {
            let x = rw.reduce(&[g]).unwrap();
            assert_eq!(rw.distance(&e, &x).unwrap(), 1);
            assert_eq!(rw.distance(&x, &x).unwrap(), 0);
        }
        // symmetry on sampled pairs within radius 2
        let mut all: Vec<NormalWord> = vec![e];
        for k in [vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 0], vec![0, 2]] {
            all.extend(rw.sphere_words(&k).unwrap());
        }
        for x in &all {
            for y in &all {
                assert_eq!(rw.distance(x, y).unwrap(), rw.distance(y, x).unwrap());
            }
        }
    }

    #[test]
    fn sphere_counts_match_closed_form() {
        let (_, rw) = fixture();
        for k in [vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 2]] {
            let words = rw.sphere_words(&k).unwrap();
            let expect = sphere_size(&k, 2, 2).unwrap().to_usize().unwrap();
            assert_eq!(words.len(), expect, "k={k:?}");
        }
        assert_eq!(rw.sphere_words(&[0, 0]).unwrap(), vec![NormalWord::identity()]);
    }

    #[test]
    fn chambers_and_opposite_vertices() {
        let (_, rw) = fixture();
        let chambers = rw.chambers_at_identity();
        assert_eq!(chambers.len(), 21); // (q²+q+1)(q+1)
        for c in &chambers {
            let opp = rw.opposite_vertices(c).unwrap();
            assert_eq!(opp.len(), 2); // q
            for x in &opp {
                assert_eq!(rw.shape(x), vec![1, 1]);
                // adjacent to every non-identity chamber vertex
                for &u in &c.flag {
                    let v = rw.reduce(&[u]).unwrap();
                    assert_eq!(rw.distance(&v, x).unwrap(), 1);
                }
                // and at distance 2 from the identity
                assert_eq!(x.len(), 2);
            }
        }
    }

    #[test]
    fn invalid_chamber_is_a_usage_error() {
        let (_, rw) = fixture();
        // two non-incident elements cannot form a flag
        let p = rw.generators_of_dim(1).next().unwrap();
        let l = rw
            .generators_of_dim(2)
            .find(|&l| !rw.incident(p, l))
            .unwrap();
        let bad = Chamber { flag: vec![p, l] };
        assert!(matches!(
            rw.opposite_vertices(&bad),
            Err(Error::Usage(_))
        ));
    }

    #[test]
    fn word_literal_round_trip() {
        assert_eq!(parse_word_literal("e").unwrap(), Vec::<u32>::new());
        assert_eq!(parse_word_literal("").unwrap(), Vec::<u32>::new());
        assert_eq!(parse_word_literal("g3,g11").unwrap(), vec![3, 11]);
        assert_eq!(display_word(&[3, 11]), "g3,g11");
        assert_eq!(display_word(&[]), "e");
        assert!(parse_word_literal("h3").is_err());
        assert!(parse_word_literal("g").is_err());
        assert!(parse_word_literal("g-1").is_err());
    }
}
