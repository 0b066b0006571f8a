//! Cayley-ball construction: the radius-R piece of the building's
//! 1-skeleton, with generator-labeled adjacency and sphere lookup.
//!
//! Vertex ids are assigned by a canonical post-pass sort (word length,
//! then letters), so serialized balls are byte-identical across runs
//! regardless of hash-map iteration order. Vertex 0 is the identity.

use super::{NormalWord, Rewriter, SphereIndex};
use crate::error::{Error, Result};
use crate::tripres::TrianglePresentation;
use std::collections::{BTreeMap, HashMap};

/// Radius-R ball of the Cayley graph. Adjacency is complete for vertices
/// with |word| ≤ R−1; for boundary vertices only edges staying inside the
/// ball are stored.
#[derive(Debug, Clone)]
pub struct CayleyBall {
    pub(crate) q: u32,
    pub(crate) n: u32,
    pub(crate) radius: u32,
    pub(crate) presentation_hash: String,
    pub(crate) words: Vec<NormalWord>,
    pub(crate) index: HashMap<NormalWord, u32>,
    /// Per vertex: (generator, neighbor id), sorted by generator.
    pub(crate) adjacency: Vec<Vec<(u32, u32)>>,
    pub(crate) sphere_ids: BTreeMap<SphereIndex, Vec<u32>>,
}

impl CayleyBall {
    pub fn radius(&self) -> u32 {
        self.radius
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn presentation_hash(&self) -> &str {
        &self.presentation_hash
    }

    pub fn vertex_count(&self) -> usize {
        self.words.len()
    }

    pub fn word(&self, id: u32) -> &NormalWord {
        &self.words[id as usize]
    }

    pub fn id_of(&self, w: &NormalWord) -> Option<u32> {
        self.index.get(w).copied()
    }

    pub fn neighbors(&self, id: u32) -> &[(u32, u32)] {
        &self.adjacency[id as usize]
    }

    /// Vertices whose normal-form shape is k.
    pub fn sphere(&self, k: &[u32]) -> Result<&[u32]> {
        let norm: u32 = k.iter().sum();
        if norm > self.radius {
            return Err(Error::Range(format!(
                "|k| = {norm} exceeds ball radius {}",
                self.radius
            )));
        }
        Ok(self
            .sphere_ids
            .get(k)
            .map(|v| v.as_slice())
            .unwrap_or_default())
    }

    /// All vertices at graph distance r from the identity.
    pub fn level(&self, r: u32) -> Result<Vec<u32>> {
        if r > self.radius {
            return Err(Error::Range(format!(
                "distance {r} exceeds ball radius {}",
                self.radius
            )));
        }
        Ok((0..self.words.len() as u32)
            .filter(|&i| self.words[i as usize].len() == r as usize)
            .collect())
    }
}

/// Breadth-first construction from the identity. Every vertex with
/// |word| ≤ R enters; expansion stops at the memory budget with the
/// high-water mark reported.
pub fn build_ball(
    pres: &TrianglePresentation,
    rw: &Rewriter,
    radius: u32,
    max_vertices: usize,
) -> Result<CayleyBall> {
    let mut index: HashMap<NormalWord, u32> = HashMap::new();
    let mut words: Vec<NormalWord> = Vec::new();
    let e = NormalWord::identity();
    index.insert(e.clone(), 0);
    words.push(e);

    let mut frontier: Vec<u32> = vec![0];
    let mut depth = 0;
    while depth < radius && !frontier.is_empty() {
        let mut next = Vec::new();
        for &id in &frontier {
            let x = words[id as usize].clone();
            for g in 0..rw.generator_count() {
                let y = rw.multiply(&x, g)?;
                if y.len() != depth as usize + 1 {
                    continue; // stayed at or below the current level
                }
                if !index.contains_key(&y) {
                    if words.len() >= max_vertices {
                        return Err(Error::Budget {
                            high_water: words.len(),
                            limit: max_vertices,
                        });
                    }
                    let nid = words.len() as u32;
                    index.insert(y.clone(), nid);
                    words.push(y);
                    next.push(nid);
                }
            }
        }
        depth += 1;
        frontier = next;
    }

    // canonical ids: sort by (length, letters)
    words.sort();
    let mut canon: HashMap<NormalWord, u32> = HashMap::with_capacity(words.len());
    for (i, w) in words.iter().enumerate() {
        canon.insert(w.clone(), i as u32);
    }

    // adjacency within the ball, complete for interior vertices
    let mut adjacency = vec![Vec::new(); words.len()];
    for (i, x) in words.iter().enumerate() {
        for g in 0..rw.generator_count() {
            let y = rw.multiply(x, g)?;
            if let Some(&j) = canon.get(&y) {
                adjacency[i].push((g, j));
            }
        }
    }

    let mut sphere_ids: BTreeMap<SphereIndex, Vec<u32>> = BTreeMap::new();
    for (i, w) in words.iter().enumerate() {
        sphere_ids.entry(rw.shape(w)).or_default().push(i as u32);
    }

    Ok(CayleyBall {
        q: rw.q(),
        n: rw.n(),
        radius,
        presentation_hash: pres.content_hash(),
        words,
        index: canon,
        adjacency,
        sphere_ids,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::counting::sphere_size;
    use crate::pgeom::Geometry;
    use crate::tripres::scan_dualities;
    use num_traits::ToPrimitive;
    use std::sync::OnceLock;

    fn fixture() -> &'static (TrianglePresentation, Rewriter, CayleyBall) {
        static FIX: OnceLock<(TrianglePresentation, Rewriter, CayleyBall)> = OnceLock::new();
        FIX.get_or_init(|| {
            let g = Geometry::vector(2, 2).unwrap();
            let p = scan_dualities(&g, 1, 7, 1_000_000, 10_000)
                .unwrap()
                .found
                .remove(0);
            let rw = Rewriter::new(&p).unwrap();
            let ball = build_ball(&p, &rw, 3, 1_000_000).unwrap();
            (p, rw, ball)
        })
    }

    #[test]
    fn radius_zero_is_a_single_vertex() {
        let (p, rw, _) = fixture();
        let b = build_ball(p, rw, 0, 10).unwrap();
        assert_eq!(b.vertex_count(), 1);
        assert!(b.word(0).is_empty());
    }

    #[test]
    fn radius_one_has_fifteen_vertices() {
        let (p, rw, _) = fixture();
        let b = build_ball(p, rw, 1, 100).unwrap();
        assert_eq!(b.vertex_count(), 15); // ε + 7 points + 7 lines
    }

    #[test]
    fn budget_exhaustion_reports_high_water() {
        let (p, rw, _) = fixture();
        let err = build_ball(p, rw, 2, 20).unwrap_err();
        match err {
            Error::Budget { high_water, limit } => {
                assert_eq!(limit, 20);
                assert!(high_water >= 15);
            }
            other => panic!("expected budget error, got {other}"),
        }
    }

    #[test]
    fn levels_match_word_lengths_and_formula() {
        let (_, rw, ball) = fixture();
        for r in 0..=3u32 {
            let level = ball.level(r).unwrap();
            // partition identity: Σ_{|k|=r} |S_k| = level size
            let mut total = 0usize;
            for (k, ids) in &ball.sphere_ids {
                if k.iter().sum::<u32>() == r {
                    total += ids.len();
                    let expect = sphere_size(k, rw.n(), rw.q()).unwrap().to_usize().unwrap();
                    assert_eq!(ids.len(), expect, "k={k:?}");
                }
            }
            assert_eq!(level.len(), total);
        }
        assert!(ball.level(9).is_err());
    }

    #[test]
    fn sphere_lookup_matches_dfs_enumeration() {
        let (_, rw, ball) = fixture();
        for k in [vec![1, 0], vec![1, 1], vec![2, 1]] {
            let ids = ball.sphere(&k).unwrap();
            let via_dfs = rw.sphere_words(&k).unwrap();
            let via_ball: Vec<NormalWord> =
                ids.iter().map(|&i| ball.word(i).clone()).collect();
            assert_eq!(via_ball, via_dfs);
        }
        assert!(ball.sphere(&[4, 4]).is_err());
    }

    #[test]
    fn adjacency_is_complete_for_interior_vertices() {
        let (_, rw, ball) = fixture();
        for id in 0..ball.vertex_count() as u32 {
            let w = ball.word(id);
            if w.len() <= 2 {
                assert_eq!(
                    ball.neighbors(id).len(),
                    rw.generator_count() as usize,
                    "interior vertex {id} misses edges"
                );
            }
            // edge followed by its inverse label returns
            for &(g, j) in ball.neighbors(id) {
                let back = ball
                    .neighbors(j)
                    .iter()
                    .find(|&&(h, _)| h == rw.lambda(g))
                    .map(|&(_, t)| t);
                assert_eq!(back, Some(id));
            }
        }
    }

    #[test]
    fn bfs_distance_equals_word_length() {
        // graph BFS over the adjacency lists, independent of word lengths
        let (_, _, ball) = fixture();
        let mut dist = vec![u32::MAX; ball.vertex_count()];
        dist[0] = 0;
        let mut queue = std::collections::VecDeque::from([0u32]);
        while let Some(v) = queue.pop_front() {
            for &(_, w) in ball.neighbors(v) {
                if dist[w as usize] == u32::MAX {
                    dist[w as usize] = dist[v as usize] + 1;
                    queue.push_back(w);
                }
            }
        }
        for id in 0..ball.vertex_count() {
            // boundary vertices may be reached only through interior edges,
            // which exist, so BFS distances are exact for the whole ball
            assert_eq!(dist[id] as usize, ball.word(id as u32).len());
        }
    }

    #[test]
    fn vertex_ids_are_canonical() {
        let (p, rw, ball) = fixture();
        let again = build_ball(p, rw, 3, 1_000_000).unwrap();
        assert_eq!(ball.words, again.words);
        assert_eq!(ball.adjacency, again.adjacency);
        for i in 1..ball.vertex_count() {
            assert!(ball.words[i - 1] < ball.words[i]);
        }
    }
}
