//! The finite projective geometry Π = PG(n, q): subspaces in canonical
//! echelon form, incidence, joins, dualities, and incidence counts.
//!
//! Elements of Π are the proper nonzero subspaces of F_q^{n+1}; `dim` is
//! the linear dimension, so points have dim 1 and hyperplanes dim n. A
//! geometry is compiled once into dense index tables (incidence and join)
//! shared by every other module; generators of the group are referred to
//! by this global index everywhere, including on disk.
//!
//! Possibly non-Desarguesian planes enter only as explicit incidence
//! tables with n = 2; they compile to the same table representation.

pub mod field;

use crate::counting::gaussian_binomial;
use crate::error::{Error, Result};
use field::Field;
use num_bigint::BigInt;
use serde::{Deserialize, Serialize};
use std::fmt;

/// Sentinel join result: the least upper bound is all of Π.
pub const WHOLE: u32 = u32::MAX;

/// A subspace of F_q^{n+1} in reduced row echelon form. Equal subspaces
/// have identical representations, so derived equality and hashing are
/// structural.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ProjSubspace {
    n: u32,
    q: u32,
    /// Echelon basis rows, each of length n+1, pivot-leading.
    /// Row count is the (linear) dimension, in 1..=n.
    rows: Vec<Vec<u8>>,
}

impl PartialOrd for ProjSubspace {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for ProjSubspace {
    /// Dimension first, then lexicographic basis: the global Π index
    /// order.
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        (self.n, self.q, self.rows.len(), &self.rows).cmp(&(
            other.n,
            other.q,
            other.rows.len(),
            &other.rows,
        ))
    }
}

impl ProjSubspace {
    pub fn dim(&self) -> u32 {
        self.rows.len() as u32
    }

    pub fn rows(&self) -> &[Vec<u8>] {
        &self.rows
    }

    pub fn rank(&self) -> u32 {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.q
    }

    fn same_geometry(&self, other: &ProjSubspace) -> Result<()> {
        if self.n != other.n || self.q != other.q {
            return Err(Error::Usage(format!(
                "subspaces from different geometries: PG({},{}) vs PG({},{})",
                self.n, self.q, other.n, other.q
            )));
        }
        Ok(())
    }
}

impl fmt::Display for ProjSubspace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let rows: Vec<String> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|c| c.to_string()).collect::<String>())
            .collect();
        write!(f, "[{}]", rows.join(";"))
    }
}

/// Result of a join: a proper subspace or all of Π.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Join {
    Subspace(ProjSubspace),
    Whole,
}

fn rref_in_place(field: &Field, rows: &mut Vec<Vec<u8>>) {
    let ncols = rows.first().map_or(0, |r| r.len());
    let mut pivot_row = 0;
    for col in 0..ncols {
        let Some(src) = (pivot_row..rows.len()).find(|&r| rows[r][col] != 0) else {
            continue;
        };
        rows.swap(pivot_row, src);
        let inv = field.inv(rows[pivot_row][col]);
        for c in 0..ncols {
            rows[pivot_row][c] = field.mul(rows[pivot_row][c], inv);
        }
        for r in 0..rows.len() {
            if r != pivot_row && rows[r][col] != 0 {
                let f = rows[r][col];
                for c in 0..ncols {
                    let sub = field.mul(f, rows[pivot_row][c]);
                    rows[r][c] = field.sub(rows[r][c], sub);
                }
            }
        }
        pivot_row += 1;
        if pivot_row == rows.len() {
            break;
        }
    }
    rows.retain(|r| r.iter().any(|&c| c != 0));
}

/// Largest subspace family the library will materialise; keeps geometry
/// construction safe on untrusted declarative input.
pub const MAX_ELEMENTS: u64 = 2_000_000;

/// All subspaces of linear dimension `d` in F_q^{n+1}, canonical and
/// sorted. Enumerates reduced echelon matrices directly: one per subspace.
pub fn enumerate_subspaces(n: u32, q: u32, d: u32) -> Result<Vec<ProjSubspace>> {
    if d < 1 || d > n {
        return Err(Error::Usage(format!(
            "subspace dimension {d} outside 1..={n}"
        )));
    }
    let expected = gaussian_binomial(n + 1, d, q);
    if expected > BigInt::from(MAX_ELEMENTS) {
        return Err(Error::Config(format!(
            "PG({n},{q}) has {expected} subspaces of dim {d}, beyond the desk-scale cap {MAX_ELEMENTS}"
        )));
    }
    let _field = Field::new(q)?; // validates q
    let ncols = (n + 1) as usize;
    let dd = d as usize;
    let mut out = Vec::new();

    // choose pivot columns, then fill free entries
    let mut pivots: Vec<usize> = (0..dd).collect();
    loop {
        // free positions: (row i, col j) with j > pivots[i], j not a pivot
        let mut free = Vec::new();
        for (i, &p) in pivots.iter().enumerate() {
            for j in (p + 1)..ncols {
                if !pivots.contains(&j) {
                    free.push((i, j));
                }
            }
        }
        let mut assign = vec![0u8; free.len()];
        loop {
            let mut rows = vec![vec![0u8; ncols]; dd];
            for (i, &p) in pivots.iter().enumerate() {
                rows[i][p] = 1;
            }
            for (slot, &(i, j)) in free.iter().enumerate() {
                rows[i][j] = assign[slot];
            }
            out.push(ProjSubspace { n, q, rows });
            // next assignment in base q
            let mut carry = true;
            for a in assign.iter_mut() {
                if !carry {
                    break;
                }
                *a += 1;
                if u32::from(*a) == q {
                    *a = 0;
                } else {
                    carry = false;
                }
            }
            if carry {
                break;
            }
        }
        // next pivot combination (lexicographic)
        let mut i = dd;
        loop {
            if i == 0 {
                pivots.clear();
                break;
            }
            i -= 1;
            if pivots[i] != i + ncols - dd {
                pivots[i] += 1;
                for k in (i + 1)..dd {
                    pivots[k] = pivots[k - 1] + 1;
                }
                break;
            }
        }
        if pivots.is_empty() {
            break;
        }
    }
    out.sort();
    out.dedup();
    Ok(out)
}

/// Whether one subspace contains the other (in either direction).
/// Containment is reflexive.
pub fn incident(u: &ProjSubspace, v: &ProjSubspace) -> Result<bool> {
    u.same_geometry(v)?;
    if u == v {
        return Ok(true);
    }
    let (small, big) = if u.dim() <= v.dim() { (u, v) } else { (v, u) };
    if small.dim() == big.dim() {
        return Ok(false); // distinct, equal dimension
    }
    let field = Field::new(u.q)?;
    let mut rows = big.rows.clone();
    rows.extend(small.rows.iter().cloned());
    rref_in_place(&field, &mut rows);
    Ok(rows.len() as u32 == big.dim())
}

/// Least upper bound of two subspaces in the subspace lattice; `Whole`
/// when they span all of F_q^{n+1}.
pub fn join(u: &ProjSubspace, v: &ProjSubspace) -> Result<Join> {
    u.same_geometry(v)?;
    let field = Field::new(u.q)?;
    let mut rows = u.rows.clone();
    rows.extend(v.rows.iter().cloned());
    rref_in_place(&field, &mut rows);
    if rows.len() as u32 == u.n + 1 {
        Ok(Join::Whole)
    } else {
        Ok(Join::Subspace(ProjSubspace {
            n: u.n,
            q: u.q,
            rows,
        }))
    }
}

/// Incidence counts of PG(n, q), exact.
///
/// - `r > b_dim`: number of r-dimensional subspaces containing a fixed
///   b_dim-dimensional one, `[n+1−b choose r−b]_q`.
/// - `r < b_dim`: number of r-dimensional subspaces contained in it,
///   `[b choose r]_q`.
/// - `b_dim = 0` counts all r-dimensional subspaces, `|Π_r|`.
pub fn count_incident(n: u32, q: u32, b_dim: u32, r: u32) -> BigInt {
    use std::cmp::Ordering;
    match r.cmp(&b_dim) {
        Ordering::Greater => gaussian_binomial(n + 1 - b_dim, r - b_dim, q),
        Ordering::Less => gaussian_binomial(b_dim, r, q),
        Ordering::Equal => BigInt::from(1),
    }
}

// ---------------------------------------------------------------------------
// Geometry block as it appears inside presentation files
// ---------------------------------------------------------------------------

/// Declarative description of a geometry, as serialized in presentation
/// files: either a vector-space geometry PG(n, q), or an explicit plane
/// incidence table (n = 2 only; `matrix[point][line]`).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GeometrySpec {
    Vector {
        n: u32,
        q: u32,
    },
    Incidence {
        points: u32,
        lines: u32,
        matrix: Vec<Vec<u8>>,
    },
}

/// An abstract (possibly non-Desarguesian) projective plane given by its
/// point–line incidence table.
#[derive(Debug, Clone)]
pub struct AbstractPlane {
    pub points: u32,
    pub lines: u32,
    /// `incidence[p][l]` is true when point p lies on line l.
    pub incidence: Vec<Vec<bool>>,
}

impl AbstractPlane {
    /// Verify the projective-plane axioms and return the plane order q:
    /// two distinct points lie on exactly one common line, two distinct
    /// lines meet in exactly one common point, and every line carries
    /// exactly q+1 points.
    pub fn validate(&self) -> Result<u32> {
        let p = self.points as usize;
        let l = self.lines as usize;
        if p > 1024 || l > 1024 {
            return Err(Error::Config(format!(
                "plane with {p} points / {l} lines is beyond the desk-scale cap 1024"
            )));
        }
        if p == 0 || l == 0 {
            return Err(Error::Usage("plane needs at least one point and line".into()));
        }
        if self.incidence.len() != p || self.incidence.iter().any(|r| r.len() != l) {
            return Err(Error::Usage(format!(
                "incidence matrix must be {p}x{l}"
            )));
        }
        let line_size = |j: usize| (0..p).filter(|&i| self.incidence[i][j]).count();
        let first = line_size(0);
        if first < 3 {
            return Err(Error::Usage(
                "degenerate plane: a line has fewer than 3 points".into(),
            ));
        }
        let q = (first - 1) as u32;
        for j in 0..l {
            if line_size(j) != first {
                return Err(Error::Usage(format!(
                    "line {j} has {} points, expected {first}",
                    line_size(j)
                )));
            }
        }
        for a in 0..p {
            for b in (a + 1)..p {
                let common = (0..l)
                    .filter(|&j| self.incidence[a][j] && self.incidence[b][j])
                    .count();
                if common != 1 {
                    return Err(Error::Usage(format!(
                        "points {a},{b} lie on {common} common lines, expected 1"
                    )));
                }
            }
        }
        for a in 0..l {
            for b in (a + 1)..l {
                let common = (0..p)
                    .filter(|&i| self.incidence[i][a] && self.incidence[i][b])
                    .count();
                if common != 1 {
                    return Err(Error::Usage(format!(
                        "lines {a},{b} meet in {common} common points, expected 1"
                    )));
                }
            }
        }
        let expect = (q * q + q + 1) as usize;
        if p != expect || l != expect {
            return Err(Error::Usage(format!(
                "plane of order {q} must have {expect} points and lines, got {p}/{l}"
            )));
        }
        Ok(q)
    }
}

// ---------------------------------------------------------------------------
// Compiled geometry: dense index tables
// ---------------------------------------------------------------------------

/// A compiled geometry: every element of Π carries a dense index (sorted
/// by dimension, then lexicographic basis), and incidence/join queries are
/// table lookups. All downstream modules speak this index language.
#[derive(Debug, Clone)]
pub struct Geometry {
    spec: GeometrySpec,
    n: u32,
    q: u32,
    count: u32,
    dims: Vec<u8>,
    /// `dim_start[d]` is the first index of dimension d; `dim_start[n+1]`
    /// is the total count.
    dim_start: Vec<u32>,
    incidence: Vec<bool>,
    join_idx: Vec<u32>,
    /// Present for vector geometries only.
    subspaces: Option<Vec<ProjSubspace>>,
}

impl Geometry {
    /// PG(n, q) from the vector space F_q^{n+1}.
    pub fn vector(n: u32, q: u32) -> Result<Geometry> {
        if n < 1 {
            return Err(Error::Usage("geometry rank n must be at least 1".into()));
        }
        let field = Field::new(q)?;
        // the dense tables are quadratic in |Π|; keep them desk-scale
        let mut total = BigInt::from(0);
        for d in 1..=n {
            total += gaussian_binomial(n + 1, d, q);
        }
        if total > BigInt::from(4096) {
            return Err(Error::Config(format!(
                "PG({n},{q}) has {total} elements; dense geometry tables are capped at 4096"
            )));
        }
        let mut all = Vec::new();
        for d in 1..=n {
            all.extend(enumerate_subspaces(n, q, d)?);
        }
        let count = all.len() as u32;
        let index_of = |s: &ProjSubspace| all.binary_search(s).ok().map(|i| i as u32);

        let mut dims = Vec::with_capacity(all.len());
        let mut dim_start = vec![0u32; (n + 2) as usize];
        for (i, s) in all.iter().enumerate() {
            dims.push(s.dim() as u8);
            if dim_start[s.dim() as usize] == 0 && s.dim() > 1 {
                dim_start[s.dim() as usize] = i as u32;
            }
        }
        dim_start[(n + 1) as usize] = count;

        let nn = all.len();
        let mut incidence = vec![false; nn * nn];
        let mut join_idx = vec![WHOLE; nn * nn];
        for i in 0..nn {
            for j in 0..nn {
                incidence[i * nn + j] = incident(&all[i], &all[j])?;
                match join(&all[i], &all[j])? {
                    Join::Whole => join_idx[i * nn + j] = WHOLE,
                    Join::Subspace(s) => {
                        join_idx[i * nn + j] = index_of(&s).ok_or_else(|| {
                            Error::Internal("join result missing from index".into())
                        })?;
                    }
                }
            }
        }
        drop(field);
        Ok(Geometry {
            spec: GeometrySpec::Vector { n, q },
            n,
            q,
            count,
            dims,
            dim_start,
            incidence,
            join_idx,
            subspaces: Some(all),
        })
    }

    /// Compile an abstract plane (n = 2). Point indices come first, then
    /// lines, preserving the table order.
    pub fn from_plane(plane: &AbstractPlane) -> Result<Geometry> {
        let q = plane.validate()?;
        let p = plane.points as usize;
        let l = plane.lines as usize;
        let nn = p + l;
        let mut dims = vec![1u8; p];
        dims.extend(std::iter::repeat(2u8).take(l));
        let dim_start = vec![0, 0, p as u32, nn as u32];
        let mut incidence = vec![false; nn * nn];
        let mut join_idx = vec![WHOLE; nn * nn];
        let inc = |i: usize, j: usize| -> bool {
            if i == j {
                true
            } else if i < p && j >= p {
                plane.incidence[i][j - p]
            } else if j < p && i >= p {
                plane.incidence[j][i - p]
            } else {
                false
            }
        };
        for i in 0..nn {
            for j in 0..nn {
                incidence[i * nn + j] = inc(i, j);
                join_idx[i * nn + j] = if i == j {
                    i as u32
                } else if i < p && j < p {
                    // unique line through two distinct points
                    let line = (0..l)
                        .find(|&m| plane.incidence[i][m] && plane.incidence[j][m])
                        .expect("validated plane");
                    (p + line) as u32
                } else if i < p && j >= p {
                    if inc(i, j) {
                        j as u32
                    } else {
                        WHOLE
                    }
                } else if j < p {
                    if inc(i, j) {
                        i as u32
                    } else {
                        WHOLE
                    }
                } else {
                    WHOLE // two distinct lines span the plane
                };
            }
        }
        let matrix = plane
            .incidence
            .iter()
            .map(|r| r.iter().map(|&b| u8::from(b)).collect())
            .collect();
        Ok(Geometry {
            spec: GeometrySpec::Incidence {
                points: plane.points,
                lines: plane.lines,
                matrix,
            },
            n: 2,
            q,
            count: nn as u32,
            dims,
            dim_start,
            incidence,
            join_idx,
            subspaces: None,
        })
    }

    /// Compile from a declarative spec block.
    pub fn from_spec(spec: &GeometrySpec) -> Result<Geometry> {
        match spec {
            GeometrySpec::Vector { n, q } => Geometry::vector(*n, *q),
            GeometrySpec::Incidence {
                points,
                lines,
                matrix,
            } => {
                let incidence = matrix
                    .iter()
                    .map(|r| r.iter().map(|&x| x != 0).collect())
                    .collect();
                Geometry::from_plane(&AbstractPlane {
                    points: *points,
                    lines: *lines,
                    incidence,
                })
            }
        }
    }

    pub fn spec(&self) -> &GeometrySpec {
        &self.spec
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// Total number of elements of Π.
    pub fn element_count(&self) -> u32 {
        self.count
    }

    #[inline]
    pub fn dim(&self, i: u32) -> u32 {
        self.dims[i as usize] as u32
    }

    #[inline]
    pub fn incident_idx(&self, i: u32, j: u32) -> bool {
        self.incidence[i as usize * self.count as usize + j as usize]
    }

    /// Join of two elements by index; [`WHOLE`] when they span Π.
    #[inline]
    pub fn join_idx(&self, i: u32, j: u32) -> u32 {
        self.join_idx[i as usize * self.count as usize + j as usize]
    }

    /// Indices of all elements of dimension d.
    pub fn elements_of_dim(&self, d: u32) -> std::ops::Range<u32> {
        self.dim_start[d as usize]..self.dim_start[(d + 1) as usize]
    }

    /// The subspace behind an index (vector geometries only).
    pub fn subspace(&self, i: u32) -> Option<&ProjSubspace> {
        self.subspaces.as_ref().map(|s| &s[i as usize])
    }

    pub fn index_of(&self, s: &ProjSubspace) -> Option<u32> {
        self.subspaces
            .as_ref()
            .and_then(|all| all.binary_search(s).ok())
            .map(|i| i as u32)
    }

    /// The annihilator duality u ↦ u^⊥ with respect to the standard inner
    /// product. Vector geometries only.
    pub fn standard_duality(&self) -> Result<Duality> {
        let Some(all) = &self.subspaces else {
            return Err(Error::Usage(
                "standard duality requires a vector geometry".into(),
            ));
        };
        let field = Field::new(self.q)?;
        let ncols = (self.n + 1) as usize;
        let mut map = Vec::with_capacity(all.len());
        for s in all {
            // kernel of the basis matrix: brute force over all vectors
            let mut ker: Vec<Vec<u8>> = Vec::new();
            let total = (self.q as u64).pow(ncols as u32);
            for code in 1..total {
                let mut v = Vec::with_capacity(ncols);
                let mut x = code;
                for _ in 0..ncols {
                    v.push((x % self.q as u64) as u8);
                    x /= self.q as u64;
                }
                let orthogonal = s.rows.iter().all(|row| {
                    let mut acc = 0u8;
                    for (a, b) in row.iter().zip(&v) {
                        acc = field.add(acc, field.mul(*a, *b));
                    }
                    acc == 0
                });
                if orthogonal {
                    ker.push(v);
                }
            }
            rref_in_place(&field, &mut ker);
            let perp = ProjSubspace {
                n: self.n,
                q: self.q,
                rows: ker,
            };
            let idx = self
                .index_of(&perp)
                .ok_or_else(|| Error::Internal("annihilator not in index".into()))?;
            map.push(idx);
        }
        Ok(Duality { map })
    }

    /// All complete flags u_1 ⊂ u_2 ⊂ … ⊂ u_n (dim u_i = i), as index
    /// vectors, in lexicographic order. These are the chambers at a vertex.
    pub fn flags(&self) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(self.n as usize);
        self.extend_flag(&mut cur, &mut out);
        out
    }

    fn extend_flag(&self, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        let d = cur.len() as u32 + 1;
        if d > self.n {
            out.push(cur.clone());
            return;
        }
        for i in self.elements_of_dim(d) {
            if cur.last().is_none_or(|&p| self.incident_idx(p, i)) {
                cur.push(i);
                self.extend_flag(cur, out);
                cur.pop();
            }
        }
    }
}

// ---------------------------------------------------------------------------
// Dualities
// ---------------------------------------------------------------------------

/// An involution λ of Π with dim λ(u) = n+1 − dim u, given as a
/// permutation of the global index. Any such involution is admissible; no
/// particular one is privileged.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Duality {
    pub map: Vec<u32>,
}

impl Duality {
    #[inline]
    pub fn apply(&self, i: u32) -> u32 {
        self.map[i as usize]
    }
}

/// Outcome of duality validation. `valid` covers the two defining rules;
/// `reverses_incidence` additionally records whether λ is a correlation
/// (the annihilator is; a generic admissible λ need not be).
#[derive(Debug, Clone, Serialize)]
pub struct DualityReport {
    pub valid: bool,
    /// Pairs (u, λ(λ(u))) with λ(λ(u)) ≠ u.
    pub involution_failures: Vec<(u32, u32)>,
    /// Elements u with dim λ(u) ≠ n+1 − dim u.
    pub dimension_failures: Vec<u32>,
    /// Present when the map is not a permutation of 0..|Π|.
    pub permutation_failure: Option<String>,
    pub reverses_incidence: bool,
}

/// Check that λ is total, involutive and dimension-reversing; failures are
/// reported with witnesses rather than raised.
pub fn validate_duality(lambda: &Duality, geometry: &Geometry) -> DualityReport {
    let count = geometry.element_count();
    let mut report = DualityReport {
        valid: true,
        involution_failures: vec![],
        dimension_failures: vec![],
        permutation_failure: None,
        reverses_incidence: true,
    };
    if lambda.map.len() != count as usize {
        report.valid = false;
        report.permutation_failure = Some(format!(
            "map has {} entries, geometry has {count}",
            lambda.map.len()
        ));
        return report;
    }
    let mut seen = vec![false; count as usize];
    for &img in &lambda.map {
        if img >= count || seen[img as usize] {
            report.valid = false;
            report.permutation_failure = Some(format!("map is not a permutation (image {img})"));
            return report;
        }
        seen[img as usize] = true;
    }
    for u in 0..count {
        let lu = lambda.apply(u);
        if lambda.apply(lu) != u {
            report.involution_failures.push((u, lambda.apply(lu)));
        }
        if geometry.dim(lu) != geometry.n() + 1 - geometry.dim(u) {
            report.dimension_failures.push(u);
        }
    }
    for u in 0..count {
        for v in 0..count {
            if geometry.incident_idx(u, v)
                != geometry.incident_idx(lambda.apply(v), lambda.apply(u))
            {
                report.reverses_incidence = false;
            }
        }
    }
    report.valid = report.involution_failures.is_empty() && report.dimension_failures.is_empty();
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    #[test]
    fn pg22_has_seven_points_and_seven_lines() {
        let pts = enumerate_subspaces(2, 2, 1).unwrap();
        assert_eq!(pts.len(), 7);
        // dual route: direct echelon enumeration of lines
        let lines = enumerate_subspaces(2, 2, 2).unwrap();
        assert_eq!(lines.len(), 7);
        // and the duality route: images of points under the annihilator
        let g = Geometry::vector(2, 2).unwrap();
        let lam = g.standard_duality().unwrap();
        let imgs: std::collections::BTreeSet<u32> =
            (0..7).map(|i| lam.apply(i)).collect();
        assert_eq!(imgs.len(), 7);
        assert!(imgs.iter().all(|&i| g.dim(i) == 2));
    }

    #[test]
    fn projective_line_over_f2_has_three_points() {
        assert_eq!(enumerate_subspaces(1, 2, 1).unwrap().len(), 3);
    }

    #[test]
    fn enumeration_matches_gaussian_count() {
        for (n, q) in [(2, 2), (2, 3), (2, 4), (3, 2), (3, 3)] {
            for d in 1..=n {
                let subs = enumerate_subspaces(n, q, d).unwrap();
                let expect = gaussian_binomial(n + 1, d, q).to_usize().unwrap();
                assert_eq!(subs.len(), expect, "n={n} q={q} d={d}");
                let mut dedup = subs.clone();
                dedup.dedup();
                assert_eq!(dedup.len(), subs.len(), "duplicates at n={n} q={q} d={d}");
            }
        }
    }

    #[test]
    fn incidence_basics() {
        let pts = enumerate_subspaces(2, 2, 1).unwrap();
        let lines = enumerate_subspaces(2, 2, 2).unwrap();
        // reflexive
        assert!(incident(&pts[0], &pts[0]).unwrap());
        // a point on its spanning line
        let l = match join(&pts[0], &pts[1]).unwrap() {
            Join::Subspace(s) => s,
            Join::Whole => panic!("two points span a line, not the plane"),
        };
        assert!(incident(&pts[0], &l).unwrap());
        assert!(incident(&l, &pts[1]).unwrap());
        // two distinct points are never incident
        for a in &pts {
            for b in &pts {
                if a != b {
                    assert!(!incident(a, b).unwrap());
                }
            }
        }
        // two distinct lines span the plane
        assert_eq!(join(&lines[0], &lines[1]).unwrap(), Join::Whole);
    }

    #[test]
    fn join_point_and_line() {
        let g = Geometry::vector(2, 2).unwrap();
        let pts = enumerate_subspaces(2, 2, 1).unwrap();
        let lines = enumerate_subspaces(2, 2, 2).unwrap();
        for p in &pts {
            for l in &lines {
                let j = join(p, l).unwrap();
                if incident(p, l).unwrap() {
                    assert_eq!(j, Join::Subspace(l.clone()));
                } else {
                    assert_eq!(j, Join::Whole);
                }
            }
        }
        drop(g);
    }

    #[test]
    fn mixed_geometries_are_a_usage_error() {
        let p2 = &enumerate_subspaces(2, 2, 1).unwrap()[0];
        let p3 = &enumerate_subspaces(2, 3, 1).unwrap()[0];
        assert!(matches!(incident(p2, p3), Err(Error::Usage(_))));
    }

    #[test]
    fn incident_counts() {
        // lines through a point of PG(2,2)
        assert_eq!(count_incident(2, 2, 1, 2), BigInt::from(3));
        // hyperplanes containing a point of PG(3,2): 1+q+q^2
        assert_eq!(count_incident(3, 2, 1, 3), BigInt::from(7));
        // |Π_2| of PG(2,2)
        assert_eq!(count_incident(2, 2, 0, 2), BigInt::from(7));
        // points on a line
        assert_eq!(count_incident(2, 3, 2, 1), BigInt::from(4));
    }

    #[test]
    fn standard_duality_is_valid_and_reverses_incidence() {
        for (n, q) in [(2, 2), (2, 3), (3, 2)] {
            let g = Geometry::vector(n, q).unwrap();
            let lam = g.standard_duality().unwrap();
            let rep = validate_duality(&lam, &g);
            assert!(rep.valid, "annihilator invalid at n={n} q={q}");
            assert!(rep.reverses_incidence);
        }
    }

    #[test]
    fn identity_map_fails_dimension_rule() {
        let g = Geometry::vector(2, 2).unwrap();
        let lam = Duality {
            map: (0..g.element_count()).collect(),
        };
        let rep = validate_duality(&lam, &g);
        assert!(!rep.valid);
        assert!(!rep.dimension_failures.is_empty());
    }

    #[test]
    fn non_involution_fails() {
        let g = Geometry::vector(2, 2).unwrap();
        let mut map: Vec<u32> = g.standard_duality().unwrap().map;
        // break involutivity with a 3-cycle among lines
        let (a, b, c) = (7u32, 8u32, 9u32);
        let (pa, pb, pc) = (map[a as usize], map[b as usize], map[c as usize]);
        // lambda(point behind a) stays, but cycle images of a,b,c
        map[a as usize] = pb;
        map[b as usize] = pc;
        map[c as usize] = pa;
        let rep = validate_duality(&Duality { map }, &g);
        assert!(!rep.valid);
        assert!(!rep.involution_failures.is_empty());
    }

    #[test]
    fn plane_tables_from_vector_geometry_validate() {
        for q in [2u32, 3, 4] {
            let g = Geometry::vector(2, q).unwrap();
            let pts: Vec<u32> = g.elements_of_dim(1).collect();
            let lines: Vec<u32> = g.elements_of_dim(2).collect();
            let incidence: Vec<Vec<bool>> = pts
                .iter()
                .map(|&p| lines.iter().map(|&l| g.incident_idx(p, l)).collect())
                .collect();
            let plane = AbstractPlane {
                points: pts.len() as u32,
                lines: lines.len() as u32,
                incidence,
            };
            assert_eq!(plane.validate().unwrap(), q);
            let g2 = Geometry::from_plane(&plane).unwrap();
            assert_eq!(g2.q(), q);
            assert_eq!(g2.element_count(), g.element_count());
            // join/incidence tables agree with the vector geometry
            for i in 0..g.element_count() {
                for j in 0..g.element_count() {
                    assert_eq!(g.incident_idx(i, j), g2.incident_idx(i, j));
                    assert_eq!(g.join_idx(i, j), g2.join_idx(i, j));
                }
            }
        }
    }

    #[test]
    fn broken_plane_is_rejected() {
        let g = Geometry::vector(2, 2).unwrap();
        let pts: Vec<u32> = g.elements_of_dim(1).collect();
        let lines: Vec<u32> = g.elements_of_dim(2).collect();
        let mut incidence: Vec<Vec<bool>> = pts
            .iter()
            .map(|&p| lines.iter().map(|&l| g.incident_idx(p, l)).collect())
            .collect();
        incidence[0][0] = !incidence[0][0];
        let plane = AbstractPlane {
            points: 7,
            lines: 7,
            incidence,
        };
        assert!(plane.validate().is_err());
    }

    #[test]
    fn flags_count_is_chamber_count() {
        let g = Geometry::vector(2, 2).unwrap();
        assert_eq!(g.flags().len(), 21); // (q²+q+1)(q+1)
        let g3 = Geometry::vector(2, 3).unwrap();
        assert_eq!(g3.flags().len(), 13 * 4);
    }

    #[test]
    fn join_properties_exhaustive_pg22() {
        let g = Geometry::vector(2, 2).unwrap();
        let nn = g.element_count();
        for i in 0..nn {
            assert_eq!(g.join_idx(i, i), i); // idempotent
            for j in 0..nn {
                assert_eq!(g.join_idx(i, j), g.join_idx(j, i)); // commutative
                // associativity with Whole absorption
                for k in 0..nn {
                    let a = g.join_idx(i, j);
                    let left = if a == WHOLE { WHOLE } else { g.join_idx(a, k) };
                    let b = g.join_idx(j, k);
                    let right = if b == WHOLE { WHOLE } else { g.join_idx(i, b) };
                    assert_eq!(left, right);
                }
            }
        }
    }
}
