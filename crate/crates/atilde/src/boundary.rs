//! Boundary cylinder sets, their exact measures, displacement vectors and
//! Radon–Nikodym derivatives.
//!
//! Boundary points are never represented directly: every quantity here is
//! locally constant on a cylinder Ω_base^target = {ω : target ∈ [base, ω)},
//! so all computations are finite word arithmetic. The measure of a
//! cylinder with relative shape k is exactly 1/|S_k|, independent of the
//! base vertex.
//!
//! The displacement vector m(x, y; ω) compares sector coordinates of a
//! deep reference vertex z seen from x and from y; it is well defined on
//! Ω_x^z as soon as every coordinate of z from x is at least d(x, y).
//! Operations demand that depth hypothesis explicitly and fail loudly
//! otherwise; shallow queries are refused, never extrapolated.

use crate::counting::{q_power, radial_exponent, radial_ratio, sphere_size};
use crate::error::{Error, Result};
use crate::wordcore::ball::CayleyBall;
use crate::wordcore::{NormalWord, Rewriter, SphereIndex};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

/// Ω_base^target together with the relative shape of target from base.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CylinderSet {
    pub base: NormalWord,
    pub target: NormalWord,
    pub shape: SphereIndex,
}

impl CylinderSet {
    pub fn new(base: NormalWord, target: NormalWord, rw: &Rewriter) -> Result<CylinderSet> {
        let rel = rw.between(&base, &target)?;
        let shape = rw.shape(&rel);
        Ok(CylinderSet {
            base,
            target,
            shape,
        })
    }

    /// The whole boundary seen from a vertex.
    pub fn whole(base: NormalWord, rw: &Rewriter) -> CylinderSet {
        let shape = vec![0; rw.n() as usize];
        CylinderSet {
            target: base.clone(),
            base,
            shape,
        }
    }
}

/// ν_base(Ω_base^target) = 1 / |S_shape|, exact.
pub fn cylinder_measure(c: &CylinderSet, n: u32, q: u32) -> Result<BigRational> {
    Ok(BigRational::new(
        BigInt::one(),
        sphere_size(&c.shape, n, q)?,
    ))
}

/// The displacement vector m(x, y; ω), constant on Ω_x^z.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MVector(pub Vec<i64>);

/// m(x, y; ω) for every ω ∈ Ω_x^z, computed as
/// shape(y⁻¹z) − shape(x⁻¹z). Requires the depth hypothesis: every
/// component of shape(x⁻¹z) at least d(x, y).
pub fn m_vector(x: &NormalWord, y: &NormalWord, z: &NormalWord, rw: &Rewriter) -> Result<MVector> {
    let lx = rw.shape(&rw.between(x, z)?);
    let d = rw.distance(x, y)?;
    for (i, &li) in lx.iter().enumerate() {
        if li < d {
            return Err(Error::Depth {
                component: i + 1,
                have: li,
                need: d,
            });
        }
    }
    let ly = rw.shape(&rw.between(y, z)?);
    Ok(MVector(
        ly.iter()
            .zip(&lx)
            .map(|(&a, &b)| a as i64 - b as i64)
            .collect(),
    ))
}

/// dν_y/dν_x on the cylinder Ω_x^z: the exact rational
/// q^{−Σ i(n+1−i) m_i} with m = m(x, y; ·).
pub fn rn_derivative(
    x: &NormalWord,
    y: &NormalWord,
    z: &NormalWord,
    rw: &Rewriter,
) -> Result<BigRational> {
    let m = m_vector(x, y, z, rw)?;
    Ok(q_power(rw.q(), -radial_exponent(&m.0, rw.n())))
}

/// Split a cylinder into its depth-(shape+δ) children
/// Ω_base^{x₁}, x₁ ∈ S_δ(target) ∩ S_{shape+δ}(base). The children
/// partition the parent; their measures are verified to sum to the
/// parent's measure exactly.
pub fn refine_cylinder(
    c: &CylinderSet,
    delta: &[u32],
    rw: &Rewriter,
    ball: &CayleyBall,
) -> Result<Vec<CylinderSet>> {
    if delta.len() != rw.n() as usize {
        return Err(Error::Usage(format!(
            "delta has {} components, rank is {}",
            delta.len(),
            rw.n()
        )));
    }
    if delta.iter().all(|&d| d == 0) {
        return Ok(vec![c.clone()]);
    }
    let ids = ball.sphere(delta)?;
    let want: Vec<u32> = c.shape.iter().zip(delta).map(|(&a, &b)| a + b).collect();
    let mut out = Vec::new();
    for &id in ids {
        let x1 = rw.concat(&c.target, ball.word(id))?;
        let rel = rw.between(&c.base, &x1)?;
        if rw.shape(&rel) == want {
            out.push(CylinderSet {
                base: c.base.clone(),
                target: x1,
                shape: want.clone(),
            });
        }
    }
    // exact additivity: count · (1/|S_{k+δ}|) must equal 1/|S_k|
    let deltas: Vec<i64> = delta.iter().map(|&d| d as i64).collect();
    let ratio = radial_ratio(&c.shape, &deltas, rw.n(), rw.q())?;
    let count = BigRational::from_integer(BigInt::from(out.len()));
    if ratio != count {
        return Err(Error::Internal(format!(
            "refinement produced {} children of shape {:?}, measure additivity demands {}",
            out.len(),
            want,
            ratio
        )));
    }
    Ok(out)
}

/// Result of verifying that {Ω_base^x : x ∈ S_k(base)} partitions the
/// boundary measure-wise.
#[derive(Debug, Clone)]
pub struct PartitionReport {
    pub k: SphereIndex,
    pub cylinder_count: usize,
    pub each_measure: BigRational,
    pub total: BigRational,
    pub exact: bool,
}

/// Enumerate the S_k(base) cylinders and check count · (1/|S_k|) = 1.
pub fn partition_check(
    base: &NormalWord,
    k: &[u32],
    rw: &Rewriter,
    ball: &CayleyBall,
) -> Result<PartitionReport> {
    let ids = ball.sphere(k)?;
    let mut targets = Vec::with_capacity(ids.len());
    for &id in ids {
        targets.push(rw.concat(base, ball.word(id))?);
    }
    targets.sort();
    targets.dedup();
    let each = BigRational::new(BigInt::one(), sphere_size(k, rw.n(), rw.q())?);
    let total = &each * BigRational::from_integer(BigInt::from(targets.len()));
    Ok(PartitionReport {
        k: k.to_vec(),
        cylinder_count: targets.len(),
        each_measure: each,
        total: total.clone(),
        exact: total.is_one(),
    })
}

/// Exponent e with r = q^e, when r is an integer power of q; RN
/// derivatives take no other values.
pub fn q_log(r: &BigRational, q: u32) -> Option<i64> {
    if !r.numer().is_positive() {
        return None;
    }
    let qb = BigInt::from(q);
    let unpower = |v: &BigInt| -> Option<i64> {
        let mut v = v.clone();
        let mut e = 0i64;
        while !v.is_one() {
            if (&v % &qb).is_zero() {
                v /= &qb;
                e += 1;
            } else {
                return None;
            }
        }
        Some(e)
    };
    if r.denom().is_one() {
        unpower(r.numer())
    } else if r.numer().is_one() {
        unpower(r.denom()).map(|e| -e)
    } else {
        None
    }
}

/// True when `r` is an integer power of q (negative powers included).
pub fn is_power_of_q(r: &BigRational, q: u32) -> bool {
    q_log(r, q).is_some()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgeom::Geometry;
    use crate::tripres::{scan_dualities, TrianglePresentation};
    use crate::wordcore::ball::build_ball;
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
            let ball = build_ball(&p, &rw, 4, 1_000_000).unwrap();
            (p, rw, ball)
        })
    }

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn whole_boundary_has_measure_one() {
        let (_, rw, _) = fixture();
        let c = CylinderSet::whole(NormalWord::identity(), rw);
        assert_eq!(cylinder_measure(&c, 2, 2).unwrap(), rat(1, 1));
    }

    #[test]
    fn point_cylinder_measure() {
        let (_, rw, _) = fixture();
        let p = rw.generators_of_dim(1).next().unwrap();
        let c = CylinderSet::new(
            NormalWord::identity(),
            rw.reduce(&[p]).unwrap(),
            rw,
        )
        .unwrap();
        assert_eq!(c.shape, vec![1, 0]);
        assert_eq!(cylinder_measure(&c, 2, 2).unwrap(), rat(1, 7));
    }

    #[test]
    fn partition_sums_to_one() {
        let (_, rw, ball) = fixture();
        let e = NormalWord::identity();
        for k in [vec![0u32, 0], vec![1, 0], vec![1, 1]] {
            let rep = partition_check(&e, &k, rw, ball).unwrap();
            assert!(rep.exact, "k={k:?}: total {}", rep.total);
        }
        // independence of the base vertex
        let base = rw.greedy_word(&[1, 0]).unwrap();
        let rep = partition_check(&base, &[1, 0], rw, ball).unwrap();
        assert_eq!(rep.cylinder_count, 7);
        assert_eq!(rep.each_measure, rat(1, 7));
        assert!(rep.exact);
    }

    #[test]
    fn m_vector_basics() {
        let (_, rw, ball) = fixture();
        let e = NormalWord::identity();
        let z = rw.greedy_word(&[3, 3]).unwrap();
        // x = y: zero vector
        let m = m_vector(&e, &e, &z, rw).unwrap();
        assert_eq!(m.0, vec![0, 0]);
        // generator of dim i, cylinders through it: m = −e_i on every
        // deep z with shape(g⁻¹z) = (2,2) − e_i
        for g in 0..rw.generator_count() {
            let y = rw.reduce(&[g]).unwrap();
            let i = rw.dim(g) as usize;
            let mut expect_rel = vec![2u32; 2];
            expect_rel[i - 1] -= 1;
            let mut found = 0;
            for &id in ball.sphere(&[2, 2]).unwrap() {
                let z = ball.word(id);
                if rw.shape(&rw.between(&y, z).unwrap()) == expect_rel {
                    let m = m_vector(&e, &y, z, rw).unwrap();
                    let mut expect = vec![0i64; 2];
                    expect[i - 1] = -1;
                    assert_eq!(m.0, expect, "generator {g}");
                    found += 1;
                }
            }
            assert!(found > 0, "no deep cylinder through generator {g}");
        }
    }

    #[test]
    fn shallow_reference_is_a_depth_error() {
        let (_, rw, _) = fixture();
        let e = NormalWord::identity();
        let y = rw.greedy_word(&[1, 1]).unwrap(); // d = 2
        let z = rw.greedy_word(&[1, 2]).unwrap(); // component 1 has depth 1 < 2
        match m_vector(&e, &y, &z, rw) {
            Err(Error::Depth {
                component, have, need,
            }) => {
                assert_eq!(component, 1);
                assert_eq!(have, 1);
                assert_eq!(need, 2);
            }
            other => panic!("expected depth error, got {other:?}"),
        }
    }

    #[test]
    fn m_vector_stable_under_deepening() {
        let (_, rw, ball) = fixture();
        // x, y in the radius-2 ball; z walks a nested cylinder chain at
        // depths 6, 7, 8 (each deepening extends the previous z by one
        // (1,1)-step, so the cylinders are nested)
        let xs: Vec<NormalWord> = (0..=2u32)
            .flat_map(|r| ball.level(r).unwrap())
            .map(|id| ball.word(id).clone())
            .collect();
        let steps: Vec<NormalWord> = ball
            .sphere(&[1, 1])
            .unwrap()
            .iter()
            .map(|&id| ball.word(id).clone())
            .collect();
        let mut checked = 0;
        for x in xs.iter().take(12) {
            for y in xs.iter().take(12) {
                let w6 = rw.greedy_word(&[6, 6]).unwrap();
                let mut z = rw.concat(x, &w6).unwrap();
                let mut depth = 6u32;
                let mut ms = vec![m_vector(x, y, &z, rw).unwrap()];
                while depth < 8 {
                    depth += 1;
                    let want = vec![depth; 2];
                    let next = steps
                        .iter()
                        .map(|s| rw.concat(&z, s).unwrap())
                        .find(|cand| rw.shape(&rw.between(x, cand).unwrap()) == want)
                        .expect("a deeper chained z exists");
                    z = next;
                    ms.push(m_vector(x, y, &z, rw).unwrap());
                }
                assert!(ms.windows(2).all(|p| p[0] == p[1]), "x={x} y={y}");
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn rn_derivative_identity_and_generator_values() {
        let (_, rw, ball) = fixture();
        let e = NormalWord::identity();
        let z = rw.greedy_word(&[3, 3]).unwrap();
        assert_eq!(rn_derivative(&e, &e, &z, rw).unwrap(), rat(1, 1));
        // dν_y/dν_ε = q^{i(n+1−i)} = 4 on every deep cylinder through y
        for g in 0..rw.generator_count() {
            let y = rw.reduce(&[g]).unwrap();
            let i = rw.dim(g) as usize;
            let mut expect_rel = vec![2u32; 2];
            expect_rel[i - 1] -= 1;
            let mut found = 0;
            for &id in ball.sphere(&[2, 2]).unwrap() {
                let z = ball.word(id);
                if rw.shape(&rw.between(&y, z).unwrap()) == expect_rel {
                    let v = rn_derivative(&e, &y, z, rw).unwrap();
                    assert_eq!(v, rat(4, 1), "generator {g}");
                    assert_eq!(q_log(&v, 2), Some(2));
                    found += 1;
                }
            }
            assert!(found > 0);
        }
    }

    #[test]
    fn cocycle_identity_and_antisymmetry() {
        let (_, rw, ball) = fixture();
        let verts: Vec<NormalWord> = (0..=2u32)
            .flat_map(|r| ball.level(r).unwrap())
            .map(|id| ball.word(id).clone())
            .collect();
        let w = rw.greedy_word(&[8, 8]).unwrap();
        let mut count = 0;
        for x in verts.iter().step_by(7) {
            for y in verts.iter().step_by(5) {
                for yp in verts.iter().step_by(11) {
                    let z = rw.concat(x, &w).unwrap();
                    let m1 = m_vector(x, y, &z, rw).unwrap();
                    let m2 = m_vector(y, yp, &z, rw).unwrap();
                    let m3 = m_vector(x, yp, &z, rw).unwrap();
                    let sum: Vec<i64> =
                        m1.0.iter().zip(&m2.0).map(|(a, b)| a + b).collect();
                    assert_eq!(sum, m3.0);
                    let r1 = rn_derivative(x, y, &z, rw).unwrap();
                    let r2 = rn_derivative(y, yp, &z, rw).unwrap();
                    let r3 = rn_derivative(x, yp, &z, rw).unwrap();
                    assert_eq!(r1 * r2, r3);
                    // antisymmetry
                    let back = m_vector(y, x, &z, rw).unwrap();
                    let neg: Vec<i64> = m1.0.iter().map(|v| -v).collect();
                    assert_eq!(back.0, neg);
                    count += 1;
                }
            }
        }
        assert!(count >= 100);
    }

    #[test]
    fn refine_cylinder_children_and_measures() {
        let (_, rw, ball) = fixture();
        let e = NormalWord::identity();
        let x = rw.greedy_word(&[1, 0]).unwrap();
        let c = CylinderSet::new(e, x, rw).unwrap();
        // δ = 0 is the cylinder itself
        let same = refine_cylinder(&c, &[0, 0], rw, ball).unwrap();
        assert_eq!(same, vec![c.clone()]);
        // δ = e_1 + e_n: 24 children, measures adding exactly
        let kids = refine_cylinder(&c, &[1, 1], rw, ball).unwrap();
        assert_eq!(kids.len(), 24);
        let parent = cylinder_measure(&c, 2, 2).unwrap();
        let child = cylinder_measure(&kids[0], 2, 2).unwrap();
        assert_eq!(
            child * BigRational::from_integer(BigInt::from(kids.len())),
            parent
        );
        // full-support parent: child count is the radial-ratio power of q
        let c2 = CylinderSet::new(NormalWord::identity(), rw.greedy_word(&[1, 1]).unwrap(), rw)
            .unwrap();
        let kids2 = refine_cylinder(&c2, &[1, 1], rw, ball).unwrap();
        assert_eq!(kids2.len(), 16); // q^4
    }

    #[test]
    fn deep_refinement_needs_ball_radius() {
        let (_, rw, ball) = fixture();
        let c = CylinderSet::whole(NormalWord::identity(), rw);
        assert!(matches!(
            refine_cylinder(&c, &[3, 2], rw, ball),
            Err(Error::Range(_))
        ));
    }

    #[test]
    fn exhaustive_measure_additivity_small_depths() {
        let (_, rw, ball) = fixture();
        let e = NormalWord::identity();
        // all cylinders of depth ≤ 3 refined by δ = e_1 + e_n
        for k in [vec![0u32, 0], vec![1, 0], vec![0, 1], vec![1, 1], vec![2, 1]] {
            if k.iter().sum::<u32>() > 3 {
                continue;
            }
            for &id in ball.sphere(&k).unwrap() {
                let c = CylinderSet::new(e.clone(), ball.word(id).clone(), rw).unwrap();
                // refine_cylinder itself asserts exact additivity
                let kids = refine_cylinder(&c, &[1, 1], rw, ball).unwrap();
                assert!(!kids.is_empty());
            }
        }
    }

    #[test]
    fn power_of_q_recognition() {
        assert!(is_power_of_q(&rat(4, 1), 2));
        assert!(is_power_of_q(&rat(1, 8), 2));
        assert!(!is_power_of_q(&rat(3, 1), 2));
        assert!(!is_power_of_q(&rat(0, 1), 2));
        assert_eq!(q_log(&rat(16, 1), 2), Some(4));
        assert_eq!(q_log(&rat(1, 4), 2), Some(-2));
        assert_eq!(q_log(&rat(6, 1), 2), None);
    }
}
