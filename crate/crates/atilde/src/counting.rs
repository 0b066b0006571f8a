//! Exact closed-form counts: Gaussian q-analogs, the sphere-size formula,
//! and the sector-triangle census.
//!
//! Everything here is arbitrary-precision integer or rational arithmetic;
//! divisions that must be exact are asserted, never truncated.

use crate::error::{Error, Result};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

/// `[k]_q = (q^k − 1)(q^{k−1} − 1) ⋯ (q − 1)`, with the empty product for
/// `k = 0`.
pub fn q_bracket(k: u32, q: u32) -> BigInt {
    let q = BigInt::from(q);
    let mut acc = BigInt::one();
    let mut pw = q.clone();
    for _ in 0..k {
        acc *= &pw - 1;
        pw *= &q;
    }
    acc
}

/// `[n+1]_q / ([p₁]_q ⋯ [p_t]_q)` where `parts` sums to `n+1`.
/// The division is exact; a remainder indicates formula misuse and is an
/// internal error.
pub fn q_multinomial(parts: &[u32], q: u32) -> Result<BigInt> {
    let total: u32 = parts.iter().sum();
    let num = q_bracket(total, q);
    let mut den = BigInt::one();
    for &p in parts {
        den *= q_bracket(p, q);
    }
    let (quot, rem) = num_integer::Integer::div_rem(&num, &den);
    if !rem.is_zero() {
        return Err(Error::Internal(format!(
            "q-multinomial {parts:?} at q={q} does not divide exactly"
        )));
    }
    Ok(quot)
}

/// Gaussian binomial `[n choose k]_q`: the number of k-dimensional
/// subspaces of an n-dimensional space over F_q.
pub fn gaussian_binomial(n: u32, k: u32, q: u32) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    q_multinomial(&[k, n - k], q).expect("gaussian binomial division is always exact")
}

/// Number of vertices at sector coordinate `k` from any fixed vertex of a
/// building of type Ã_n and order q:
///
/// `|S_k| = q^{−Σ_v j_v (j_{v+1} − j_v)} · [n+1; j₁−j₀, …, j_{t+1}−j_t]_q · q^{Σ_i i(n+1−i) k_i}`
///
/// where `j₁ < … < j_t` index the non-zero entries of `k`, `j₀ = 0` and
/// `j_{t+1} = n+1`. The all-zero `k` gives 1 (only the base vertex).
pub fn sphere_size(k: &[u32], n: u32, q: u32) -> Result<BigInt> {
    if k.len() != n as usize {
        return Err(Error::Usage(format!(
            "sphere index has {} components, geometry rank is {n}",
            k.len()
        )));
    }
    let js: Vec<u32> = (0..n).filter(|&i| k[i as usize] >= 1).map(|i| i + 1).collect();
    let t = js.len();
    let mut jj = Vec::with_capacity(t + 2);
    jj.push(0u32);
    jj.extend_from_slice(&js);
    jj.push(n + 1);

    let neg_exp: u64 = (1..=t).map(|v| (jj[v] as u64) * ((jj[v + 1] - jj[v]) as u64)).sum();
    let parts: Vec<u32> = (0..=t).map(|v| jj[v + 1] - jj[v]).collect();
    let mult = q_multinomial(&parts, q)?;
    let pos_exp: u64 = (0..n as usize)
        .map(|i| ((i as u64) + 1) * ((n as u64) - (i as u64)) * (k[i] as u64))
        .sum();

    let num = mult * BigInt::from(q).pow(pos_exp as u32);
    let den = BigInt::from(q).pow(neg_exp as u32);
    let (quot, rem) = num_integer::Integer::div_rem(&num, &den);
    if !rem.is_zero() {
        return Err(Error::Internal(format!(
            "sphere size at k={k:?}, n={n}, q={q} is not an integer"
        )));
    }
    Ok(quot)
}

/// Exact ratio `|S_{k+δ}| / |S_k|`. For full-support `k` this is the pure
/// power `q^{Σ i(n+1−i) δ_i}`; when the support changes it is a general
/// exact rational.
pub fn radial_ratio(k: &[u32], delta: &[i64], n: u32, q: u32) -> Result<BigRational> {
    if delta.len() != k.len() {
        return Err(Error::Usage(format!(
            "delta has {} components, sphere index has {}",
            delta.len(),
            k.len()
        )));
    }
    let mut kd = Vec::with_capacity(k.len());
    for (i, (&a, &d)) in k.iter().zip(delta).enumerate() {
        let s = a as i64 + d;
        if s < 0 {
            return Err(Error::Usage(format!(
                "k+delta is negative in component {}",
                i + 1
            )));
        }
        kd.push(s as u32);
    }
    let num = sphere_size(&kd, n, q)?;
    let den = sphere_size(k, n, q)?;
    Ok(BigRational::new(num, den))
}

/// `Σ_i i(n+1−i) m_i`, the exponent governing measure ratios between
/// spheres displaced by `m`.
pub fn radial_exponent(m: &[i64], n: u32) -> i64 {
    m.iter()
        .enumerate()
        .map(|(i, &mi)| (i as i64 + 1) * (n as i64 - i as i64) * mi)
        .sum()
}

/// `q^e` as an exact rational, for any sign of `e`.
pub fn q_power(q: u32, e: i64) -> BigRational {
    let p = BigInt::from(q).pow(e.unsigned_abs() as u32);
    if e >= 0 {
        BigRational::from_integer(p)
    } else {
        BigRational::new(BigInt::one(), p)
    }
}

/// Number of apex-based sector triangles of side `m` in an Ã_2 building of
/// order q: `(q²+q+1)(q+1)·q^{3m−3}`.
pub fn triangle_count(m: u32, q: u32) -> Result<BigInt> {
    if m == 0 {
        return Err(Error::Usage("triangle side m must be at least 1".into()));
    }
    let q = BigInt::from(q);
    let base = (&q * &q + &q + 1) * (&q + 1);
    Ok(base * q.pow(3 * m - 3))
}

/// Number of side-`m` sector triangles lying in an apartment containing a
/// fixed wall: `3(q+1)·q^{m−1}`.
pub fn wall_triangle_count(m: u32, q: u32) -> Result<BigInt> {
    if m == 0 {
        return Err(Error::Usage("triangle side m must be at least 1".into()));
    }
    let q = BigInt::from(q);
    Ok(3 * (&q + 1) * q.pow(m - 1))
}

/// The measure bound `|𝔖_m^W| / |𝔖_m|` for boundary points whose sectors
/// stay in an apartment containing a fixed wall. Strictly decreasing in m:
/// consecutive bounds have exact ratio `q^{−2}`.
pub fn freeness_bound(m: u32, q: u32) -> Result<BigRational> {
    let num = wall_triangle_count(m, q)?;
    let den = triangle_count(m, q)?;
    Ok(BigRational::new(num, den))
}

/// Render an exact rational as `p/q` (or a bare integer when q = 1).
pub fn rational_string(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::ToPrimitive;

    fn ss(k: &[u32], n: u32, q: u32) -> u64 {
        sphere_size(k, n, q).unwrap().to_u64().unwrap()
    }

    #[test]
    fn q_bracket_values() {
        // [3]_2 = (8−1)(4−1)(2−1)
        assert_eq!(q_bracket(3, 2), BigInt::from(21));
        assert_eq!(q_bracket(0, 2), BigInt::one());
        assert_eq!(q_bracket(0, 7), BigInt::one());
        assert_eq!(q_bracket(1, 5), BigInt::from(4));
    }

    #[test]
    fn q_multinomial_values() {
        // parts (1,2) of n+1 = 3 at q=2: 21/((1)(3)) = 7, the point count of PG(2,2)
        assert_eq!(q_multinomial(&[1, 2], 2).unwrap(), BigInt::from(7));
        assert_eq!(q_multinomial(&[3], 2).unwrap(), BigInt::one());
        assert_eq!(q_multinomial(&[1, 1, 1], 2).unwrap(), BigInt::from(21));
    }

    #[test]
    fn gaussian_binomials() {
        assert_eq!(gaussian_binomial(3, 1, 2), BigInt::from(7));
        assert_eq!(gaussian_binomial(3, 2, 2), BigInt::from(7));
        assert_eq!(gaussian_binomial(3, 1, 3), BigInt::from(13));
        assert_eq!(gaussian_binomial(4, 2, 2), BigInt::from(35));
        assert_eq!(gaussian_binomial(2, 1, 2), BigInt::from(3));
        assert_eq!(gaussian_binomial(1, 2, 2), BigInt::zero());
    }

    #[test]
    fn sphere_sizes_at_n2_q2() {
        assert_eq!(ss(&[0, 0], 2, 2), 1);
        assert_eq!(ss(&[1, 0], 2, 2), 7);
        assert_eq!(ss(&[0, 1], 2, 2), 7);
        assert_eq!(ss(&[1, 1], 2, 2), 42);
        assert_eq!(ss(&[2, 0], 2, 2), 28);
        assert_eq!(ss(&[2, 1], 2, 2), 168);
        assert_eq!(ss(&[2, 2], 2, 2), 672);
    }

    #[test]
    fn sphere_size_n1_is_tree_like() {
        // A~1 building: homogeneous tree of degree q+1
        assert_eq!(ss(&[1], 1, 2), 3);
        assert_eq!(ss(&[2], 1, 2), 6);
        assert_eq!(ss(&[3], 1, 2), 12);
    }

    #[test]
    fn sphere_size_rejects_wrong_rank() {
        assert!(matches!(sphere_size(&[1, 1], 3, 2), Err(Error::Usage(_))));
    }

    #[test]
    fn radial_ratios() {
        use num_traits::One;
        let one = BigRational::one();
        assert_eq!(radial_ratio(&[1, 1], &[0, 0], 2, 2).unwrap(), one);
        // full support: pure power q^{Σ i(n+1−i)δ_i} = 2^4
        assert_eq!(
            radial_ratio(&[1, 1], &[1, 1], 2, 2).unwrap(),
            BigRational::from_integer(BigInt::from(16))
        );
        // support change: plain exact ratio of the two sphere sizes
        assert_eq!(
            radial_ratio(&[1, 1], &[1, 0], 2, 2).unwrap(),
            BigRational::from_integer(BigInt::from(4))
        );
        assert_eq!(
            radial_ratio(&[1, 0], &[0, 1], 2, 2).unwrap(),
            BigRational::from_integer(BigInt::from(6))
        );
    }

    #[test]
    fn triangle_counts() {
        assert_eq!(triangle_count(1, 2).unwrap(), BigInt::from(21));
        assert_eq!(triangle_count(2, 2).unwrap(), BigInt::from(168));
        assert_eq!(triangle_count(1, 3).unwrap(), BigInt::from(52));
        assert_eq!(triangle_count(2, 3).unwrap(), BigInt::from(1404));
        assert!(triangle_count(0, 2).is_err());
    }

    #[test]
    fn wall_triangle_counts_and_bounds() {
        assert_eq!(wall_triangle_count(1, 2).unwrap(), BigInt::from(9));
        assert_eq!(wall_triangle_count(2, 2).unwrap(), BigInt::from(18));
        let b1 = freeness_bound(1, 2).unwrap();
        assert_eq!(b1, BigRational::new(BigInt::from(3), BigInt::from(7)));
        let b2 = freeness_bound(2, 2).unwrap();
        assert_eq!(b2, BigRational::new(BigInt::from(3), BigInt::from(28)));
        // exact geometric decay q^{-2} per step
        for q in [2u32, 3, 5] {
            for m in 1..8 {
                let r = freeness_bound(m + 1, q).unwrap() / freeness_bound(m, q).unwrap();
                assert_eq!(r, q_power(q, -2));
            }
        }
    }

    #[test]
    fn rational_rendering() {
        assert_eq!(rational_string(&BigRational::new(3.into(), 7.into())), "3/7");
        assert_eq!(rational_string(&BigRational::from_integer(4.into())), "4");
    }
}
