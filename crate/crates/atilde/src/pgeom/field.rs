//! Finite fields F_q for the supported desk-scale orders.
//!
//! Prime fields are supported for all primes up to 13; the prime-power
//! orders 4, 8 and 9 use fixed irreducible moduli. Elements are dense
//! indices `0..q`; for prime powers the index packs the polynomial
//! coefficients in base p (index = c₀ + c₁·p + …). Arithmetic goes through
//! precomputed tables, and the field axioms are verified exhaustively at
//! construction time.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

pub const SUPPORTED_ORDERS: &[u32] = &[2, 3, 4, 5, 7, 8, 9, 11, 13];

/// Order and (for prime powers) modulus of a supported field.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FieldSpec {
    pub q: u32,
    /// Characteristic.
    pub p: u32,
    /// Coefficients of the irreducible modulus, constant term first.
    /// Empty for prime fields.
    pub modulus: Vec<u32>,
}

/// F_q with dense element indices and full arithmetic tables.
#[derive(Debug, Clone)]
pub struct Field {
    spec: FieldSpec,
    add: Vec<u8>,
    mul: Vec<u8>,
    neg: Vec<u8>,
    inv: Vec<u8>, // inv[0] unused
}

fn modulus_for(q: u32) -> Result<FieldSpec> {
    let spec = match q {
        2 | 3 | 5 | 7 | 11 | 13 => FieldSpec {
            q,
            p: q,
            modulus: vec![],
        },
        // x^2 + x + 1 over F_2
        4 => FieldSpec {
            q,
            p: 2,
            modulus: vec![1, 1, 1],
        },
        // x^3 + x + 1 over F_2
        8 => FieldSpec {
            q,
            p: 2,
            modulus: vec![1, 1, 0, 1],
        },
        // x^2 + 1 over F_3
        9 => FieldSpec {
            q,
            p: 3,
            modulus: vec![1, 0, 1],
        },
        _ => {
            return Err(Error::Config(format!(
                "field order {q} is not supported (no modulus table); supported: {SUPPORTED_ORDERS:?}"
            )))
        }
    };
    Ok(spec)
}

fn poly_of(idx: u32, p: u32, deg: usize) -> Vec<u32> {
    let mut c = Vec::with_capacity(deg);
    let mut x = idx;
    for _ in 0..deg {
        c.push(x % p);
        x /= p;
    }
    c
}

fn idx_of(poly: &[u32], p: u32) -> u32 {
    poly.iter().rev().fold(0, |acc, &c| acc * p + c)
}

impl Field {
    pub fn new(q: u32) -> Result<Field> {
        let spec = modulus_for(q)?;
        let p = spec.p;
        let deg = if spec.modulus.is_empty() {
            1
        } else {
            spec.modulus.len() - 1
        };
        let qn = q as usize;
        let mut add = vec![0u8; qn * qn];
        let mut mul = vec![0u8; qn * qn];
        for a in 0..q {
            for b in 0..q {
                let pa = poly_of(a, p, deg);
                let pb = poly_of(b, p, deg);
                let sum: Vec<u32> = pa.iter().zip(&pb).map(|(x, y)| (x + y) % p).collect();
                add[(a * q + b) as usize] = idx_of(&sum, p) as u8;
                // schoolbook product then reduction by the modulus
                let mut prod = vec![0u32; 2 * deg];
                for (i, &x) in pa.iter().enumerate() {
                    for (j, &y) in pb.iter().enumerate() {
                        prod[i + j] = (prod[i + j] + x * y) % p;
                    }
                }
                if deg > 1 {
                    let m = &spec.modulus;
                    for i in (deg..2 * deg).rev() {
                        let c = prod[i];
                        if c == 0 {
                            continue;
                        }
                        prod[i] = 0;
                        for (j, &mj) in m.iter().enumerate().take(deg) {
                            let pos = i - deg + j;
                            prod[pos] = (prod[pos] + p * p - c * mj % p) % p;
                        }
                    }
                }
                mul[(a * q + b) as usize] = idx_of(&prod[..deg], p) as u8;
            }
        }
        let mut neg = vec![0u8; qn];
        let mut inv = vec![0u8; qn];
        for a in 0..q {
            for b in 0..q {
                if add[(a * q + b) as usize] == 0 {
                    neg[a as usize] = b as u8;
                }
                if a != 0 && mul[(a * q + b) as usize] == 1 {
                    inv[a as usize] = b as u8;
                }
            }
        }
        let f = Field {
            spec,
            add,
            mul,
            neg,
            inv,
        };
        f.check_axioms()?;
        Ok(f)
    }

    pub fn spec(&self) -> &FieldSpec {
        &self.spec
    }

    pub fn q(&self) -> u32 {
        self.spec.q
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        self.add[a as usize * self.spec.q as usize + b as usize]
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        self.mul[a as usize * self.spec.q as usize + b as usize]
    }

    #[inline]
    pub fn neg(&self, a: u8) -> u8 {
        self.neg[a as usize]
    }

    #[inline]
    pub fn sub(&self, a: u8, b: u8) -> u8 {
        self.add(a, self.neg(b))
    }

    /// Multiplicative inverse; `a` must be nonzero.
    #[inline]
    pub fn inv(&self, a: u8) -> u8 {
        debug_assert!(a != 0);
        self.inv[a as usize]
    }

    /// Exhaustive verification of the field axioms over all elements.
    fn check_axioms(&self) -> Result<()> {
        let q = self.spec.q as u8;
        let els: Vec<u8> = (0..q).collect();
        let fail = |what: &str| {
            Err(Error::Internal(format!(
                "field axioms violated for q={}: {what}",
                self.spec.q
            )))
        };
        for &a in &els {
            if self.add(a, 0) != a || self.mul(a, 1) != a {
                return fail("identities");
            }
            if self.add(a, self.neg(a)) != 0 {
                return fail("additive inverse");
            }
            if a != 0 && self.mul(a, self.inv(a)) != 1 {
                return fail("multiplicative inverse");
            }
            for &b in &els {
                if self.add(a, b) != self.add(b, a) || self.mul(a, b) != self.mul(b, a) {
                    return fail("commutativity");
                }
                for &c in &els {
                    if self.add(self.add(a, b), c) != self.add(a, self.add(b, c)) {
                        return fail("additive associativity");
                    }
                    if self.mul(self.mul(a, b), c) != self.mul(a, self.mul(b, c)) {
                        return fail("multiplicative associativity");
                    }
                    if self.mul(a, self.add(b, c)) != self.add(self.mul(a, b), self.mul(a, c)) {
                        return fail("distributivity");
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_supported_orders_build_and_satisfy_axioms() {
        for &q in SUPPORTED_ORDERS {
            let f = Field::new(q).unwrap();
            assert_eq!(f.q(), q);
        }
    }

    #[test]
    fn unsupported_order_is_a_config_error() {
        assert!(matches!(Field::new(6), Err(Error::Config(_))));
        assert!(matches!(Field::new(16), Err(Error::Config(_))));
        assert!(matches!(Field::new(1), Err(Error::Config(_))));
    }

    #[test]
    fn gf4_has_characteristic_two_and_no_zero_divisors() {
        let f = Field::new(4).unwrap();
        for a in 0..4u8 {
            assert_eq!(f.add(a, a), 0);
            for b in 0..4u8 {
                if a != 0 && b != 0 {
                    assert_ne!(f.mul(a, b), 0);
                }
            }
        }
    }

    #[test]
    fn gf9_frobenius_is_additive() {
        let f = Field::new(9).unwrap();
        let cube = |a: u8| f.mul(f.mul(a, a), a);
        for a in 0..9u8 {
            for b in 0..9u8 {
                assert_eq!(cube(f.add(a, b)), f.add(cube(a), cube(b)));
            }
        }
    }
}
