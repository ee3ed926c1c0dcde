//! Arithmetic in GF(2^m), polynomial basis, plus the coset and minimal
//! polynomial helpers needed to build BCH generator polynomials.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::poly::BinaryPolynomial;

/// Conventional primitive polynomials, indexed by m (x^m term included).
const DEFAULT_PRIMITIVE: [u32; 17] = [
    0, 0, 0x7, 0xB, 0x13, 0x25, 0x43, 0x89, 0x11D, 0x211, 0x409, 0x805, 0x1053, 0x201B, 0x4443,
    0x8003, 0x1100B,
];

/// Element of GF(2^m) as its polynomial-basis bit pattern.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct FieldElement(pub u32);

impl FieldElement {
    pub const ZERO: FieldElement = FieldElement(0);
    pub const ONE: FieldElement = FieldElement(1);

    pub fn is_zero(self) -> bool {
        self.0 == 0
    }
}

#[allow(clippy::suspicious_arithmetic_impl)]
impl std::ops::Add for FieldElement {
    type Output = FieldElement;
    fn add(self, rhs: Self) -> Self {
        FieldElement(self.0 ^ rhs.0)
    }
}

/// GF(2^m) defined by a primitive polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FieldParams {
    m: u32,
    primitive_poly: u32,
}

impl FieldParams {
    /// Validates that `primitive_poly` has degree `m` and that x generates the
    /// whole multiplicative group (which implies irreducibility).
    pub fn new(m: u32, primitive_poly: u32) -> Result<Self> {
        if !(2..=16).contains(&m) {
            return Err(Error::UnsupportedM(m));
        }
        if primitive_poly >> m != 1 {
            return Err(Error::NotPrimitive { m, poly: primitive_poly });
        }
        let f = Self { m, primitive_poly };
        let order = f.order();
        let alpha = f.alpha();
        let mut x = alpha;
        for e in 1..order {
            if x == FieldElement::ONE {
                return Err(Error::NotPrimitive { m, poly: primitive_poly });
            }
            if e + 1 == order {
                break;
            }
            x = f.mul(x, alpha);
        }
        if f.mul(x, alpha) != FieldElement::ONE {
            return Err(Error::NotPrimitive { m, poly: primitive_poly });
        }
        Ok(f)
    }

    /// Field with the conventional primitive polynomial for `m`.
    pub fn default_for(m: u32) -> Result<Self> {
        if !(2..=16).contains(&m) {
            return Err(Error::UnsupportedM(m));
        }
        Ok(Self {
            m,
            primitive_poly: DEFAULT_PRIMITIVE[m as usize],
        })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn primitive_poly(&self) -> u32 {
        self.primitive_poly
    }

    pub fn size(&self) -> u32 {
        1 << self.m
    }

    /// Order of the multiplicative group, 2^m - 1.
    pub fn order(&self) -> u32 {
        (1 << self.m) - 1
    }

    /// The primitive element x.
    pub fn alpha(&self) -> FieldElement {
        FieldElement(2)
    }

    pub fn element(&self, value: u32) -> Result<FieldElement> {
        if value >= self.size() {
            return Err(Error::InvalidArgument(format!(
                "{value} is not an element of GF(2^{})",
                self.m
            )));
        }
        Ok(FieldElement(value))
    }

    /// Shift-and-add multiplication with reduction modulo the primitive polynomial.
    pub fn mul(&self, a: FieldElement, b: FieldElement) -> FieldElement {
        let (mut a, mut b) = (a.0, b.0);
        let top = 1u32 << self.m;
        let mut acc = 0u32;
        while b != 0 {
            if b & 1 == 1 {
                acc ^= a;
            }
            b >>= 1;
            a <<= 1;
            if a & top != 0 {
                a ^= self.primitive_poly;
            }
        }
        FieldElement(acc)
    }

    /// Square-and-multiply exponentiation.
    pub fn pow(&self, a: FieldElement, e: u64) -> Result<FieldElement> {
        if a.is_zero() && e == 0 {
            return Err(Error::UndefinedZeroPower);
        }
        let mut base = a;
        let mut e = e;
        let mut acc = FieldElement::ONE;
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            e >>= 1;
        }
        Ok(acc)
    }

    /// `alpha^e`, exponent taken modulo the group order.
    pub fn alpha_pow(&self, e: u64) -> FieldElement {
        self.pow(self.alpha(), e % self.order() as u64)
            .expect("alpha is nonzero")
    }

    /// Inverse as a^(2^m - 2).
    pub fn inv(&self, a: FieldElement) -> Result<FieldElement> {
        if a.is_zero() {
            return Err(Error::DivisionByZero);
        }
        self.pow(a, self.order() as u64 - 1)
    }

    /// Cyclotomic cosets of 2 modulo 2^m - 1, ordered by their minimal
    /// representative, each listed as {s, 2s, 4s, ...}.
    pub fn cyclotomic_cosets(&self) -> Vec<Vec<u32>> {
        let n = self.order();
        let mut seen = vec![false; n as usize];
        let mut cosets = Vec::new();
        for s in 0..n {
            if seen[s as usize] {
                continue;
            }
            let mut coset = Vec::new();
            let mut x = s;
            while !seen[x as usize] {
                seen[x as usize] = true;
                coset.push(x);
                x = (x * 2) % n;
            }
            cosets.push(coset);
        }
        cosets
    }

    /// The cyclotomic coset containing `s`.
    pub fn coset_of(&self, s: u32) -> Vec<u32> {
        let n = self.order();
        let s = s % n;
        let mut coset = vec![s];
        let mut x = (s * 2) % n;
        while x != s {
            coset.push(x);
            x = (x * 2) % n;
        }
        coset
    }

    /// Minimal polynomial of alpha^s: the product of (x - alpha^i) over the
    /// coset of `s`, expanded in GF(2^m) and checked to have binary coefficients.
    pub fn minimal_polynomial(&self, s: u32) -> Result<BinaryPolynomial> {
        if s >= self.order() {
            return Err(Error::InvalidArgument(format!(
                "exponent {s} outside 0..{}",
                self.order() - 1
            )));
        }
        // Coefficients lowest degree first; starts as the constant 1.
        let mut prod = vec![FieldElement::ONE];
        for i in self.coset_of(s) {
            let root = self.alpha_pow(i as u64);
            let mut next = vec![FieldElement::ZERO; prod.len() + 1];
            for (j, &c) in prod.iter().enumerate() {
                // (x + root) * c x^j; subtraction is addition in characteristic 2.
                next[j + 1] = next[j + 1] + c;
                next[j] = next[j] + self.mul(c, root);
            }
            prod = next;
        }
        let mut bits = Vec::with_capacity(prod.len());
        for (j, c) in prod.iter().enumerate() {
            if c.0 > 1 {
                return Err(Error::FieldConsistency(format!(
                    "coefficient of x^{j} in minimal polynomial of alpha^{s} is {}",
                    c.0
                )));
            }
            bits.push(c.0 as u8);
        }
        Ok(BinaryPolynomial::from_coeffs(&bits))
    }

    /// Horner evaluation of a binary polynomial at a field element.
    pub fn eval(&self, p: &BinaryPolynomial, x: FieldElement) -> FieldElement {
        p.coeffs().iter().rev().fold(FieldElement::ZERO, |acc, &c| {
            self.mul(acc, x) + FieldElement(c as u32)
        })
    }

    /// Exponents in {0..2^m-2} covered by the cosets of `reps`.
    pub fn coset_union(&self, reps: impl IntoIterator<Item = u32>) -> BTreeSet<u32> {
        reps.into_iter().flat_map(|s| self.coset_of(s)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn gf64() -> FieldParams {
        FieldParams::default_for(6).unwrap()
    }

    /// Schoolbook carry-less product followed by long-division reduction.
    fn mul_oracle(a: u32, b: u32, poly: u32, m: u32) -> u32 {
        let mut prod: u64 = 0;
        for i in 0..32 {
            if (b >> i) & 1 == 1 {
                prod ^= (a as u64) << i;
            }
        }
        for bit in (m as u64..64).rev() {
            if (prod >> bit) & 1 == 1 {
                prod ^= (poly as u64) << (bit - m as u64);
            }
        }
        prod as u32
    }

    #[test]
    fn default_polynomials_are_primitive() {
        for m in 2..=16 {
            let f = FieldParams::default_for(m).unwrap();
            FieldParams::new(m, f.primitive_poly()).unwrap();
        }
        assert_eq!(FieldParams::default_for(7).unwrap().primitive_poly(), 0x89);
    }

    #[test]
    fn rejects_non_primitive() {
        // x^6 + 1 is reducible; x^6+x^3+1 (0x49) is irreducible of order 9.
        assert!(FieldParams::new(6, 0x41).is_err());
        assert!(FieldParams::new(6, 0x49).is_err());
        assert!(FieldParams::new(1, 0x3).is_err());
        assert!(FieldParams::new(17, 0x20009).is_err());
    }

    #[test]
    fn mul_examples() {
        let f = gf64();
        let x = FieldElement(0b101101);
        assert_eq!(f.mul(FieldElement::ZERO, x), FieldElement::ZERO);
        assert_eq!(f.mul(FieldElement::ONE, x), x);
        assert_eq!(
            f.mul(FieldElement(0b100000), FieldElement(0b000010)),
            FieldElement(0b000011)
        );
        assert_eq!(mul_oracle(0b100000, 0b10, 0x43, 6), 0b11);
    }

    #[test]
    fn mul_matches_oracle_exhaustively_m6() {
        let f = gf64();
        for a in 0..64 {
            for b in 0..64 {
                assert_eq!(f.mul(FieldElement(a), FieldElement(b)).0, mul_oracle(a, b, 0x43, 6));
            }
        }
    }

    #[test]
    fn pow_examples() {
        let f = gf64();
        let a = f.alpha();
        assert_eq!(f.pow(a, 0).unwrap(), FieldElement::ONE);
        assert_eq!(f.pow(a, 63).unwrap(), FieldElement::ONE);
        let mut rep = FieldElement::ONE;
        for _ in 0..6 {
            rep = f.mul(rep, a);
        }
        assert_eq!(rep, FieldElement(0b11));
        assert_eq!(f.pow(a, 6).unwrap(), rep);
        assert_eq!(f.pow(FieldElement::ZERO, 0), Err(Error::UndefinedZeroPower));
        assert_eq!(f.pow(FieldElement::ZERO, 3).unwrap(), FieldElement::ZERO);
    }

    #[test]
    fn inverse_examples() {
        let f = gf64();
        assert_eq!(f.inv(FieldElement::ONE).unwrap(), FieldElement::ONE);
        assert_eq!(f.inv(f.alpha()).unwrap(), f.alpha_pow(62));
        assert_eq!(f.inv(FieldElement::ZERO), Err(Error::DivisionByZero));
        for v in 1..64 {
            let a = FieldElement(v);
            assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
        }
    }

    #[test]
    fn cosets_examples() {
        let f2 = FieldParams::default_for(2).unwrap();
        assert_eq!(f2.cyclotomic_cosets(), vec![vec![0], vec![1, 2]]);
        let f = gf64();
        let cosets = f.cyclotomic_cosets();
        assert_eq!(cosets[1], vec![1, 2, 4, 8, 16, 32]);
        let mut all: Vec<u32> = cosets.iter().flatten().copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..63).collect::<Vec<_>>());
        for c in &cosets {
            assert_eq!(c[0], *c.iter().min().unwrap());
        }
    }

    #[test]
    fn minimal_polynomial_examples() {
        let f = gf64();
        assert_eq!(f.minimal_polynomial(0).unwrap(), BinaryPolynomial::from_mask(0b11));
        assert_eq!(f.minimal_polynomial(1).unwrap(), BinaryPolynomial::from_mask(0x43));
        let m3 = f.minimal_polynomial(3).unwrap();
        assert_eq!(m3.degree(), Some(6));
        for e in [3u64, 6, 12, 24, 48, 33] {
            assert_eq!(f.eval(&m3, f.alpha_pow(e)), FieldElement::ZERO);
        }
        let x63 = BinaryPolynomial::from_mask((1u128 << 63) | 1);
        for s in [0, 1, 3, 5, 7, 9, 21, 27, 31] {
            let mp = f.minimal_polynomial(s).unwrap();
            assert_eq!(mp.degree(), Some(f.coset_of(s).len()));
            assert!(mp.divides(&x63));
        }
        assert!(f.minimal_polynomial(63).is_err());
    }

    #[test]
    fn minimal_polynomial_roots_exactly_on_coset() {
        for m in [4u32, 6, 7] {
            let f = FieldParams::default_for(m).unwrap();
            for coset in f.cyclotomic_cosets() {
                let mp = f.minimal_polynomial(coset[0]).unwrap();
                for &i in &coset {
                    assert!(f.eval(&mp, f.alpha_pow(i as u64)).is_zero());
                }
                let outside = (0..f.order()).find(|i| !coset.contains(i)).unwrap();
                assert!(!f.eval(&mp, f.alpha_pow(outside as u64)).is_zero());
            }
        }
    }

    #[test]
    fn multiplication_by_nonzero_is_bijective() {
        let f = FieldParams::default_for(7).unwrap();
        for a in 1..128 {
            let mut seen = [false; 128];
            for x in 1..128 {
                let y = f.mul(FieldElement(a), FieldElement(x)).0 as usize;
                assert!(y != 0 && !seen[y]);
                seen[y] = true;
            }
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(2000))]
        #[test]
        fn field_axioms(a in 0u32..64, b in 0u32..64, c in 0u32..64) {
            let f = gf64();
            let (a, b, c) = (FieldElement(a), FieldElement(b), FieldElement(c));
            prop_assert_eq!(f.mul(a, b + c), f.mul(a, b) + f.mul(a, c));
            prop_assert_eq!(f.mul(a, b), f.mul(b, a));
            prop_assert_eq!(f.mul(f.mul(a, b), c), f.mul(a, f.mul(b, c)));
        }

        #[test]
        fn inverse_property(v in 1u32..128) {
            let f = FieldParams::default_for(7).unwrap();
            let a = FieldElement(v);
            prop_assert_eq!(f.mul(a, f.inv(a).unwrap()), FieldElement::ONE);
        }
    }
}
