//! Narrow-sense primitive binary BCH codes and their extended (eBCH) versions.

use std::collections::BTreeMap;

use crate::bitmat::BitMatrix;
use crate::code::{CodeFamily, CodeInstance, ConstructionMeta};
use crate::error::{Error, Result};
use crate::gf2m::FieldParams;
use crate::poly::BinaryPolynomial;

/// g(x) = lcm of the minimal polynomials of alpha, alpha^2, ..., alpha^(2t).
pub fn bch_generator_poly(f: &FieldParams, t: usize) -> Result<BinaryPolynomial> {
    let n = f.order() as usize;
    if t == 0 || 2 * t >= n {
        return Err(Error::InvalidArgument(format!(
            "t={t} outside 1..{} for length {n}",
            (n - 1) / 2
        )));
    }
    let roots = f.coset_union(1..=2 * t as u32);
    let mut g = BinaryPolynomial::one();
    let mut done = std::collections::BTreeSet::new();
    for &r in &roots {
        let rep = *f.coset_of(r).iter().min().expect("nonempty coset");
        if done.insert(rep) {
            g = g.lcm(&f.minimal_polynomial(rep)?);
        }
    }
    if g.degree().unwrap_or(0) >= n {
        return Err(Error::NoDimension { t });
    }
    Ok(g)
}

/// BCH bound of a narrow-sense code: one more than the run of consecutive
/// roots alpha, alpha^2, ... of g(x).
fn bch_bound(f: &FieldParams, t: usize) -> usize {
    let roots = f.coset_union(1..=2 * t as u32);
    let mut run = 0;
    while roots.contains(&(run as u32 + 1)) {
        run += 1;
    }
    run + 1
}

/// Cyclic generator matrix with rows x^i g(x), i < K.
fn cyclic_generator(g: &BinaryPolynomial, n: usize) -> BitMatrix {
    let deg = g.degree().expect("nonzero generator");
    let k = n - deg;
    let mut m = BitMatrix::zeros(k, n);
    for i in 0..k {
        for (j, &c) in g.coeffs().iter().enumerate() {
            if c == 1 {
                m.set(i, i + j, true);
            }
        }
    }
    m
}

/// The (2^m - 1, K) BCH code with designed correction capability `t`.
/// The generator is stored in systematic form, message in the first K positions.
pub fn build_bch(f: &FieldParams, t: usize) -> Result<CodeInstance> {
    let g = bch_generator_poly(f, t)?;
    let n = f.order() as usize;
    let code = CodeInstance::new(
        CodeFamily::Bch,
        cyclic_generator(&g, n),
        Some(bch_bound(f, t)),
        ConstructionMeta::Bch { m: f.m(), t, extended: false },
    )?;
    code.systematic()
}

/// Appends the overall parity bit: (N, K, d) becomes (N+1, K, d+1) for odd d.
pub fn extend_code(c: &CodeInstance) -> Result<CodeInstance> {
    c.extend()
}

/// Extended Hamming (8,4), the smallest member of the family.
pub fn extended_hamming_8_4() -> CodeInstance {
    let f = FieldParams::default_for(3).expect("m=3 supported");
    build_bch(&f, 1)
        .and_then(|c| c.extend())
        .expect("Hamming construction")
}

/// All distinct nontrivial eBCH codes of length 2^m, highest dimension first.
/// When several `t` give the same dimension the largest is kept.
pub fn list_ebch_family(m: u32) -> Result<Vec<CodeInstance>> {
    if !(6..=7).contains(&m) {
        return Err(Error::UnsupportedM(m));
    }
    list_ebch_family_with(&FieldParams::default_for(m)?)
}

/// Same as [`list_ebch_family`] over an arbitrary field.
pub fn list_ebch_family_with(f: &FieldParams) -> Result<Vec<CodeInstance>> {
    let n = f.order() as usize;
    let mut by_k: BTreeMap<usize, usize> = BTreeMap::new();
    for t in 1..=(n - 1) / 2 {
        let deg = bch_generator_poly(f, t)?.degree().unwrap_or(0);
        let k = n - deg;
        // K = 1 is the repetition code.
        if k > 1 {
            by_k.insert(k, t);
        }
    }
    by_k.values()
        .rev()
        .map(|&t| build_bch(f, t).and_then(|c| c.extend()))
        .collect()
}

/// The eBCH code of length 2^m and dimension `k`.
pub fn ebch(m: u32, k: usize) -> Result<CodeInstance> {
    list_ebch_family(m)?
        .into_iter()
        .find(|c| c.k() == k)
        .ok_or_else(|| Error::UnknownCode(format!("ebch:{}:{k}", 1u32 << m)))
}

/// The (unextended) BCH code of length 2^m - 1 and dimension `k`.
pub fn bch(m: u32, k: usize) -> Result<CodeInstance> {
    let f = FieldParams::default_for(m)?;
    let n = f.order() as usize;
    let t = (1..=(n - 1) / 2)
        .rev()
        .find(|&t| bch_generator_poly(&f, t).map(|g| n - g.degree().unwrap_or(0)) == Ok(k))
        .ok_or_else(|| Error::UnknownCode(format!("bch:{n}:{k}")))?;
    build_bch(&f, t)
}
