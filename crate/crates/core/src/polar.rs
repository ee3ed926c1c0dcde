//! Polar codes designed for AWGN by Gaussian-approximation density
//! evolution, Reed-Muller codes as popcount-selected rows of the same
//! Kronecker transform, and the transform itself.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bitmat::BitMatrix;
use crate::code::{CodeFamily, CodeInstance, ConstructionMeta};
use crate::error::{Error, Result};

/// What the design SNR value measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SnrKind {
    /// E_b/N_0 at the code's own rate K/N.
    #[default]
    EbN0,
    /// E_s/N_0, independent of rate.
    EsN0,
}

impl FromStr for SnrKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ebn0" => Ok(SnrKind::EbN0),
            "esn0" => Ok(SnrKind::EsN0),
            other => Err(Error::InvalidArgument(format!("unknown SNR kind {other:?}"))),
        }
    }
}

/// Design point of a polar construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignSnr {
    pub db: f64,
    #[serde(default)]
    pub kind: SnrKind,
}

impl DesignSnr {
    pub const fn ebn0(db: f64) -> Self {
        Self { db, kind: SnrKind::EbN0 }
    }

    pub const fn esn0(db: f64) -> Self {
        Self { db, kind: SnrKind::EsN0 }
    }

    /// Per-dimension noise variance at this design point.
    pub fn sigma2(&self, rate: f64) -> f64 {
        let lin = 10f64.powf(self.db / 10.0);
        match self.kind {
            SnrKind::EbN0 => 1.0 / (2.0 * rate * lin),
            SnrKind::EsN0 => 1.0 / (2.0 * lin),
        }
    }
}

impl Default for DesignSnr {
    fn default() -> Self {
        Self::ebn0(5.0)
    }
}

impl fmt::Display for DesignSnr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            SnrKind::EbN0 => "Eb/N0",
            SnrKind::EsN0 => "Es/N0",
        };
        write!(f, "{} dB {kind}", self.db)
    }
}

/// Frozen/information split of the transform inputs.
#[derive(Clone, Debug, PartialEq)]
pub struct PolarSpec {
    n: usize,
    info_set: Vec<usize>,
    frozen_set: Vec<usize>,
    frozen_mask: Vec<bool>,
    design: Option<DesignSnr>,
    reliabilities: Vec<f64>,
}

impl PolarSpec {
    /// Spec from an explicit information set (any order, no duplicates).
    pub fn from_info_set(
        n: usize,
        info: &[usize],
        design: Option<DesignSnr>,
        reliabilities: Vec<f64>,
    ) -> Result<Self> {
        if !n.is_power_of_two() {
            return Err(Error::NotPowerOfTwo(n));
        }
        let mut frozen_mask = vec![true; n];
        for &i in info {
            if i >= n || !frozen_mask[i] {
                return Err(Error::InvalidArgument(format!("bad information index {i}")));
            }
            frozen_mask[i] = false;
        }
        let info_set: Vec<usize> = (0..n).filter(|&i| !frozen_mask[i]).collect();
        let frozen_set: Vec<usize> = (0..n).filter(|&i| frozen_mask[i]).collect();
        Ok(Self { n, info_set, frozen_set, frozen_mask, design, reliabilities })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.info_set.len()
    }

    /// Information indices in increasing order.
    pub fn info_set(&self) -> &[usize] {
        &self.info_set
    }

    pub fn frozen_set(&self) -> &[usize] {
        &self.frozen_set
    }

    #[inline]
    pub fn is_frozen(&self, i: usize) -> bool {
        self.frozen_mask[i]
    }

    pub fn design(&self) -> Option<DesignSnr> {
        self.design
    }

    pub fn reliabilities(&self) -> &[f64] {
        &self.reliabilities
    }

    /// Scatter the message into the information positions.
    pub fn scatter(&self, message: &[u8]) -> Result<Vec<u8>> {
        if message.len() != self.k() {
            return Err(Error::LengthMismatch { expected: self.k(), got: message.len() });
        }
        let mut u = vec![0u8; self.n];
        for (&i, &b) in self.info_set.iter().zip(message) {
            u[i] = b;
        }
        Ok(u)
    }
}

/// In-place `x = u · F^{⊗n}` with F = [[1,0],[1,1]]. Length must be a power of two.
pub fn kron_transform_in_place<B>(x: &mut [B])
where
    B: Copy + std::ops::BitXorAssign,
{
    let n = x.len();
    debug_assert!(n.is_power_of_two());
    let mut half = 1;
    while half < n {
        for block in (0..n).step_by(2 * half) {
            for j in block..block + half {
                let hi = x[j + half];
                x[j] ^= hi;
            }
        }
        half *= 2;
    }
}

pub fn kron_transform(u: &[u8]) -> Result<Vec<u8>> {
    if !u.len().is_power_of_two() {
        return Err(Error::NotPowerOfTwo(u.len()));
    }
    let mut x = u.to_vec();
    kron_transform_in_place(&mut x);
    Ok(x)
}

/// Row `i` of F^{⊗n}: column j is set iff the bits of j are a subset of those of i.
pub fn kron_row(n: usize, i: usize) -> Vec<u8> {
    (0..n).map(|j| (j & !i == 0) as u8).collect()
}

pub fn kron_matrix(n: usize) -> Result<BitMatrix> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let rows: Vec<Vec<u8>> = (0..n).map(|i| kron_row(n, i)).collect();
    BitMatrix::from_rows(&rows)
}

/// Runs a one-parameter channel recursion through the transform's
/// polarization tree. `worse` and `better` map a parent parameter to its two
/// children; the returned vector is indexed by transform input.
///
/// The first combining step applied to the channel decides the most
/// significant index bit, matching the successive-cancellation order of
/// [`kron_transform`].
pub fn polarize<F, G>(n: usize, init: f64, worse: F, better: G) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
    G: Fn(f64) -> f64,
{
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut params = vec![init];
    while params.len() < n {
        let mut next = Vec::with_capacity(params.len() * 2);
        for &p in &params {
            next.push(worse(p));
            next.push(better(p));
        }
        params = next;
    }
    // Children are interleaved, so every later split lands in a lower bit and
    // the first one ends up as the MSB.
    Ok(params)
}

const PHI_A: f64 = 0.4527;
const PHI_B: f64 = 0.86;
const PHI_C: f64 = 0.0218;
const PHI_LO: f64 = 0.1;
const PHI_HI: f64 = 10.0;

fn phi_mid(x: f64) -> f64 {
    (-PHI_A * x.powf(PHI_B) + PHI_C).exp()
}

fn phi_tail(x: f64) -> f64 {
    (std::f64::consts::PI / x).sqrt() * (-x / 4.0).exp() * (1.0 - 10.0 / (7.0 * x))
}

/// Check-node mean function of the Gaussian approximation. Between 0.1 and
/// 10 the exponential fit is used, above 10 the asymptotic expansion, and
/// below 0.1 a linear segment joining phi(0) = 1 to the fit.
pub fn phi(x: f64) -> f64 {
    if x <= 0.0 {
        1.0
    } else if x < PHI_LO {
        1.0 + (phi_mid(PHI_LO) - 1.0) * x / PHI_LO
    } else if x < PHI_HI {
        phi_mid(x)
    } else {
        phi_tail(x)
    }
}

/// Inverse of [`phi`] on (0, 1].
pub fn phi_inv(y: f64) -> f64 {
    if y >= 1.0 {
        return 0.0;
    }
    let lo_y = phi_mid(PHI_LO);
    if y > lo_y {
        return PHI_LO * (1.0 - y) / (1.0 - lo_y);
    }
    if y >= phi_mid(PHI_HI) {
        return ((PHI_C - y.ln()) / PHI_A).powf(1.0 / PHI_B);
    }
    // The tail branch is decreasing on [10, inf); bisect on it.
    let (mut lo, mut hi) = (PHI_HI, 2.0 * PHI_HI);
    while phi_tail(hi) > y {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi_tail(mid) > y {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-12 * hi {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Mean of the check-node combination of two independent consistent
/// Gaussian LLRs of mean `m`.
pub fn ga_check(m: f64) -> f64 {
    let p = phi(m);
    if p < 1e-300 {
        // 1 - (1 - p)^2 ≈ 2p; in the tail phi(y) = 2 phi(x) gives y ≈ x - 4 ln 2.
        return (m - 4.0 * std::f64::consts::LN_2).max(0.0);
    }
    phi_inv(p * (2.0 - p))
}

/// Mean LLR of each synthetic channel under GA density evolution. Higher is
/// more reliable.
pub fn awgn_reliabilities(n: usize, design: DesignSnr, rate_for_design: f64) -> Result<Vec<f64>> {
    if !design.db.is_finite() || !(rate_for_design > 0.0 && rate_for_design <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "design point {design} at rate {rate_for_design}"
        )));
    }
    let mean = 2.0 / design.sigma2(rate_for_design);
    polarize(n, mean, ga_check, |m| 2.0 * m)
}

/// Indices of the `k` most reliable channels, ties broken by larger row
/// weight and then larger index. Returned in increasing index order.
pub fn select_info_set(reliabilities: &[f64], k: usize) -> Vec<usize> {
    let mut order: Vec<usize> = (0..reliabilities.len()).collect();
    order.sort_by(|&a, &b| {
        reliabilities[b]
            .partial_cmp(&reliabilities[a])
            .unwrap_or(std::cmp::Ordering::Equal)
            .then(b.count_ones().cmp(&a.count_ones()))
            .then(b.cmp(&a))
    });
    let mut info: Vec<usize> = order.into_iter().take(k).collect();
    info.sort_unstable();
    info
}

fn code_from_rows(
    family: CodeFamily,
    spec: &PolarSpec,
    designed: Option<usize>,
    meta: ConstructionMeta,
) -> Result<CodeInstance> {
    let rows: Vec<Vec<u8>> = spec.info_set().iter().map(|&i| kron_row(spec.n(), i)).collect();
    let g = if rows.is_empty() {
        BitMatrix::zeros(0, spec.n())
    } else {
        BitMatrix::from_rows(&rows)?
    };
    CodeInstance::new(family, g, designed, meta)
}

/// Polar code: the K most reliable rows of F^{⊗n} under GA at `design`,
/// evaluated at the code's own rate.
pub fn build_polar(n: usize, k: usize, design: DesignSnr) -> Result<CodeInstance> {
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidArgument(format!("K={k} outside 1..={n}")));
    }
    let rel = awgn_reliabilities(n, design, k as f64 / n as f64)?;
    let info = select_info_set(&rel, k);
    let spec = PolarSpec::from_info_set(n, &info, Some(design), rel)?;
    let d = info.iter().map(|&i| 1usize << i.count_ones()).min();
    code_from_rows(CodeFamily::Polar, &spec, d, ConstructionMeta::Polar(spec.clone()))
}

/// Reed-Muller RM(r, m): rows of F^{⊗m} whose index has popcount ≥ m - r.
pub fn build_rm(r: u32, m: u32) -> Result<CodeInstance> {
    if r > m || m > 16 {
        return Err(Error::InvalidArgument(format!("RM({r},{m})")));
    }
    let n = 1usize << m;
    let info: Vec<usize> = (0..n).filter(|i| i.count_ones() + r >= m).collect();
    let weights: Vec<f64> = (0..n).map(|i| (1u64 << i.count_ones()) as f64).collect();
    let spec = PolarSpec::from_info_set(n, &info, None, weights)?;
    code_from_rows(CodeFamily::Rm, &spec, Some(1 << (m - r)), ConstructionMeta::Rm { r, m })
}

/// The transform-input split of an RM code, for SC-family decoding.
pub fn rm_spec(r: u32, m: u32) -> Result<PolarSpec> {
    let n = 1usize << m;
    let info: Vec<usize> = (0..n).filter(|i| i.count_ones() + r >= m).collect();
    PolarSpec::from_info_set(n, &info, None, Vec::new())
}

/// `u · F^{⊗n}` with the message scattered into the information positions.
pub fn polar_encode(spec: &PolarSpec, message: &[u8]) -> Result<Vec<u8>> {
    let mut u = spec.scatter(message)?;
    kron_transform_in_place(&mut u);
    Ok(u)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binom(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn transform_small_cases() {
        assert_eq!(kron_transform(&[1, 0]).unwrap(), vec![1, 0]);
        assert_eq!(kron_transform(&[0, 1]).unwrap(), vec![1, 1]);
        assert_eq!(kron_transform(&[0, 0, 0, 1]).unwrap(), vec![1, 1, 1, 1]);
        assert!(matches!(kron_transform(&[0, 1, 1]), Err(Error::NotPowerOfTwo(3))));
    }

    #[test]
    fn transform_matches_matrix() {
        // F^{⊗3} expanded by explicit Kronecker products.
        let f = [[1u8, 0], [1, 1]];
        let mut g = vec![vec![1u8]];
        for _ in 0..3 {
            let s = g.len();
            let mut next = vec![vec![0u8; 2 * s]; 2 * s];
            for (a, fa) in f.iter().enumerate() {
                for (b, &fab) in fa.iter().enumerate() {
                    for i in 0..s {
                        for j in 0..s {
                            next[a * s + i][b * s + j] = fab & g[i][j];
                        }
                    }
                }
            }
            g = next;
        }
        for (i, row) in g.iter().enumerate() {
            assert_eq!(&kron_row(8, i), row);
            let mut u = vec![0u8; 8];
            u[i] = 1;
            assert_eq!(&kron_transform(&u).unwrap(), row);
        }
    }

    #[test]
    fn row_weight_law() {
        for m in 1..=7u32 {
            let n = 1usize << m;
            let g = kron_matrix(n).unwrap();
            for i in 0..n {
                assert_eq!(g.row_weight(i), 1 << i.count_ones());
            }
        }
    }

    #[test]
    fn phi_is_continuous_enough_and_invertible() {
        for &x in &[0.05, 0.1, 0.5, 1.0, 3.0, 9.9, 10.0, 20.0, 100.0, 500.0] {
            let y = phi(x);
            assert!(y > 0.0 && y <= 1.0);
            assert!(((phi(phi_inv(y)) - y) / y).abs() < 1e-9, "x={x}");
            if !(9.0..11.0).contains(&x) {
                assert!((phi_inv(y) - x).abs() < 1e-6 * x.max(1.0), "x={x}");
            }
        }
        assert_eq!(phi(0.0), 1.0);
        assert!(phi(1.0) < phi(0.5));
    }

    #[test]
    fn ga_check_is_worse() {
        for &m in &[0.2, 1.0, 5.0, 20.0, 200.0, 5000.0] {
            let c = ga_check(m);
            assert!(c < m && c >= 0.0, "m={m} c={c}");
        }
    }

    #[test]
    fn n2_polarizes() {
        let r = awgn_reliabilities(2, DesignSnr::ebn0(5.0), 0.5).unwrap();
        assert!(r[1] > r[0]);
        let lo = awgn_reliabilities(2, DesignSnr::ebn0(1.0), 0.5).unwrap();
        assert!(r[0] > lo[0] && r[1] > lo[1]);
    }

    #[test]
    fn rank_invariant_under_monotone_rescale() {
        let r = awgn_reliabilities(64, DesignSnr::ebn0(5.0), 0.5).unwrap();
        let scaled: Vec<f64> = r.iter().map(|x| 3.0 * x.ln_1p() + 1.0).collect();
        for k in [1, 10, 22, 32, 57] {
            assert_eq!(select_info_set(&r, k), select_info_set(&scaled, k));
        }
    }

    #[test]
    fn full_rate_is_transform() {
        let c = build_polar(16, 16, DesignSnr::ebn0(5.0)).unwrap();
        assert_eq!(c.generator(), &kron_matrix(16).unwrap());
    }

    #[test]
    fn rm_dimensions_and_distance() {
        let full = build_rm(3, 3).unwrap();
        assert_eq!(full.k(), 8);
        let rm26 = build_rm(2, 6).unwrap();
        assert_eq!((rm26.n(), rm26.k()), (64, 22));
        assert_eq!(rm26.designed_distance(), Some(16));
        for m in 1..=7u32 {
            for r in 0..=m {
                let k: u64 = (0..=r as u64).map(|j| binom(m as u64, j)).sum();
                assert_eq!(build_rm(r, m).unwrap().k() as u64, k);
            }
        }
        assert_eq!(build_rm(1, 4).unwrap().minimum_distance().unwrap(), 8);
        assert!(build_rm(4, 3).is_err());
    }

    #[test]
    fn rm13_is_extended_hamming() {
        let rm = build_rm(1, 3).unwrap();
        let ham = crate::bch::extended_hamming_8_4();
        // Same code up to coordinate order: compare weight enumerators and
        // row spaces under the bit-order that maps one to the other.
        assert_eq!(rm.weight_distribution().unwrap(), ham.weight_distribution().unwrap());
    }

    /// Evaluations of the Boolean monomials of degree ≤ r on {0,1}^m.
    fn monomial_rm(r: u32, m: u32) -> BitMatrix {
        let n = 1usize << m;
        let mut rows = Vec::new();
        for mask in 0..(1usize << m) {
            if mask.count_ones() <= r {
                rows.push((0..n).map(|p| ((p & mask) == mask) as u8).collect::<Vec<u8>>());
            }
        }
        BitMatrix::from_rows(&rows).unwrap()
    }

    #[test]
    fn rm_matches_monomial_construction() {
        for (r, m) in [(1u32, 3u32), (3, 4), (2, 4), (2, 6)] {
            assert!(
                build_rm(r, m).unwrap().generator().same_row_space(&monomial_rm(r, m)),
                "RM({r},{m})"
            );
        }
        assert_eq!(build_rm(3, 4).unwrap().k(), 15);
        assert_eq!(build_rm(2, 4).unwrap().k(), 11);
    }

    #[test]
    fn polar_encode_examples() {
        let c = build_polar(64, 22, DesignSnr::ebn0(5.0)).unwrap();
        let spec = c.polar_spec().unwrap();
        assert_eq!(polar_encode(spec, &[0; 22]).unwrap(), vec![0; 64]);
        for (j, &i) in spec.info_set().iter().enumerate() {
            let mut msg = vec![0; 22];
            msg[j] = 1;
            assert_eq!(polar_encode(spec, &msg).unwrap(), kron_row(64, i));
        }
        let msg: Vec<u8> = (0..22).map(|i| (i % 3 == 0) as u8).collect();
        let cw = polar_encode(spec, &msg).unwrap();
        assert_eq!(cw, c.encode(&msg).unwrap());
        assert_eq!(cw.iter().map(|&b| b as usize).sum::<usize>() % 2, 0);
        assert_eq!(c.extract_message(&cw), msg);
        assert!(polar_encode(spec, &[1; 3]).is_err());
    }

    #[test]
    fn selected_row_weights() {
        let c = build_polar(64, 30, DesignSnr::ebn0(5.0)).unwrap();
        for (r, &i) in c.polar_spec().unwrap().info_set().iter().enumerate() {
            assert_eq!(c.generator().row_weight(r), 1 << i.count_ones());
        }
    }

    /// Exact erasure probability of each synthetic channel on a BEC, by
    /// enumerating erasure patterns: u_i is lost iff its row restricted to
    /// the unerased columns lies in the span of the later rows.
    fn bec_bruteforce(n: usize, eps: f64) -> Vec<f64> {
        let g = kron_matrix(n).unwrap();
        let mut out = vec![0.0; n];
        for pattern in 0u32..(1 << n) {
            let erased = pattern.count_ones() as i32;
            let w = eps.powi(erased) * (1.0 - eps).powi(n as i32 - erased);
            let keep: Vec<usize> = (0..n).filter(|j| (pattern >> j) & 1 == 0).collect();
            let sub = g.select_cols(&keep);
            for i in 0..n {
                let later = sub.select_rows(&((i + 1)..n).collect::<Vec<_>>());
                let row = sub.row_bits(i);
                let lost = if later.rows() == 0 {
                    row.iter().all(|&b| b == 0)
                } else {
                    later.row_space_contains(&row)
                };
                if lost {
                    out[i] += w;
                }
            }
        }
        out
    }

    #[test]
    fn polarization_index_order_matches_bec_enumeration() {
        for n in [2usize, 4, 8] {
            let eps = 0.4;
            let rec = polarize(n, eps, |z| 1.0 - (1.0 - z) * (1.0 - z), |z| z * z).unwrap();
            let brute = bec_bruteforce(n, eps);
            for i in 0..n {
                assert!((rec[i] - brute[i]).abs() < 1e-12, "n={n} i={i}");
            }
        }
    }
}
