//! Successive-cancellation decoding of polar codes and its list and
//! CRC-aided list variants.
//!
//! Both decoders walk the same binary tree: a node of size `s` receives `s`
//! LLRs, sends `f(a_i, a_{i+s/2})` to its left child, then
//! `g(a_i, a_{i+s/2}, β_left_i)` to its right child, and returns
//! `[β_left ⊕ β_right, β_right]`. Leaves are the transform inputs in order.
//! Per-layer LLR arrays live at offsets `[s, 2s)`; partial sums keep one
//! array per layer and per child side.

use crate::crc::CrcSpec;
use crate::error::{Error, Result};
use crate::polar::PolarSpec;
use crate::scalar::Scalar;

/// Check-node rule.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum CheckRule {
    /// `2 atanh(tanh(a/2) tanh(b/2))`.
    #[default]
    Exact,
    /// `sign(a) sign(b) min(|a|, |b|)`.
    MinSum,
}

/// Path-metric increment for deciding `u` against branch LLR `λ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum MetricRule {
    /// `ln(1 + exp(-(1 - 2u) λ))`.
    #[default]
    Exact,
    /// `|λ|` when `u` disagrees with the sign of `λ`, else 0.
    Approx,
}

/// Check-node update. The exact form is evaluated as
/// `sign·min + ln(1+e^{-|a+b|}) - ln(1+e^{-|a-b|})`, which equals the tanh
/// rule and stays finite for large magnitudes.
#[inline]
pub fn check_node<T: Scalar>(a: T, b: T, rule: CheckRule) -> T {
    let mag = a.abs().min(b.abs());
    let signed = if (a < T::zero()) != (b < T::zero()) { -mag } else { mag };
    match rule {
        CheckRule::MinSum => signed,
        CheckRule::Exact => {
            signed + (-(a + b).abs()).exp().ln_1p() - (-(a - b).abs()).exp().ln_1p()
        }
    }
}

/// Variable-node update `b + (1 - 2u) a`.
#[inline]
pub fn var_node<T: Scalar>(a: T, b: T, u: u8) -> T {
    if u == 0 {
        b + a
    } else {
        b - a
    }
}

#[inline]
pub fn metric_increment<T: Scalar>(llr: T, u: u8, rule: MetricRule) -> T {
    match rule {
        MetricRule::Exact => {
            let x = if u == 0 { -llr } else { llr };
            x.softplus()
        }
        MetricRule::Approx => {
            if (llr < T::zero()) != (u == 1) {
                llr.abs()
            } else {
                T::zero()
            }
        }
    }
}

#[inline]
fn hard<T: Scalar>(llr: T) -> u8 {
    (llr < T::zero()) as u8
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScOutput<T> {
    /// Information bits in increasing index order.
    pub message: Vec<u8>,
    pub codeword: Vec<u8>,
    /// Accumulated path metric of the SC decisions.
    pub metric: T,
}

/// Single-path successive-cancellation decoder.
#[derive(Clone, Debug)]
pub struct ScDecoder<T> {
    check: CheckRule,
    metric_rule: MetricRule,
    alpha: Vec<T>,
    beta: [Vec<u8>; 2],
    u: Vec<u8>,
    metric: T,
}

impl<T: Scalar> Default for ScDecoder<T> {
    fn default() -> Self {
        Self::new(CheckRule::Exact)
    }
}

impl<T: Scalar> ScDecoder<T> {
    pub fn new(check: CheckRule) -> Self {
        Self {
            check,
            metric_rule: MetricRule::Exact,
            alpha: Vec::new(),
            beta: [Vec::new(), Vec::new()],
            u: Vec::new(),
            metric: T::zero(),
        }
    }

    pub fn decode(&mut self, spec: &PolarSpec, llr: &[T]) -> Result<ScOutput<T>> {
        let n = spec.n();
        if llr.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: llr.len() });
        }
        self.alpha.clear();
        self.alpha.resize(2 * n, T::zero());
        for b in &mut self.beta {
            b.clear();
            b.resize(2 * n, 0);
        }
        self.u.clear();
        self.u.resize(n, 0);
        self.metric = T::zero();
        self.node(spec, llr, n, 0);
        let codeword = self.beta[0][n..2 * n].to_vec();
        let message = spec.info_set().iter().map(|&i| self.u[i]).collect();
        Ok(ScOutput { message, codeword, metric: self.metric })
    }

    fn input(&self, llr: &[T], s: usize, i: usize) -> T {
        if s == llr.len() {
            llr[i]
        } else {
            self.alpha[s + i]
        }
    }

    fn node(&mut self, spec: &PolarSpec, llr: &[T], s: usize, offset: usize) {
        let side = (offset / s) & 1;
        if s == 1 {
            let l = self.input(llr, 1, 0);
            let u = if spec.is_frozen(offset) { 0 } else { hard(l) };
            self.metric = self.metric + metric_increment(l, u, self.metric_rule);
            self.u[offset] = u;
            self.beta[side][1] = u;
            return;
        }
        let h = s / 2;
        for i in 0..h {
            let (a, b) = (self.input(llr, s, i), self.input(llr, s, i + h));
            self.alpha[h + i] = check_node(a, b, self.check);
        }
        self.node(spec, llr, h, offset);
        for i in 0..h {
            let (a, b) = (self.input(llr, s, i), self.input(llr, s, i + h));
            self.alpha[h + i] = var_node(a, b, self.beta[0][h + i]);
        }
        self.node(spec, llr, h, offset + h);
        for i in 0..h {
            let (l, r) = (self.beta[0][h + i], self.beta[1][h + i]);
            self.beta[side][s + i] = l ^ r;
            self.beta[side][s + h + i] = r;
        }
    }
}

/// Successive-cancellation decode with exact kernels.
pub fn sc_decode<T: Scalar>(spec: &PolarSpec, llr: &[T]) -> Result<ScOutput<T>> {
    ScDecoder::default().decode(spec, llr)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SclPath<T> {
    pub message: Vec<u8>,
    pub codeword: Vec<u8>,
    pub metric: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SclCrcOutput<T> {
    /// Information bits with the CRC stripped.
    pub payload: Vec<u8>,
    /// All K information bits of the chosen path.
    pub message: Vec<u8>,
    pub codeword: Vec<u8>,
    pub metric: T,
    /// False when no surviving path passed the CRC and the best-metric path
    /// was returned instead.
    pub crc_ok: bool,
}

/// Successive-cancellation list decoder. Paths are full copies of the
/// compact per-layer state (about 7N values), so duplication costs O(N).
#[derive(Clone, Debug)]
pub struct SclDecoder<T> {
    list_size: usize,
    check: CheckRule,
    metric_rule: MetricRule,
    n: usize,
    alpha: Vec<T>,
    beta: Vec<u8>,
    u: Vec<u8>,
    metrics: Vec<T>,
    active: Vec<usize>,
    free: Vec<usize>,
    cands: Vec<(T, usize)>,
}

impl<T: Scalar> SclDecoder<T> {
    pub fn new(list_size: usize) -> Result<Self> {
        Self::with_rules(list_size, CheckRule::Exact, MetricRule::Exact)
    }

    pub fn with_rules(list_size: usize, check: CheckRule, metric_rule: MetricRule) -> Result<Self> {
        if list_size == 0 {
            return Err(Error::InvalidArgument("list size must be at least 1".into()));
        }
        Ok(Self {
            list_size,
            check,
            metric_rule,
            n: 0,
            alpha: Vec::new(),
            beta: Vec::new(),
            u: Vec::new(),
            metrics: Vec::new(),
            active: Vec::new(),
            free: Vec::new(),
            cands: Vec::new(),
        })
    }

    pub fn list_size(&self) -> usize {
        self.list_size
    }

    fn reset(&mut self, n: usize) {
        let slots = self.list_size;
        self.n = n;
        self.alpha.clear();
        self.alpha.resize(slots * 2 * n, T::zero());
        self.beta.clear();
        self.beta.resize(slots * 4 * n, 0);
        self.u.clear();
        self.u.resize(slots * n, 0);
        self.metrics.clear();
        self.metrics.resize(slots, T::zero());
        self.active.clear();
        self.active.push(0);
        self.free.clear();
        self.free.extend((1..slots).rev());
    }

    #[inline]
    fn beta_idx(&self, slot: usize, side: usize, pos: usize) -> usize {
        slot * 4 * self.n + side * 2 * self.n + pos
    }

    /// Surviving paths, best (lowest) metric first.
    pub fn decode(&mut self, spec: &PolarSpec, llr: &[T]) -> Result<Vec<SclPath<T>>> {
        let n = spec.n();
        if llr.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: llr.len() });
        }
        self.reset(n);
        self.node(spec, llr, n, 0);
        let mut order: Vec<usize> = (0..self.active.len()).collect();
        let metrics = &self.metrics;
        let active = &self.active;
        order.sort_by(|&a, &b| {
            metrics[active[a]]
                .partial_cmp(&metrics[active[b]])
                .unwrap_or(std::cmp::Ordering::Equal)
                .then(a.cmp(&b))
        });
        Ok(order
            .into_iter()
            .map(|j| {
                let slot = self.active[j];
                let u = &self.u[slot * n..(slot + 1) * n];
                let cw_start = self.beta_idx(slot, 0, n);
                SclPath {
                    message: spec.info_set().iter().map(|&i| u[i]).collect(),
                    codeword: self.beta[cw_start..cw_start + n].to_vec(),
                    metric: self.metrics[slot],
                }
            })
            .collect())
    }

    /// CRC-aided selection: the best path whose K information bits pass
    /// `crc`, or the overall best path flagged as failed.
    pub fn decode_with_crc(
        &mut self,
        spec: &PolarSpec,
        llr: &[T],
        crc: &CrcSpec,
    ) -> Result<SclCrcOutput<T>> {
        if spec.k() <= crc.width() {
            return Err(Error::InvalidArgument(format!(
                "K={} leaves no payload for a {}-bit CRC",
                spec.k(),
                crc.width()
            )));
        }
        let paths = self.decode(spec, llr)?;
        Ok(select_by_crc(paths, crc))
    }

    #[inline]
    fn input(&self, llr: &[T], slot: usize, s: usize, i: usize) -> T {
        if s == self.n {
            llr[i]
        } else {
            self.alpha[slot * 2 * self.n + s + i]
        }
    }

    fn node(&mut self, spec: &PolarSpec, llr: &[T], s: usize, offset: usize) {
        let side = (offset / s) & 1;
        if s == 1 {
            self.leaf(spec, offset, side);
            return;
        }
        let h = s / 2;
        let n = self.n;
        for j in 0..self.active.len() {
            let slot = self.active[j];
            for i in 0..h {
                let (a, b) = (self.input(llr, slot, s, i), self.input(llr, slot, s, i + h));
                self.alpha[slot * 2 * n + h + i] = check_node(a, b, self.check);
            }
        }
        self.node(spec, llr, h, offset);
        for j in 0..self.active.len() {
            let slot = self.active[j];
            for i in 0..h {
                let (a, b) = (self.input(llr, slot, s, i), self.input(llr, slot, s, i + h));
                let left = self.beta[self.beta_idx(slot, 0, h + i)];
                self.alpha[slot * 2 * n + h + i] = var_node(a, b, left);
            }
        }
        self.node(spec, llr, h, offset + h);
        for j in 0..self.active.len() {
            let slot = self.active[j];
            for i in 0..h {
                let l = self.beta[self.beta_idx(slot, 0, h + i)];
                let r = self.beta[self.beta_idx(slot, 1, h + i)];
                let lo = self.beta_idx(slot, side, s + i);
                self.beta[lo] = l ^ r;
                self.beta[lo + h] = r;
            }
        }
    }

    fn set_leaf(&mut self, slot: usize, index: usize, side: usize, u: u8, llr: T) {
        self.metrics[slot] = self.metrics[slot] + metric_increment(llr, u, self.metric_rule);
        self.u[slot * self.n + index] = u;
        let b = self.beta_idx(slot, side, 1);
        self.beta[b] = u;
    }

    fn copy_slot(&mut self, from: usize, to: usize) {
        let n = self.n;
        self.alpha.copy_within(from * 2 * n..(from + 1) * 2 * n, to * 2 * n);
        self.beta.copy_within(from * 4 * n..(from + 1) * 4 * n, to * 4 * n);
        self.u.copy_within(from * n..(from + 1) * n, to * n);
        self.metrics[to] = self.metrics[from];
    }

    fn leaf(&mut self, spec: &PolarSpec, index: usize, side: usize) {
        let n = self.n;
        let leaf_llr = |alpha: &[T], slot: usize| alpha[slot * 2 * n + 1];
        if spec.is_frozen(index) {
            for j in 0..self.active.len() {
                let slot = self.active[j];
                let l = leaf_llr(&self.alpha, slot);
                self.set_leaf(slot, index, side, 0, l);
            }
            return;
        }

        // Candidate (path j, bit b) has id 2j + b.
        self.cands.clear();
        for (j, &slot) in self.active.iter().enumerate() {
            let l = leaf_llr(&self.alpha, slot);
            for b in 0..2u8 {
                let m = self.metrics[slot] + metric_increment(l, b, self.metric_rule);
                self.cands.push((m, 2 * j + b as usize));
            }
        }
        let keep = self.list_size.min(self.cands.len());
        self.cands.sort_by(|a, b| {
            a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal).then(a.1.cmp(&b.1))
        });
        let paths = self.active.len();
        let mut survive = vec![[false; 2]; paths];
        for &(_, id) in &self.cands[..keep] {
            survive[id / 2][id % 2] = true;
        }

        let old_active = std::mem::take(&mut self.active);
        for (j, &slot) in old_active.iter().enumerate() {
            if survive[j] == [false, false] {
                self.free.push(slot);
            }
        }
        let mut next = Vec::with_capacity(keep);
        for (j, &slot) in old_active.iter().enumerate() {
            let l = leaf_llr(&self.alpha, slot);
            match survive[j] {
                [true, true] => {
                    let twin = self.free.pop().expect("slot pool sized to the list");
                    self.copy_slot(slot, twin);
                    self.set_leaf(slot, index, side, 0, l);
                    self.set_leaf(twin, index, side, 1, l);
                    next.push(slot);
                    next.push(twin);
                }
                [true, false] => {
                    self.set_leaf(slot, index, side, 0, l);
                    next.push(slot);
                }
                [false, true] => {
                    self.set_leaf(slot, index, side, 1, l);
                    next.push(slot);
                }
                [false, false] => {}
            }
        }
        self.active = next;
    }
}

/// Picks the first path (in the given order) whose message passes `crc`,
/// falling back to the first path. Panics on an empty list or on messages
/// not longer than the CRC.
pub fn select_by_crc<T: Scalar>(paths: Vec<SclPath<T>>, crc: &CrcSpec) -> SclCrcOutput<T> {
    let pick = paths.iter().position(|p| crc.check_unchecked(&p.message));
    let best = paths.into_iter().nth(pick.unwrap_or(0)).expect("at least one path");
    let payload_len = best.message.len() - crc.width();
    SclCrcOutput {
        payload: best.message[..payload_len].to_vec(),
        message: best.message,
        codeword: best.codeword,
        metric: best.metric,
        crc_ok: pick.is_some(),
    }
}

/// List decode with exact kernels.
pub fn scl_decode<T: Scalar>(spec: &PolarSpec, llr: &[T], list_size: usize) -> Result<Vec<SclPath<T>>> {
    SclDecoder::new(list_size)?.decode(spec, llr)
}

/// CRC-aided list decode with exact kernels.
pub fn scl_crc_decode<T: Scalar>(
    spec: &PolarSpec,
    llr: &[T],
    list_size: usize,
    crc: &CrcSpec,
) -> Result<SclCrcOutput<T>> {
    SclDecoder::new(list_size)?.decode_with_crc(spec, llr, crc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{ChannelParams, LlrVector};
    use crate::polar::{build_polar, polar_encode, DesignSnr};
    use rand::{Rng, SeedableRng};

    fn spec(n: usize, k: usize) -> PolarSpec {
        build_polar(n, k, DesignSnr::ebn0(5.0)).unwrap().polar_spec().unwrap().clone()
    }

    fn tanh_rule(a: f64, b: f64) -> f64 {
        2.0 * ((a / 2.0).tanh() * (b / 2.0).tanh()).atanh()
    }

    #[test]
    fn kernel_identities() {
        for &(a, b) in &[(1.0, 3.0), (-2.0, 0.5), (0.3, -0.7), (-4.0, -6.0), (5.0, 0.0)] {
            assert!((check_node(a, b, CheckRule::Exact) - tanh_rule(a, b)).abs() < 1e-12);
        }
        for &a in &[-3.0f64, 0.5, 7.0] {
            assert!((check_node(a, 1e6, CheckRule::Exact) - a).abs() < 1e-9);
            assert_eq!(check_node(a, 1e6, CheckRule::MinSum), a);
        }
        assert_eq!(var_node(2.0, 5.0, 0), 7.0);
        assert_eq!(var_node(2.0, 5.0, 1), 3.0);
        assert!((metric_increment(3.0f64, 1, MetricRule::Exact) - (1.0 + 3f64.exp()).ln()).abs() < 1e-12);
        assert_eq!(metric_increment(3.0f64, 1, MetricRule::Approx), 3.0);
        assert_eq!(metric_increment(3.0f64, 0, MetricRule::Approx), 0.0);
    }

    #[test]
    fn n2_hand_example() {
        let s = PolarSpec::from_info_set(2, &[0, 1], None, vec![]).unwrap();
        let out = sc_decode(&s, &[1.0f64, 3.0]).unwrap();
        assert!(tanh_rule(1.0, 3.0) > 0.0);
        assert_eq!(out.message, vec![0, 0]);
        assert_eq!(out.codeword, vec![0, 0]);
    }

    #[test]
    fn all_frozen() {
        let s = PolarSpec::from_info_set(8, &[], None, vec![]).unwrap();
        let out = sc_decode(&s, &[-1.0f64; 8]).unwrap();
        assert!(out.message.is_empty());
        assert_eq!(out.codeword, vec![0; 8]);
    }

    #[test]
    fn noiseless_recovery_all_decoders() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for &(n, k) in &[(8, 4), (64, 22), (64, 57), (128, 64)] {
            let s = spec(n, k);
            for _ in 0..5 {
                let msg: Vec<u8> = (0..k).map(|_| rng.random::<bool>() as u8).collect();
                let cw = polar_encode(&s, &msg).unwrap();
                let llr = LlrVector::<f64>::noiseless(&cw, 50.0);
                let sc = sc_decode(&s, &llr).unwrap();
                assert_eq!(sc.message, msg);
                assert_eq!(sc.codeword, cw);
                for l in [1, 2, 8, 32] {
                    let paths = scl_decode(&s, &llr, l).unwrap();
                    assert_eq!(paths[0].message, msg);
                    assert_eq!(paths[0].codeword, cw);
                    assert!(paths[0].metric < 1e-12);
                }
            }
        }
    }

    #[test]
    fn crc_aided_noiseless() {
        let s = spec(64, 30);
        let crc = CrcSpec::CRC6_ITU;
        let payload: Vec<u8> = (0..24).map(|i| (i % 5 == 1) as u8).collect();
        let cw = polar_encode(&s, &crc.append(&payload)).unwrap();
        let out = scl_crc_decode(&s, &LlrVector::<f64>::noiseless(&cw, 30.0), 8, &crc).unwrap();
        assert!(out.crc_ok);
        assert_eq!(out.payload, payload);
        let tiny = spec(64, 6);
        assert!(scl_crc_decode(&tiny, &[1.0f64; 64], 8, &crc).is_err());
    }

    #[test]
    fn crc_selection_skips_failing_paths() {
        let crc = CrcSpec::CRC6_ITU;
        let good = crc.append(&[1, 0, 1, 1, 0, 0, 1, 0]);
        let mut bad = good.clone();
        bad[0] ^= 1;
        let mut bad2 = good.clone();
        bad2[5] ^= 1;
        let path = |m: &Vec<u8>, metric| SclPath { message: m.clone(), codeword: vec![], metric };
        let paths = vec![path(&bad, 0.1), path(&bad2, 0.2), path(&good, 0.3), path(&good, 0.4)];
        let out = select_by_crc(paths.clone(), &crc);
        assert!(out.crc_ok);
        assert_eq!(out.metric, 0.3);
        assert_eq!(out.payload, good[..8].to_vec());
        let out = select_by_crc(paths[..2].to_vec(), &crc);
        assert!(!out.crc_ok);
        assert_eq!(out.metric, 0.1);
    }

    #[test]
    fn sc_equals_list_of_one() {
        let s = spec(64, 30);
        let params = ChannelParams::new(1.5, 30.0 / 64.0, 21).unwrap();
        let mut sc = ScDecoder::<f64>::default();
        let mut scl = SclDecoder::<f64>::new(1).unwrap();
        let mut llr: Vec<f64> = Vec::new();
        for t in 0..1000 {
            params.transmit_into(&[0u8; 64], t, &mut llr);
            let a = sc.decode(&s, &llr).unwrap();
            let b = scl.decode(&s, &llr).unwrap();
            assert_eq!(b.len(), 1);
            assert_eq!(a.message, b[0].message);
            assert_eq!(a.codeword, b[0].codeword);
            assert!((a.metric - b[0].metric).abs() < 1e-9);
        }
    }

    #[test]
    fn list_covering_all_paths_is_ml() {
        let s = spec(8, 4);
        let words: Vec<(Vec<u8>, Vec<u8>)> = (0..16u8)
            .map(|v| {
                let m: Vec<u8> = (0..4).map(|i| (v >> i) & 1).collect();
                (polar_encode(&s, &m).unwrap(), m)
            })
            .collect();
        let params = ChannelParams::new(0.5, 0.5, 8).unwrap();
        let mut dec = SclDecoder::<f64>::new(16).unwrap();
        let mut llr: Vec<f64> = Vec::new();
        for t in 0..200u64 {
            params.transmit_into(&words[(t % 16) as usize].0, t, &mut llr);
            let score = |cw: &[u8]| -> f64 {
                cw.iter().zip(&llr).map(|(&c, &l)| if c == 0 { l } else { -l }).sum()
            };
            let ml = words
                .iter()
                .max_by(|a, b| score(&a.0).partial_cmp(&score(&b.0)).unwrap())
                .unwrap();
            let paths = dec.decode(&s, &llr).unwrap();
            assert_eq!(paths.len(), 16);
            assert_eq!(paths[0].message, ml.1, "trial {t}");
        }
    }

    #[test]
    fn metrics_sorted_and_list_bounded() {
        let s = spec(64, 22);
        let params = ChannelParams::new(2.0, 22.0 / 64.0, 4).unwrap();
        let mut dec = SclDecoder::<f64>::new(8).unwrap();
        let mut llr: Vec<f64> = Vec::new();
        for t in 0..50 {
            params.transmit_into(&[0u8; 64], t, &mut llr);
            let paths = dec.decode(&s, &llr).unwrap();
            assert_eq!(paths.len(), 8);
            assert!(paths.windows(2).all(|w| w[0].metric <= w[1].metric));
            for p in &paths {
                assert_eq!(polar_encode(&s, &p.message).unwrap(), p.codeword);
            }
        }
    }

    #[test]
    fn min_sum_and_f32_agree_on_clean_input() {
        let s = spec(32, 16);
        let msg: Vec<u8> = (0..16).map(|i| (i % 2) as u8).collect();
        let cw = polar_encode(&s, &msg).unwrap();
        let llr = LlrVector::<f32>::noiseless(&cw, 8.0);
        let mut dec = SclDecoder::<f32>::with_rules(4, CheckRule::MinSum, MetricRule::Approx).unwrap();
        assert_eq!(dec.decode(&s, &llr).unwrap()[0].message, msg);
        assert_eq!(ScDecoder::<f32>::new(CheckRule::MinSum).decode(&s, &llr).unwrap().message, msg);
    }

    #[test]
    fn length_errors() {
        let s = spec(8, 4);
        assert!(sc_decode(&s, &[1.0f64; 4]).is_err());
        assert!(scl_decode(&s, &[1.0f64; 4], 2).is_err());
        assert!(SclDecoder::<f64>::new(0).is_err());
    }
}
