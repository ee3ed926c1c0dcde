//! Ordered-statistics decoding of binary linear block codes.
//!
//! Positions are sorted by |LLR|; Gaussian elimination on the generator,
//! visiting columns in that order, picks the K most reliable independent
//! positions (the most reliable basis). Hard decisions on the basis are
//! re-encoded, and every flip pattern of weight ≤ ℓ on the basis bits
//! produces one candidate. The candidate with the smallest correlation
//! discrepancy (sum of |LLR| where it disagrees with the hard decisions)
//! wins.

use crate::bitmat::{words_for, BitMatrix};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Number of flip patterns of weight ≤ `order` over `k` bits.
pub fn candidate_count(k: usize, order: usize) -> u64 {
    let mut total = 0u64;
    let mut c = 1u64;
    for i in 0..=order.min(k) {
        total += c;
        c = c * (k - i) as u64 / (i + 1) as u64;
    }
    total
}

/// Most-reliable-basis view of one received word.
#[derive(Clone, Debug)]
pub struct MrbContext<T> {
    /// `permutation[p]` is the original position placed at sorted slot `p`;
    /// the first K slots are the basis.
    pub permutation: Vec<usize>,
    /// Hard decisions in permuted order.
    pub hard: Vec<u8>,
    /// |LLR| in permuted order.
    pub reliab: Vec<T>,
    /// Row `i` has a one at `permutation[i]` and zeros at the other basis
    /// positions. Original column order.
    generator: BitMatrix,
    /// K×K change of basis with `generator = transform · G`.
    transform: BitMatrix,
}

impl<T: Scalar> MrbContext<T> {
    pub fn k(&self) -> usize {
        self.generator.rows()
    }

    pub fn basis(&self) -> &[usize] {
        &self.permutation[..self.k()]
    }

    /// Systematic generator in original column order.
    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    pub fn transform(&self) -> &BitMatrix {
        &self.transform
    }

    /// Systematic generator over the permuted columns: identity on the first K.
    pub fn permuted_generator(&self) -> BitMatrix {
        self.generator.select_cols(&self.permutation)
    }
}

/// Sorts by descending |LLR| and reduces `generator` onto the most reliable basis.
pub fn build_mrb<T: Scalar>(generator: &BitMatrix, llr: &[T]) -> Result<MrbContext<T>> {
    let mut dec = OsdDecoder::<T>::new();
    dec.reduce(generator, llr)?;
    Ok(dec.context())
}

#[derive(Clone, Debug, PartialEq)]
pub struct OsdOutput<T> {
    pub codeword: Vec<u8>,
    /// Message with `message · G = codeword` for the generator passed in.
    pub message: Vec<u8>,
    pub candidates_tested: u64,
    pub discrepancy: T,
}

/// Ordered-statistics decoder with reusable scratch space.
#[derive(Clone, Debug, Default)]
pub struct OsdDecoder<T> {
    n: usize,
    k: usize,
    /// Words of codeword part per row.
    cw_words: usize,
    /// Words per augmented row: codeword part then the K-bit transform part.
    stride: usize,
    rows: Vec<u64>,
    order: Vec<usize>,
    permutation: Vec<usize>,
    abs: Vec<T>,
    hard: Vec<u64>,
    tables: Vec<[T; 256]>,
}

impl<T: Scalar> OsdDecoder<T> {
    pub fn new() -> Self {
        Self {
            n: 0,
            k: 0,
            cw_words: 0,
            stride: 0,
            rows: Vec::new(),
            order: Vec::new(),
            permutation: Vec::new(),
            abs: Vec::new(),
            hard: Vec::new(),
            tables: Vec::new(),
        }
    }

    fn reduce(&mut self, generator: &BitMatrix, llr: &[T]) -> Result<()> {
        let (k, n) = (generator.rows(), generator.cols());
        if llr.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: llr.len() });
        }
        self.n = n;
        self.k = k;
        self.cw_words = words_for(n);
        let t_words = words_for(k).max(1);
        self.stride = self.cw_words + t_words;
        let stride = self.stride;

        self.rows.clear();
        self.rows.resize(k * stride, 0);
        for r in 0..k {
            self.rows[r * stride..r * stride + self.cw_words].copy_from_slice(generator.row(r));
            self.rows[r * stride + self.cw_words + r / 64] |= 1 << (r % 64);
        }

        self.abs.clear();
        self.abs.extend(llr.iter().map(|l| l.abs()));
        self.hard.clear();
        self.hard.resize(self.cw_words, 0);
        for (j, l) in llr.iter().enumerate() {
            if *l < T::zero() {
                self.hard[j / 64] |= 1 << (j % 64);
            }
        }

        self.order.clear();
        self.order.extend(0..n);
        let abs = &self.abs;
        self.order.sort_by(|&a, &b| {
            abs[b].partial_cmp(&abs[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
        });

        self.permutation.clear();
        let mut deferred = Vec::with_capacity(n.saturating_sub(k));
        let mut rank = 0;
        for idx in 0..n {
            let c = self.order[idx];
            let (w, bit) = (c / 64, 1u64 << (c % 64));
            let pivot = if rank < k {
                (rank..k).find(|&r| self.rows[r * stride + w] & bit != 0)
            } else {
                None
            };
            let Some(p) = pivot else {
                deferred.push(c);
                continue;
            };
            if p != rank {
                for x in 0..stride {
                    self.rows.swap(p * stride + x, rank * stride + x);
                }
            }
            for r in 0..k {
                if r != rank && self.rows[r * stride + w] & bit != 0 {
                    for x in 0..stride {
                        let v = self.rows[rank * stride + x];
                        self.rows[r * stride + x] ^= v;
                    }
                }
            }
            self.permutation.push(c);
            rank += 1;
        }
        if rank < k {
            return Err(Error::RankDeficient { rank, expected: k });
        }
        self.permutation.extend(deferred);
        Ok(())
    }

    fn context(&self) -> MrbContext<T> {
        let (n, k) = (self.n, self.k);
        let mut generator = BitMatrix::zeros(k, n);
        let mut transform = BitMatrix::zeros(k, k);
        for r in 0..k {
            let row = &self.rows[r * self.stride..(r + 1) * self.stride];
            generator.row_mut(r).copy_from_slice(&row[..self.cw_words]);
            let tw = transform.stride();
            transform.row_mut(r).copy_from_slice(&row[self.cw_words..self.cw_words + tw]);
        }
        MrbContext {
            hard: self
                .permutation
                .iter()
                .map(|&j| ((self.hard[j / 64] >> (j % 64)) & 1) as u8)
                .collect(),
            reliab: self.permutation.iter().map(|&j| self.abs[j]).collect(),
            permutation: self.permutation.clone(),
            generator,
            transform,
        }
    }

    fn build_tables(&mut self) {
        let bytes = self.n.div_ceil(8);
        self.tables.clear();
        self.tables.resize(bytes, [T::zero(); 256]);
        for (b, table) in self.tables.iter_mut().enumerate() {
            for v in 1usize..256 {
                let low = v.trailing_zeros() as usize;
                let pos = 8 * b + low;
                let r = if pos < self.n { self.abs[pos] } else { T::zero() };
                table[v] = table[v & (v - 1)] + r;
            }
        }
    }

    #[inline]
    fn discrepancy(&self, cand: &[u64], use_tables: bool) -> T {
        let mut sum = T::zero();
        for (w, (&c, &h)) in cand.iter().zip(&self.hard).enumerate() {
            let mut d = c ^ h;
            if use_tables {
                let mut b = 0;
                while d != 0 {
                    sum = sum + self.tables[8 * w + b][(d & 0xff) as usize];
                    d >>= 8;
                    b += 1;
                }
            } else {
                while d != 0 {
                    let j = d.trailing_zeros() as usize;
                    sum = sum + self.abs[64 * w + j];
                    d &= d - 1;
                }
            }
        }
        sum
    }

    /// Order-`order` OSD of `llr` against `generator`.
    pub fn decode(&mut self, generator: &BitMatrix, llr: &[T], order: usize) -> Result<OsdOutput<T>> {
        self.reduce(generator, llr)?;
        let (k, stride, cw_words) = (self.k, self.stride, self.cw_words);
        let candidates = candidate_count(k, order);
        let use_tables = candidates > 4 * self.n as u64;
        if use_tables {
            self.build_tables();
        }

        // Order-0 candidate: re-encode the hard decisions on the basis.
        let mut base = vec![0u64; stride];
        for i in 0..k {
            let p = self.permutation[i];
            if (self.hard[p / 64] >> (p % 64)) & 1 == 1 {
                for x in 0..stride {
                    base[x] ^= self.rows[i * stride + x];
                }
            }
        }
        let mut best = base.clone();
        let mut best_score = self.discrepancy(&base[..cw_words], use_tables);

        let mut stack: Vec<Vec<u64>> = (0..=order.min(k)).map(|_| vec![0u64; stride]).collect();
        stack[0].copy_from_slice(&base);
        for weight in 1..=order.min(k) {
            self.search(weight, 0, 0, &mut stack, &mut best, &mut best_score, use_tables);
        }

        let codeword: Vec<u8> = (0..self.n).map(|j| ((best[j / 64] >> (j % 64)) & 1) as u8).collect();
        let message: Vec<u8> = (0..k)
            .map(|i| ((best[cw_words + i / 64] >> (i % 64)) & 1) as u8)
            .collect();
        Ok(OsdOutput { codeword, message, candidates_tested: candidates, discrepancy: best_score })
    }

    /// Lexicographic enumeration of `remaining` further flips at basis
    /// indices ≥ `start`; `depth` flips are already accumulated in `stack[depth]`.
    #[allow(clippy::too_many_arguments)]
    fn search(
        &self,
        remaining: usize,
        start: usize,
        depth: usize,
        stack: &mut [Vec<u64>],
        best: &mut [u64],
        best_score: &mut T,
        use_tables: bool,
    ) {
        let stride = self.stride;
        for i in start..=self.k - remaining {
            let (lo, hi) = stack.split_at_mut(depth + 1);
            let next = &mut hi[0];
            for x in 0..stride {
                next[x] = lo[depth][x] ^ self.rows[i * stride + x];
            }
            if remaining == 1 {
                let score = self.discrepancy(&next[..self.cw_words], use_tables);
                if score < *best_score {
                    *best_score = score;
                    best.copy_from_slice(next);
                }
            } else {
                self.search(remaining - 1, i + 1, depth + 1, stack, best, best_score, use_tables);
            }
        }
    }
}

/// One-shot convenience wrapper around [`OsdDecoder::decode`].
pub fn osd_decode<T: Scalar>(generator: &BitMatrix, llr: &[T], order: usize) -> Result<OsdOutput<T>> {
    OsdDecoder::new().decode(generator, llr, order)
}
