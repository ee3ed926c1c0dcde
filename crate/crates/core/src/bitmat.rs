//! Dense bit-packed matrices over GF(2).
//!
//! Rows are stored as consecutive runs of `u64` words, bit `j % 64` of word
//! `j / 64` holding column `j`.

use std::fmt;

use crate::error::{Error, Result};

#[inline]
pub(crate) fn words_for(bits: usize) -> usize {
    bits.div_ceil(64)
}

/// Packs 0/1 bytes into words (nonzero counts as 1).
pub fn pack_bits(bits: &[u8]) -> Vec<u64> {
    let mut out = vec![0u64; words_for(bits.len())];
    for (j, &b) in bits.iter().enumerate() {
        if b != 0 {
            out[j / 64] |= 1 << (j % 64);
        }
    }
    out
}

pub fn unpack_bits(words: &[u64], len: usize) -> Vec<u8> {
    (0..len).map(|j| ((words[j / 64] >> (j % 64)) & 1) as u8).collect()
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitMatrix {
    rows: usize,
    cols: usize,
    stride: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        let stride = words_for(cols).max(1);
        Self {
            rows,
            cols,
            stride,
            data: vec![0; rows * stride],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, true);
        }
        m
    }

    /// Builds from rows of 0/1 bytes; all rows must share one length.
    pub fn from_rows<R: AsRef<[u8]>>(rows: &[R]) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        let mut m = Self::zeros(rows.len(), cols);
        for (i, r) in rows.iter().enumerate() {
            let r = r.as_ref();
            if r.len() != cols {
                return Err(Error::LengthMismatch { expected: cols, got: r.len() });
            }
            for (j, &b) in r.iter().enumerate() {
                if b != 0 {
                    m.set(i, j, true);
                }
            }
        }
        Ok(m)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Words per row.
    pub fn stride(&self) -> usize {
        self.stride
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        (self.data[r * self.stride + c / 64] >> (c % 64)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: bool) {
        let w = &mut self.data[r * self.stride + c / 64];
        if v {
            *w |= 1 << (c % 64);
        } else {
            *w &= !(1 << (c % 64));
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.stride..(r + 1) * self.stride]
    }

    #[inline]
    pub fn row_mut(&mut self, r: usize) -> &mut [u64] {
        &mut self.data[r * self.stride..(r + 1) * self.stride]
    }

    pub fn row_bits(&self, r: usize) -> Vec<u8> {
        unpack_bits(self.row(r), self.cols)
    }

    pub fn row_weight(&self, r: usize) -> usize {
        self.row(r).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for w in 0..self.stride {
            self.data.swap(a * self.stride + w, b * self.stride + w);
        }
    }

    /// `row[dst] ^= row[src]`.
    #[inline]
    pub fn xor_row(&mut self, dst: usize, src: usize) {
        debug_assert_ne!(dst, src);
        for w in 0..self.stride {
            let s = self.data[src * self.stride + w];
            self.data[dst * self.stride + w] ^= s;
        }
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for r in 0..self.rows {
            for c in 0..self.cols {
                if self.get(r, c) {
                    t.set(c, r, true);
                }
            }
        }
        t
    }

    /// Matrix product over GF(2).
    pub fn mul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::LengthMismatch { expected: self.cols, got: rhs.rows });
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            for k in 0..self.cols {
                if self.get(r, k) {
                    for w in 0..out.stride {
                        out.data[r * out.stride + w] ^= rhs.data[k * rhs.stride + w];
                    }
                }
            }
        }
        Ok(out)
    }

    /// Row vector times matrix: `v · M`.
    pub fn vec_mul(&self, v: &[u8]) -> Result<Vec<u8>> {
        if v.len() != self.rows {
            return Err(Error::LengthMismatch { expected: self.rows, got: v.len() });
        }
        let mut acc = vec![0u64; self.stride];
        for (r, &b) in v.iter().enumerate() {
            if b != 0 {
                for (a, &w) in acc.iter_mut().zip(self.row(r)) {
                    *a ^= w;
                }
            }
        }
        Ok(unpack_bits(&acc, self.cols))
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&w| w == 0)
    }

    pub fn select_rows(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(idx.len(), self.cols);
        for (i, &r) in idx.iter().enumerate() {
            out.row_mut(i).copy_from_slice(self.row(r));
        }
        out
    }

    pub fn select_cols(&self, idx: &[usize]) -> Self {
        let mut out = Self::zeros(self.rows, idx.len());
        for r in 0..self.rows {
            for (j, &c) in idx.iter().enumerate() {
                if self.get(r, c) {
                    out.set(r, j, true);
                }
            }
        }
        out
    }

    /// Reduced row-echelon form and the pivot column of each nonzero row.
    /// Zero rows are dropped, so the result has `rank` rows.
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut rank = 0;
        for c in 0..self.cols {
            if rank == m.rows {
                break;
            }
            let Some(p) = (rank..m.rows).find(|&r| m.get(r, c)) else {
                continue;
            };
            m.swap_rows(rank, p);
            for r in 0..m.rows {
                if r != rank && m.get(r, c) {
                    m.xor_row(r, rank);
                }
            }
            pivots.push(c);
            rank += 1;
        }
        (m.select_rows(&(0..rank).collect::<Vec<_>>()), pivots)
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis (as rows) of the right null space {x : M xᵀ = 0}.
    pub fn null_space(&self) -> Self {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = Self::zeros(free.len(), self.cols);
        for (i, &f) in free.iter().enumerate() {
            out.set(i, f, true);
            for (row, &p) in pivots.iter().enumerate() {
                if r.get(row, f) {
                    out.set(i, p, true);
                }
            }
        }
        out
    }

    /// Whether `v` lies in the row space.
    pub fn row_space_contains(&self, v: &[u8]) -> bool {
        let mut m = self.clone();
        m.rows += 1;
        m.data
            .extend(pack_bits(v).into_iter().chain(std::iter::repeat(0)).take(self.stride));
        m.rank() == self.rank()
    }

    /// Inverse of a square matrix, or a rank error when singular.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.rows;
        if self.cols != n {
            return Err(Error::LengthMismatch { expected: n, got: self.cols });
        }
        let mut aug = Self::zeros(n, 2 * n);
        for r in 0..n {
            for c in 0..n {
                if self.get(r, c) {
                    aug.set(r, c, true);
                }
            }
            aug.set(r, n + r, true);
        }
        let (red, pivots) = aug.rref();
        if pivots.len() < n || pivots[n - 1] >= n {
            let rank = pivots.iter().filter(|&&p| p < n).count();
            return Err(Error::RankDeficient { rank, expected: n });
        }
        Ok(red.select_cols(&(n..2 * n).collect::<Vec<_>>()))
    }

    /// Row spaces coincide (mutual containment via ranks).
    pub fn same_row_space(&self, other: &Self) -> bool {
        if self.cols != other.cols {
            return false;
        }
        let mut stacked = self.clone();
        stacked.rows += other.rows;
        stacked.data.extend_from_slice(&other.data);
        let r = stacked.rank();
        r == self.rank() && r == other.rank()
    }

    /// Plain-text 0/1 rows, one line per row.
    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            for c in 0..self.cols {
                s.push(if self.get(r, c) { '1' } else { '0' });
            }
            s.push('\n');
        }
        s
    }

    /// Dot diagram: '.' for a one, ' ' for a zero.
    pub fn to_dots(&self) -> String {
        let mut s = String::with_capacity(self.rows * (self.cols + 1));
        for r in 0..self.rows {
            let line: String = (0..self.cols)
                .map(|c| if self.get(r, c) { '.' } else { ' ' })
                .collect();
            s.push_str(line.trim_end());
            s.push('\n');
        }
        s
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let rows: Vec<Vec<u8>> = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .map(|l| {
                l.chars()
                    .map(|ch| match ch {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        _ => Err(Error::InvalidArgument(format!("bad matrix character {ch:?}"))),
                    })
                    .collect()
            })
            .collect::<Result<_>>()?;
        Self::from_rows(&rows)
    }
}

impl fmt::Debug for BitMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "BitMatrix {}x{}", self.rows, self.cols)?;
        write!(f, "{}", self.to_text())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn hamming74() -> BitMatrix {
        BitMatrix::from_rows(&[
            [1, 1, 0, 1, 0, 0, 0],
            [0, 1, 1, 0, 1, 0, 0],
            [0, 0, 1, 1, 0, 1, 0],
            [0, 0, 0, 1, 1, 0, 1],
        ])
        .unwrap()
    }

    #[test]
    fn identity_rref_is_identity() {
        let i = BitMatrix::identity(70);
        let (r, p) = i.rref();
        assert_eq!(r, i);
        assert_eq!(p, (0..70).collect::<Vec<_>>());
    }

    #[test]
    fn null_space_is_orthogonal() {
        let g = hamming74();
        let h = g.null_space();
        assert_eq!(h.rows(), 3);
        assert!(g.mul(&h.transpose()).unwrap().is_zero());
    }

    #[test]
    fn rank_detects_dependence() {
        let m = BitMatrix::from_rows(&[[1, 1, 0], [0, 1, 1], [1, 0, 1]]).unwrap();
        assert_eq!(m.rank(), 2);
        assert!(m.row_space_contains(&[1, 0, 1]));
        assert!(!m.row_space_contains(&[1, 0, 0]));
    }

    #[test]
    fn inverse_round_trip() {
        let m = BitMatrix::from_rows(&[[1, 1, 0], [0, 1, 1], [0, 0, 1]]).unwrap();
        let inv = m.inverse().unwrap();
        assert_eq!(m.mul(&inv).unwrap(), BitMatrix::identity(3));
        let singular = BitMatrix::from_rows(&[[1, 1, 0], [0, 1, 1], [1, 0, 1]]).unwrap();
        assert!(matches!(singular.inverse(), Err(Error::RankDeficient { rank: 2, .. })));
    }

    #[test]
    fn text_round_trip() {
        let g = hamming74();
        assert_eq!(BitMatrix::parse_text(&g.to_text()).unwrap(), g);
        assert!(BitMatrix::parse_text("01\n0x\n").is_err());
    }

    proptest! {
        #[test]
        fn rref_preserves_row_space(bits in proptest::collection::vec(0u8..2, 6 * 70)) {
            let rows: Vec<Vec<u8>> = bits.chunks(70).map(|c| c.to_vec()).collect();
            let m = BitMatrix::from_rows(&rows).unwrap();
            let (r, pivots) = m.rref();
            prop_assert!(m.same_row_space(&r));
            for (i, &p) in pivots.iter().enumerate() {
                for j in 0..r.rows() {
                    prop_assert_eq!(r.get(j, p), i == j);
                }
            }
            prop_assert!(m.mul(&m.null_space().transpose()).unwrap().is_zero());
            prop_assert_eq!(m.null_space().rows() + pivots.len(), 70);
        }
    }
}
