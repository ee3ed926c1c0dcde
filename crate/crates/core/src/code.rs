//! The linear block code container shared by every construction and decoder.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::bitmat::{pack_bits, BitMatrix};
use crate::error::{Error, Result};
use crate::polar::PolarSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CodeFamily {
    Ebch,
    Bch,
    Polar,
    Rm,
    /// Identity code, used as the uncoded reference.
    Uncoded,
    /// Anything built directly from a generator matrix.
    Linear,
}

impl CodeFamily {
    pub fn as_str(self) -> &'static str {
        match self {
            CodeFamily::Ebch => "ebch",
            CodeFamily::Bch => "bch",
            CodeFamily::Polar => "polar",
            CodeFamily::Rm => "rm",
            CodeFamily::Uncoded => "uncoded",
            CodeFamily::Linear => "linear",
        }
    }
}

impl fmt::Display for CodeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for CodeFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ebch" => Ok(CodeFamily::Ebch),
            "bch" => Ok(CodeFamily::Bch),
            "polar" => Ok(CodeFamily::Polar),
            "rm" => Ok(CodeFamily::Rm),
            "uncoded" => Ok(CodeFamily::Uncoded),
            "linear" => Ok(CodeFamily::Linear),
            other => Err(Error::InvalidArgument(format!("unknown code family {other:?}"))),
        }
    }
}

/// How the code was obtained.
#[derive(Clone, Debug, PartialEq)]
pub enum ConstructionMeta {
    Bch { m: u32, t: usize, extended: bool },
    Polar(PolarSpec),
    Rm { r: u32, m: u32 },
    None,
}

/// Maps a codeword back to the message that [`CodeInstance::encode`] would
/// have used: `message = codeword[positions] · inverse`.
#[derive(Clone, Debug, PartialEq)]
struct MessageMap {
    positions: Vec<usize>,
    inverse: Option<BitMatrix>,
}

/// A binary linear (N, K) block code.
#[derive(Clone, Debug, PartialEq)]
pub struct CodeInstance {
    family: CodeFamily,
    n: usize,
    k: usize,
    generator: BitMatrix,
    parity_check: BitMatrix,
    designed_distance: Option<usize>,
    meta: ConstructionMeta,
    message_map: MessageMap,
}

impl CodeInstance {
    /// Wraps a full-rank generator matrix; the parity-check matrix is its null space.
    pub fn new(
        family: CodeFamily,
        generator: BitMatrix,
        designed_distance: Option<usize>,
        meta: ConstructionMeta,
    ) -> Result<Self> {
        let k = generator.rows();
        let n = generator.cols();
        let (_, pivots) = generator.rref();
        if pivots.len() != k {
            return Err(Error::RankDeficient { rank: pivots.len(), expected: k });
        }
        let sub = generator.select_cols(&pivots);
        let inverse = if sub == BitMatrix::identity(k) { None } else { Some(sub.inverse()?) };
        let parity_check = generator.null_space();
        Ok(Self {
            family,
            n,
            k,
            generator,
            parity_check,
            designed_distance,
            meta,
            message_map: MessageMap { positions: pivots, inverse },
        })
    }

    /// The rate-1 identity code of length `n`.
    pub fn uncoded(n: usize) -> Self {
        Self::new(CodeFamily::Uncoded, BitMatrix::identity(n), Some(1), ConstructionMeta::None)
            .expect("identity has full rank")
    }

    pub fn family(&self) -> CodeFamily {
        self.family
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn rate(&self) -> f64 {
        self.k as f64 / self.n as f64
    }

    pub fn generator(&self) -> &BitMatrix {
        &self.generator
    }

    pub fn parity_check(&self) -> &BitMatrix {
        &self.parity_check
    }

    pub fn designed_distance(&self) -> Option<usize> {
        self.designed_distance
    }

    pub fn meta(&self) -> &ConstructionMeta {
        &self.meta
    }

    pub fn polar_spec(&self) -> Option<&PolarSpec> {
        match &self.meta {
            ConstructionMeta::Polar(spec) => Some(spec),
            _ => None,
        }
    }

    /// Positions whose values determine the message (the pivot columns of G).
    pub fn info_positions(&self) -> &[usize] {
        &self.message_map.positions
    }

    /// `family:n:k`, the selector syntax used on the command line.
    pub fn label(&self) -> String {
        format!("{}:{}:{}", self.family, self.n, self.k)
    }

    /// `message · G`.
    pub fn encode(&self, message: &[u8]) -> Result<Vec<u8>> {
        if message.len() != self.k {
            return Err(Error::LengthMismatch { expected: self.k, got: message.len() });
        }
        self.generator.vec_mul(message)
    }

    /// The message whose encoding is `codeword`. Only meaningful for codewords.
    pub fn extract_message(&self, codeword: &[u8]) -> Vec<u8> {
        let picked: Vec<u8> = self.message_map.positions.iter().map(|&p| codeword[p]).collect();
        match &self.message_map.inverse {
            None => picked,
            Some(inv) => inv.vec_mul(&picked).expect("square inverse"),
        }
    }

    pub fn is_codeword(&self, word: &[u8]) -> bool {
        if word.len() != self.n {
            return false;
        }
        let w = pack_bits(word);
        (0..self.parity_check.rows()).all(|r| {
            self.parity_check
                .row(r)
                .iter()
                .zip(&w)
                .map(|(a, b)| (a & b).count_ones())
                .sum::<u32>()
                % 2
                == 0
        })
    }

    /// Same code with its generator in reduced row-echelon form.
    pub fn systematic(&self) -> Result<Self> {
        let (rref, pivots) = self.generator.rref();
        if pivots.len() != self.k {
            return Err(Error::RankDeficient { rank: pivots.len(), expected: self.k });
        }
        Self::new(self.family, rref, self.designed_distance, self.meta.clone())
    }

    /// Appends an overall even-parity column to every generator row.
    pub fn extend(&self) -> Result<Self> {
        let mut g = BitMatrix::zeros(self.k, self.n + 1);
        for r in 0..self.k {
            let bits = self.generator.row_bits(r);
            let parity = bits.iter().fold(0u8, |a, b| a ^ b);
            for (c, &b) in bits.iter().enumerate() {
                g.set(r, c, b == 1);
            }
            g.set(r, self.n, parity == 1);
        }
        let family = match self.family {
            CodeFamily::Bch => CodeFamily::Ebch,
            f => f,
        };
        let meta = match &self.meta {
            ConstructionMeta::Bch { m, t, .. } => ConstructionMeta::Bch { m: *m, t: *t, extended: true },
            other => other.clone(),
        };
        let designed = self.designed_distance.map(|d| if d % 2 == 1 { d + 1 } else { d });
        Self::new(family, g, designed, meta)
    }

    /// Exhaustive weight distribution; only for small K.
    pub fn weight_distribution(&self) -> Result<Vec<u64>> {
        if self.k > 24 {
            return Err(Error::InvalidArgument(format!(
                "weight enumeration over 2^{} messages is too large",
                self.k
            )));
        }
        let mut dist = vec![0u64; self.n + 1];
        let stride = self.generator.stride();
        let mut acc = vec![0u64; stride];
        // Gray-code walk: one row XOR per message.
        let mut prev_gray = 0u64;
        dist[0] += 1;
        for i in 1u64..(1 << self.k) {
            let gray = i ^ (i >> 1);
            let row = (gray ^ prev_gray).trailing_zeros() as usize;
            prev_gray = gray;
            for (a, &w) in acc.iter_mut().zip(self.generator.row(row)) {
                *a ^= w;
            }
            let wt: u32 = acc.iter().map(|w| w.count_ones()).sum();
            dist[wt as usize] += 1;
        }
        Ok(dist)
    }

    /// Smallest nonzero weight by exhaustive enumeration (small K only).
    pub fn minimum_distance(&self) -> Result<usize> {
        let dist = self.weight_distribution()?;
        Ok(dist.iter().skip(1).position(|&c| c > 0).map_or(0, |p| p + 1))
    }
}
