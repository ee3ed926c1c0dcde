//! BPSK over AWGN: modulation, reproducible noise, LLR demodulation.
//!
//! Every random draw comes from a ChaCha stream selected by
//! `(seed, stream_index)`, so the noise seen by frame `i` does not depend on
//! which worker simulates it or in what order.

use std::ops::Deref;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

const NOISE_DOMAIN: u64 = 0x6e6f_6973_655f_7631;
const SOURCE_DOMAIN: u64 = 0x736f_7572_6365_7631;

fn keyed_rng(seed: u64, domain: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ domain);
    rng.set_stream(stream);
    rng
}

/// Generator for frame `stream`'s channel noise.
pub fn noise_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    keyed_rng(seed, NOISE_DOMAIN, stream)
}

/// Generator for frame `stream`'s source bits, independent of the noise.
pub fn source_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    keyed_rng(seed, SOURCE_DOMAIN, stream)
}

pub fn random_bits(rng: &mut impl Rng, out: &mut [u8]) {
    let mut word = 0u64;
    for (i, b) in out.iter_mut().enumerate() {
        if i % 64 == 0 {
            word = rng.random();
        }
        *b = ((word >> (i % 64)) & 1) as u8;
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ChannelParams {
    ebn0_db: f64,
    rate: f64,
    sigma2: f64,
    seed: u64,
}

impl ChannelParams {
    /// Noise variance per real dimension is 1 / (2 R 10^(Eb/N0 / 10)).
    pub fn new(ebn0_db: f64, rate: f64, seed: u64) -> Result<Self> {
        if !(rate > 0.0 && rate <= 1.0) {
            return Err(Error::InvalidArgument(format!("rate {rate} outside (0, 1]")));
        }
        if !ebn0_db.is_finite() {
            return Err(Error::InvalidArgument(format!("Eb/N0 {ebn0_db} dB")));
        }
        let sigma2 = 1.0 / (2.0 * rate * 10f64.powf(ebn0_db / 10.0));
        Ok(Self { ebn0_db, rate, sigma2, seed })
    }

    pub fn ebn0_db(&self) -> f64 {
        self.ebn0_db
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `y = x + n`, n ~ N(0, sigma2) drawn from stream `stream_index`.
    pub fn add_noise<T: Scalar>(&self, symbols: &[T], stream_index: u64) -> Vec<T> {
        let mut rng = noise_rng(self.seed, stream_index);
        let sigma = self.sigma();
        symbols
            .iter()
            .map(|&x| {
                let z: f64 = rng.sample(StandardNormal);
                x + T::lit(sigma * z)
            })
            .collect()
    }

    /// Modulate, add noise and demodulate in one pass, writing LLRs into `out`.
    pub fn transmit_into<T: Scalar>(&self, codeword: &[u8], stream_index: u64, out: &mut Vec<T>) {
        let mut rng = noise_rng(self.seed, stream_index);
        let sigma = self.sigma();
        let scale = 2.0 / self.sigma2;
        out.clear();
        out.extend(codeword.iter().map(|&b| {
            let z: f64 = rng.sample(StandardNormal);
            let y = if b == 0 { 1.0 } else { -1.0 } + sigma * z;
            T::lit(scale * y)
        }));
    }
}

/// BPSK: bit 0 maps to +1, bit 1 to -1.
pub fn modulate<T: Scalar>(codeword: &[u8]) -> Vec<T> {
    codeword
        .iter()
        .map(|&b| if b == 0 { T::one() } else { -T::one() })
        .collect()
}

/// `L = 2 y / sigma2`, positive favoring bit 0.
pub fn llr<T: Scalar>(observations: &[T], params: &ChannelParams) -> LlrVector<T> {
    let scale = T::lit(2.0 / params.sigma2());
    LlrVector(observations.iter().map(|&y| scale * y).collect())
}

/// Log-likelihood ratios log p(y|0)/p(y|1), one per code position.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LlrVector<T>(Vec<T>);

impl<T: Scalar> LlrVector<T> {
    pub fn new(values: Vec<T>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite LLR at position {i}")));
        }
        Ok(Self(values))
    }

    pub fn from_f64(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| T::lit(v)).collect())
    }

    /// Noise-free LLRs for a codeword with the given magnitude.
    pub fn noiseless(codeword: &[u8], magnitude: f64) -> Self {
        let m = T::lit(magnitude);
        Self(codeword.iter().map(|&b| if b == 0 { m } else { -m }).collect())
    }

    pub fn hard_decisions(&self) -> Vec<u8> {
        self.0.iter().map(|&l| (l < T::zero()) as u8).collect()
    }

    pub fn into_inner(self) -> Vec<T> {
        self.0
    }

    pub fn scaled(&self, factor: T) -> Self {
        Self(self.0.iter().map(|&l| l * factor).collect())
    }
}

impl<T> Deref for LlrVector<T> {
    type Target = [T];
    fn deref(&self) -> &[T] {
        &self.0
    }
}

/// Complementary error function (Chebyshev fit, relative error below 1.2e-7).
pub fn erfc(x: f64) -> f64 {
    let z = x.abs();
    let t = 1.0 / (1.0 + 0.5 * z);
    let poly = -z * z - 1.265_512_23
        + t * (1.000_023_68
            + t * (0.374_091_96
                + t * (0.096_784_18
                    + t * (-0.186_288_06
                        + t * (0.278_868_07
                            + t * (-1.135_203_98
                                + t * (1.488_515_87 + t * (-0.822_152_23 + t * 0.170_872_77))))))));
    let r = t * poly.exp();
    if x >= 0.0 {
        r
    } else {
        2.0 - r
    }
}

/// Gaussian tail probability Q(x).
pub fn q_function(x: f64) -> f64 {
    0.5 * erfc(x / std::f64::consts::SQRT_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn modulation_examples() {
        assert_eq!(modulate::<f64>(&[0, 1, 0]), vec![1.0, -1.0, 1.0]);
        let x = modulate::<f32>(&[0; 5]);
        assert!(x.iter().all(|&v| v == 1.0));
        let e: f64 = modulate::<f64>(&[1, 0, 1, 1]).iter().map(|v| v * v).sum::<f64>() / 4.0;
        assert_eq!(e, 1.0);
    }

    #[test]
    fn sigma2_formula() {
        let p = ChannelParams::new(0.0, 0.5, 1).unwrap();
        assert!((p.sigma2() - 1.0).abs() < 1e-12);
        let q = ChannelParams::new(3.0, 22.0 / 64.0, 1).unwrap();
        let expect = 1.0 / (2.0 * (22.0 / 64.0) * 10f64.powf(0.3));
        assert!(((q.sigma2() - expect) / expect).abs() < 1e-12);
        assert!(ChannelParams::new(0.0, 0.0, 1).is_err());
        assert!(ChannelParams::new(0.0, 1.5, 1).is_err());
        assert!(ChannelParams::new(f64::NAN, 0.5, 1).is_err());
    }

    #[test]
    fn high_snr_limit_is_identity() {
        let p = ChannelParams::new(200.0, 1.0, 3).unwrap();
        let x = modulate::<f64>(&[0, 1, 1, 0]);
        let y = p.add_noise(&x, 0);
        for (a, b) in x.iter().zip(&y) {
            assert!((a - b).abs() < 1e-8);
        }
    }

    #[test]
    fn llr_examples() {
        let p = ChannelParams::new(0.0, 0.5, 1).unwrap();
        let l = llr(&[0.0f64, 1.0, -0.5], &p);
        assert_eq!(&l[..], &[0.0, 2.0, -1.0]);
        assert_eq!(l.hard_decisions(), vec![0, 0, 1]);
        let p2 = ChannelParams::new(10.0 * 2f64.log10(), 0.5, 1).unwrap();
        // sigma2 halves when Eb/N0 doubles.
        assert!((p2.sigma2() - 0.5).abs() < 1e-12);
        let l2 = llr(&[0.7f64], &p2);
        let l1 = llr(&[0.7f64], &p);
        assert!((l2[0] - 2.0 * l1[0]).abs() < 1e-12);
    }

    #[test]
    fn noise_is_reproducible_and_stream_dependent() {
        let p = ChannelParams::new(1.0, 0.5, 42).unwrap();
        let x = modulate::<f64>(&[0; 32]);
        assert_eq!(p.add_noise(&x, 7), p.add_noise(&x, 7));
        assert_ne!(p.add_noise(&x, 7), p.add_noise(&x, 8));
        let mut buf = Vec::new();
        p.transmit_into::<f64>(&[0; 32], 7, &mut buf);
        let via_parts = llr(&p.add_noise(&x, 7), &p);
        for (a, b) in buf.iter().zip(via_parts.iter()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn noise_variance() {
        let p = ChannelParams::new(0.0, 0.5, 99).unwrap();
        let x = vec![0.0f64; 1000];
        let mut sum = 0.0;
        let mut sq = 0.0;
        let mut count = 0.0;
        for s in 0..1000 {
            for v in p.add_noise(&x, s) {
                sum += v;
                sq += v * v;
                count += 1.0;
            }
        }
        let mean = sum / count;
        let var = sq / count - mean * mean;
        assert!((0.995..=1.005).contains(&var), "variance {var}");
    }

    #[test]
    fn q_function_values() {
        assert!((q_function(0.0) - 0.5).abs() < 1e-7);
        assert!((q_function(2f64.sqrt()) - 0.078_649_6).abs() < 1e-6);
        assert!((q_function(3.090_232) - 1e-3).abs() < 1e-8);
        assert!((erfc(-1.0) - 1.842_700_79).abs() < 1e-6);
    }

    #[test]
    fn rejects_non_finite_llr() {
        assert!(LlrVector::<f64>::new(vec![1.0, f64::INFINITY]).is_err());
        assert!(LlrVector::<f64>::from_f64(&[1.0, -2.0]).is_ok());
    }
}
