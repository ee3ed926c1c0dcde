//! Bitwise MSB-first CRCs over bit vectors (zero init, no reflection, no
//! output XOR), which keeps them linear over GF(2).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct CrcSpec {
    name: &'static str,
    width: u32,
    /// Generator without its leading x^width term.
    poly: u32,
    init: u32,
    xor_out: u32,
}

impl CrcSpec {
    /// CRC-6-ITU, x^6 + x + 1.
    pub const CRC6_ITU: CrcSpec = CrcSpec { name: "crc6-itu", width: 6, poly: 0x03, init: 0, xor_out: 0 };
    /// CRC-16-CCITT, x^16 + x^12 + x^5 + 1.
    pub const CRC16_CCITT: CrcSpec =
        CrcSpec { name: "crc16-ccitt", width: 16, poly: 0x1021, init: 0, xor_out: 0 };

    /// A custom zero-init CRC; `poly` excludes the x^width term.
    pub fn custom(width: u32, poly: u32) -> Result<Self> {
        if !(1..=32).contains(&width) || (width < 32 && poly >> width != 0) || poly & 1 == 0 {
            return Err(Error::InvalidArgument(format!(
                "CRC width {width} with polynomial 0x{poly:x}"
            )));
        }
        Ok(Self { name: "custom", width, poly, init: 0, xor_out: 0 })
    }

    pub fn name(&self) -> &'static str {
        self.name
    }

    pub fn width(&self) -> usize {
        self.width as usize
    }

    pub fn poly(&self) -> u32 {
        self.poly
    }

    fn mask(&self) -> u32 {
        if self.width == 32 {
            u32::MAX
        } else {
            (1 << self.width) - 1
        }
    }

    /// Remainder of bits(x) · x^width modulo the generator.
    pub fn compute(&self, bits: &[u8]) -> u32 {
        let mask = self.mask();
        let top = self.width - 1;
        let mut reg = self.init;
        for &b in bits {
            let feedback = ((reg >> top) & 1) ^ (b as u32 & 1);
            reg = (reg << 1) & mask;
            if feedback == 1 {
                reg ^= self.poly;
            }
        }
        reg ^ self.xor_out
    }

    /// Remainder bits MSB first.
    pub fn remainder_bits(&self, bits: &[u8]) -> Vec<u8> {
        let r = self.compute(bits);
        (0..self.width).rev().map(|i| ((r >> i) & 1) as u8).collect()
    }

    /// `bits` followed by their CRC.
    pub fn append(&self, bits: &[u8]) -> Vec<u8> {
        let mut out = Vec::with_capacity(bits.len() + self.width());
        out.extend_from_slice(bits);
        out.extend(self.remainder_bits(bits));
        out
    }

    /// Whether the whole vector, read as a polynomial, is divisible by the generator.
    pub fn check(&self, bits_with_crc: &[u8]) -> Result<bool> {
        if bits_with_crc.len() <= self.width() {
            return Err(Error::LengthMismatch {
                expected: self.width() + 1,
                got: bits_with_crc.len(),
            });
        }
        Ok(self.check_unchecked(bits_with_crc))
    }

    /// [`check`](Self::check) without the length guard, for hot loops.
    pub fn check_unchecked(&self, bits_with_crc: &[u8]) -> bool {
        let mask = self.mask();
        let top = self.width - 1;
        let mut reg = 0u32;
        for &b in bits_with_crc {
            let out = (reg >> top) & 1;
            reg = ((reg << 1) | (b as u32 & 1)) & mask;
            if out == 1 {
                reg ^= self.poly;
            }
        }
        reg == 0
    }
}

pub fn crc_append(bits: &[u8], spec: &CrcSpec) -> Vec<u8> {
    spec.append(bits)
}

pub fn crc_check(bits_with_crc: &[u8], spec: &CrcSpec) -> Result<bool> {
    spec.check(bits_with_crc)
}

impl fmt::Display for CrcSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name)
    }
}

/// Parses `crc6-itu`, `crc16-ccitt` or `none`.
pub fn parse_crc(s: &str) -> Result<Option<CrcSpec>> {
    match s.to_ascii_lowercase().as_str() {
        "none" | "" => Ok(None),
        "crc6-itu" => Ok(Some(CrcSpec::CRC6_ITU)),
        "crc16-ccitt" => Ok(Some(CrcSpec::CRC16_CCITT)),
        other => Err(Error::InvalidArgument(format!("unknown CRC {other:?}"))),
    }
}

impl FromStr for CrcSpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        parse_crc(s)?.ok_or_else(|| Error::InvalidArgument("\"none\" is not a CRC".into()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::BinaryPolynomial;
    use proptest::prelude::*;

    fn ascii_bits(s: &str) -> Vec<u8> {
        s.bytes().flat_map(|b| (0..8).rev().map(move |i| (b >> i) & 1)).collect()
    }

    /// Long division with explicit polynomials; message bit 0 is the highest power.
    fn division_oracle(bits: &[u8], width: u32, poly: u32) -> u32 {
        let n = bits.len();
        let msg: Vec<u8> = (0..n + width as usize)
            .map(|deg| {
                if deg < width as usize {
                    0
                } else {
                    bits[n - 1 - (deg - width as usize)]
                }
            })
            .collect();
        let gen = BinaryPolynomial::from_mask(((1u128) << width) | poly as u128);
        BinaryPolynomial::from_coeffs(&msg).rem(&gen).to_mask().unwrap() as u32
    }

    #[test]
    fn check_value_123456789() {
        let bits = ascii_bits("123456789");
        assert_eq!(bits.len(), 72);
        let oracle = division_oracle(&bits, 16, 0x1021);
        assert_eq!(oracle, 0x31C3);
        assert_eq!(CrcSpec::CRC16_CCITT.compute(&bits), oracle);
    }

    #[test]
    fn zero_message_zero_crc() {
        for spec in [CrcSpec::CRC6_ITU, CrcSpec::CRC16_CCITT] {
            let out = spec.append(&[0; 40]);
            assert!(out.iter().all(|&b| b == 0));
            assert_eq!(out.len(), 40 + spec.width());
        }
    }

    #[test]
    fn check_errors_and_parsing() {
        assert!(CrcSpec::CRC6_ITU.check(&[0; 6]).is_err());
        assert_eq!(parse_crc("none").unwrap(), None);
        assert_eq!(parse_crc("crc6-itu").unwrap(), Some(CrcSpec::CRC6_ITU));
        assert_eq!("crc16-ccitt".parse::<CrcSpec>().unwrap(), CrcSpec::CRC16_CCITT);
        assert!(parse_crc("crc5").is_err());
        assert!(CrcSpec::custom(6, 0x40).is_err());
        assert_eq!(CrcSpec::custom(6, 0x03).unwrap().compute(&[1, 0, 1]), CrcSpec::CRC6_ITU.compute(&[1, 0, 1]));
    }

    #[test]
    fn all_short_bursts_detected_crc6() {
        let spec = CrcSpec::CRC6_ITU;
        let frame = spec.append(&(0..58).map(|i| (i * 7 % 3 == 0) as u8).collect::<Vec<_>>());
        assert_eq!(frame.len(), 64);
        for len in 1..=6usize {
            for start in 0..=64 - len {
                // Bursts start and end with a flipped bit; interior bits arbitrary.
                let interior = len.saturating_sub(2);
                for mid in 0u32..(1 << interior) {
                    let mut e = frame.clone();
                    e[start] ^= 1;
                    if len > 1 {
                        e[start + len - 1] ^= 1;
                    }
                    for j in 0..interior {
                        e[start + 1 + j] ^= ((mid >> j) & 1) as u8;
                    }
                    assert!(!spec.check(&e).unwrap(), "burst len {len} at {start}");
                }
            }
        }
    }

    #[test]
    fn false_accept_rate_crc6() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        let spec = CrcSpec::CRC6_ITU;
        let trials = 100_000;
        let mut accepted = 0u32;
        let mut buf = [0u8; 64];
        for _ in 0..trials {
            for b in buf.iter_mut() {
                *b = rng.random::<bool>() as u8;
            }
            accepted += spec.check(&buf).unwrap() as u32;
        }
        let p = 1.0 / 64.0;
        let mean = trials as f64 * p;
        let sd = (trials as f64 * p * (1.0 - p)).sqrt();
        assert!((accepted as f64 - mean).abs() < 4.0 * sd, "accepted {accepted}");
    }

    proptest! {
        #[test]
        fn round_trip_and_single_flip(bits in proptest::collection::vec(0u8..2, 1..100), flip in 0usize..200) {
            for spec in [CrcSpec::CRC6_ITU, CrcSpec::CRC16_CCITT] {
                let mut framed = crc_append(&bits, &spec);
                prop_assert!(crc_check(&framed, &spec).unwrap());
                let i = flip % framed.len();
                framed[i] ^= 1;
                prop_assert!(!crc_check(&framed, &spec).unwrap());
            }
        }

        #[test]
        fn linear(a in proptest::collection::vec(0u8..2, 64), b in proptest::collection::vec(0u8..2, 64)) {
            let x: Vec<u8> = a.iter().zip(&b).map(|(p, q)| p ^ q).collect();
            for spec in [CrcSpec::CRC6_ITU, CrcSpec::CRC16_CCITT] {
                prop_assert_eq!(spec.compute(&x), spec.compute(&a) ^ spec.compute(&b));
                prop_assert_eq!(spec.compute(&a), division_oracle(&a, spec.width() as u32, spec.poly()));
            }
        }
    }
}
