//! Two's-complement fixed-point arithmetic with round-to-nearest-even.
//!
//! Every probability-amplitude component and every angle in the emulator is a
//! fixed-point word in a configurable format. The default is Q2.18: 2 integer
//! bits, 18 fractional bits, range [-2, 2). Overflow saturates to the nearest
//! bound and raises a flag; amplitude math stays inside [-1, 1] in a correct
//! circuit, so a set flag is a corruption signal rather than an error.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FxError {
    #[error("invalid fixed-point format Q{int_bits}.{frac_bits}: total width must be 1..=32 with at least one integer bit")]
    InvalidFormat { int_bits: u32, frac_bits: u32 },
    #[error("format mismatch: {0} vs {1}")]
    FormatMismatch(FxFormat, FxFormat),
    #[error("raw value {raw} does not fit format {fmt}")]
    RawOutOfRange { raw: i64, fmt: FxFormat },
}

/// A fixed-point format: `int_bits` integer bits (sign included) and
/// `frac_bits` fractional bits, total at most 32.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct FxFormat {
    int_bits: u32,
    frac_bits: u32,
}

impl FxFormat {
    /// The default 20-bit format: range [-2, 2), step 2^-18.
    pub const Q2_18: FxFormat = FxFormat {
        int_bits: 2,
        frac_bits: 18,
    };

    pub fn new(int_bits: u32, frac_bits: u32) -> Result<Self, FxError> {
        let total = int_bits + frac_bits;
        if int_bits < 1 || total > 32 {
            return Err(FxError::InvalidFormat {
                int_bits,
                frac_bits,
            });
        }
        Ok(FxFormat {
            int_bits,
            frac_bits,
        })
    }

    pub fn int_bits(&self) -> u32 {
        self.int_bits
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn total_bits(&self) -> u32 {
        self.int_bits + self.frac_bits
    }

    /// Largest representable raw word: 2^(total-1) - 1.
    pub fn max_raw(&self) -> i32 {
        ((1i64 << (self.total_bits() - 1)) - 1) as i32
    }

    /// Smallest representable raw word: -2^(total-1).
    pub fn min_raw(&self) -> i32 {
        (-(1i64 << (self.total_bits() - 1))) as i32
    }

    /// Value of one least-significant bit.
    pub fn lsb(&self) -> f64 {
        (-(self.frac_bits as f64)).exp2()
    }

    pub fn max_value(&self) -> f64 {
        self.max_raw() as f64 * self.lsb()
    }

    pub fn min_value(&self) -> f64 {
        self.min_raw() as f64 * self.lsb()
    }

    pub fn contains_raw(&self, raw: i64) -> bool {
        raw >= self.min_raw() as i64 && raw <= self.max_raw() as i64
    }
}

impl std::fmt::Display for FxFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Q{}.{}", self.int_bits, self.frac_bits)
    }
}

/// A fixed-point value: a raw two's-complement word plus its format.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Fx {
    raw: i32,
    fmt: FxFormat,
}

/// Result of a saturating operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FxResult {
    pub value: Fx,
    pub saturated: bool,
}

impl Fx {
    pub fn from_raw(raw: i32, fmt: FxFormat) -> Result<Fx, FxError> {
        if !fmt.contains_raw(raw as i64) {
            return Err(FxError::RawOutOfRange {
                raw: raw as i64,
                fmt,
            });
        }
        Ok(Fx { raw, fmt })
    }

    pub fn zero(fmt: FxFormat) -> Fx {
        Fx { raw: 0, fmt }
    }

    pub fn one(fmt: FxFormat) -> Fx {
        // 1.0 is representable whenever int_bits >= 2.
        Fx {
            raw: 1 << fmt.frac_bits,
            fmt,
        }
    }

    /// Quantize a real number: nearest representable value, ties to even raw
    /// LSB, saturating outside the format's range.
    pub fn encode(x: f64, fmt: FxFormat) -> FxResult {
        // Scaling by a power of two is exact in f64, so round_ties_even here
        // is RNE on the input itself.
        let scaled = (x * (fmt.frac_bits as f64).exp2()).round_ties_even();
        let (raw, saturated) = saturate(scaled as i64, fmt);
        FxResult {
            value: Fx { raw, fmt },
            saturated,
        }
    }

    pub fn decode(self) -> f64 {
        self.raw as f64 * self.fmt.lsb()
    }

    pub fn raw(self) -> i32 {
        self.raw
    }

    pub fn format(self) -> FxFormat {
        self.fmt
    }

    fn check_format(self, rhs: Fx) -> Result<(), FxError> {
        if self.fmt != rhs.fmt {
            return Err(FxError::FormatMismatch(self.fmt, rhs.fmt));
        }
        Ok(())
    }

    /// Full-width product, one RNE rounding back to `frac_bits`, then
    /// saturation.
    pub fn mul_rne(self, rhs: Fx) -> Result<FxResult, FxError> {
        self.check_format(rhs)?;
        let product = rne_shift(self.raw as i64 * rhs.raw as i64, self.fmt.frac_bits);
        let (raw, saturated) = saturate(product, self.fmt);
        Ok(FxResult {
            value: Fx { raw, fmt: self.fmt },
            saturated,
        })
    }

    pub fn add(self, rhs: Fx) -> Result<FxResult, FxError> {
        self.check_format(rhs)?;
        let (raw, saturated) = saturate(self.raw as i64 + rhs.raw as i64, self.fmt);
        Ok(FxResult {
            value: Fx { raw, fmt: self.fmt },
            saturated,
        })
    }

    pub fn sub(self, rhs: Fx) -> Result<FxResult, FxError> {
        self.check_format(rhs)?;
        let (raw, saturated) = saturate(self.raw as i64 - rhs.raw as i64, self.fmt);
        Ok(FxResult {
            value: Fx { raw, fmt: self.fmt },
            saturated,
        })
    }

    pub fn neg(self) -> FxResult {
        let (raw, saturated) = saturate(-(self.raw as i64), self.fmt);
        FxResult {
            value: Fx { raw, fmt: self.fmt },
            saturated,
        }
    }
}

/// Clamp a wide intermediate to the format's raw range.
pub(crate) fn saturate(v: i64, fmt: FxFormat) -> (i32, bool) {
    if v > fmt.max_raw() as i64 {
        (fmt.max_raw(), true)
    } else if v < fmt.min_raw() as i64 {
        (fmt.min_raw(), true)
    } else {
        (v as i32, false)
    }
}

/// Arithmetic right shift with round-to-nearest, ties to even.
pub(crate) fn rne_shift(v: i64, shift: u32) -> i64 {
    if shift == 0 {
        return v;
    }
    let floor = v >> shift;
    let rem = v - (floor << shift);
    let half = 1i64 << (shift - 1);
    if rem > half {
        floor + 1
    } else if rem < half {
        floor
    } else {
        // Exact tie: pick the even neighbour.
        floor + (floor & 1)
    }
}

/// Raw-word arithmetic bound to one format, used by the emulator datapath on
/// bare state-vector words. Saturation is accumulated in a counter instead of
/// per-value flags.
#[derive(Debug, Clone, Copy)]
pub struct FxOps {
    fmt: FxFormat,
}

impl FxOps {
    pub fn new(fmt: FxFormat) -> FxOps {
        FxOps { fmt }
    }

    pub fn format(&self) -> FxFormat {
        self.fmt
    }

    #[inline]
    pub fn mul_rne(&self, a: i32, b: i32, sat: &mut u64) -> i32 {
        let (raw, s) = saturate(rne_shift(a as i64 * b as i64, self.fmt.frac_bits), self.fmt);
        *sat += s as u64;
        raw
    }

    #[inline]
    pub fn add(&self, a: i32, b: i32, sat: &mut u64) -> i32 {
        let (raw, s) = saturate(a as i64 + b as i64, self.fmt);
        *sat += s as u64;
        raw
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const Q: FxFormat = FxFormat::Q2_18;

    fn fx(raw: i32) -> Fx {
        Fx::from_raw(raw, Q).unwrap()
    }

    #[test]
    fn encode_half_is_exact() {
        let r = Fx::encode(0.5, Q);
        assert_eq!(r.value.raw(), 0x20000);
        assert!(!r.saturated);
    }

    #[test]
    fn encode_one_is_exact() {
        let r = Fx::encode(1.0, Q);
        assert_eq!(r.value.raw(), 262144);
        assert!(!r.saturated);
    }

    #[test]
    fn encode_two_saturates() {
        let r = Fx::encode(2.0, Q);
        assert_eq!(r.value.raw(), 524287);
        assert!(r.saturated);
    }

    #[test]
    fn encode_below_min_saturates() {
        let r = Fx::encode(-3.0, Q);
        assert_eq!(r.value.raw(), -524288);
        assert!(r.saturated);
    }

    #[test]
    fn mul_exact_quarter() {
        let half = Fx::encode(0.5, Q).value;
        let r = half.mul_rne(half).unwrap();
        assert_eq!(r.value.raw(), 65536);
        assert!(!r.saturated);
    }

    #[test]
    fn mul_tie_rounds_to_even() {
        let half = Fx::encode(0.5, Q).value;
        // 1 LSB * 0.5 = half an LSB: tie, even neighbour is 0.
        assert_eq!(fx(1).mul_rne(half).unwrap().value.raw(), 0);
        // 3 LSB * 0.5 = 1.5 LSB: tie, even neighbour is 2.
        assert_eq!(fx(3).mul_rne(half).unwrap().value.raw(), 2);
    }

    #[test]
    fn add_basic_and_saturating() {
        let a = Fx::encode(0.5, Q).value;
        let b = Fx::encode(0.25, Q).value;
        let r = a.add(b).unwrap();
        assert_eq!(r.value.decode(), 0.75);
        assert!(!r.saturated);

        let big = Fx::encode(1.5, Q).value;
        let r = big.add(big).unwrap();
        assert_eq!(r.value.raw(), Q.max_raw());
        assert!(r.saturated);
    }

    #[test]
    fn neg_zero_is_zero() {
        let r = Fx::zero(Q).neg();
        assert_eq!(r.value.raw(), 0);
        assert!(!r.saturated);
    }

    #[test]
    fn neg_min_saturates() {
        let r = fx(Q.min_raw()).neg();
        assert_eq!(r.value.raw(), Q.max_raw());
        assert!(r.saturated);
    }

    #[test]
    fn format_mismatch_is_an_error() {
        let a = Fx::encode(0.5, Q).value;
        let b = Fx::encode(0.5, FxFormat::new(2, 8).unwrap()).value;
        assert!(matches!(a.add(b), Err(FxError::FormatMismatch(_, _))));
    }

    #[test]
    fn invalid_formats_rejected() {
        assert!(FxFormat::new(0, 10).is_err());
        assert!(FxFormat::new(4, 29).is_err());
        assert!(FxFormat::new(2, 30).is_ok());
    }

    #[test]
    fn rne_shift_negative_ties() {
        // -1.5 LSB at shift 1 -> -2 (even); -0.5 -> 0.
        assert_eq!(rne_shift(-3, 1), -2);
        assert_eq!(rne_shift(-1, 1), 0);
    }

    #[test]
    fn exhaustive_tie_to_even_on_10_bit_format() {
        // Q2.8: sweep every product and check RNE against integer arithmetic.
        let fmt = FxFormat::new(2, 8).unwrap();
        for a in fmt.min_raw()..=fmt.max_raw() {
            for b in fmt.min_raw()..=fmt.max_raw() {
                let p = a as i64 * b as i64;
                let r = rne_shift(p, 8);
                // Distance from the exact product (in units of 2^-16) to the
                // rounded result must be at most half an LSB, and exactly half
                // only when the result LSB is even.
                let diff = (r << 8) - p;
                assert!(diff.abs() <= 128, "a={a} b={b}");
                if diff.abs() == 128 {
                    assert_eq!(r & 1, 0, "tie must round to even: a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn encode_decode_half_lsb_bound() {
        // Deterministic sweep of in-range values on a coarse grid.
        let mut x = -1.9999;
        while x < 1.9999 {
            let r = Fx::encode(x, Q);
            assert!(!r.saturated);
            assert!((r.value.decode() - x).abs() <= Q.lsb() / 2.0 + 1e-15);
            x += 0.000137;
        }
    }
}
