use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// A vector of GF(2)^width; coordinate `k` (1-based) is bit `k - 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Gf2Vector {
    pub bits: u32,
    pub width: u8,
}

impl Gf2Vector {
    pub fn new(bits: u32, width: u8) -> Result<Self> {
        if width > 32 || (width < 32 && bits >> width != 0) {
            return Err(Error::InvalidParameter(format!(
                "{bits:#x} does not fit in {width} bits"
            )));
        }
        Ok(Gf2Vector { bits, width })
    }

    /// Unit vector `e_k`, `k` counted from 1.
    pub fn unit(k: u8, width: u8) -> Self {
        Gf2Vector {
            bits: 1 << (k - 1),
            width,
        }
    }
}

impl std::ops::Add for Gf2Vector {
    type Output = Gf2Vector;

    fn add(self, rhs: Gf2Vector) -> Gf2Vector {
        debug_assert_eq!(self.width, rhs.width);
        Gf2Vector {
            bits: self.bits ^ rhs.bits,
            width: self.width,
        }
    }
}

/// `Q(x) = x1 x2 + x3 x4 + ... + x(2n-1) x(2n)` on `2n` coordinates, followed
/// by `radical` extra coordinates on which `Q` vanishes identically.
///
/// `radical = 0` is the non-degenerate hyperbolic form used everywhere; a
/// positive radical only exists to build deliberately broken models.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct QuadraticForm {
    pairs: u8,
    radical: u8,
}

impl QuadraticForm {
    pub fn hyperbolic(n: usize) -> Self {
        assert!(2 * n <= 32, "rank {n} too large for 32-bit vectors");
        QuadraticForm {
            pairs: n as u8,
            radical: 0,
        }
    }

    pub fn with_radical(n: usize, radical: usize) -> Self {
        assert!(2 * n + radical <= 32);
        QuadraticForm {
            pairs: n as u8,
            radical: radical as u8,
        }
    }

    /// Number of hyperbolic pairs.
    pub fn rank(&self) -> usize {
        self.pairs as usize
    }

    pub fn radical(&self) -> usize {
        self.radical as usize
    }

    pub fn width(&self) -> u32 {
        2 * self.pairs as u32 + self.radical as u32
    }

    #[inline]
    fn pair_mask(&self) -> u32 {
        if self.pairs == 16 {
            !0
        } else {
            (1u32 << (2 * self.pairs)) - 1
        }
    }

    #[inline]
    fn low(&self) -> u32 {
        0x5555_5555 & self.pair_mask()
    }

    /// `Q(x)` as a bit.
    #[inline]
    pub fn q(&self, x: u32) -> bool {
        (x & (x >> 1) & self.low()).count_ones() & 1 == 1
    }

    /// Polarisation `b(x, y) = Q(x + y) + Q(x) + Q(y)`.
    #[inline]
    pub fn b(&self, x: u32, y: u32) -> bool {
        (x & self.swap(y)).count_ones() & 1 == 1
    }

    /// Exchanges the two coordinates of every hyperbolic pair; radical bits are dropped.
    #[inline]
    pub fn swap(&self, y: u32) -> u32 {
        let low = self.low();
        (((y & low) << 1) | ((y >> 1) & low)) & self.pair_mask()
    }

    fn check(&self, v: Gf2Vector) -> Result<()> {
        if v.width as u32 != self.width() {
            return Err(Error::WidthMismatch {
                expected: self.width(),
                actual: v.width as u32,
            });
        }
        Ok(())
    }

    pub fn q_value(&self, v: Gf2Vector) -> Result<bool> {
        self.check(v)?;
        Ok(self.q(v.bits))
    }

    pub fn bilinear(&self, u: Gf2Vector, v: Gf2Vector) -> Result<bool> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.b(u.bits, v.bits))
    }

    /// The standard generator `<e1, e3, ..., e(2n-1)>`.
    pub fn standard_generator_rows(&self) -> Vec<u32> {
        (0..self.pairs as u32).rev().map(|i| 1u32 << (2 * i)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn unit_vector_values() {
        let f = QuadraticForm::hyperbolic(4);
        let e = |k| Gf2Vector::unit(k, 8);
        assert!(!f.q_value(e(1)).unwrap());
        assert!(f.q_value(e(1) + e(2)).unwrap());
        assert!(f.bilinear(e(1), e(2)).unwrap());
        assert!(!f.bilinear(e(1), e(3)).unwrap());
        assert!(!f.q_value(e(1) + e(3)).unwrap());
    }

    #[test]
    fn width_mismatch() {
        let f = QuadraticForm::hyperbolic(4);
        let v = Gf2Vector::unit(1, 6);
        assert_eq!(
            f.q_value(v),
            Err(Error::WidthMismatch {
                expected: 8,
                actual: 6
            })
        );
    }

    #[test]
    fn singular_vector_count() {
        // Q vanishes on 2^(2n-1) + 2^(n-1) vectors, zero included
        for n in 1..=6 {
            let f = QuadraticForm::hyperbolic(n);
            let zeros = (0u32..1 << (2 * n)).filter(|&x| !f.q(x)).count();
            assert_eq!(zeros, (1 << (2 * n - 1)) + (1 << (n - 1)), "n={n}");
        }
    }

    proptest! {
        #[test]
        fn b_is_polarisation(x in 0u32..4096, y in 0u32..4096) {
            let f = QuadraticForm::hyperbolic(6);
            prop_assert_eq!(f.b(x, y), f.q(x ^ y) ^ f.q(x) ^ f.q(y));
            prop_assert_eq!(f.b(x, y), f.b(y, x));
            prop_assert!(!f.b(x, x));
        }

        #[test]
        fn radical_coordinates_are_invisible(x in 0u32..256, r in 0u32..4) {
            let f = QuadraticForm::with_radical(4, 2);
            let y = x | r << 8;
            prop_assert_eq!(f.q(y), f.q(x));
            prop_assert!(!f.b(r << 8, y));
        }
    }
}
