//! Exact dyadic rationals `m / 2^e`.
//!
//! Pedigree weights only ever get averaged, so every weight is a dyadic
//! rational. Values are kept normalized (odd numerator, or exponent 0) so
//! that structural equality is numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Add;

use num_bigint::BigUint;
use num_traits::{One, ToPrimitive, Zero};

/// A non-negative dyadic rational.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigUint,
    exp: u64,
}

impl Dyadic {
    pub fn zero() -> Self {
        Dyadic {
            num: BigUint::zero(),
            exp: 0,
        }
    }

    pub fn one() -> Self {
        Dyadic {
            num: BigUint::one(),
            exp: 0,
        }
    }

    /// `num / 2^exp`, normalized.
    pub fn new(num: BigUint, exp: u64) -> Self {
        let mut d = Dyadic { num, exp };
        d.normalize();
        d
    }

    pub fn numerator(&self) -> &BigUint {
        &self.num
    }

    /// Power of two in the reduced denominator.
    pub fn exponent(&self) -> u64 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    /// `(self + other) / 2`.
    pub fn midpoint(&self, other: &Dyadic) -> Dyadic {
        let mut sum = self + other;
        if sum.num.is_zero() {
            return sum;
        }
        if sum.num.bit(0) {
            sum.exp += 1;
        } else {
            sum.num >>= 1u32;
        }
        sum
    }

    pub fn to_f64(&self) -> f64 {
        // scale down both parts so the numerator fits comfortably in f64
        let bits = self.num.bits();
        let shift = bits.saturating_sub(60);
        let top = (&self.num >> shift).to_f64().unwrap_or(f64::INFINITY);
        let e = shift as i64 - self.exp as i64;
        top * 2f64.powi(e.clamp(i32::MIN as i64, i32::MAX as i64) as i32)
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.exp = 0;
            return;
        }
        let tz = self.num.trailing_zeros().unwrap_or(0).min(self.exp);
        if tz > 0 {
            self.num >>= tz;
            self.exp -= tz;
        }
    }

    fn aligned(&self, exp: u64) -> BigUint {
        &self.num << (exp - self.exp)
    }
}

impl Add for &Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: &Dyadic) -> Dyadic {
        let exp = self.exp.max(rhs.exp);
        Dyadic::new(self.aligned(exp) + rhs.aligned(exp), exp)
    }
}

impl Add for Dyadic {
    type Output = Dyadic;

    fn add(self, rhs: Dyadic) -> Dyadic {
        &self + &rhs
    }
}

impl std::iter::Sum for Dyadic {
    fn sum<I: Iterator<Item = Dyadic>>(iter: I) -> Dyadic {
        iter.fold(Dyadic::zero(), |acc, x| &acc + &x)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let exp = self.exp.max(other.exp);
        self.aligned(exp).cmp(&other.aligned(exp))
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/2^{}", self.num, self.exp)
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.exp == 0 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/2^{}", self.num, self.exp)
        }
    }
}

/// A row of dyadic rationals sharing one power-of-two denominator.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DyadicRow {
    nums: Vec<BigUint>,
    exp: u64,
}

impl DyadicRow {
    /// Row `i` of the `n x n` identity.
    pub fn unit(n: usize, i: usize) -> Self {
        let mut nums = vec![BigUint::zero(); n];
        nums[i] = BigUint::one();
        DyadicRow { nums, exp: 0 }
    }

    pub fn len(&self) -> usize {
        self.nums.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nums.is_empty()
    }

    pub fn exponent(&self) -> u64 {
        self.exp
    }

    pub fn entry(&self, j: usize) -> Dyadic {
        Dyadic::new(self.nums[j].clone(), self.exp)
    }

    /// Entrywise `(a + b) / 2`.
    pub fn average(a: &DyadicRow, b: &DyadicRow) -> DyadicRow {
        let exp = a.exp.max(b.exp);
        let (sa, sb) = (exp - a.exp, exp - b.exp);
        let nums = a
            .nums
            .iter()
            .zip(&b.nums)
            .map(|(x, y)| (x << sa) + (y << sb))
            .collect();
        let mut row = DyadicRow { nums, exp: exp + 1 };
        row.normalize();
        row
    }

    /// Sum of the entries selected by `mask`.
    pub fn masked_sum(&self, mask: &[bool]) -> Dyadic {
        let num = self
            .nums
            .iter()
            .zip(mask)
            .filter(|(_, &m)| m)
            .fold(BigUint::zero(), |acc, (x, _)| acc + x);
        Dyadic::new(num, self.exp)
    }

    pub fn sum(&self) -> Dyadic {
        let num = self.nums.iter().fold(BigUint::zero(), |acc, x| acc + x);
        Dyadic::new(num, self.exp)
    }

    fn normalize(&mut self) {
        let tz = self
            .nums
            .iter()
            .filter_map(|x| x.trailing_zeros())
            .min()
            .unwrap_or(0)
            .min(self.exp);
        if tz > 0 {
            for x in &mut self.nums {
                *x >>= tz;
            }
            self.exp -= tz;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d(num: u64, exp: u64) -> Dyadic {
        Dyadic::new(BigUint::from(num), exp)
    }

    #[test]
    fn normalizes() {
        assert_eq!(d(4, 3), d(1, 1));
        assert_eq!(d(0, 9), Dyadic::zero());
        assert_eq!(d(8, 0), d(8, 0));
        assert_eq!(d(8, 0).exponent(), 0);
    }

    #[test]
    fn midpoint_and_sum() {
        let half = Dyadic::zero().midpoint(&Dyadic::one());
        assert_eq!(half, d(1, 1));
        assert_eq!(half.midpoint(&Dyadic::one()), d(3, 2));
        assert_eq!(&half + &half, Dyadic::one());
        assert_eq!(d(3, 3).midpoint(&d(1, 3)), d(1, 2));
        assert!((d(21, 3).to_f64() - 2.625).abs() < 1e-15);
    }

    #[test]
    fn ordering() {
        assert!(d(1, 1) < d(3, 2));
        assert!(d(1, 0) > d(7, 3));
    }

    #[test]
    fn row_average() {
        let r = DyadicRow::average(&DyadicRow::unit(3, 0), &DyadicRow::unit(3, 1));
        assert_eq!(r.entry(0), d(1, 1));
        assert_eq!(r.entry(1), d(1, 1));
        assert_eq!(r.entry(2), Dyadic::zero());
        assert_eq!(r.sum(), Dyadic::one());
        let same = DyadicRow::average(&r, &r);
        assert_eq!(same, r);
        assert_eq!(r.masked_sum(&[true, false, true]), d(1, 1));
    }
}
