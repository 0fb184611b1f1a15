//! Integer with an inline `i64` fast path that promotes to `BigInt` on overflow.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) enum Z {
    S(i64),
    B(BigInt),
}

impl Z {
    pub fn zero() -> Self {
        Z::S(0)
    }

    fn norm(b: BigInt) -> Self {
        match b.to_i64() {
            Some(v) if v != i64::MIN => Z::S(v),
            _ => Z::B(b),
        }
    }

    pub fn from_big(b: &BigInt) -> Self {
        Z::norm(b.clone())
    }

    pub fn to_big(&self) -> BigInt {
        match self {
            Z::S(v) => BigInt::from(*v),
            Z::B(b) => b.clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Z::S(0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Z::S(1))
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Z::S(v) => *v < 0,
            Z::B(b) => b.is_negative(),
        }
    }

    pub fn neg(&self) -> Self {
        match self {
            Z::S(v) => Z::S(-v),
            Z::B(b) => Z::norm(-b),
        }
    }

    pub fn mul(&self, o: &Z) -> Z {
        if let (Z::S(a), Z::S(b)) = (self, o) {
            if let Some(r) = a.checked_mul(*b) {
                if r != i64::MIN {
                    return Z::S(r);
                }
            }
        }
        Z::norm(self.to_big() * o.to_big())
    }

    pub fn sub(&self, o: &Z) -> Z {
        if let (Z::S(a), Z::S(b)) = (self, o) {
            if let Some(r) = a.checked_sub(*b) {
                if r != i64::MIN {
                    return Z::S(r);
                }
            }
        }
        Z::norm(self.to_big() - o.to_big())
    }

    #[cfg(test)]
    pub fn add(&self, o: &Z) -> Z {
        if let (Z::S(a), Z::S(b)) = (self, o) {
            if let Some(r) = a.checked_add(*b) {
                if r != i64::MIN {
                    return Z::S(r);
                }
            }
        }
        Z::norm(self.to_big() + o.to_big())
    }

    /// Exact division; caller guarantees divisibility.
    pub fn div_exact(&self, o: &Z) -> Z {
        if let (Z::S(a), Z::S(b)) = (self, o) {
            return Z::S(a / b);
        }
        Z::norm(self.to_big() / o.to_big())
    }

    pub fn gcd(&self, o: &Z) -> Z {
        if let (Z::S(a), Z::S(b)) = (self, o) {
            return Z::S(a.gcd(b));
        }
        Z::norm(self.to_big().gcd(&o.to_big()))
    }
}

impl From<i64> for Z {
    fn from(v: i64) -> Self {
        if v == i64::MIN {
            Z::B(BigInt::from(v))
        } else {
            Z::S(v)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_promotes() {
        let a = Z::from(i64::MAX);
        let b = a.mul(&Z::from(4));
        assert!(matches!(b, Z::B(_)));
        assert_eq!(b.div_exact(&Z::from(4)), a);
        assert_eq!(a.add(&Z::from(1)).sub(&Z::from(1)), a);
    }

    #[test]
    fn gcd_mixed() {
        let big = Z::from(6).mul(&Z::from(i64::MAX));
        assert_eq!(big.gcd(&Z::from(4)), Z::from(2));
    }
}
