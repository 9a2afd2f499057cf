//! Scalar arithmetic in the prime field F_p.
//!
//! Residues are stored as `u64` in `[0, p)`. Every prime accepted by
//! [`check_prime`] is below 2^31, so a product of two residues plus an
//! accumulator never overflows a `u64`.

use crate::error::{Error, Result};

pub const MAX_PRIME: u64 = 1 << 31;

pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    if n % 2 == 0 {
        return n == 2;
    }
    let mut k = 3;
    while k * k <= n {
        if n % k == 0 {
            return false;
        }
        k += 2;
    }
    true
}

pub fn check_prime(p: u64) -> Result<u64> {
    if p < MAX_PRIME && is_prime(p) {
        Ok(p)
    } else {
        Err(Error::NotPrime(p))
    }
}

#[inline]
pub fn add(a: u64, b: u64, p: u64) -> u64 {
    let s = a + b;
    if s >= p {
        s - p
    } else {
        s
    }
}

#[inline]
pub fn sub(a: u64, b: u64, p: u64) -> u64 {
    if a >= b {
        a - b
    } else {
        a + p - b
    }
}

#[inline]
pub fn neg(a: u64, p: u64) -> u64 {
    if a == 0 {
        0
    } else {
        p - a
    }
}

#[inline]
pub fn mul(a: u64, b: u64, p: u64) -> u64 {
    a * b % p
}

pub fn pow(mut base: u64, mut exp: u128, p: u64) -> u64 {
    let mut acc = 1 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul(acc, base, p);
        }
        base = mul(base, base, p);
        exp >>= 1;
    }
    acc
}

/// Inverse of a nonzero residue; panics on zero.
pub fn inv(a: u64, p: u64) -> u64 {
    assert!(a % p != 0, "inverse of zero in F_{p}");
    pow(a, (p - 2) as u128, p)
}

/// Reduce a signed integer into `[0, p)`.
pub fn from_i64(v: i64, p: u64) -> u64 {
    v.rem_euclid(p as i64) as u64
}

/// Legendre symbol (a | p) for odd p, returned as -1, 0 or 1.
pub fn legendre(a: i64, p: u64) -> i32 {
    let a = from_i64(a, p);
    if a == 0 {
        return 0;
    }
    if p == 2 {
        return 1;
    }
    if pow(a, ((p - 1) / 2) as u128, p) == 1 {
        1
    } else {
        -1
    }
}

/// Binomial coefficient C(n, k) reduced mod p, via Lucas' theorem.
pub fn binomial(mut n: u64, mut k: u64, p: u64) -> u64 {
    let mut acc = 1u64;
    while n > 0 || k > 0 {
        let (ni, ki) = (n % p, k % p);
        if ki > ni {
            return 0;
        }
        let mut num = 1u64;
        let mut den = 1u64;
        for i in 0..ki {
            num = mul(num, ni - i, p);
            den = mul(den, i + 1, p);
        }
        acc = mul(acc, mul(num, inv(den, p), p), p);
        n /= p;
        k /= p;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn primes() {
        let small: Vec<u64> = (0..40).filter(|&n| is_prime(n)).collect();
        assert_eq!(small, vec![2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37]);
        assert!(check_prime(9).is_err());
        assert!(check_prime(97).is_ok());
    }

    #[test]
    fn inverse_and_legendre() {
        for p in [3u64, 5, 7, 13, 97] {
            for a in 1..p {
                assert_eq!(mul(a, inv(a, p), p), 1);
            }
        }
        // 2 is a non-residue mod 5, -1 is a residue mod 13
        assert_eq!(legendre(2, 5), -1);
        assert_eq!(legendre(-1, 13), 1);
        assert_eq!(legendre(-3, 7), 1);
        assert_eq!(legendre(-3, 11), -1);
    }

    #[test]
    fn lucas_binomial() {
        // C(10, 3) = 120 = 1 mod 7
        assert_eq!(binomial(10, 3, 7), 120 % 7);
        assert_eq!(binomial(7, 3, 7), 0);
        assert_eq!(binomial(49, 7, 7), 0);
        assert_eq!(binomial(8, 1, 7), 1);
    }
}
