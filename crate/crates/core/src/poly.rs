//! Dense univariate polynomials over F_p.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::field;

/// Operand length (in coefficients) below which multiplication stays
/// schoolbook. Measured on p = 97 with random operands: Karatsuba starts to
/// win between 24 and 40 coefficients; most products in this crate are far
/// smaller, so the exact value only matters for the window expansions.
pub const KARATSUBA_THRESHOLD: usize = 32;

/// Dense polynomial with coefficients in `[0, p)`, lowest degree first.
/// The coefficient vector never carries trailing zeros.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct FpPoly {
    p: u64,
    coeffs: Vec<u64>,
}

impl FpPoly {
    pub fn new(p: u64, coeffs: Vec<u64>) -> Self {
        let mut poly = Self {
            p,
            coeffs: coeffs.into_iter().map(|c| c % p).collect(),
        };
        poly.trim();
        poly
    }

    pub fn from_i64(p: u64, coeffs: &[i64]) -> Self {
        Self::new(p, coeffs.iter().map(|&c| field::from_i64(c, p)).collect())
    }

    pub fn zero(p: u64) -> Self {
        Self { p, coeffs: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        Self::constant(p, 1)
    }

    pub fn constant(p: u64, c: u64) -> Self {
        Self::new(p, vec![c])
    }

    /// c * var^k
    pub fn monomial(p: u64, c: u64, k: usize) -> Self {
        let mut coeffs = vec![0; k + 1];
        coeffs[k] = c;
        Self::new(p, coeffs)
    }

    /// The polynomial `var - c`.
    pub fn linear_root(p: u64, c: u64) -> Self {
        Self::new(p, vec![field::neg(c % p, p), 1])
    }

    fn trim(&mut self) {
        while self.coeffs.last() == Some(&0) {
            self.coeffs.pop();
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[u64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<u64> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.coeffs == [1]
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    /// Degree with the zero polynomial mapped to 0; for bounds only.
    pub fn deg_or_zero(&self) -> usize {
        self.degree().unwrap_or(0)
    }

    pub fn coeff(&self, i: usize) -> u64 {
        self.coeffs.get(i).copied().unwrap_or(0)
    }

    pub fn lead(&self) -> u64 {
        self.coeffs.last().copied().unwrap_or(0)
    }

    pub fn is_monic(&self) -> bool {
        self.lead() == 1
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let inv = field::inv(self.lead(), self.p);
        self.scale(inv)
    }

    pub fn scale(&self, c: u64) -> Self {
        let p = self.p;
        Self::new(p, self.coeffs.iter().map(|&a| field::mul(a, c % p, p)).collect())
    }

    pub fn shift(&self, k: usize) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        let mut coeffs = vec![0; k];
        coeffs.extend_from_slice(&self.coeffs);
        Self { p: self.p, coeffs }
    }

    pub fn eval(&self, x: u64) -> u64 {
        let p = self.p;
        self.coeffs
            .iter()
            .rev()
            .fold(0, |acc, &c| field::add(field::mul(acc, x, p), c, p))
    }

    pub fn derivative(&self) -> Self {
        let p = self.p;
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(i, &c)| field::mul(c, i as u64 % p, p))
            .collect();
        Self::new(p, coeffs)
    }

    /// Multiplicity of zero as a root.
    pub fn valuation(&self) -> Option<usize> {
        self.coeffs.iter().position(|&c| c != 0)
    }

    pub fn divrem(&self, divisor: &Self) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let p = self.p;
        let n = divisor.coeffs.len();
        if self.coeffs.len() < n {
            return (Self::zero(p), self.clone());
        }
        let inv_lead = field::inv(divisor.lead(), p);
        let mut rem = self.coeffs.clone();
        let mut quot = vec![0; rem.len() - n + 1];
        for i in (0..quot.len()).rev() {
            let c = field::mul(rem[i + n - 1], inv_lead, p);
            quot[i] = c;
            if c != 0 {
                for (j, &dj) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] = field::sub(rem[i + j], field::mul(c, dj, p), p);
                }
            }
        }
        rem.truncate(n - 1);
        (Self::new(p, quot), Self::new(p, rem))
    }

    pub fn rem(&self, divisor: &Self) -> Self {
        self.divrem(divisor).1
    }

    /// Quotient when `divisor` divides `self` exactly.
    pub fn div_exact(&self, divisor: &Self) -> Option<Self> {
        let (q, r) = self.divrem(divisor);
        r.is_zero().then_some(q)
    }

    /// Monic gcd (zero if both inputs are zero).
    pub fn gcd(&self, other: &Self) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b);
            a = b;
            b = r;
        }
        a.monic()
    }

    pub fn pow(&self, mut exp: u64) -> Self {
        let mut acc = Self::one(self.p);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = &acc * &base;
            }
            exp >>= 1;
            if exp > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    pub fn mulmod(&self, other: &Self, modulus: &Self) -> Self {
        (self * other).rem(modulus)
    }

    pub fn powmod(&self, mut exp: u128, modulus: &Self) -> Self {
        let mut acc = Self::one(self.p).rem(modulus);
        let mut base = self.rem(modulus);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mulmod(&base, modulus);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mulmod(&base, modulus);
            }
        }
        acc
    }

    /// Truncated product: only coefficients of degree `< len`.
    pub fn mul_trunc(&self, other: &Self, len: usize) -> Self {
        let a = &self.coeffs[..self.coeffs.len().min(len)];
        let b = &other.coeffs[..other.coeffs.len().min(len)];
        let mut out = mul_slices(a, b, self.p);
        out.truncate(len);
        Self::new(self.p, out)
    }

    /// Render with the given variable name, e.g. `1 + 4*t + t^2`.
    pub fn render(&self, var: &str) -> String {
        if self.is_zero() {
            return "0".to_string();
        }
        let mut terms = Vec::new();
        for (i, &c) in self.coeffs.iter().enumerate() {
            if c == 0 {
                continue;
            }
            let term = match (i, c) {
                (0, c) => c.to_string(),
                (1, 1) => var.to_string(),
                (1, c) => format!("{c}*{var}"),
                (i, 1) => format!("{var}^{i}"),
                (i, c) => format!("{c}*{var}^{i}"),
            };
            terms.push(term);
        }
        terms.join(" + ")
    }
}

fn schoolbook(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![0u64; a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai == 0 {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] = (out[i + j] + ai * bj) % p;
        }
    }
    out
}

fn add_into(dst: &mut [u64], src: &[u64], p: u64) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = field::add(*d, s, p);
    }
}

fn sub_into(dst: &mut [u64], src: &[u64], p: u64) {
    for (d, &s) in dst.iter_mut().zip(src) {
        *d = field::sub(*d, s, p);
    }
}

fn karatsuba(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.len().min(b.len()) < KARATSUBA_THRESHOLD {
        return schoolbook(a, b, p);
    }
    let half = a.len().max(b.len()) / 2;
    let (a0, a1) = a.split_at(half.min(a.len()));
    let (b0, b1) = b.split_at(half.min(b.len()));
    let z0 = karatsuba(a0, b0, p);
    let z2 = karatsuba(a1, b1, p);
    let mut sa = a0.to_vec();
    sa.resize(a0.len().max(a1.len()), 0);
    add_into(&mut sa, a1, p);
    let mut sb = b0.to_vec();
    sb.resize(b0.len().max(b1.len()), 0);
    add_into(&mut sb, b1, p);
    let mut z1 = karatsuba(&sa, &sb, p);
    sub_into(&mut z1, &z0, p);
    sub_into(&mut z1, &z2, p);

    let mut out = vec![0u64; a.len() + b.len() - 1];
    add_into(&mut out, &z0, p);
    add_into(&mut out[half..], &z1, p);
    if !z2.is_empty() {
        add_into(&mut out[2 * half..], &z2, p);
    }
    out
}

pub(crate) fn mul_slices(a: &[u64], b: &[u64], p: u64) -> Vec<u64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    karatsuba(a, b, p)
}

impl serde::Serialize for FpPoly {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        self.coeffs.serialize(s)
    }
}

impl fmt::Debug for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "FpPoly[p={}]({})", self.p, self.render("t"))
    }
}

impl fmt::Display for FpPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render("t"))
    }
}

impl Add for &FpPoly {
    type Output = FpPoly;
    fn add(self, rhs: &FpPoly) -> FpPoly {
        debug_assert_eq!(self.p, rhs.p);
        let p = self.p;
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| field::add(self.coeff(i), rhs.coeff(i), p))
            .collect();
        FpPoly::new(p, coeffs)
    }
}

impl Sub for &FpPoly {
    type Output = FpPoly;
    fn sub(self, rhs: &FpPoly) -> FpPoly {
        debug_assert_eq!(self.p, rhs.p);
        let p = self.p;
        let n = self.coeffs.len().max(rhs.coeffs.len());
        let coeffs = (0..n)
            .map(|i| field::sub(self.coeff(i), rhs.coeff(i), p))
            .collect();
        FpPoly::new(p, coeffs)
    }
}

impl Neg for &FpPoly {
    type Output = FpPoly;
    fn neg(self) -> FpPoly {
        let p = self.p;
        FpPoly::new(p, self.coeffs.iter().map(|&c| field::neg(c, p)).collect())
    }
}

impl Mul for &FpPoly {
    type Output = FpPoly;
    fn mul(self, rhs: &FpPoly) -> FpPoly {
        debug_assert_eq!(self.p, rhs.p);
        FpPoly::new(self.p, mul_slices(&self.coeffs, &rhs.coeffs, self.p))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn division_and_gcd() {
        let p = 7;
        let a = FpPoly::from_i64(p, &[-1, 0, 1]); // t^2 - 1
        let b = FpPoly::from_i64(p, &[1, 1]); // t + 1
        let (q, r) = a.divrem(&b);
        assert!(r.is_zero());
        assert_eq!(q, FpPoly::from_i64(p, &[-1, 1]));
        assert_eq!(a.gcd(&b), b);
    }

    #[test]
    fn render_format() {
        let f = FpPoly::new(5, vec![1, 4, 1]);
        assert_eq!(f.render("t"), "1 + 4*t + t^2");
        assert_eq!(FpPoly::zero(5).to_string(), "0");
    }

    #[test]
    fn frobenius_cube_in_char_three() {
        let f = FpPoly::new(3, vec![1, 1]).pow(3);
        assert_eq!(f, FpPoly::new(3, vec![1, 0, 0, 1]));
    }

    proptest! {
        #[test]
        fn karatsuba_matches_schoolbook(
            a in proptest::collection::vec(0u64..97, 0..120),
            b in proptest::collection::vec(0u64..97, 0..120),
        ) {
            let fast = FpPoly::new(97, mul_slices(&a, &b, 97));
            let slow = FpPoly::new(97, schoolbook(&a, &b, 97));
            prop_assert_eq!(fast, slow);
        }

        #[test]
        fn divrem_reconstructs(
            a in proptest::collection::vec(0u64..13, 0..30),
            b in proptest::collection::vec(0u64..13, 1..10),
        ) {
            let a = FpPoly::new(13, a);
            let b = FpPoly::new(13, b);
            prop_assume!(!b.is_zero());
            let (q, r) = a.divrem(&b);
            prop_assert_eq!(&(&q * &b) + &r, a);
            prop_assert!(r.degree().map_or(true, |d| Some(d) < b.degree()));
        }
    }
}
