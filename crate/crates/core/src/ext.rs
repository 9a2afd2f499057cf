//! Finite fields F_{p^m} = F_p[θ]/(q(θ)) built on an irreducible modulus,
//! and dense polynomials with coefficients in such a field.
//!
//! Fields are created from whatever irreducible factor is at hand; there is
//! no table of preferred moduli. Elements of two different fields are never
//! mixed: to compare them, both sides are first mapped into a common
//! overfield with [`ExtField::embedding_into`].

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::factor;
use crate::field;
use crate::poly::FpPoly;

/// Element of an extension field: coordinates on the power basis
/// 1, θ, ..., θ^(m-1). Always exactly `m` coordinates.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ExtElem(Vec<u64>);

impl ExtElem {
    pub fn coords(&self) -> &[u64] {
        &self.0
    }
}

impl fmt::Debug for ExtElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

#[derive(Clone, PartialEq, Eq)]
pub struct ExtField {
    p: u64,
    modulus: FpPoly,
}

impl fmt::Debug for ExtField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "F_{}^{}[{}]", self.p, self.degree(), self.modulus.render("θ"))
    }
}

impl ExtField {
    /// Field with the given modulus; fails if the modulus is reducible.
    pub fn new(modulus: &FpPoly) -> Result<Self> {
        if !factor::is_irreducible(modulus) {
            return Err(Error::Reducible(modulus.render("t")));
        }
        Ok(Self {
            p: modulus.modulus(),
            modulus: modulus.monic(),
        })
    }

    /// F_p itself, presented with modulus θ.
    pub fn prime(p: u64) -> Self {
        Self {
            p,
            modulus: FpPoly::new(p, vec![0, 1]),
        }
    }

    /// A field of degree `m` on a seeded random irreducible modulus.
    pub fn of_degree(p: u64, m: usize, seed: u64) -> Self {
        Self {
            p,
            modulus: factor::random_irreducible(p, m, seed),
        }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn degree(&self) -> usize {
        self.modulus.deg_or_zero()
    }

    pub fn modulus(&self) -> &FpPoly {
        &self.modulus
    }

    /// Field size as u128, or `None` on overflow.
    pub fn order(&self) -> Option<u128> {
        (self.p as u128).checked_pow(self.degree() as u32)
    }

    fn from_poly(&self, f: &FpPoly) -> ExtElem {
        let r = f.rem(&self.modulus);
        let mut c = r.into_coeffs();
        c.resize(self.degree(), 0);
        ExtElem(c)
    }

    pub fn to_poly(&self, a: &ExtElem) -> FpPoly {
        FpPoly::new(self.p, a.0.clone())
    }

    pub fn elem(&self, coords: &[u64]) -> ExtElem {
        self.from_poly(&FpPoly::new(self.p, coords.to_vec()))
    }

    pub fn zero(&self) -> ExtElem {
        ExtElem(vec![0; self.degree()])
    }

    pub fn one(&self) -> ExtElem {
        self.from_base(1)
    }

    pub fn from_base(&self, c: u64) -> ExtElem {
        let mut v = vec![0; self.degree()];
        v[0] = c % self.p;
        ExtElem(v)
    }

    pub fn from_i64(&self, c: i64) -> ExtElem {
        self.from_base(field::from_i64(c, self.p))
    }

    /// The class of θ, a root of the modulus.
    pub fn generator(&self) -> ExtElem {
        self.from_poly(&FpPoly::monomial(self.p, 1, 1))
    }

    /// `Some(c)` when the element lies in the prime field.
    pub fn as_base(&self, a: &ExtElem) -> Option<u64> {
        a.0[1..].iter().all(|&c| c == 0).then(|| a.0[0])
    }

    pub fn is_zero(&self, a: &ExtElem) -> bool {
        a.0.iter().all(|&c| c == 0)
    }

    pub fn add(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        ExtElem(
            a.0.iter()
                .zip(&b.0)
                .map(|(&x, &y)| field::add(x, y, self.p))
                .collect(),
        )
    }

    pub fn sub(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        ExtElem(
            a.0.iter()
                .zip(&b.0)
                .map(|(&x, &y)| field::sub(x, y, self.p))
                .collect(),
        )
    }

    pub fn neg(&self, a: &ExtElem) -> ExtElem {
        ExtElem(a.0.iter().map(|&x| field::neg(x, self.p)).collect())
    }

    pub fn scale(&self, a: &ExtElem, c: u64) -> ExtElem {
        ExtElem(a.0.iter().map(|&x| field::mul(x, c % self.p, self.p)).collect())
    }

    pub fn mul(&self, a: &ExtElem, b: &ExtElem) -> ExtElem {
        if self.degree() == 1 {
            return ExtElem(vec![field::mul(a.0[0], b.0[0], self.p)]);
        }
        self.from_poly(&(&self.to_poly(a) * &self.to_poly(b)))
    }

    pub fn square(&self, a: &ExtElem) -> ExtElem {
        self.mul(a, a)
    }

    pub fn pow(&self, a: &ExtElem, mut exp: u128) -> ExtElem {
        let mut acc = self.one();
        let mut base = a.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(&acc, &base);
            }
            exp >>= 1;
            if exp > 0 {
                base = self.mul(&base, &base);
            }
        }
        acc
    }

    /// x ↦ x^p.
    pub fn frobenius(&self, a: &ExtElem) -> ExtElem {
        self.pow(a, self.p as u128)
    }

    /// x ↦ x^(p^k).
    pub fn frobenius_pow(&self, a: &ExtElem, k: usize) -> ExtElem {
        let k = k % self.degree();
        (0..k).fold(a.clone(), |acc, _| self.frobenius(&acc))
    }

    /// The p-th root, i.e. the inverse of Frobenius: x ↦ x^(p^(m-1)).
    pub fn frobenius_inverse(&self, a: &ExtElem) -> ExtElem {
        self.frobenius_pow(a, self.degree() - 1)
    }

    pub fn inv(&self, a: &ExtElem) -> Option<ExtElem> {
        if self.is_zero(a) {
            return None;
        }
        if self.degree() == 1 {
            return Some(ExtElem(vec![field::inv(a.0[0], self.p)]));
        }
        // extended Euclid in F_p[θ]
        let (mut r0, mut r1) = (self.modulus.clone(), self.to_poly(a));
        let (mut s0, mut s1) = (FpPoly::zero(self.p), FpPoly::one(self.p));
        while !r1.is_zero() {
            let (q, r) = r0.divrem(&r1);
            let s = &s0 - &(&q * &s1);
            r0 = r1;
            r1 = r;
            s0 = s1;
            s1 = s;
        }
        // r0 is a nonzero constant
        let c = field::inv(r0.coeff(0), self.p);
        Some(self.from_poly(&s0.scale(c)))
    }

    pub fn div(&self, a: &ExtElem, b: &ExtElem) -> Option<ExtElem> {
        self.inv(b).map(|ib| self.mul(a, &ib))
    }

    /// Evaluate a polynomial with F_p coefficients at `a`.
    pub fn eval_poly(&self, f: &FpPoly, a: &ExtElem) -> ExtElem {
        f.coeffs().iter().rev().fold(self.zero(), |acc, &c| {
            self.add(&self.mul(&acc, a), &self.from_base(c))
        })
    }

    /// The Frobenius orbit a, a^p, a^(p^2), ... (without repeats).
    pub fn conjugates(&self, a: &ExtElem) -> Vec<ExtElem> {
        let mut out = vec![a.clone()];
        let mut cur = self.frobenius(a);
        while &cur != a {
            out.push(cur.clone());
            cur = self.frobenius(&cur);
        }
        out
    }

    /// Minimal polynomial of `a` over F_p.
    pub fn min_poly(&self, a: &ExtElem) -> FpPoly {
        let mut acc = EPoly::one(self);
        for c in self.conjugates(a) {
            acc = acc.mul(&EPoly::new(self, vec![self.neg(&c), self.one()]), self);
        }
        let coeffs = acc
            .coeffs
            .iter()
            .map(|c| self.as_base(c).expect("minimal polynomial has F_p coefficients"))
            .collect();
        FpPoly::new(self.p, coeffs)
    }

    /// Canonical conjugate: the lexicographically minimal element of the
    /// Frobenius orbit.
    pub fn canonical_conjugate(&self, a: &ExtElem) -> ExtElem {
        self.conjugates(a).into_iter().min().expect("nonempty orbit")
    }

    /// All roots in this field of a polynomial with F_p coefficients,
    /// sorted, without multiplicity.
    pub fn roots_of(&self, f: &FpPoly, seed: u64) -> Vec<ExtElem> {
        let ef = EPoly::from_fp(self, f);
        let mut roots = ef.roots(self, seed);
        roots.sort();
        roots
    }

    /// A field map from `self` into `target`, determined by sending θ to
    /// one root of this field's modulus in `target`. Fails when the degree
    /// of `self` does not divide the degree of `target`.
    pub fn embedding_into(&self, target: &ExtField, seed: u64) -> Result<Embedding> {
        if target.p != self.p || target.degree() % self.degree() != 0 {
            return Err(Error::Invalid(format!(
                "cannot embed {self:?} into {target:?}"
            )));
        }
        let image = target
            .roots_of(&self.modulus, seed)
            .into_iter()
            .next()
            .ok_or_else(|| Error::Invalid("modulus has no root in target".into()))?;
        Ok(Embedding {
            source: self.clone(),
            target: target.clone(),
            image_of_generator: image,
        })
    }
}

/// A field homomorphism F_p[θ]/(q) → target.
#[derive(Clone, Debug)]
pub struct Embedding {
    source: ExtField,
    target: ExtField,
    image_of_generator: ExtElem,
}

impl Embedding {
    pub fn apply(&self, a: &ExtElem) -> ExtElem {
        self.target
            .eval_poly(&self.source.to_poly(a), &self.image_of_generator)
    }

    pub fn target(&self) -> &ExtField {
        &self.target
    }
}

pub fn lcm(a: usize, b: usize) -> usize {
    a / num_integer::gcd(a, b) * b
}

/// Dense polynomial with coefficients in an extension field. The field is
/// passed to every operation; the coefficient vector has no trailing zeros.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct EPoly {
    pub coeffs: Vec<ExtElem>,
}

impl EPoly {
    pub fn new(k: &ExtField, coeffs: Vec<ExtElem>) -> Self {
        let mut poly = Self { coeffs };
        poly.trim(k);
        poly
    }

    pub fn from_fp(k: &ExtField, f: &FpPoly) -> Self {
        Self::new(k, f.coeffs().iter().map(|&c| k.from_base(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one(k: &ExtField) -> Self {
        Self::constant(k, k.one())
    }

    pub fn constant(k: &ExtField, c: ExtElem) -> Self {
        Self::new(k, vec![c])
    }

    pub fn x(k: &ExtField) -> Self {
        Self::new(k, vec![k.zero(), k.one()])
    }

    /// x - c
    pub fn linear(k: &ExtField, c: &ExtElem) -> Self {
        Self::new(k, vec![k.neg(c), k.one()])
    }

    pub fn monomial(k: &ExtField, c: ExtElem, n: usize) -> Self {
        let mut coeffs = vec![k.zero(); n];
        coeffs.push(c);
        Self::new(k, coeffs)
    }

    fn trim(&mut self, k: &ExtField) {
        while self.coeffs.last().is_some_and(|c| k.is_zero(c)) {
            self.coeffs.pop();
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn coeff(&self, k: &ExtField, i: usize) -> ExtElem {
        self.coeffs.get(i).cloned().unwrap_or_else(|| k.zero())
    }

    pub fn lead(&self, k: &ExtField) -> ExtElem {
        self.coeffs.last().cloned().unwrap_or_else(|| k.zero())
    }

    pub fn add(&self, other: &Self, k: &ExtField) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            k,
            (0..n).map(|i| k.add(&self.coeff(k, i), &other.coeff(k, i))).collect(),
        )
    }

    pub fn sub(&self, other: &Self, k: &ExtField) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        Self::new(
            k,
            (0..n).map(|i| k.sub(&self.coeff(k, i), &other.coeff(k, i))).collect(),
        )
    }

    pub fn scale(&self, c: &ExtElem, k: &ExtField) -> Self {
        Self::new(k, self.coeffs.iter().map(|a| k.mul(a, c)).collect())
    }

    pub fn mul(&self, other: &Self, k: &ExtField) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero();
        }
        let mut out = vec![k.zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if k.is_zero(a) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = k.add(&out[i + j], &k.mul(a, b));
            }
        }
        Self::new(k, out)
    }

    pub fn pow(&self, mut exp: u64, k: &ExtField) -> Self {
        let mut acc = Self::one(k);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base, k);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base, k);
            }
        }
        acc
    }

    pub fn derivative(&self, k: &ExtField) -> Self {
        Self::new(
            k,
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(i, c)| k.scale(c, i as u64))
                .collect(),
        )
    }

    pub fn eval(&self, x: &ExtElem, k: &ExtField) -> ExtElem {
        self.coeffs
            .iter()
            .rev()
            .fold(k.zero(), |acc, c| k.add(&k.mul(&acc, x), c))
    }

    pub fn monic(&self, k: &ExtField) -> Self {
        match k.inv(&self.lead(k)) {
            Some(inv) => self.scale(&inv, k),
            None => self.clone(),
        }
    }

    pub fn divrem(&self, divisor: &Self, k: &ExtField) -> (Self, Self) {
        assert!(!divisor.is_zero(), "division by zero polynomial");
        let n = divisor.coeffs.len();
        if self.coeffs.len() < n {
            return (Self::zero(), self.clone());
        }
        let inv_lead = k.inv(&divisor.lead(k)).expect("nonzero lead");
        let mut rem = self.coeffs.clone();
        let mut quot = vec![k.zero(); rem.len() - n + 1];
        for i in (0..quot.len()).rev() {
            let c = k.mul(&rem[i + n - 1], &inv_lead);
            if !k.is_zero(&c) {
                for (j, dj) in divisor.coeffs.iter().enumerate() {
                    rem[i + j] = k.sub(&rem[i + j], &k.mul(&c, dj));
                }
            }
            quot[i] = c;
        }
        rem.truncate(n - 1);
        (Self::new(k, quot), Self::new(k, rem))
    }

    pub fn rem(&self, divisor: &Self, k: &ExtField) -> Self {
        self.divrem(divisor, k).1
    }

    pub fn div_exact(&self, divisor: &Self, k: &ExtField) -> Option<Self> {
        let (q, r) = self.divrem(divisor, k);
        r.is_zero().then_some(q)
    }

    pub fn gcd(&self, other: &Self, k: &ExtField) -> Self {
        let mut a = self.clone();
        let mut b = other.clone();
        while !b.is_zero() {
            let r = a.rem(&b, k);
            a = b;
            b = r;
        }
        a.monic(k)
    }

    fn mulmod(&self, other: &Self, m: &Self, k: &ExtField) -> Self {
        self.mul(other, k).rem(m, k)
    }

    fn powmod(&self, mut exp: u128, m: &Self, k: &ExtField) -> Self {
        let mut acc = Self::one(k).rem(m, k);
        let mut base = self.rem(m, k);
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mulmod(&base, m, k);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mulmod(&base, m, k);
            }
        }
        acc
    }

    /// self^(q) mod m where q = |k|, by m-fold p-th powering.
    fn pow_field_order(&self, m: &Self, k: &ExtField) -> Self {
        (0..k.degree()).fold(self.rem(m, k), |acc, _| acc.powmod(k.p() as u128, m, k))
    }

    /// Distinct roots in `k`, in no particular order.
    pub fn roots(&self, k: &ExtField, seed: u64) -> Vec<ExtElem> {
        if self.degree().unwrap_or(0) == 0 {
            return Vec::new();
        }
        let f = self.monic(k);
        let x = Self::x(k);
        let split = f.gcd(&x.pow_field_order(&f, k).sub(&x, k), k);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::new();
        split_linear(&split, k, &mut rng, &mut out);
        out
    }
}

/// Equal-degree splitting of a product of distinct linear factors.
fn split_linear(f: &EPoly, k: &ExtField, rng: &mut ChaCha8Rng, out: &mut Vec<ExtElem>) {
    match f.degree() {
        None | Some(0) => return,
        Some(1) => {
            let f = f.monic(k);
            out.push(k.neg(&f.coeffs[0]));
            return;
        }
        _ => {}
    }
    let p = k.p();
    loop {
        let delta = k.elem(&(0..k.degree()).map(|_| rng.gen_range(0..p)).collect::<Vec<_>>());
        let a = EPoly::new(k, vec![delta, k.one()]);
        let b = if p == 2 {
            // absolute trace of a
            let mut s = a.rem(f, k);
            let mut acc = s.clone();
            for _ in 1..k.degree() {
                s = s.mulmod(&s, f, k);
                acc = acc.add(&s, k);
            }
            acc
        } else {
            // a^((q-1)/2) = (a^(1 + p + ... + p^(m-1)))^((p-1)/2)
            let mut s = a.rem(f, k);
            let mut acc = s.clone();
            for _ in 1..k.degree() {
                s = s.powmod(p as u128, f, k);
                acc = acc.mulmod(&s, f, k);
            }
            acc.powmod(((p - 1) / 2) as u128, f, k).sub(&EPoly::one(k), k)
        };
        let g = f.gcd(&b, k);
        let dg = g.degree().unwrap_or(0);
        if dg > 0 && Some(dg) < f.degree() {
            let h = f.div_exact(&g, k).expect("gcd divides");
            split_linear(&g, k, rng, out);
            split_linear(&h, k, rng, out);
            return;
        }
    }
}

/// The roots of an irreducible polynomial over F_p, in the field it
/// generates: returns that field and the Frobenius orbit θ, θ^p, ...
pub fn roots_with_field(factor: &FpPoly) -> Result<(ExtField, Vec<ExtElem>)> {
    let k = ExtField::new(factor)?;
    let roots = k.conjugates(&k.generator());
    Ok((k, roots))
}
