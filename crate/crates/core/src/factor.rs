//! Factorization of polynomials over F_p.
//!
//! Squarefree decomposition, distinct-degree split, then equal-degree
//! splitting driven by a seeded ChaCha stream so that runs are reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::poly::FpPoly;

/// Seed used when the caller does not pick one.
pub const DEFAULT_SEED: u64 = 0x5eed_c0de;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Factorization {
    /// Leading coefficient of the input.
    pub unit: u64,
    /// Monic irreducible factors with multiplicities, sorted by degree and
    /// then by coefficient sequence.
    pub factors: Vec<(FpPoly, usize)>,
}

impl Factorization {
    pub fn expand(&self, p: u64) -> FpPoly {
        let mut acc = FpPoly::constant(p, self.unit);
        for (f, m) in &self.factors {
            acc = &acc * &f.pow(*m as u64);
        }
        acc
    }

    pub fn degree(&self) -> usize {
        self.factors
            .iter()
            .map(|(f, m)| f.deg_or_zero() * m)
            .sum()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorRecord {
    pub factor: Vec<u64>,
    pub multiplicity: usize,
}

/// Coefficient-wise p-th root of a polynomial whose exponents are all
/// multiples of p.
fn pth_root(f: &FpPoly) -> FpPoly {
    let p = f.modulus();
    let coeffs = f.coeffs().iter().step_by(p as usize).copied().collect();
    FpPoly::new(p, coeffs)
}

/// Squarefree decomposition of a monic polynomial: pairwise coprime
/// squarefree parts with their multiplicities.
pub fn squarefree_decomposition(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let p = f.modulus();
    let mut out = Vec::new();
    if f.degree().unwrap_or(0) == 0 {
        return out;
    }
    let f = f.monic();
    let df = f.derivative();
    let mut c = f.gcd(&df);
    let mut w = f.div_exact(&c).expect("gcd divides");
    let mut i = 1;
    while w.degree().unwrap_or(0) > 0 {
        let y = w.gcd(&c);
        let fac = w.div_exact(&y).expect("gcd divides");
        if fac.degree().unwrap_or(0) > 0 {
            out.push((fac, i));
        }
        w = y.clone();
        c = c.div_exact(&y).expect("gcd divides");
        i += 1;
    }
    if c.degree().unwrap_or(0) > 0 {
        let root = pth_root(&c);
        for (g, m) in squarefree_decomposition(&root) {
            out.push((g, m * p as usize));
        }
    }
    out
}

/// Distinct-degree split of a monic squarefree polynomial: returns
/// `(product of all irreducible factors of degree k, k)`.
pub fn distinct_degree_split(f: &FpPoly) -> Vec<(FpPoly, usize)> {
    let p = f.modulus();
    let mut out = Vec::new();
    let mut rest = f.monic();
    let x = FpPoly::monomial(p, 1, 1);
    let mut h = x.clone();
    let mut k = 0;
    while rest.degree().unwrap_or(0) >= 2 * (k + 1) {
        k += 1;
        h = h.powmod(p as u128, &rest);
        let g = rest.gcd(&(&h - &x));
        if g.degree().unwrap_or(0) > 0 {
            rest = rest.div_exact(&g).expect("gcd divides");
            h = h.rem(&rest);
            out.push((g, k));
        }
    }
    if let Some(n) = rest.degree() {
        if n > 0 {
            out.push((rest, n));
        }
    }
    out
}

/// a^((p^k - 1)/2) mod f, computed without forming p^k.
fn half_norm_power(a: &FpPoly, k: usize, f: &FpPoly) -> FpPoly {
    let p = f.modulus();
    let mut s = a.clone();
    let mut acc = a.clone();
    for _ in 1..k {
        s = s.powmod(p as u128, f);
        acc = acc.mulmod(&s, f);
    }
    acc.powmod(((p - 1) / 2) as u128, f)
}

/// Absolute trace a + a^2 + ... + a^(2^(k-1)) mod f for p = 2.
fn trace_power(a: &FpPoly, k: usize, f: &FpPoly) -> FpPoly {
    let mut s = a.rem(f);
    let mut acc = s.clone();
    for _ in 1..k {
        s = s.mulmod(&s, f);
        acc = &acc + &s;
    }
    acc
}

fn random_poly(p: u64, below: usize, rng: &mut ChaCha8Rng) -> FpPoly {
    FpPoly::new(p, (0..below).map(|_| rng.gen_range(0..p)).collect())
}

/// Split a monic squarefree product of irreducibles all of degree `k`.
pub fn equal_degree_split(f: &FpPoly, k: usize, rng: &mut ChaCha8Rng) -> Vec<FpPoly> {
    let p = f.modulus();
    let n = f.deg_or_zero();
    if n == k {
        return vec![f.monic()];
    }
    loop {
        let a = random_poly(p, n, rng);
        if a.degree().unwrap_or(0) == 0 {
            continue;
        }
        let mut g = a.gcd(f);
        if g.degree().unwrap_or(0) == 0 {
            let b = if p == 2 {
                trace_power(&a, k, f)
            } else {
                &half_norm_power(&a, k, f) - &FpPoly::one(p)
            };
            g = b.gcd(f);
        }
        let dg = g.degree().unwrap_or(0);
        if dg > 0 && dg < n {
            let h = f.div_exact(&g).expect("gcd divides");
            let mut out = equal_degree_split(&g, k, rng);
            out.extend(equal_degree_split(&h, k, rng));
            return out;
        }
    }
}

fn sort_key(f: &FpPoly) -> (usize, Vec<u64>) {
    (f.deg_or_zero(), f.coeffs().to_vec())
}

/// Full factorization into monic irreducibles with multiplicities.
pub fn factor_over_fp(d: &FpPoly, seed: u64) -> Result<Factorization> {
    if d.is_zero() {
        return Err(Error::ZeroPolynomial);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut factors: Vec<(FpPoly, usize)> = Vec::new();
    for (sqf, mult) in squarefree_decomposition(d) {
        for (block, k) in distinct_degree_split(&sqf) {
            for g in equal_degree_split(&block, k, &mut rng) {
                factors.push((g, mult));
            }
        }
    }
    factors.sort_by(|a, b| sort_key(&a.0).cmp(&sort_key(&b.0)));
    // equal factors cannot come from different squarefree parts, but merge anyway
    let mut merged: Vec<(FpPoly, usize)> = Vec::new();
    for (f, m) in factors {
        match merged.last_mut() {
            Some((g, n)) if *g == f => *n += m,
            _ => merged.push((f, m)),
        }
    }
    Ok(Factorization {
        unit: d.lead(),
        factors: merged,
    })
}

fn prime_divisors(mut n: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut q = 2;
    while q * q <= n {
        if n % q == 0 {
            out.push(q);
            while n % q == 0 {
                n /= q;
            }
        }
        q += 1;
    }
    if n > 1 {
        out.push(n);
    }
    out
}

/// Rabin's irreducibility test.
pub fn is_irreducible(f: &FpPoly) -> bool {
    let n = match f.degree() {
        Some(n) if n >= 1 => n,
        _ => return false,
    };
    if n == 1 {
        return true;
    }
    let p = f.modulus();
    let f = f.monic();
    let x = FpPoly::monomial(p, 1, 1);
    let frob_iter = |k: usize| {
        let mut h = x.clone();
        for _ in 0..k {
            h = h.powmod(p as u128, &f);
        }
        h
    };
    if &frob_iter(n) - &x != FpPoly::zero(p) {
        return false;
    }
    prime_divisors(n).into_iter().all(|q| {
        let h = frob_iter(n / q);
        f.gcd(&(&h - &x)).is_one()
    })
}

/// Seeded search for a monic irreducible polynomial of degree `m`.
pub fn random_irreducible(p: u64, m: usize, seed: u64) -> FpPoly {
    if m == 1 {
        return FpPoly::new(p, vec![0, 1]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let mut coeffs: Vec<u64> = (0..m).map(|_| rng.gen_range(0..p)).collect();
        coeffs.push(1);
        let f = FpPoly::new(p, coeffs);
        if is_irreducible(&f) {
            return f;
        }
    }
}

/// Roots of `f` lying in F_p, ascending, without multiplicity.
pub fn roots_in_prime_field(f: &FpPoly) -> Vec<u64> {
    let p = f.modulus();
    (0..p).filter(|&x| f.eval(x) == 0).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn difference_of_squares_mod_five() {
        let f = FpPoly::from_i64(5, &[-1, 0, 1]);
        let fac = factor_over_fp(&f, DEFAULT_SEED).unwrap();
        assert_eq!(
            fac.factors,
            vec![
                (FpPoly::from_i64(5, &[1, 1]), 1),
                (FpPoly::from_i64(5, &[-1, 1]), 1)
            ]
        );
    }

    #[test]
    fn frobenius_cube() {
        let f = FpPoly::new(3, vec![1, 0, 0, 1]);
        let fac = factor_over_fp(&f, DEFAULT_SEED).unwrap();
        assert_eq!(fac.factors, vec![(FpPoly::new(3, vec![1, 1]), 3)]);
    }

    #[test]
    fn legendre_hasse_polynomial_at_five_is_irreducible() {
        // discriminant 12 = 2 mod 5 is a non-residue
        let f = FpPoly::new(5, vec![1, 4, 1]);
        let fac = factor_over_fp(&f, DEFAULT_SEED).unwrap();
        assert_eq!(fac.factors, vec![(f.clone(), 1)]);
        assert!(is_irreducible(&f));
    }

    #[test]
    fn zero_is_rejected() {
        assert_eq!(
            factor_over_fp(&FpPoly::zero(7), 1).unwrap_err(),
            Error::ZeroPolynomial
        );
    }

    #[test]
    fn characteristic_two() {
        // (x^2 + x + 1)(x + 1)^2 over F_2
        let f = &FpPoly::new(2, vec![1, 1, 1]) * &FpPoly::new(2, vec![1, 1]).pow(2);
        let fac = factor_over_fp(&f, 3).unwrap();
        assert_eq!(
            fac.factors,
            vec![(FpPoly::new(2, vec![1, 1]), 2), (FpPoly::new(2, vec![1, 1, 1]), 1)]
        );
    }

    #[test]
    fn seed_changes_nothing_in_the_output() {
        let f = FpPoly::new(11, (1..=13).collect());
        let a = factor_over_fp(&f, 1).unwrap();
        let b = factor_over_fp(&f, 99).unwrap();
        assert_eq!(a, b);
    }

    proptest! {
        #[test]
        fn factorization_round_trip(
            p in prop::sample::select(vec![2u64, 3, 5, 7, 13]),
            coeffs in proptest::collection::vec(0u64..13, 1..24),
            seed in any::<u64>(),
        ) {
            let f = FpPoly::new(p, coeffs);
            prop_assume!(!f.is_zero());
            let fac = factor_over_fp(&f, seed).unwrap();
            prop_assert_eq!(fac.expand(p), f.clone());
            prop_assert_eq!(fac.degree(), f.deg_or_zero());
            for (g, _) in &fac.factors {
                prop_assert!(g.is_monic());
                prop_assert!(is_irreducible(g));
            }
            for w in fac.factors.windows(2) {
                prop_assert!(sort_key(&w[0].0) < sort_key(&w[1].0));
            }
        }
    }
}
