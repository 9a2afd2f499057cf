//! Polynomials in x whose coefficients are polynomials in t over F_p.

use std::collections::BTreeMap;
use std::fmt;

use crate::ext::{EPoly, ExtElem, ExtField};
use crate::poly::FpPoly;

/// Dense in x; `coeffs[k]` is the coefficient of x^k as a polynomial in t.
#[derive(Clone, PartialEq, Eq)]
pub struct FptPoly {
    p: u64,
    coeffs: Vec<FpPoly>,
}

impl fmt::Debug for FptPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| format!("({})*x^{k}", c.render("t")))
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl FptPoly {
    pub fn new(p: u64, coeffs: Vec<FpPoly>) -> Self {
        let mut out = Self { p, coeffs };
        while out.coeffs.last().is_some_and(FpPoly::is_zero) {
            out.coeffs.pop();
        }
        out
    }

    pub fn zero(p: u64) -> Self {
        Self { p, coeffs: Vec::new() }
    }

    pub fn one(p: u64) -> Self {
        Self::new(p, vec![FpPoly::one(p)])
    }

    /// A polynomial in x with constant (t-free) coefficients.
    pub fn from_x_poly(f: &FpPoly) -> Self {
        let p = f.modulus();
        Self::new(p, f.coeffs().iter().map(|&c| FpPoly::constant(p, c)).collect())
    }

    /// x - t
    pub fn x_minus_t(p: u64) -> Self {
        Self::new(p, vec![FpPoly::new(p, vec![0, p - 1]), FpPoly::one(p)])
    }

    /// x^{a1} (x-1)^{a2} (x-t)^{a3}
    pub fn four_point(p: u64, a: [u64; 3]) -> Self {
        let x = Self::from_x_poly(&FpPoly::monomial(p, 1, 1));
        let x1 = Self::from_x_poly(&FpPoly::from_i64(p, &[-1, 1]));
        x.pow(a[0]).mul(&x1.pow(a[1])).mul(&Self::x_minus_t(p).pow(a[2]))
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn coeffs(&self) -> &[FpPoly] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn x_degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn t_degree(&self) -> usize {
        self.coeffs.iter().map(FpPoly::deg_or_zero).max().unwrap_or(0)
    }

    pub fn coeff(&self, k: usize) -> FpPoly {
        self.coeffs
            .get(k)
            .cloned()
            .unwrap_or_else(|| FpPoly::zero(self.p))
    }

    /// Lowest x-exponent with a nonzero coefficient.
    pub fn x_valuation(&self) -> usize {
        self.coeffs.iter().position(|c| !c.is_zero()).unwrap_or(0)
    }

    pub fn mul(&self, other: &Self) -> Self {
        self.mul_trunc(other, usize::MAX)
    }

    /// Product keeping only x-exponents below `len`.
    pub fn mul_trunc(&self, other: &Self, len: usize) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(self.p);
        }
        let n = (self.coeffs.len() + other.coeffs.len() - 1).min(len);
        let mut out = vec![FpPoly::zero(self.p); n];
        for (i, a) in self.coeffs.iter().enumerate().take(n) {
            if a.is_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n - i) {
                if !b.is_zero() {
                    out[i + j] = &out[i + j] + &(a * b);
                }
            }
        }
        Self::new(self.p, out)
    }

    pub fn pow(&self, n: u64) -> Self {
        self.pow_trunc(n, usize::MAX)
    }

    pub fn pow_trunc(&self, mut n: u64, len: usize) -> Self {
        let mut acc = Self::one(self.p);
        let mut base = self.clone();
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul_trunc(&base, len);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul_trunc(&base, len);
            }
        }
        acc
    }

    fn shift_down(&self, v: usize) -> Self {
        Self::new(self.p, self.coeffs[v.min(self.coeffs.len())..].to_vec())
    }

    /// Substitute a concrete value for t.
    pub fn specialize(&self, k: &ExtField, t: &ExtElem) -> EPoly {
        EPoly::new(k, self.coeffs.iter().map(|c| k.eval_poly(c, t)).collect())
    }
}

/// Requested x-coefficients of a product of powers ∏ f_i^{n_i}, computed
/// with every intermediate product truncated just above the largest
/// requested index. Each factor's x-adic valuation is stripped first, so the
/// truncation point is measured from the product's lowest term.
pub fn product_coeff_window(
    factors: &[(FptPoly, u64)],
    indices: &[usize],
) -> BTreeMap<usize, FpPoly> {
    let p = factors.first().map_or(2, |(f, _)| f.modulus());
    let mut shift = 0usize;
    let mut stripped = Vec::with_capacity(factors.len());
    for (f, n) in factors {
        assert!(!f.is_zero(), "zero factor in coefficient window");
        let v = f.x_valuation();
        shift += v * *n as usize;
        stripped.push((f.shift_down(v), *n));
    }
    let top = indices.iter().copied().max().unwrap_or(0);
    let mut out = BTreeMap::new();
    if top < shift {
        for &k in indices {
            out.insert(k, FpPoly::zero(p));
        }
        return out;
    }
    let len = top - shift + 1;
    let mut acc = FptPoly::one(p);
    for (f, n) in &stripped {
        acc = acc.mul_trunc(&f.pow_trunc(*n, len), len);
    }
    for &k in indices {
        let c = if k < shift {
            FpPoly::zero(p)
        } else {
            acc.coeff(k - shift)
        };
        out.insert(k, c);
    }
    out
}

/// Requested x-coefficients of f^n without expanding f^n in full.
pub fn poly_pow_coeff_window(f: &FptPoly, n: u64, indices: &[usize]) -> BTreeMap<usize, FpPoly> {
    product_coeff_window(&[(f.clone(), n)], indices)
}

/// The same coefficients read off the fully expanded power.
pub fn poly_pow_coeff_full(f: &FptPoly, n: u64, indices: &[usize]) -> BTreeMap<usize, FpPoly> {
    let full = f.pow(n);
    indices.iter().map(|&k| (k, full.coeff(k))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn legendre(p: u64) -> FptPoly {
        FptPoly::four_point(p, [1, 1, 1])
    }

    #[test]
    fn cubic_x2_coefficient_mod_three() {
        let w = poly_pow_coeff_window(&legendre(3), 1, &[2]);
        assert_eq!(w[&2], FpPoly::from_i64(3, &[-1, -1]));
    }

    #[test]
    fn zeroth_power_is_one() {
        let w = poly_pow_coeff_window(&legendre(7), 0, &[0, 1, 5]);
        assert!(w[&0].is_one());
        assert!(w[&1].is_zero() && w[&5].is_zero());
    }

    #[test]
    fn square_x4_coefficient_mod_five() {
        let w = poly_pow_coeff_window(&legendre(5), 2, &[4]);
        assert_eq!(w[&4], FpPoly::new(5, vec![1, 4, 1]));
    }

    #[test]
    fn specialization_commutes_with_product() {
        let p = 7;
        let k = ExtField::of_degree(p, 2, 4);
        let t = k.elem(&[3, 5]);
        let f = legendre(p);
        let g = FptPoly::x_minus_t(p).pow(3);
        assert_eq!(
            f.mul(&g).specialize(&k, &t),
            f.specialize(&k, &t).mul(&g.specialize(&k, &t), &k)
        );
    }

    fn arb_fpt(p: u64) -> impl Strategy<Value = FptPoly> {
        proptest::collection::vec(proptest::collection::vec(0..p, 0..4), 1..6).prop_map(
            move |rows| FptPoly::new(p, rows.into_iter().map(|r| FpPoly::new(p, r)).collect()),
        )
    }

    proptest! {
        #[test]
        fn window_matches_full_expansion(
            f in arb_fpt(11),
            n in 0u64..40,
            idx in proptest::collection::vec(0usize..200, 1..6),
        ) {
            prop_assume!(!f.is_zero());
            prop_assume!(f.x_degree().unwrap() as u64 * n <= 2000);
            prop_assert_eq!(
                poly_pow_coeff_window(&f, n, &idx),
                poly_pow_coeff_full(&f, n, &idx)
            );
        }
    }
}
