//! Independent checks: the Cartier operator applied directly to
//! differentials R(x) y^-k dx on y^d = x^a1 (x-1)^a2 (x-t)^a3 at a concrete
//! t, and point counts over small finite fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bivariate::FptPoly;
use crate::cartier::{self, CartierMatrix};
use crate::cover::InertiaType;
use crate::error::{Error, Result};
use crate::ext::{EPoly, ExtElem, ExtField};
use crate::poly::FpPoly;

/// Rational function in x, reduced, with monic denominator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatFn {
    pub num: EPoly,
    pub den: EPoly,
}

impl RatFn {
    pub fn new(k: &ExtField, num: EPoly, den: EPoly) -> Self {
        assert!(!den.is_zero(), "zero denominator");
        if num.is_zero() {
            return Self { num, den: EPoly::one(k) };
        }
        let g = num.gcd(&den, k);
        let num = num.div_exact(&g, k).expect("gcd divides");
        let den = den.div_exact(&g, k).expect("gcd divides");
        let lead = k.inv(&den.lead(k)).expect("nonzero lead");
        Self {
            num: num.scale(&lead, k),
            den: den.scale(&lead, k),
        }
    }

    pub fn poly(k: &ExtField, num: EPoly) -> Self {
        Self::new(k, num, EPoly::one(k))
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn mul(&self, o: &Self, k: &ExtField) -> Self {
        Self::new(k, self.num.mul(&o.num, k), self.den.mul(&o.den, k))
    }

    pub fn add(&self, o: &Self, k: &ExtField) -> Self {
        let num = self.num.mul(&o.den, k).add(&o.num.mul(&self.den, k), k);
        Self::new(k, num, self.den.mul(&o.den, k))
    }

    pub fn scale(&self, c: &ExtElem, k: &ExtField) -> Self {
        Self::new(k, self.num.scale(c, k), self.den.clone())
    }

    /// self^n for any integer n (n < 0 inverts).
    pub fn powi(&self, n: i64, k: &ExtField) -> Self {
        let (num, den) = if n >= 0 {
            (self.num.pow(n as u64, k), self.den.pow(n as u64, k))
        } else {
            (self.den.pow(n.unsigned_abs(), k), self.num.pow(n.unsigned_abs(), k))
        };
        Self::new(k, num, den)
    }

    pub fn derivative(&self, k: &ExtField) -> Self {
        let num = self
            .num
            .derivative(k)
            .mul(&self.den, k)
            .sub(&self.num.mul(&self.den.derivative(k), k), k);
        Self::new(k, num, self.den.mul(&self.den, k))
    }
}

/// The differential R(x) y^-k dx.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Differential {
    pub k: i64,
    pub r: RatFn,
}

/// A concrete fiber y^d = f(x), f = x^a1 (x-1)^a2 (x-t)^a3.
#[derive(Clone, Debug)]
pub struct Fiber {
    pub d: u64,
    pub a: [u64; 3],
    pub field: ExtField,
    pub t: ExtElem,
    pub f: RatFn,
}

impl Fiber {
    pub fn new(it: &InertiaType, field: &ExtField, t: &ExtElem) -> Result<Self> {
        if it.n() != 4 {
            return Err(Error::NeedsFourPoints(it.n()));
        }
        if it.d % field.p() == 0 {
            return Err(Error::PDividesD { p: field.p(), d: it.d });
        }
        if field.is_zero(t) || t == &field.one() {
            return Err(Error::DegenerateFiber);
        }
        let k = field;
        let f = EPoly::x(k)
            .pow(it.a[0], k)
            .mul(&EPoly::linear(k, &k.one()).pow(it.a[1], k), k)
            .mul(&EPoly::linear(k, t).pow(it.a[2], k), k);
        Ok(Self {
            d: it.d,
            a: [it.a[0], it.a[1], it.a[2]],
            field: field.clone(),
            t: t.clone(),
            f: RatFn::poly(k, f),
        })
    }

    fn k(&self) -> &ExtField {
        &self.field
    }

    /// ∏ (x - t_i)^r_i with r_i = ⌊k a_i / d⌋.
    pub fn normalizer(&self, y_power: u64) -> EPoly {
        let k = self.k();
        let pts = [k.zero(), k.one(), self.t.clone()];
        (0..3).fold(EPoly::one(k), |acc, i| {
            acc.mul(&EPoly::linear(k, &pts[i]).pow(y_power * self.a[i] / self.d, k), k)
        })
    }

    /// ω_{j,b} = x^(b-1) · normalizer · dx / y^(d-j).
    pub fn basis_differential(&self, j: u64, b: u64) -> Differential {
        let k = self.k();
        let y_power = self.d - j;
        let num = EPoly::monomial(k, k.one(), (b - 1) as usize).mul(&self.normalizer(y_power), k);
        Differential { k: y_power as i64, r: RatFn::poly(k, num) }
    }

    /// Same differential with the power of y reduced into [0, d).
    pub fn normalize(&self, w: &Differential) -> Differential {
        let d = self.d as i64;
        let k0 = w.k.rem_euclid(d);
        let c = (w.k - k0) / d;
        Differential {
            k: k0,
            r: w.r.mul(&self.f.powi(-c, self.k()), self.k()),
        }
    }

    /// dF for F = R(x) y^m: (R' + (m/d) R f'/f) y^m dx.
    pub fn exact(&self, r: &RatFn, m: i64) -> Differential {
        let k = self.k();
        let p = k.p();
        let dinv = crate::field::inv(self.d % p, p);
        let coef = k.from_base(crate::field::mul(crate::field::from_i64(m, p), dinv, p));
        let log_f = self.f.derivative(k).mul(&self.f.powi(-1, k), k);
        let r_total = r.derivative(k).add(&r.mul(&log_f, k).scale(&coef, k), k);
        Differential { k: -m, r: r_total }
    }

    /// F^(p-1) dF for F = R(x) y^m.
    pub fn power_times_exact(&self, r: &RatFn, m: i64) -> Differential {
        let k = self.k();
        let p = k.p() as i64;
        let df = self.exact(r, m);
        Differential {
            k: -m * p,
            r: df.r.mul(&r.powi(p - 1, k), k),
        }
    }

    /// The Cartier operator, from first principles: move to y^-(p k'), pull
    /// the p-th power out, and apply C(x^m dx) = x^((m+1)/p - 1) dx when
    /// p | m + 1 (zero otherwise) with p-th roots of the coefficients.
    pub fn cartier(&self, w: &Differential) -> Differential {
        let k = self.k();
        let p = k.p();
        let d = self.d as i64;
        let w = self.normalize(w);
        let (kp, r) = if w.k == 0 {
            (0, w.r.clone())
        } else {
            let kp = (1..d)
                .find(|&kp| (p as i64 * kp).rem_euclid(d) == w.k)
                .expect("p is a unit mod d");
            let e = (p as i64 * kp - w.k) / d;
            (kp, w.r.mul(&self.f.powi(e, k), k))
        };
        let s = r.num.mul(&r.den.pow(p - 1, k), k);
        let mut out = Vec::new();
        for (m, c) in s.coeffs.iter().enumerate() {
            if (m + 1) % p as usize == 0 {
                let idx = (m + 1) / p as usize - 1;
                if out.len() <= idx {
                    out.resize(idx + 1, k.zero());
                }
                out[idx] = k.frobenius_inverse(c);
            }
        }
        let image = RatFn::new(k, EPoly::new(k, out), r.den.clone());
        Differential { k: kp, r: image }
    }

    /// Coordinates of a differential in the basis of its eigenspace: the
    /// coefficients c_b of x^(b-1) after dividing out the normalizer.
    pub fn coordinates(&self, w: &Differential, count: usize) -> Result<Vec<ExtElem>> {
        let k = self.k();
        let w = self.normalize(w);
        if w.r.is_zero() {
            return Ok(vec![k.zero(); count]);
        }
        let not_basis = || Error::Invalid("differential is not in the holomorphic basis".into());
        if w.k == 0 {
            return Err(not_basis());
        }
        let whole = w.r.num.div_exact(&w.r.den, k).ok_or_else(not_basis)?;
        let poly = whole
            .div_exact(&self.normalizer(w.k as u64), k)
            .ok_or_else(not_basis)?;
        if poly.coeffs.len() > count {
            return Err(not_basis());
        }
        Ok((0..count).map(|i| poly.coeff(k, i)).collect())
    }
}

/// All elements of a (small) finite field.
pub fn elements(k: &ExtField) -> Vec<ExtElem> {
    let p = k.p();
    let m = k.degree();
    let q = k.order().expect("small field") as u64;
    (0..q)
        .map(|mut n| {
            let coords: Vec<u64> = (0..m)
                .map(|_| {
                    let c = n % p;
                    n /= p;
                    c
                })
                .collect();
            k.elem(&coords)
        })
        .collect()
}

/// Quadratic character on F_q, q odd.
pub fn quadratic_character(k: &ExtField, c: &ExtElem) -> i64 {
    if k.is_zero(c) {
        return 0;
    }
    let q = k.order().expect("small field");
    if k.pow(c, (q - 1) / 2) == k.one() {
        1
    } else {
        -1
    }
}

/// Number of y in F_q with y^d = c.
fn count_roots_of_unity_fiber(k: &ExtField, d: u64, c: &ExtElem) -> u64 {
    if k.is_zero(c) {
        return 1;
    }
    let q = k.order().expect("small field") as u64;
    let g = num_integer::gcd(d, q - 1);
    if k.pow(c, ((q - 1) / g) as u128) == k.one() {
        g
    } else {
        0
    }
}

/// #E(F_q) for the Legendre curve y^2 = x(x-1)(x-t).
pub fn legendre_point_count(k: &ExtField, t: &ExtElem) -> u64 {
    let total: i64 = elements(k)
        .iter()
        .map(|x| {
            let v = k.mul(&k.mul(x, &k.sub(x, &k.one())), &k.sub(x, t));
            1 + quadratic_character(k, &v)
        })
        .sum();
    (total + 1) as u64
}

/// Points on the smooth complete model of y^d = x (x-1) (x-t)^(d-1): the
/// four branch points are totally ramified and contribute one point each.
pub fn dihedral_superelliptic_point_count(k: &ExtField, d: u64, t: &ExtElem) -> u64 {
    let branch = [k.zero(), k.one(), t.clone()];
    let affine: u64 = elements(k)
        .iter()
        .filter(|x| !branch.contains(x))
        .map(|x| {
            let v = k.mul(
                &k.mul(x, &k.sub(x, &k.one())),
                &k.pow(&k.sub(x, t), (d - 1) as u128),
            );
            count_roots_of_unity_fiber(k, d, &v)
        })
        .sum();
    affine + 4
}

/// Points on the smooth complete model of Y^2 = W^(2d) + (2-4t) W^d + 1:
/// the leading coefficient is a square, so two points at infinity.
pub fn dihedral_hyperelliptic_point_count(k: &ExtField, d: u64, t: &ExtElem) -> u64 {
    let mid = k.sub(&k.from_base(2), &k.scale(t, 4));
    let total: i64 = elements(k)
        .iter()
        .map(|w| {
            let wd = k.pow(w, d as u128);
            let v = k.add(&k.add(&k.mul(&wd, &wd), &k.mul(&mid, &wd)), &k.one());
            1 + quadratic_character(k, &v)
        })
        .sum();
    (total + 2) as u64
}

/// Outcome of comparing the symbolic Cartier matrix with the direct
/// operator at random fibers.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub family: String,
    pub p: u64,
    pub field_degree: usize,
    pub seed: u64,
    /// Coordinates of the sampled parameter values.
    pub samples: Vec<Vec<u64>>,
    pub entries_checked: usize,
    pub entry_mismatches: usize,
    pub exactness_checked: usize,
    pub exactness_failures: usize,
    /// Windowed coefficients against the fully expanded product, when
    /// requested.
    pub full_expansion_agrees: Option<bool>,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.entry_mismatches == 0
            && self.exactness_failures == 0
            && self.full_expansion_agrees != Some(false)
    }
}

fn random_elem(k: &ExtField, rng: &mut ChaCha8Rng) -> ExtElem {
    let coords: Vec<u64> = (0..k.degree()).map(|_| rng.gen_range(0..k.p())).collect();
    k.elem(&coords)
}

/// Every block entry of `cm` recomputed by expanding the whole product.
pub fn full_expansion_agrees(cm: &CartierMatrix) -> bool {
    let p = cm.p;
    let factors = [
        FptPoly::from_x_poly(&FpPoly::monomial(p, 1, 1)),
        FptPoly::from_x_poly(&FpPoly::from_i64(p, &[-1, 1])),
        FptPoly::x_minus_t(p),
    ];
    cm.blocks.iter().all(|blk| {
        let prod = factors
            .iter()
            .zip(&blk.point_exponents)
            .fold(FptPoly::one(p), |acc, (f, &e)| acc.mul(&f.pow(e)));
        blk.rows.iter().enumerate().all(|(r, &bp)| {
            blk.cols
                .iter()
                .enumerate()
                .all(|(c, &b)| prod.coeff((p * bp - b) as usize) == blk.entries[r][c])
        })
    })
}

/// At `samples` random t in F_{p^m}: the direct Cartier image of every basis
/// differential has coordinates whose Frobenius twist equals the symbolic
/// entry at t, C kills exact forms dF, and C(F^(p-1) dF) = dF.
pub fn oracle_check(
    it: &InertiaType,
    p: u64,
    m: usize,
    samples: usize,
    seed: u64,
    full_expansion: bool,
) -> Result<OracleReport> {
    let cm = cartier::cartier_superelliptic_4pt(it, p)?;
    let basis = cartier::differential_basis(it)?;
    let k = ExtField::of_degree(p, m, seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut report = OracleReport {
        family: it.to_string(),
        p,
        field_degree: m,
        seed,
        samples: Vec::new(),
        entries_checked: 0,
        entry_mismatches: 0,
        exactness_checked: 0,
        exactness_failures: 0,
        full_expansion_agrees: full_expansion.then(|| full_expansion_agrees(&cm)),
    };
    while report.samples.len() < samples {
        let t = random_elem(&k, &mut rng);
        if k.is_zero(&t) || t == k.one() {
            continue;
        }
        let fib = Fiber::new(it, &k, &t)?;
        for blk in &cm.blocks {
            let n = basis.space(blk.target_j).exponents.len();
            for (c, &b) in blk.cols.iter().enumerate() {
                let image = fib.cartier(&fib.basis_differential(blk.source_j, b));
                let coords = fib.coordinates(&image, n)?;
                for (r, coord) in coords.iter().enumerate() {
                    report.entries_checked += 1;
                    if k.frobenius(coord) != k.eval_poly(&blk.entries[r][c], &t) {
                        report.entry_mismatches += 1;
                    }
                }
            }
        }
        let num = EPoly::new(&k, (0..3).map(|_| random_elem(&k, &mut rng)).collect());
        let den = EPoly::linear(&k, &random_elem(&k, &mut rng));
        let r = RatFn::new(&k, num, den);
        let power = rng.gen_range(-3i64..=3);
        let df = fib.exact(&r, power);
        let killed = fib.normalize(&fib.cartier(&df)).r.is_zero();
        let fixed = fib.normalize(&fib.cartier(&fib.power_times_exact(&r, power)))
            == fib.normalize(&df);
        report.exactness_checked += 2;
        report.exactness_failures += (!killed) as usize + (!fixed) as usize;
        report.samples.push(t.coords().to_vec());
    }
    Ok(report)
}

/// Legendre fibers over F_p: (values checked, disagreements) between
/// p-rank 0 from the Cartier matrix and #E(F_p) ≡ 1 mod p.
pub fn legendre_prank_against_point_counts(p: u64) -> Result<(usize, usize)> {
    let it: InertiaType = InertiaType::new(2, vec![1, 1, 1, 1])?;
    let cm = cartier::cartier_superelliptic_4pt(&it, p)?;
    let dpoly = match cartier::det_cartier(&cm) {
        cartier::DetCartier::Polynomial(d) => d,
        cartier::DetCartier::NotGenericallyOrdinary => return Err(Error::NotGenericallyOrdinary(p)),
    };
    let k = ExtField::prime(p);
    let mut checked = 0;
    let mut bad = 0;
    for c in 2..p {
        let t = k.from_base(c);
        let inv = cartier::fiber_invariants(&cm, &k, &t, &dpoly)?;
        let supersingular = legendre_point_count(&k, &t) % p == 1;
        checked += 1;
        bad += ((inv.p_rank == 0) != supersingular) as usize;
    }
    Ok((checked, bad))
}
