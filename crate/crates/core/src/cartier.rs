//! Cartier–Manin matrices of cyclic-cover families, symbolic in the
//! parameter t, and the invariants read off them at concrete fibers.
//!
//! Eigenspace L_j (dimension f_j) is spanned by
//!
//! ```text
//! ω_{j,b} = x^(b-1) · x^r1 (x-1)^r2 (x-t)^r3 dx / y^k,   k = d - j,
//! ```
//!
//! with r_i = ⌊k a_i / d⌋. Writing w_k = y^k / ∏ (x - t_i)^r_i, so that
//! w_k^d = ∏ (x - t_i)^(k a_i mod d), the Cartier operator sends L_j to
//! L_{j'} with p j' ≡ j mod d, and the (b', b) entry is the coefficient of
//! x^(p b' - b) in ∏ (x - t_i)^E_i, E_i = (p (k' a_i mod d) - (k a_i mod d)) / d.
//! For d = 2 this is the classical f^((p-1)/2) recipe.

use serde::Serialize;

use crate::bivariate::{product_coeff_window, FptPoly};
use crate::cover::InertiaType;
use crate::error::{Error, Result};
use crate::ext::{ExtElem, ExtField};
use crate::linalg;
use crate::poly::FpPoly;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EigenBasis {
    pub j: u64,
    /// Power of y in the denominator, d - j.
    pub y_power: u64,
    /// Exponents r_1, r_2, r_3 of x, x - 1, x - t in the numerator.
    pub normalizer: [u64; 3],
    /// Exponents b of the holomorphic differentials, increasing.
    pub exponents: Vec<u64>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DifferentialBasis {
    pub d: u64,
    /// One entry for each j = 1..d-1.
    pub spaces: Vec<EigenBasis>,
}

impl DifferentialBasis {
    pub fn space(&self, j: u64) -> &EigenBasis {
        &self.spaces[(j - 1) as usize]
    }
}

/// Order of vanishing of x^(b-1) ∏ (x - t_i)^r_i dx / y^k at the place over
/// branch point `i` (0, 1, 2 for 0, 1, t; 3 for ∞).
fn valuation_at(it: &InertiaType, k: u64, normalizer: [u64; 3], b: u64, i: usize) -> i64 {
    let d = it.d as i64;
    let a = &it.a;
    let g = num_integer::gcd(a[i] as i64, d);
    let e = d / g;
    let k = k as i64;
    let n = [b as i64 - 1 + normalizer[0] as i64, normalizer[1] as i64, normalizer[2] as i64];
    if i < 3 {
        e * (n[i] + 1) - 1 - k * a[i] as i64 / g
    } else {
        let finite: i64 = a[..3].iter().map(|&x| x as i64).sum();
        let deg: i64 = n.iter().sum();
        -e * deg - e - 1 + k * (e * finite / d)
    }
}

/// Holomorphic differentials of every eigenspace, found by exact valuation
/// tests and checked against the eigenspace dimensions.
pub fn differential_basis(it: &InertiaType) -> Result<DifferentialBasis> {
    if it.n() != 4 {
        return Err(Error::NeedsFourPoints(it.n()));
    }
    let d = it.d;
    let sig = it.signature();
    let mut spaces = Vec::new();
    for j in 1..d {
        let k = d - j;
        let normalizer = [0, 1, 2].map(|i| k * it.a[i] / d);
        let exponents: Vec<u64> = (1..=sig.genus + d + 2)
            .filter(|&b| (0..4).all(|i| valuation_at(it, k, normalizer, b, i) >= 0))
            .collect();
        assert_eq!(
            exponents.len() as u64,
            sig.dim(j),
            "holomorphic differentials in eigenspace {j} must number f_j"
        );
        assert!(
            exponents.iter().enumerate().all(|(i, &b)| b == i as u64 + 1),
            "holomorphic exponents form an initial segment"
        );
        spaces.push(EigenBasis { j, y_power: k, normalizer, exponents });
    }
    Ok(DifferentialBasis { d, spaces })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CartierBlock {
    pub source_j: u64,
    pub target_j: u64,
    /// (p k' - k) / d, the power of y^d absorbed when moving y^-k to y^-(p k').
    pub e: u64,
    /// E_1, E_2, E_3; empty for hyperelliptic input.
    pub point_exponents: Vec<u64>,
    /// Target basis exponents b' (rows).
    pub rows: Vec<u64>,
    /// Source basis exponents b (columns).
    pub cols: Vec<u64>,
    pub entries: Vec<Vec<FpPoly>>,
}

impl CartierBlock {
    pub fn is_square(&self) -> bool {
        self.rows.len() == self.cols.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CartierMatrix {
    pub p: u64,
    pub d: u64,
    pub a: Option<Vec<u64>>,
    pub genus: u64,
    pub blocks: Vec<CartierBlock>,
}

impl CartierMatrix {
    /// Global basis order: eigenspace index ascending, then exponent.
    pub fn basis_index(&self) -> Vec<(u64, u64)> {
        let mut idx: Vec<(u64, u64)> = self
            .blocks
            .iter()
            .flat_map(|b| b.cols.iter().map(move |&e| (b.source_j, e)))
            .collect();
        idx.sort_unstable();
        idx
    }

    pub fn all_square(&self) -> bool {
        self.blocks.iter().all(CartierBlock::is_square)
    }

    /// The g × g matrix with F_p[t] entries; rows are targets.
    pub fn full(&self) -> Vec<Vec<FpPoly>> {
        let idx = self.basis_index();
        let pos = |j: u64, b: u64| idx.binary_search(&(j, b)).expect("basis element");
        let g = idx.len();
        let mut m = vec![vec![FpPoly::zero(self.p); g]; g];
        for blk in &self.blocks {
            for (r, &bp) in blk.rows.iter().enumerate() {
                for (c, &b) in blk.cols.iter().enumerate() {
                    m[pos(blk.target_j, bp)][pos(blk.source_j, b)] = blk.entries[r][c].clone();
                }
            }
        }
        m
    }

    pub fn specialize(&self, k: &ExtField, t: &ExtElem) -> Vec<Vec<ExtElem>> {
        self.full()
            .iter()
            .map(|row| row.iter().map(|e| k.eval_poly(e, t)).collect())
            .collect()
    }
}

/// Single-block matrix of y^2 = f(x): entry (i, j) is the coefficient of
/// x^(p i - j) in f^((p-1)/2).
pub fn cartier_hyperelliptic(f: &FptPoly, p: u64, g: u64) -> Result<CartierMatrix> {
    if p == 2 {
        return Err(Error::HyperellipticNeedsOddP);
    }
    let deg = f.x_degree().unwrap_or(0) as u64;
    if g == 0 || (deg != 2 * g + 1 && deg != 2 * g + 2) {
        return Err(Error::Invalid(format!(
            "degree {deg} does not define a hyperelliptic curve of genus {g}"
        )));
    }
    let e = (p - 1) / 2;
    let exps: Vec<u64> = (1..=g).collect();
    let wanted: Vec<usize> = exps
        .iter()
        .flat_map(|&i| exps.iter().map(move |&j| (p * i - j) as usize))
        .collect();
    let coeffs = product_coeff_window(&[(f.clone(), e)], &wanted);
    let entries = exps
        .iter()
        .map(|&i| exps.iter().map(|&j| coeffs[&((p * i - j) as usize)].clone()).collect())
        .collect();
    Ok(CartierMatrix {
        p,
        d: 2,
        a: None,
        genus: g,
        blocks: vec![CartierBlock {
            source_j: 1,
            target_j: 1,
            e,
            point_exponents: Vec::new(),
            rows: exps.clone(),
            cols: exps,
            entries,
        }],
    })
}

/// Block matrix of y^d = x^a1 (x-1)^a2 (x-t)^a3 with symbolic t.
pub fn cartier_superelliptic_4pt(it: &InertiaType, p: u64) -> Result<CartierMatrix> {
    let d = it.d;
    if d % p == 0 {
        return Err(Error::PDividesD { p, d });
    }
    if p < d {
        return Err(Error::UseOracle { p, d });
    }
    let basis = differential_basis(it)?;
    let factors = [
        FptPoly::from_x_poly(&FpPoly::monomial(p, 1, 1)),
        FptPoly::from_x_poly(&FpPoly::from_i64(p, &[-1, 1])),
        FptPoly::x_minus_t(p),
    ];
    let mut blocks = Vec::new();
    for j in 1..d {
        let src = basis.space(j);
        let k = src.y_power;
        let kp = (1..d).find(|&kp| p * kp % d == k).expect("p is a unit mod d");
        let tgt = basis.space(d - kp);
        if src.exponents.is_empty() && tgt.exponents.is_empty() {
            continue;
        }
        let point_exponents: Vec<u64> = (0..3)
            .map(|i| (p * (kp * it.a[i] % d) - k * it.a[i] % d) / d)
            .collect();
        let wanted: Vec<usize> = tgt
            .exponents
            .iter()
            .flat_map(|&bp| src.exponents.iter().map(move |&b| (p * bp - b) as usize))
            .collect();
        let powers: Vec<(FptPoly, u64)> = factors
            .iter()
            .cloned()
            .zip(point_exponents.iter().copied())
            .collect();
        let coeffs = product_coeff_window(&powers, &wanted);
        let entries = tgt
            .exponents
            .iter()
            .map(|&bp| {
                src.exponents
                    .iter()
                    .map(|&b| coeffs[&((p * bp - b) as usize)].clone())
                    .collect()
            })
            .collect();
        blocks.push(CartierBlock {
            source_j: j,
            target_j: d - kp,
            e: (p * kp - k) / d,
            point_exponents,
            rows: tgt.exponents.clone(),
            cols: src.exponents.clone(),
            entries,
        });
    }
    Ok(CartierMatrix {
        p,
        d,
        a: Some(it.a.clone()),
        genus: it.genus(),
        blocks,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DetCartier {
    Polynomial(FpPoly),
    /// Some block is not square, or the determinant vanishes identically.
    NotGenericallyOrdinary,
}

/// D(t): the product of the block determinants, entries taken as they are.
pub fn det_cartier(cm: &CartierMatrix) -> DetCartier {
    if !cm.all_square() {
        return DetCartier::NotGenericallyOrdinary;
    }
    let d = cm
        .blocks
        .iter()
        .fold(FpPoly::one(cm.p), |acc, b| &acc * &linalg::det_poly(&b.entries, cm.p));
    if d.is_zero() {
        DetCartier::NotGenericallyOrdinary
    } else {
        DetCartier::Polynomial(d)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FiberInvariants {
    pub a_number: u64,
    pub p_rank: u64,
    pub alpha: u64,
}

/// Multiplicity of `t` as a root of D.
pub fn root_multiplicity(dpoly: &FpPoly, k: &ExtField, t: &ExtElem) -> u64 {
    assert!(!dpoly.is_zero(), "multiplicity in the zero polynomial");
    let m = k.min_poly(t);
    let mut rest = dpoly.clone();
    let mut alpha = 0;
    while let Some(q) = rest.div_exact(&m) {
        rest = q;
        alpha += 1;
    }
    alpha
}

/// a-number, p-rank and vanishing order of D at a concrete fiber.
pub fn fiber_invariants(
    cm: &CartierMatrix,
    k: &ExtField,
    t: &ExtElem,
    dpoly: &FpPoly,
) -> Result<FiberInvariants> {
    if cm.a.is_some() && (k.is_zero(t) || t == &k.one()) {
        return Err(Error::DegenerateFiber);
    }
    let g = cm.genus;
    let m = cm.specialize(k, t);
    let a_number = g - linalg::rank(&m, k) as u64;
    // M^(p^(g-1)) ··· M^(p) M, where M^(q) evaluates the entries at t^q
    let mut acc = m;
    let mut tq = t.clone();
    for _ in 1..g {
        tq = k.frobenius(&tq);
        acc = linalg::mat_mul(&cm.specialize(k, &tq), &acc, k);
    }
    let p_rank = linalg::rank(&acc, k) as u64;
    let alpha = root_multiplicity(dpoly, k, t);
    Ok(FiberInvariants { a_number, p_rank, alpha })
}

/// P_n(S) with P_0 = 2, P_1 = S, P_{n+2} = S P_{n+1} - P_n, integer
/// coefficients, lowest degree first.
pub fn dihedral_chebyshev(n: usize) -> Vec<i64> {
    let mut prev = vec![2i64];
    let mut cur = vec![0i64, 1];
    if n == 0 {
        return prev;
    }
    for _ in 1..n {
        let mut next = vec![0i64; cur.len() + 1];
        for (i, &c) in cur.iter().enumerate() {
            next[i + 1] += c;
        }
        for (i, &c) in prev.iter().enumerate() {
            next[i] -= c;
        }
        prev = cur;
        cur = next;
    }
    cur
}

/// The two hyperelliptic quotients Z_{ε,t}: v^2 = (u + 2ε)(P_d(u) + 2 - 4t),
/// ε = +1 then -1, each of genus (d-1)/2. They come from
/// Y^2 = W^(2d) + (2 - 4t) W^d + 1 = W^d (P_d(u) + 2 - 4t), u = W + 1/W,
/// divided by W -> 1/W composed with either sign of Y.
pub fn dihedral_decomposition(d: u64, p: u64) -> Result<[FptPoly; 2]> {
    if d % 2 == 0 {
        return Err(Error::EvenDegree(d));
    }
    if p % 2 == 0 || d % p == 0 {
        return Err(Error::PDividesD { p, d: 2 * d });
    }
    let pd = FpPoly::from_i64(p, &dihedral_chebyshev(d as usize));
    let shift = FpPoly::new(p, vec![2, p - 4 % p]); // 2 - 4t
    let model = |eps: i64| {
        let lin = FptPoly::from_x_poly(&FpPoly::from_i64(p, &[2 * eps, 1]));
        let mut inner: Vec<FpPoly> = pd.coeffs().iter().map(|&c| FpPoly::constant(p, c)).collect();
        inner[0] = &inner[0] + &shift;
        lin.mul(&FptPoly::new(p, inner))
    };
    Ok([model(1), model(-1)])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn it(s: &str) -> InertiaType {
        s.parse().unwrap()
    }

    fn legendre(p: u64) -> FptPoly {
        FptPoly::four_point(p, [1, 1, 1])
    }

    #[test]
    fn legendre_matrix_mod_three_and_five() {
        let m3 = cartier_hyperelliptic(&legendre(3), 3, 1).unwrap();
        assert_eq!(m3.blocks[0].entries[0][0], FpPoly::from_i64(3, &[-1, -1]));
        let m5 = cartier_hyperelliptic(&legendre(5), 5, 1).unwrap();
        assert_eq!(
            det_cartier(&m5),
            DetCartier::Polynomial(FpPoly::new(5, vec![1, 4, 1]))
        );
        assert_eq!(
            cartier_hyperelliptic(&legendre(2), 2, 1).unwrap_err(),
            Error::HyperellipticNeedsOddP
        );
    }

    #[test]
    fn constant_supersingular_curve() {
        let f = FptPoly::from_x_poly(&FpPoly::new(3, vec![1, 0, 0, 1]));
        let m = cartier_hyperelliptic(&f, 3, 1).unwrap();
        assert!(m.blocks[0].entries[0][0].is_zero());
        assert_eq!(det_cartier(&m), DetCartier::NotGenericallyOrdinary);
        let k = ExtField::prime(3);
        let inv = fiber_invariants(&m, &k, &k.from_base(2), &FpPoly::one(3)).unwrap();
        assert_eq!(inv.a_number, 1);
    }

    #[test]
    fn degree_two_specialization_agrees() {
        for p in [3u64, 5, 7, 11, 13] {
            let a = cartier_superelliptic_4pt(&it("2:1,1,1,1"), p).unwrap();
            let b = cartier_hyperelliptic(&legendre(p), p, 1).unwrap();
            assert_eq!(a.full(), b.full());
        }
    }

    #[test]
    fn bases_have_signature_dimensions() {
        for d in 2..=12u64 {
            for a1 in 1..d {
                for a2 in 1..d {
                    for a3 in 1..d {
                        let a4 = (4 * d - a1 - a2 - a3) % d;
                        if a4 == 0 {
                            continue;
                        }
                        if let Ok(t) = InertiaType::new(d, vec![a1, a2, a3, a4]) {
                            differential_basis(&t).unwrap();
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn diagonal_and_antidiagonal_wiring() {
        for (d, p) in [(3u64, 7u64), (5, 11), (3, 5), (5, 19)] {
            let t = InertiaType::new(d, vec![1, 1, d - 1, d - 1]).unwrap();
            let cm = cartier_superelliptic_4pt(&t, p).unwrap();
            for b in &cm.blocks {
                assert_eq!((b.rows.len(), b.cols.len()), (1, 1));
                if p % d == 1 {
                    assert_eq!(b.target_j, b.source_j);
                } else {
                    assert_eq!(b.target_j, d - b.source_j);
                }
            }
        }
    }

    #[test]
    fn non_square_blocks_flag_non_ordinary_family() {
        let cm = cartier_superelliptic_4pt(&it("5:1,1,1,2"), 7).unwrap();
        assert!(!cm.all_square());
        assert_eq!(det_cartier(&cm), DetCartier::NotGenericallyOrdinary);
        assert_eq!(
            cartier_superelliptic_4pt(&it("5:1,1,1,2"), 3).unwrap_err(),
            Error::UseOracle { p: 3, d: 5 }
        );
    }

    #[test]
    fn legendre_supersingular_fiber() {
        let p = 7;
        let cm = cartier_hyperelliptic(&legendre(p), p, 1).unwrap();
        let DetCartier::Polynomial(dp) = det_cartier(&cm) else { panic!() };
        // t = -1 is supersingular for p = 7 (y^2 = x^3 - x, p ≡ 3 mod 4)
        let k = ExtField::prime(p);
        let inv = fiber_invariants(&cm, &k, &k.from_i64(-1), &dp).unwrap();
        assert_eq!(inv, FiberInvariants { a_number: 1, p_rank: 0, alpha: 1 });
        let ord = fiber_invariants(&cm, &k, &k.from_base(3), &dp).unwrap();
        assert_eq!(ord, FiberInvariants { a_number: 0, p_rank: 1, alpha: 0 });
    }

    #[test]
    fn chebyshev_recurrence() {
        assert_eq!(dihedral_chebyshev(2), vec![-2, 0, 1]);
        assert_eq!(dihedral_chebyshev(3), vec![0, -3, 0, 1]);
        let [plus, minus] = dihedral_decomposition(3, 7).unwrap();
        // (u + 2)(u^3 - 3u + 2 - 4t) = u^4 + 2u^3 - 3u^2 + (-4 - 4t)u + 4 - 8t
        assert_eq!(plus.coeff(0), FpPoly::from_i64(7, &[4, -8]));
        assert_eq!(plus.coeff(1), FpPoly::from_i64(7, &[-4, -4]));
        assert_eq!(plus.coeff(3), FpPoly::constant(7, 2));
        assert_eq!(minus.coeff(3), FpPoly::from_i64(7, &[-2]));
        assert_eq!(dihedral_decomposition(4, 7).unwrap_err(), Error::EvenDegree(4));
    }
}
