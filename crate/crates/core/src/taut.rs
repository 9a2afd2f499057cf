//! The tautological side: degrees of λ1 on one-parameter families and the
//! closed-form masses (p - 1) deg λ1 / δ.

use num_integer::gcd;
use num_traits::Zero;
use serde::Serialize;

use crate::cover::InertiaType;
use crate::error::{Error, Result};

pub type Rational = num_rational::Ratio<i128>;

pub fn ratio(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

/// "num/den", always with a denominator.
pub fn render(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

fn gcd_sq(x: u64, d: u64) -> i128 {
    let g = gcd(x, d) as i128;
    g * g
}

/// deg λ1 for a four-point family:
/// (d^2 - Σ gcd^2(a_i, d) + Σ_{i≤3} gcd^2(a_i + a_4, d)) / (12 d^2).
pub fn deg_lambda1_4pt(it: &InertiaType) -> Result<Rational> {
    if it.n() != 4 {
        return Err(Error::NeedsFourPoints(it.n()));
    }
    let d = it.d;
    let a = &it.a;
    let s1: i128 = a.iter().map(|&x| gcd_sq(x, d)).sum();
    let s2: i128 = a[..3].iter().map(|&x| gcd_sq(x + a[3], d)).sum();
    let dd = (d * d) as i128;
    Ok(ratio(dd - s1 + s2, 12 * dd))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ClassKind {
    Kappa1,
    /// −ψ_j, j 1-based.
    MinusPsi(usize),
    Boundary,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryTerm {
    /// 1-based labels.
    pub subset: Vec<usize>,
    #[serde(serialize_with = "ser_rational")]
    pub coefficient: Rational,
    pub kind: ClassKind,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryExpression {
    pub n: usize,
    pub d: u64,
    pub a: Vec<u64>,
    pub terms: Vec<BoundaryTerm>,
}

pub fn ser_rational<S: serde::Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&render(r))
}

/// λ1 as a combination over all subsets J of the labels, with coefficient
/// gcd^2(Σ_J a, d) / (24 d): κ1 for J empty or full, −ψ for |J| = 1 or
/// n − 1, and the boundary divisor Δ_J otherwise.
pub fn lambda1_boundary_expression(it: &InertiaType) -> BoundaryExpression {
    let n = it.n();
    assert!(n < 32, "subset enumeration is limited to fewer than 32 labels");
    let d = it.d;
    let mut terms = Vec::with_capacity(1 << n);
    for mask in 0u32..(1 << n) {
        let subset: Vec<usize> = (0..n).filter(|&i| mask >> i & 1 == 1).map(|i| i + 1).collect();
        let sum: u64 = subset.iter().map(|&i| it.a[i - 1]).sum();
        let coefficient = ratio(gcd_sq(sum, d), 24 * d as i128);
        let size = subset.len();
        let kind = if size == 0 || size == n {
            ClassKind::Kappa1
        } else if size == 1 {
            ClassKind::MinusPsi(subset[0])
        } else if size == n - 1 {
            let missing = (1..=n).find(|i| !subset.contains(i)).expect("one label missing");
            ClassKind::MinusPsi(missing)
        } else {
            ClassKind::Boundary
        };
        terms.push(BoundaryTerm { subset, coefficient, kind });
    }
    BoundaryExpression { n, d, a: it.a.clone(), terms }
}

impl BoundaryExpression {
    /// Degree on a four-point family: on the base every κ1, ψ_j and boundary
    /// point has degree one, and the cover family maps with degree d.
    pub fn evaluate_4pt(&self) -> Result<Rational> {
        if self.n != 4 {
            return Err(Error::NeedsFourPoints(self.n));
        }
        let total = self.terms.iter().fold(Rational::zero(), |acc, t| match t.kind {
            ClassKind::MinusPsi(_) => acc - t.coefficient,
            _ => acc + t.coefficient,
        });
        Ok(total / Rational::from(self.d as i128))
    }
}

/// Intersection numbers of the family y^2 = h(x)(x - t) (moving label
/// 2g + 2) with the tautological classes on the space of 2g + 2 points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IntersectionLedger {
    pub g: u64,
    /// F·ψ_i for i = 1..2g+2.
    #[serde(serialize_with = "ser_rational_vec")]
    pub psi: Vec<Rational>,
    #[serde(serialize_with = "ser_rational")]
    pub kappa1: Rational,
    /// F·Δ_{i, 2g+2} for each fixed label i; all other boundary divisors
    /// are disjoint from F.
    #[serde(serialize_with = "ser_rational")]
    pub delta_with_moving: Rational,
    /// C_s: aggregate of the classes indexed by subsets of size s.
    #[serde(serialize_with = "ser_rational_vec")]
    pub c: Vec<Rational>,
}

pub fn ser_rational_vec<S: serde::Serializer>(
    v: &[Rational],
    s: S,
) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeSeq;
    let mut seq = s.serialize_seq(Some(v.len()))?;
    for r in v {
        seq.serialize_element(&render(r))?;
    }
    seq.end()
}

/// deg λ1 = g/4 on the linearized hyperelliptic family, assembled from the
/// itemized intersections.
pub fn deg_lambda1_linearized(g: u64) -> Result<(Rational, IntersectionLedger)> {
    if g < 2 {
        return Err(Error::GenusOutOfRange(g));
    }
    let n = 2 * g as usize + 2;
    let gi = g as i128;
    let half = ratio(1, 2);
    let mut psi = vec![half; n];
    psi[n - 1] = ratio(2 * gi - 1, 2);
    let kappa1 = ratio(2 * gi - 1, 2);
    let delta_with_moving = half;

    let mut c = vec![Rational::zero(); n + 1];
    c[0] = kappa1;
    c[n] = kappa1;
    c[1] = -psi.iter().copied().sum::<Rational>();
    c[n - 1] = c[1];
    c[2] = delta_with_moving * Rational::from(n as i128 - 1);
    c[n - 2] = c[2];

    // λ1·F = Σ_J gcd^2(|J|, 2)/48 · (F-degree of the class of J). Only the
    // subsets J with a class meeting F contribute; they are grouped by type.
    let coef = |size: usize| ratio(gcd_sq(size as u64, 2), 48);
    let m = Rational::from(n as i128 - 1);
    let psi_fixed = psi[0];
    let psi_moving = psi[n - 1];
    let total = coef(0) * kappa1 + coef(n) * kappa1
        // |J| = 1 and |J| = n - 1: one subset per label
        - (coef(1) + coef(n - 1)) * (m * psi_fixed + psi_moving)
        // {i, moving} and its complement, for each fixed label i
        + (coef(2) + coef(n - 2)) * m * delta_with_moving;
    let closed = (Rational::from(4) * c[2] + c[1] + Rational::from(4) * c[0]) / Rational::from(24);
    assert_eq!(total, closed, "itemized and aggregated λ1 degrees agree");
    assert_eq!(total, ratio(gi, 4));
    Ok((total, IntersectionLedger { g, psi, kappa1, delta_with_moving, c }))
}

/// The tautological data of a four-point family at p.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TautData {
    #[serde(serialize_with = "ser_rational")]
    pub deg_lambda1: Rational,
    pub delta: u64,
    #[serde(serialize_with = "ser_rational")]
    pub mass_rhs: Rational,
    /// Set when the generic member is not ordinary at p: the number still
    /// exists but is not a mass.
    pub warning: Option<String>,
}

pub fn taut_data_4pt(it: &InertiaType, p: u64, marked: Option<usize>) -> Result<TautData> {
    let deg_lambda1 = deg_lambda1_4pt(it)?;
    let (delta, _) = it.delta_degree(marked);
    let warning = (!it.generically_ordinary_4pt(p)?)
        .then(|| format!("{it} is not generically ordinary at p = {p}"));
    Ok(TautData {
        deg_lambda1,
        delta: delta as u64,
        mass_rhs: Rational::from(p as i128 - 1) * deg_lambda1 / Rational::from(delta as i128),
        warning,
    })
}

pub fn mass_rhs_linearized(g: u64, p: u64) -> Result<Rational> {
    let (deg, _) = deg_lambda1_linearized(g)?;
    Ok(Rational::from(p as i128 - 1) * deg)
}

/// Closed forms for the named four-point families, when `it` is one of
/// them: (name, mass as a function of p).
pub fn named_mass(it: &InertiaType, p: u64) -> Option<(&'static str, Rational)> {
    let d = it.d as i128;
    let pm = Rational::from(p as i128 - 1);
    let a = &it.a;
    let dd = d * d;
    if it.d == 2 && a == &[1, 1, 1, 1] {
        return Some(("legendre", pm / Rational::from(24)));
    }
    if it.d % 2 == 1 && a == &[1, 1, it.d - 1, it.d - 1] {
        return Some(("dihedral", pm * ratio(dd - 1, 32 * dd)));
    }
    if it.d % 2 == 0 && it.d >= 4 && a == &[1, it.d / 2, it.d / 2, it.d - 1] {
        let form = if it.d % 4 == 0 {
            ratio(1, 32)
        } else {
            ratio(dd + 4, 32 * dd)
        };
        return Some(("dihedral-second", pm * form));
    }
    if it.d >= 5 && gcd(it.d, 6) == 1 && a == &[1, 1, 1, it.d - 3] {
        return Some(("three-equal", pm * ratio(dd - 1, 72 * dd)));
    }
    None
}

#[derive(Clone, Debug, Serialize)]
pub struct MoonenRow {
    pub label: &'static str,
    pub family: String,
    pub g: u64,
    #[serde(serialize_with = "ser_rational")]
    pub deg_lambda1: Rational,
    pub delta: u64,
    pub z: u64,
    pub a_nu: u64,
    /// z deg λ1 / (a_ν δ), recomputed.
    #[serde(serialize_with = "ser_rational")]
    pub n: Rational,
    /// Tabulated growth constant, kept for comparison with `n`.
    #[serde(serialize_with = "ser_rational")]
    pub n_table: Rational,
    /// (p - 1) deg λ1 / δ; meaningful only when p ≡ 1 mod d.
    #[serde(serialize_with = "ser_rational")]
    pub mu: Rational,
    pub p_is_one_mod_d: bool,
}

/// (label, d, a, g, deg λ1, δ, z, a_ν, n) as tabulated.
type MoonenEntry = (&'static str, u64, [u64; 4], u64, (i128, i128), u64, u64, u64, (i128, i128));

pub const MOONEN_TABLE: [MoonenEntry; 14] = [
    ("M[1]", 2, [1, 1, 1, 1], 1, (1, 4), 6, 2, 1, (1, 12)),
    ("M[3]", 3, [1, 1, 2, 2], 2, (2, 9), 8, 12, 2, (1, 6)),
    ("M[4]", 4, [1, 2, 2, 3], 2, (1, 8), 4, 8, 2, (1, 8)),
    ("M[5]", 6, [2, 3, 3, 4], 2, (1, 9), 4, 12, 2, (1, 6)),
    ("M[7]", 4, [1, 1, 1, 1], 3, (1, 8), 24, 16, 1, (1, 12)),
    ("M[9]", 6, [1, 3, 4, 4], 3, (1, 18), 2, 6, 2, (1, 12)),
    ("M[11]", 5, [1, 3, 3, 3], 4, (2, 25), 6, 5, 2, (1, 30)),
    ("M[12]", 6, [1, 1, 1, 3], 4, (1, 12), 6, 6, 1, (1, 12)),
    ("M[13]", 6, [1, 1, 2, 2], 4, (1, 9), 4, 12, 2, (1, 6)),
    ("M[15]", 8, [2, 4, 5, 5], 5, (1, 16), 2, 8, 2, (1, 8)),
    ("M[17]", 7, [2, 4, 4, 4], 6, (4, 49), 6, 7, 2, (1, 21)),
    ("M[18]", 10, [3, 5, 6, 6], 6, (3, 50), 2, 10, 2, (3, 10)),
    ("M[19]", 9, [3, 5, 5, 5], 7, (2, 27), 6, 9, 2, (1, 18)),
    ("M[20]", 12, [4, 6, 7, 7], 7, (1, 18), 2, 12, 2, (1, 6)),
];

pub fn moonen_inertia_types() -> Vec<(&'static str, InertiaType, u64)> {
    MOONEN_TABLE
        .iter()
        .map(|e| (e.0, InertiaType::new(e.1, e.2.to_vec()).expect("valid table row"), e.7))
        .collect()
}

/// The fourteen rows, with g, deg λ1, δ and z recomputed and checked
/// against the tabulated values. `marked` is the genus-one marked label.
pub fn moonen_table(p: u64, marked: Option<usize>) -> Result<Vec<MoonenRow>> {
    MOONEN_TABLE
        .iter()
        .map(|&(label, d, a, g, deg, delta, z, a_nu, n_table)| {
            let it = InertiaType::new(d, a.to_vec())?;
            let deg_lambda1 = deg_lambda1_4pt(&it)?;
            let (delta_c, _) = it.delta_degree(marked);
            let z_c = it.generic_aut_order(marked)?;
            let check = |ok: bool, what: &str| {
                if ok {
                    Ok(())
                } else {
                    Err(Error::Invalid(format!("{label}: recomputed {what} differs from the table")))
                }
            };
            check(it.genus() == g, "genus")?;
            check(deg_lambda1 == ratio(deg.0, deg.1), "deg λ1")?;
            check(delta_c as u64 == delta, "δ")?;
            check(z_c == z, "z")?;
            let n = Rational::from(z as i128) * deg_lambda1
                / Rational::from((a_nu * delta) as i128);
            Ok(MoonenRow {
                label,
                family: it.to_string(),
                g,
                deg_lambda1,
                delta,
                z,
                a_nu,
                n,
                n_table: ratio(n_table.0, n_table.1),
                mu: Rational::from(p as i128 - 1) * deg_lambda1 / Rational::from(delta as i128),
                p_is_one_mod_d: p % d == 1,
            })
        })
        .collect()
}
