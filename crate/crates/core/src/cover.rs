//! Discrete invariants of a cyclic-cover family: genus, eigenspace
//! dimensions, relabeling symmetries, automorphism orders and grouping of
//! parameter values into isomorphism classes.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use num_integer::gcd;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ext::{ExtElem, ExtField};

/// Branch label (1-based) kept fixed in genus one when the caller does not
/// pick one. Labels 1, 2, 3, 4 sit at 0, 1, t, ∞.
pub const DEFAULT_MARKED_LABEL: usize = 4;

/// A cover degree d and local monodromy exponents a_1..a_n.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct InertiaType {
    pub d: u64,
    pub a: Vec<u64>,
}

impl fmt::Display for InertiaType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a: Vec<String> = self.a.iter().map(u64::to_string).collect();
        write!(f, "{}:{}", self.d, a.join(","))
    }
}

impl FromStr for InertiaType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Parse(format!("expected \"d:a1,...,an\", got {s:?}"));
        let (d, rest) = s.trim().split_once(':').ok_or_else(bad)?;
        let d: u64 = d.trim().parse().map_err(|_| bad())?;
        let a = rest
            .split(',')
            .map(|x| x.trim().parse::<u64>().map_err(|_| bad()))
            .collect::<Result<Vec<_>>>()?;
        Self::new(d, a)
    }
}

/// Genus and eigenspace dimensions f_1..f_{d-1}.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SignatureData {
    pub genus: u64,
    pub f: Vec<u64>,
}

impl SignatureData {
    /// f_j for 1 ≤ j ≤ d-1.
    pub fn dim(&self, j: u64) -> u64 {
        self.f[(j - 1) as usize]
    }
}

impl InertiaType {
    pub fn new(d: u64, a: Vec<u64>) -> Result<Self> {
        let invalid = |msg: &str| Err(Error::InvalidInertiaType(msg.to_string()));
        if d < 2 {
            return invalid("d must be at least 2");
        }
        if a.len() < 4 {
            return invalid("need at least four branch points");
        }
        if a.iter().any(|&x| x == 0 || x >= d) {
            return invalid("every a_i must satisfy 0 < a_i < d");
        }
        if a.iter().sum::<u64>() % d != 0 {
            return invalid("sum of a_i must be divisible by d");
        }
        if a.iter().fold(d, |g, &x| gcd(g, x)) != 1 {
            return invalid("gcd of d and the a_i must be 1");
        }
        Ok(Self { d, a })
    }

    pub fn n(&self) -> usize {
        self.a.len()
    }

    pub fn genus(&self) -> u64 {
        let d = self.d as i64;
        let s: i64 = self.a.iter().map(|&x| d - gcd(d, x as i64)).sum();
        let twice = 2 - 2 * d + s;
        assert!(twice >= 0 && twice % 2 == 0, "Riemann-Hurwitz gives a non-integer genus");
        (twice / 2) as u64
    }

    pub fn signature(&self) -> SignatureData {
        let d = self.d;
        let f: Vec<u64> = (1..d)
            .map(|j| {
                let s: u64 = self.a.iter().map(|&x| (d - j * x % d) % d).sum();
                assert!(s % d == 0 && s >= d, "fractional parts must sum to a positive integer");
                s / d - 1
            })
            .collect();
        let genus = self.genus();
        assert_eq!(f.iter().sum::<u64>(), genus, "eigenspace dimensions must add up to g");
        SignatureData { genus, f }
    }

    pub(crate) fn require_four(&self) -> Result<()> {
        if self.n() == 4 {
            Ok(())
        } else {
            Err(Error::NeedsFourPoints(self.n()))
        }
    }

    /// Whether the generic member is ordinary: f constant on every orbit of
    /// j ↦ p j mod d.
    pub fn generically_ordinary_4pt(&self, p: u64) -> Result<bool> {
        self.require_four()?;
        if self.d % p == 0 {
            return Err(Error::PDividesD { p, d: self.d });
        }
        let sig = self.signature();
        Ok((1..self.d).all(|j| sig.dim(j) == sig.dim(p * j % self.d)))
    }

    /// Units of Z/d.
    pub fn units(&self) -> Vec<u64> {
        (1..self.d).filter(|&l| gcd(l, self.d) == 1).collect()
    }

    /// The compatible pairs (ℓ, σ) with a_{σ(i)} ≡ ℓ^{-1} a_i mod d. With a
    /// marked label, only σ fixing that label (0-based) are kept.
    pub fn compatibility_set(&self, marked: Option<usize>) -> CompatibilitySet {
        let d = self.d;
        let n = self.n();
        let mut elements = Vec::new();
        for ell in self.units() {
            let ell_inv = (1..d).find(|&m| m * ell % d == 1).expect("unit");
            let target: Vec<u64> = self.a.iter().map(|&x| x * ell_inv % d).collect();
            let mut sigma = vec![usize::MAX; n];
            let mut used = vec![false; n];
            self.extend_matching(&target, 0, &mut sigma, &mut used, marked, &mut |s| {
                elements.push(Compatibility { ell, sigma: s.to_vec() })
            });
        }
        elements.sort();
        CompatibilitySet { elements, marked }
    }

    fn extend_matching(
        &self,
        target: &[u64],
        i: usize,
        sigma: &mut Vec<usize>,
        used: &mut Vec<bool>,
        marked: Option<usize>,
        emit: &mut dyn FnMut(&[usize]),
    ) {
        if i == self.n() {
            emit(sigma);
            return;
        }
        for c in 0..self.n() {
            if used[c] || self.a[c] != target[i] {
                continue;
            }
            if marked == Some(i) && c != i {
                continue;
            }
            used[c] = true;
            sigma[i] = c;
            self.extend_matching(target, i + 1, sigma, used, marked, emit);
            used[c] = false;
        }
    }

    /// δ, the number of compatible relabelings. In genus one the marked
    /// label (0-based) is honored; otherwise it is ignored.
    pub fn delta_degree(&self, marked: Option<usize>) -> (usize, CompatibilitySet) {
        let set = self.compatibility_set(self.effective_marked(marked));
        (set.elements.len(), set)
    }

    /// The marked label only matters in genus one.
    pub fn effective_marked(&self, marked: Option<usize>) -> Option<usize> {
        if self.genus() == 1 {
            marked
        } else {
            None
        }
    }

    /// Representative under simultaneous ℓ-scaling and sorting of labels.
    pub fn canonical(&self) -> InertiaType {
        self.units()
            .into_iter()
            .map(|ell| {
                let mut a: Vec<u64> = self.a.iter().map(|&x| x * ell % self.d).collect();
                a.sort_unstable();
                InertiaType { d: self.d, a }
            })
            .min()
            .expect("1 is a unit")
    }

    /// Automorphism order d·#(compatible σ acting trivially on the
    /// parameter), i.e. the order for a generic fiber.
    pub fn generic_aut_order(&self, marked: Option<usize>) -> Result<u64> {
        self.require_four()?;
        let (_, set) = self.delta_degree(marked);
        let klein = set.elements.iter().filter(|c| is_klein(&c.sigma)).count();
        Ok(self.d * klein as u64)
    }
}

/// The double transpositions together with the identity: the kernel of the
/// action of S_4 on cross-ratios.
fn is_klein(sigma: &[usize]) -> bool {
    let fixed = (0..4).filter(|&i| sigma[i] == i).count();
    let involution = (0..4).all(|i| sigma[sigma[i]] == i);
    fixed == 4 || (fixed == 0 && involution)
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct Compatibility {
    pub ell: u64,
    /// 0-based images σ(0), ..., σ(n-1).
    pub sigma: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CompatibilitySet {
    pub elements: Vec<Compatibility>,
    pub marked: Option<usize>,
}

impl CompatibilitySet {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn contains(&self, c: &Compatibility) -> bool {
        self.elements.binary_search(c).is_ok()
    }
}

/// A point of P^1 as (x : z).
pub type Proj = (ExtElem, ExtElem);

fn bracket(k: &ExtField, a: &Proj, b: &Proj) -> ExtElem {
    k.sub(&k.mul(&a.0, &b.1), &k.mul(&a.1, &b.0))
}

/// The four branch points 0, 1, t, ∞ in label order.
pub fn branch_points(k: &ExtField, t: &ExtElem) -> [Proj; 4] {
    [
        (k.zero(), k.one()),
        (k.one(), k.one()),
        (t.clone(), k.one()),
        (k.one(), k.zero()),
    ]
}

/// 2×2 matrix acting on column vectors (x, z).
pub type Mobius = [[ExtElem; 2]; 2];

/// The Möbius map sending z1, z2, z4 to 0, 1, ∞.
pub fn to_standard(k: &ExtField, z1: &Proj, z2: &Proj, z4: &Proj) -> Mobius {
    let c24 = bracket(k, z2, z4);
    let c21 = bracket(k, z2, z1);
    [
        [k.mul(&c24, &z1.1), k.neg(&k.mul(&c24, &z1.0))],
        [k.mul(&c21, &z4.1), k.neg(&k.mul(&c21, &z4.0))],
    ]
}

pub fn apply(k: &ExtField, m: &Mobius, z: &Proj) -> Proj {
    (
        k.add(&k.mul(&m[0][0], &z.0), &k.mul(&m[0][1], &z.1)),
        k.add(&k.mul(&m[1][0], &z.0), &k.mul(&m[1][1], &z.1)),
    )
}

pub(crate) fn same_point(k: &ExtField, a: &Proj, b: &Proj) -> bool {
    k.is_zero(&bracket(k, a, b))
}

fn affine(k: &ExtField, z: &Proj) -> Option<ExtElem> {
    k.div(&z.0, &z.1)
}

/// Number of Möbius maps permuting a finite set of distinct points: the
/// ordered triples whose standardizing map sends the set to the same image
/// as the first triple.
pub fn mobius_stabilizer_order(k: &ExtField, points: &[Proj]) -> usize {
    let n = points.len();
    assert!(n >= 3, "a set of fewer than three points has infinite stabilizer");
    let image = |i: usize, j: usize, l: usize| {
        let m = to_standard(k, &points[i], &points[j], &points[l]);
        let mut v: Vec<Option<ExtElem>> = points.iter().map(|z| affine(k, &apply(k, &m, z))).collect();
        v.sort();
        v
    };
    let reference = image(0, 1, 2);
    let mut count = 0;
    for i in 0..n {
        for j in (0..n).filter(|&j| j != i) {
            for l in (0..n).filter(|&l| l != i && l != j) {
                if image(i, j, l) == reference {
                    count += 1;
                }
            }
        }
    }
    count
}

/// The parameter of the fiber reached from X_t by relabeling along σ:
/// the cross-ratio of (P_{σ(1)}, ..., P_{σ(4)}).
pub fn moved_parameter(k: &ExtField, t: &ExtElem, sigma: &[usize]) -> ExtElem {
    let pts = branch_points(k, t);
    let z = |i: usize| &pts[sigma[i]];
    let num = k.mul(&bracket(k, z(2), z(0)), &bracket(k, z(1), z(3)));
    let den = k.mul(&bracket(k, z(1), z(0)), &bracket(k, z(2), z(3)));
    k.div(&num, &den).expect("distinct branch points")
}

#[derive(Clone, Debug, Serialize)]
pub struct MobiusSymmetry {
    pub ell: u64,
    pub sigma: Vec<usize>,
    #[serde(skip)]
    pub matrix: Mobius,
}

#[derive(Clone, Debug, Serialize)]
pub struct FiberSymmetry {
    #[serde(skip)]
    pub t: ExtElem,
    pub stabilizer: Vec<MobiusSymmetry>,
    pub aut_order: u64,
    pub marked_label: Option<usize>,
}

fn check_fiber(k: &ExtField, t: &ExtElem) -> Result<()> {
    if k.is_zero(t) || t == &k.one() {
        Err(Error::DegenerateFiber)
    } else {
        Ok(())
    }
}

/// The compatible Möbius maps preserving {0, 1, t, ∞} and the resulting
/// order of Aut(X_t, τ).
pub fn aut_order_4pt(
    it: &InertiaType,
    k: &ExtField,
    t: &ExtElem,
    marked: Option<usize>,
) -> Result<FiberSymmetry> {
    it.require_four()?;
    check_fiber(k, t)?;
    let marked = it.effective_marked(marked);
    let set = it.compatibility_set(marked);
    let pts = branch_points(k, t);
    let mut stabilizer = Vec::new();
    for c in &set.elements {
        if &moved_parameter(k, t, &c.sigma) != t {
            continue;
        }
        let s = &c.sigma;
        let nu = to_standard(k, &pts[s[0]], &pts[s[1]], &pts[s[3]]);
        for i in 0..4 {
            assert!(
                same_point(k, &apply(k, &nu, &pts[s[i]]), &pts[i]),
                "stabilizing map must permute the branch points"
            );
        }
        stabilizer.push(MobiusSymmetry {
            ell: c.ell,
            sigma: c.sigma.clone(),
            matrix: nu,
        });
    }
    Ok(FiberSymmetry {
        t: t.clone(),
        aut_order: it.d * stabilizer.len() as u64,
        stabilizer,
        marked_label: marked,
    })
}

/// The equivalence class of t: all parameters reachable by compatible
/// relabelings.
pub fn parameter_orbit(
    it: &InertiaType,
    k: &ExtField,
    t: &ExtElem,
    marked: Option<usize>,
) -> Result<BTreeSet<ExtElem>> {
    it.require_four()?;
    check_fiber(k, t)?;
    let set = it.compatibility_set(it.effective_marked(marked));
    Ok(set
        .elements
        .iter()
        .map(|c| moved_parameter(k, t, &c.sigma))
        .collect())
}

#[derive(Clone, Debug)]
pub struct IsoClass {
    /// Lexicographically minimal coordinates among the class members.
    pub representative: ExtElem,
    pub orbit: Vec<ExtElem>,
    pub multiplicity: usize,
    pub aut_order: u64,
}

/// Groups roots (all living in the field `k`) into isomorphism classes.
/// Every class must be contained in the input with one common multiplicity
/// and one common automorphism order.
pub fn iso_classes_4pt(
    it: &InertiaType,
    k: &ExtField,
    roots: &[(ExtElem, usize)],
    marked: Option<usize>,
) -> Result<Vec<IsoClass>> {
    let lookup: std::collections::BTreeMap<&ExtElem, usize> =
        roots.iter().map(|(r, m)| (r, *m)).collect();
    let mut seen = BTreeSet::new();
    let mut classes = Vec::new();
    for (r, m) in roots {
        if seen.contains(r) {
            continue;
        }
        let orbit = parameter_orbit(it, k, r, marked)?;
        let mut aut = None;
        for s in &orbit {
            match lookup.get(s) {
                Some(ms) if ms == m => {}
                Some(ms) => {
                    return Err(Error::InconsistentMultiplicity(format!(
                        "{r:?} has multiplicity {m} but {s:?} has {ms}"
                    )))
                }
                None => {
                    return Err(Error::InconsistentMultiplicity(format!(
                        "{s:?} is equivalent to root {r:?} but is not a root"
                    )))
                }
            }
            let a = aut_order_4pt(it, k, s, marked)?.aut_order;
            assert!(aut.is_none_or(|x| x == a), "Aut order must be constant on a class");
            aut = Some(a);
            seen.insert(s.clone());
        }
        let orbit: Vec<ExtElem> = orbit.into_iter().collect();
        classes.push(IsoClass {
            representative: orbit[0].clone(),
            orbit,
            multiplicity: *m,
            aut_order: aut.expect("orbit contains t"),
        });
    }
    classes.sort_by(|a, b| a.representative.cmp(&b.representative));
    Ok(classes)
}
