//! Left side of the mass formula by enumeration of non-ordinary fibers,
//! compared with the tautological side, plus the genus-two class counts of
//! the two dihedral hyperelliptic families.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::bivariate::FptPoly;
use crate::cartier::{self, CartierMatrix, DetCartier};
use crate::cover::{self, InertiaType, IsoClass, Proj};
use crate::error::{Error, Result};
use crate::ext::{lcm, ExtElem, ExtField};
use crate::factor::{self, FactorRecord, DEFAULT_SEED};
use crate::field;
use crate::poly::FpPoly;
use crate::taut::{self, ratio, render, ser_rational, Rational};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Equal,
    Unequal,
    /// The generic member is not ordinary, so there is no mass to compare.
    NotApplicable,
    /// Only the smooth fibers were summed; degenerate fibers may be
    /// non-ordinary at this p and are not accounted for.
    InteriorOnly,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Equal => "equal",
            Verdict::Unequal => "unequal",
            Verdict::NotApplicable => "not-applicable",
            Verdict::InteriorOnly => "interior-only",
        })
    }
}

#[derive(Clone, Debug)]
pub struct MassOptions {
    pub seed: u64,
    /// 0-based branch label kept fixed by relabelings in genus one.
    pub marked: usize,
}

impl MassOptions {
    fn marked(&self) -> Option<usize> {
        Some(self.marked)
    }
}

impl Default for MassOptions {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, marked: cover::DEFAULT_MARKED_LABEL - 1 }
    }
}

/// A parameter value in F_{p^m}: the field modulus and the coordinates of
/// the value in the power basis of that field.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RootEncoding {
    pub modulus: FpPoly,
    pub coords: Vec<u64>,
}

impl RootEncoding {
    fn new(k: &ExtField, t: &ExtElem) -> Self {
        Self { modulus: k.modulus().clone(), coords: t.coords().to_vec() }
    }
}

impl fmt::Display for RootEncoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c: Vec<String> = self.coords.iter().map(u64::to_string).collect();
        write!(f, "[{}] mod {}", c.join(","), self.modulus.render("z"))
    }
}

/// One isomorphism class of non-ordinary fibers together with its Galois
/// conjugate classes, which share every invariant.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClassRecord {
    /// The lexicographically minimal parameter among all members.
    pub representative: RootEncoding,
    pub field_degree: usize,
    /// Number of Galois-conjugate classes this record stands for.
    pub conjugates: usize,
    /// Parameter values in one class.
    pub orbit: usize,
    pub alpha: u64,
    pub a_number: u64,
    pub p_rank: u64,
    /// #Aut(X, τ).
    pub aut_order: u64,
    /// Intersection multiplicity α·[Aut(X, τ) : Aut(X)], reported only when
    /// Aut(X) is known (hyperelliptic τ is central, so the index is 1).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_x: Option<u64>,
    /// The branch locus has a Möbius symmetry beyond the generic one.
    pub symmetric: bool,
    /// conjugates · α / aut_order
    #[serde(serialize_with = "ser_rational")]
    pub contribution: Rational,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BoundaryContribution {
    pub label: String,
    pub alpha: u64,
    #[serde(serialize_with = "ser_rational")]
    pub weight: Rational,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MassReport {
    pub family: String,
    pub p: u64,
    pub seed: u64,
    #[serde(rename = "D_degree")]
    pub d_degree: Option<usize>,
    pub d_factors: Vec<FactorRecord>,
    pub classes: Vec<ClassRecord>,
    pub boundary_contributions: Vec<BoundaryContribution>,
    #[serde(serialize_with = "ser_rational")]
    pub lhs: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub rhs: Rational,
    pub verdict: Verdict,
    pub notes: Vec<String>,
}

impl MassReport {
    fn new(family: String, p: u64, seed: u64, rhs: Rational) -> Self {
        Self {
            family,
            p,
            seed,
            d_degree: None,
            d_factors: Vec::new(),
            classes: Vec::new(),
            boundary_contributions: Vec::new(),
            lhs: Rational::from(0),
            rhs,
            verdict: Verdict::NotApplicable,
            notes: Vec::new(),
        }
    }

    fn close(&mut self, complete: bool) {
        self.lhs = self.classes.iter().map(|c| c.contribution).sum::<Rational>()
            + self.boundary_contributions.iter().map(|b| b.weight).sum::<Rational>();
        self.verdict = match (complete, self.lhs == self.rhs) {
            (false, _) => Verdict::InteriorOnly,
            (true, true) => Verdict::Equal,
            (true, false) => Verdict::Unequal,
        };
    }

    pub const TSV_HEADER: &'static str =
        "family\tp\tkind\trepresentative\tfield_degree\tconjugates\torbit\talpha\ta_number\tp_rank\taut_order\tcontribution";

    /// One row per class record and per boundary contribution.
    pub fn tsv_rows(&self) -> Vec<String> {
        let mut rows: Vec<String> = self
            .classes
            .iter()
            .map(|c| {
                format!(
                    "{}\t{}\tclass\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    self.family,
                    self.p,
                    c.representative,
                    c.field_degree,
                    c.conjugates,
                    c.orbit,
                    c.alpha,
                    c.a_number,
                    c.p_rank,
                    c.aut_order,
                    render(&c.contribution)
                )
            })
            .collect();
        rows.extend(self.boundary_contributions.iter().map(|b| {
            format!(
                "{}\t{}\tboundary\t{}\t\t\t\t{}\t\t\t\t{}",
                self.family,
                self.p,
                b.label,
                b.alpha,
                render(&b.weight)
            )
        }));
        rows
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from(Self::TSV_HEADER);
        out.push('\n');
        for r in self.tsv_rows() {
            out.push_str(&r);
            out.push('\n');
        }
        out
    }

    pub fn to_pretty(&self) -> String {
        let mut out = format!(
            "{} at p = {}: lhs = {}, rhs = {}, verdict {}\n",
            self.family,
            self.p,
            render(&self.lhs),
            render(&self.rhs),
            self.verdict
        );
        if let Some(deg) = self.d_degree {
            out.push_str(&format!("  deg D = {deg}, {} class records\n", self.classes.len()));
        }
        for c in &self.classes {
            out.push_str(&format!(
                "  t = {} (m = {}, x{}): orbit {}, alpha {}, a {}, p-rank {}, Aut {}, weight {}{}\n",
                c.representative,
                c.field_degree,
                c.conjugates,
                c.orbit,
                c.alpha,
                c.a_number,
                c.p_rank,
                c.aut_order,
                render(&c.contribution),
                if c.symmetric { ", symmetric" } else { "" }
            ));
        }
        for b in &self.boundary_contributions {
            out.push_str(&format!(
                "  {}: alpha {}, weight {} ({})\n",
                b.label,
                b.alpha,
                render(&b.weight),
                b.note
            ));
        }
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        out
    }
}

/// A one-parameter family the engine can verify.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Family {
    FourPoint(InertiaType),
    /// y^2 = h(x)(x - t) with h of odd degree 2g + 1.
    Linearized(FpPoly),
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::FourPoint(it) => write!(f, "{it}"),
            Family::Linearized(h) => write!(f, "y^2 = ({})(x - t)", h.render("x")),
        }
    }
}

/// Runs both sides of the mass formula for a family at p.
pub fn verify(family: &Family, p: u64, opts: &MassOptions) -> Result<MassReport> {
    match family {
        Family::FourPoint(it) => mass_lhs_4pt(it, p, opts),
        Family::Linearized(h) => {
            if h.modulus() != p {
                return Err(Error::Invalid(format!(
                    "h is defined over F_{}, not F_{p}",
                    h.modulus()
                )));
            }
            hyperelliptic_linearized_verify(h, opts)
        }
    }
}

fn factor_records(f: &factor::Factorization) -> Vec<FactorRecord> {
    f.factors
        .iter()
        .map(|(q, m)| FactorRecord { factor: q.coeffs().to_vec(), multiplicity: *m })
        .collect()
}

/// Mass of a four-point family: non-ordinary fibers grouped into
/// isomorphism classes, each weighted α/#Aut(X, τ).
///
/// For p ≢ 1 mod d the fibers over 0, 1, ∞ of the compactified family may
/// be non-ordinary, so the verdict is `InteriorOnly`.
pub fn mass_lhs_4pt(it: &InertiaType, p: u64, opts: &MassOptions) -> Result<MassReport> {
    field::check_prime(p)?;
    it.require_four()?;
    let td = taut::taut_data_4pt(it, p, opts.marked())?;
    let cm = cartier::cartier_superelliptic_4pt(it, p)?;
    let mut report = MassReport::new(it.to_string(), p, opts.seed, td.mass_rhs);
    report.notes.extend(td.warning);
    let dpoly = match cartier::det_cartier(&cm) {
        DetCartier::NotGenericallyOrdinary => {
            report.notes.push("D(t) vanishes identically".into());
            return Ok(report);
        }
        DetCartier::Polynomial(d) => d,
    };
    report.d_degree = dpoly.degree();
    let fz = factor::factor_over_fp(&dpoly, opts.seed)?;
    report.d_factors = factor_records(&fz);

    let excluded = [(FpPoly::monomial(p, 1, 1), "0"), (FpPoly::from_i64(p, &[-1, 1]), "1")];
    let mut interior = Vec::new();
    for (f, m) in &fz.factors {
        match excluded.iter().find(|(e, _)| e == f) {
            Some((_, at)) => report
                .notes
                .push(format!("D vanishes to order {m} at the degenerate fiber t = {at}; excluded")),
            None => interior.push((f.clone(), *m)),
        }
    }

    let clusters = relabeling_clusters(it, &interior, opts.marked())?;
    let per_cluster: Vec<Result<Vec<ClassRecord>>> = clusters
        .par_iter()
        .map(|c| cluster_classes(it, &cm, &dpoly, &interior, c, opts))
        .collect();
    for r in per_cluster {
        report.classes.extend(r?);
    }

    let total: usize = interior.iter().map(|(f, m)| f.deg_or_zero() * m).sum();
    let counted: usize = report
        .classes
        .iter()
        .map(|c| c.alpha as usize * c.orbit * c.conjugates)
        .sum();
    if counted != total {
        return Err(Error::Inconsistent(format!(
            "classes account for {counted} roots of D with multiplicity, expected {total}"
        )));
    }
    let congruent = p % it.d == 1;
    if congruent {
        if let Some(c) = report.classes.iter().find(|c| c.alpha != c.a_number) {
            return Err(Error::Inconsistent(format!(
                "alpha = {} but a-number = {} at t = {}",
                c.alpha, c.a_number, c.representative
            )));
        }
    } else {
        report.notes.push(format!(
            "p is not 1 mod {}: degenerate fibers are not summed",
            it.d
        ));
    }
    report.close(congruent);
    Ok(report)
}

/// Groups the irreducible factors of D whose roots are tied together by
/// compatible relabelings. Each group is returned as sorted factor indices.
fn relabeling_clusters(
    it: &InertiaType,
    factors: &[(FpPoly, usize)],
    marked: Option<usize>,
) -> Result<Vec<Vec<usize>>> {
    let set = it.compatibility_set(it.effective_marked(marked));
    let index: HashMap<&FpPoly, usize> =
        factors.iter().enumerate().map(|(i, (f, _))| (f, i)).collect();
    let images: Vec<Result<Vec<usize>>> = factors
        .par_iter()
        .map(|(f, _)| {
            let k = ExtField::new(f)?;
            let theta = k.generator();
            set.elements
                .iter()
                .map(|c| {
                    let q = k.min_poly(&cover::moved_parameter(&k, &theta, &c.sigma));
                    index.get(&q).copied().ok_or_else(|| {
                        Error::InconsistentMultiplicity(format!(
                            "a relabeling sends the roots of {} outside the roots of D",
                            f.render("t")
                        ))
                    })
                })
                .collect()
        })
        .collect();
    let mut parent: Vec<usize> = (0..factors.len()).collect();
    fn find(parent: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while parent[r] != r {
            r = parent[r];
        }
        parent[i] = r;
        r
    }
    for (i, img) in images.into_iter().enumerate() {
        for j in img? {
            let (a, b) = (find(&mut parent, i), find(&mut parent, j));
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..factors.len() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().push(i);
    }
    Ok(groups.into_values().collect())
}

fn cluster_classes(
    it: &InertiaType,
    cm: &CartierMatrix,
    dpoly: &FpPoly,
    factors: &[(FpPoly, usize)],
    cluster: &[usize],
    opts: &MassOptions,
) -> Result<Vec<ClassRecord>> {
    let k = ExtField::new(&factors[cluster[0]].0)?;
    let mut roots = Vec::new();
    for &i in cluster {
        let (f, m) = &factors[i];
        if f.deg_or_zero() != k.degree() {
            return Err(Error::Inconsistent(
                "relabeling changed the degree of a root".into(),
            ));
        }
        roots.extend(k.roots_of(f, opts.seed).into_iter().map(|r| (r, *m)));
    }
    let classes = cover::iso_classes_4pt(it, &k, &roots, opts.marked())?;
    let mut galois: BTreeMap<ExtElem, Vec<&IsoClass>> = BTreeMap::new();
    for c in &classes {
        let key = c
            .orbit
            .iter()
            .map(|x| k.canonical_conjugate(x))
            .min()
            .expect("nonempty class");
        galois.entry(key).or_default().push(c);
    }
    let mut out = Vec::new();
    for (key, group) in galois {
        let class = group
            .iter()
            .find(|c| c.orbit.contains(&key))
            .expect("the key is a member of its own class");
        let inv = cartier::fiber_invariants(cm, &k, &key, dpoly)?;
        if inv.alpha != class.multiplicity as u64 {
            return Err(Error::Inconsistent(format!(
                "root multiplicity {} differs from factor multiplicity {}",
                inv.alpha, class.multiplicity
            )));
        }
        let conjugates = group.len();
        out.push(ClassRecord {
            representative: RootEncoding::new(&k, &key),
            field_degree: k.degree(),
            conjugates,
            orbit: class.orbit.len(),
            alpha: inv.alpha,
            a_number: inv.a_number,
            p_rank: inv.p_rank,
            aut_order: class.aut_order,
            m_x: (it.d == 2).then_some(inv.alpha),
            symmetric: class.aut_order > it.generic_aut_order(opts.marked())?,
            contribution: ratio(
                conjugates as i128 * inv.alpha as i128,
                class.aut_order as i128,
            ),
        });
    }
    Ok(out)
}

/// Whether y^2 = f(x), f constant in t, is ordinary.
fn hyperelliptic_is_ordinary(f: &FpPoly, g: u64) -> Result<bool> {
    let cm = cartier::cartier_hyperelliptic(&FptPoly::from_x_poly(f), f.modulus(), g)?;
    Ok(matches!(cartier::det_cartier(&cm), DetCartier::Polynomial(_)))
}

/// All roots of `h` as points of P^1 in the field `k`.
fn root_points(k: &ExtField, h: &FpPoly, seed: u64) -> Vec<Proj> {
    k.roots_of(h, seed).into_iter().map(|r| (r, k.one())).collect()
}

fn splitting_degree(f: &FpPoly, seed: u64) -> Result<usize> {
    let fz = factor::factor_over_fp(f, seed)?;
    Ok(fz.factors.iter().fold(1, |acc, (q, _)| lcm(acc, q.deg_or_zero())))
}

/// Checks the preconditions on h for the linearized family and returns g.
pub fn linearized_genus(h: &FpPoly, seed: u64) -> Result<u64> {
    let p = h.modulus();
    field::check_prime(p)?;
    if p == 2 {
        return Err(Error::HyperellipticNeedsOddP);
    }
    let deg = h.degree().ok_or(Error::ZeroPolynomial)?;
    if deg % 2 == 0 {
        return Err(Error::Invalid(format!("h must have odd degree, got {deg}")));
    }
    let g = (deg as u64 - 1) / 2;
    if g < 2 {
        return Err(Error::GenusOutOfRange(g));
    }
    if !h.gcd(&h.derivative()).is_one() {
        return Err(Error::Invalid("h is not separable".into()));
    }
    let k = ExtField::of_degree(p, splitting_degree(h, seed)?, seed);
    let stab = cover::mobius_stabilizer_order(&k, &root_points(&k, h, seed));
    if stab > 1 {
        return Err(Error::PglSymmetry(format!(
            "{stab} Möbius maps permute the roots of {}",
            h.render("x")
        )));
    }
    Ok(g)
}

/// Mass of y^2 = h(x)(x - t) over the t-line. Every smooth fiber weighs
/// α/2; fibers where t meets a root of h weigh α/2 as stable curves; the
/// fiber at t = ∞ is y^2 = h(x) and its α is the drop of deg D below
/// g(p - 1)/2.
pub fn hyperelliptic_linearized_verify(h: &FpPoly, opts: &MassOptions) -> Result<MassReport> {
    let p = h.modulus();
    let g = linearized_genus(h, opts.seed)?;
    let rhs = taut::mass_rhs_linearized(g, p)?;
    let family = Family::Linearized(h.clone()).to_string();
    let mut report = MassReport::new(family, p, opts.seed, rhs);
    let f = FptPoly::from_x_poly(h).mul(&FptPoly::x_minus_t(p));
    let cm = cartier::cartier_hyperelliptic(&f, p, g)?;
    let dpoly = match cartier::det_cartier(&cm) {
        DetCartier::NotGenericallyOrdinary => {
            report.notes.push("D(t) vanishes identically".into());
            return Ok(report);
        }
        DetCartier::Polynomial(d) => d,
    };
    let deg = dpoly.deg_or_zero();
    report.d_degree = Some(deg);
    let fz = factor::factor_over_fp(&dpoly, opts.seed)?;
    report.d_factors = factor_records(&fz);
    let h_split = splitting_degree(h, opts.seed)?;
    let split_field = ExtField::of_degree(p, h_split, opts.seed);

    let per_factor: Vec<Result<(Option<ClassRecord>, Option<BoundaryContribution>)>> = fz
        .factors
        .par_iter()
        .map(|(phi, m)| {
            let alpha = *m as u64;
            let mdeg = phi.deg_or_zero();
            if h.rem(phi).is_zero() {
                return Ok((
                    None,
                    Some(BoundaryContribution {
                        label: format!("t root of {}", phi.render("t")),
                        alpha,
                        weight: ratio(mdeg as i128 * alpha as i128, 2),
                        note: "t meets a root of h: the stable fiber weighs alpha/2, \
                               alpha read from the multiplicity in D"
                            .into(),
                    }),
                ));
            }
            let k = ExtField::new(phi)?;
            let theta = k.generator();
            let key = k.canonical_conjugate(&theta);
            let inv = cartier::fiber_invariants(&cm, &k, &key, &dpoly)?;
            if inv.alpha != alpha {
                return Err(Error::Inconsistent(format!(
                    "root multiplicity {} differs from factor multiplicity {alpha}",
                    inv.alpha
                )));
            }
            // A Möbius map permuting S ∪ {t}, S = roots of h, moves t (S alone has
            // no symmetry), so it sends at least three points of S into S. It is
            // then defined over the splitting field of h, and so is t.
            let symmetric = h_split % mdeg == 0 && {
                let mut pts = root_points(&split_field, h, opts.seed);
                let t = split_field.roots_of(phi, opts.seed).swap_remove(0);
                pts.push((t, split_field.one()));
                cover::mobius_stabilizer_order(&split_field, &pts) > 1
            };
            Ok((
                Some(ClassRecord {
                    representative: RootEncoding::new(&k, &key),
                    field_degree: mdeg,
                    conjugates: mdeg,
                    orbit: 1,
                    alpha,
                    a_number: inv.a_number,
                    p_rank: inv.p_rank,
                    aut_order: 2,
                    m_x: Some(alpha),
                    symmetric,
                    contribution: ratio(mdeg as i128 * alpha as i128, 2),
                }),
                None,
            ))
        })
        .collect();
    for r in per_factor {
        let (c, b) = r?;
        report.classes.extend(c);
        report.boundary_contributions.extend(b);
    }
    if report.classes.iter().any(|c| c.symmetric) {
        report.notes.push(
            "some non-ordinary fibers have extra Möbius symmetry; they keep weight alpha/2 \
             because the family is counted over its own base"
                .into(),
        );
    }

    let full = (g * (p - 1) / 2) as usize;
    if deg > full {
        return Err(Error::Inconsistent(format!("deg D = {deg} exceeds g(p-1)/2 = {full}")));
    }
    let alpha_inf = (full - deg) as u64;
    let inf_ordinary = hyperelliptic_is_ordinary(h, g)?;
    if inf_ordinary != (alpha_inf == 0) {
        return Err(Error::Inconsistent(format!(
            "degree drop {alpha_inf} at t = ∞ disagrees with the ordinarity of y^2 = h(x)"
        )));
    }
    if alpha_inf > 0 {
        let mut pts = root_points(&split_field, h, opts.seed);
        pts.push((split_field.one(), split_field.zero()));
        let symmetric = cover::mobius_stabilizer_order(&split_field, &pts) > 1;
        report.boundary_contributions.push(BoundaryContribution {
            label: "t = ∞".into(),
            alpha: alpha_inf,
            weight: ratio(alpha_inf as i128, 2),
            note: format!(
                "smooth fiber y^2 = h(x), non-ordinary; alpha = g(p-1)/2 - deg D{}",
                if symmetric { "; branch locus has extra symmetry" } else { "" }
            ),
        });
    }
    report.close(true);
    Ok(report)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Check {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub pass: bool,
}

fn check<T: PartialEq + fmt::Display>(name: &str, expected: T, actual: T) -> Check {
    Check {
        name: name.into(),
        expected: expected.to_string(),
        actual: actual.to_string(),
        pass: expected == actual,
    }
}

fn check_rational(name: &str, expected: Rational, actual: Rational) -> Check {
    Check {
        name: name.into(),
        expected: render(&expected),
        actual: render(&actual),
        pass: expected == actual,
    }
}

/// Class counts of a genus-two dihedral family at p.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IkoCaseData {
    pub case: String,
    pub p: u64,
    pub eps1: u64,
    pub eps2: u64,
    pub eps3: u64,
    /// p = 8k + eps
    pub k: u64,
    pub eps: u64,
    #[serde(rename = "D_degree")]
    pub d_degree: usize,
    /// Non-ordinary parameter values away from 0 and 1, without multiplicity.
    pub distinct_roots: usize,
    /// Isomorphism classes of non-ordinary smooth members.
    pub count: u64,
    /// R_n: classes with #redAut(X, τ) = n.
    pub classes_by_aut: BTreeMap<u64, u64>,
    /// Non-ordinary singular members at the boundary.
    pub r_infinity: u64,
    #[serde(serialize_with = "ser_rational")]
    pub mass: Rational,
    #[serde(serialize_with = "ser_rational")]
    pub expected_mass: Rational,
    pub checks: Vec<Check>,
    pub notes: Vec<String>,
}

impl IkoCaseData {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn r(&self, n: u64) -> u64 {
        self.classes_by_aut.get(&n).copied().unwrap_or(0)
    }

    pub fn to_pretty(&self) -> String {
        let mut out = format!(
            "{} at p = {}: count {}, mass {} (expected {})\n",
            self.case,
            self.p,
            self.count,
            render(&self.mass),
            render(&self.expected_mass)
        );
        for (n, r) in &self.classes_by_aut {
            out.push_str(&format!("  R_{n} = {r}\n"));
        }
        out.push_str(&format!("  R_inf = {}\n", self.r_infinity));
        for c in &self.checks {
            out.push_str(&format!(
                "  [{}] {}: expected {}, got {}\n",
                if c.pass { "ok" } else { "FAIL" },
                c.name,
                c.expected,
                c.actual
            ));
        }
        for n in &self.notes {
            out.push_str(&format!("  note: {n}\n"));
        }
        out
    }
}

fn epsilon(a: i64, p: u64) -> u64 {
    (1 - field::legendre(a, p)) as u64
}

/// Roots of D(u) for a genus-two hyperelliptic family y^2 = f(x, u):
/// returns (deg D, distinct roots away from {0, 1}, D, per-root checks).
struct GenusTwoScan {
    d_degree: usize,
    distinct: usize,
    dpoly: FpPoly,
    checks: Vec<Check>,
}

fn scan_genus_two(f: &FptPoly, p: u64, seed: u64) -> Result<GenusTwoScan> {
    let cm = cartier::cartier_hyperelliptic(f, p, 2)?;
    let dpoly = match cartier::det_cartier(&cm) {
        DetCartier::Polynomial(d) => d,
        DetCartier::NotGenericallyOrdinary => return Err(Error::NotGenericallyOrdinary(p)),
    };
    let fz = factor::factor_over_fp(&dpoly, seed)?;
    let degenerate = [FpPoly::monomial(p, 1, 1), FpPoly::from_i64(p, &[-1, 1])];
    let interior: Vec<&(FpPoly, usize)> =
        fz.factors.iter().filter(|(q, _)| !degenerate.contains(q)).collect();
    let invariants: Vec<Result<cartier::FiberInvariants>> = interior
        .par_iter()
        .map(|(q, _)| {
            let k = ExtField::new(q)?;
            cartier::fiber_invariants(&cm, &k, &k.generator(), &dpoly)
        })
        .collect();
    let mut all_superspecial = true;
    for inv in invariants {
        let inv = inv?;
        all_superspecial &= inv.alpha == 2 && inv.a_number == 2 && inv.p_rank == 0;
    }
    Ok(GenusTwoScan {
        d_degree: dpoly.deg_or_zero(),
        distinct: interior.iter().map(|(q, _)| q.deg_or_zero()).sum(),
        dpoly,
        checks: vec![check("every non-ordinary fiber has alpha = a = 2, p-rank 0", true, all_superspecial)],
    })
}

/// Whether the elliptic curve y^2 = c(x) is supersingular.
fn elliptic_supersingular(c: &[i64], p: u64) -> Result<bool> {
    Ok(!hyperelliptic_is_ordinary(&FpPoly::from_i64(p, c), 1)?)
}

/// y^2 = (x^3 - 1)(x^3 - u): class counts by reduced automorphism order
/// and the mass with the boundary term from the join of two copies of
/// y^2 = x^3 - 1.
pub fn iko_genus2_case_b(p: u64, seed: u64) -> Result<IkoCaseData> {
    field::check_prime(p)?;
    if p < 5 {
        return Err(Error::PrimeOutOfRange(p));
    }
    let u = |c: &[i64]| FpPoly::from_i64(p, c);
    let f = FptPoly::new(
        p,
        vec![u(&[0, 1]), u(&[0]), u(&[0]), u(&[-1, -1]), u(&[0]), u(&[0]), u(&[1])],
    );
    let scan = scan_genus_two(&f, p, seed)?;
    let minus_one = scan.dpoly.eval(p - 1) == 0;
    let paired = scan.distinct + minus_one as usize;
    if paired % 2 != 0 {
        return Err(Error::Inconsistent("u and 1/u must pair up".into()));
    }
    let count = (paired / 2) as u64;
    let r12 = minus_one as u64;
    let r6 = count - r12;
    let r_inf = elliptic_supersingular(&[-1, 0, 0, 1], p)? as u64;
    let (e1, e2, e3) = (epsilon(-1, p), epsilon(-2, p), epsilon(-3, p));
    let mass = ratio(r6 as i128, 6) + ratio(r12 as i128, 12) + ratio(r_inf as i128, 36);
    let expected_mass = ratio(p as i128 - 1, 36);
    let expected_count = if p % 6 == 1 { (p - 1) / 6 } else { (p + 1) / 6 };
    let mut checks = scan.checks;
    checks.push(check("N by congruence mod 6", expected_count, count));
    checks.push(check("R_12 = eps3/2", e3 / 2, r12));
    checks.push(check("R_inf = eps3/2", e3 / 2, r_inf));
    checks.push(check_rational(
        "R_6 = (p-1)/6 - eps3/3",
        ratio(p as i128 - 1, 6) - ratio(e3 as i128, 3),
        Rational::from(r6 as i128),
    ));
    checks.push(check_rational("mass = (p-1)/36", expected_mass, mass));
    let mut notes = vec![
        "u and 1/u give isomorphic curves; u = -1 has reduced automorphism group D6".into(),
        "boundary: join of two copies of y^2 = x^3 - 1, weight 1/36".into(),
    ];
    if p == 5 {
        notes.push(
            "p = 5: the unique non-ordinary member is y^2 = x^5 - x, reduced automorphism \
             group of order 120 in which a 3-cycle has normalizer of order 12; mass 1/12 + 1/36"
                .into(),
        );
    }
    Ok(IkoCaseData {
        case: "caseB".into(),
        p,
        eps1: e1,
        eps2: e2,
        eps3: e3,
        k: p / 8,
        eps: p % 8,
        d_degree: scan.d_degree,
        distinct_roots: scan.distinct,
        count,
        classes_by_aut: BTreeMap::from([(6, r6), (12, r12)]),
        r_infinity: r_inf,
        mass,
        expected_mass,
        checks,
        notes,
    })
}

/// Y^2 = X(X^2 - 1)(X^2 - β): class counts by #redAut(X, τ) and the mass
/// with the boundary term from the join of two copies of y^2 = x^3 - x.
pub fn iko_genus2_case_second(p: u64, seed: u64) -> Result<IkoCaseData> {
    field::check_prime(p)?;
    if p < 7 {
        return Err(Error::PrimeOutOfRange(p));
    }
    let b = |c: &[i64]| FpPoly::from_i64(p, c);
    let f = FptPoly::new(p, vec![b(&[0]), b(&[0, 1]), b(&[0]), b(&[-1, -1]), b(&[0]), b(&[1])]);
    let scan = scan_genus_two(&f, p, seed)?;
    let minus_one = scan.dpoly.eval(p - 1) == 0;
    let nine = scan.dpoly.eval(9 % p) == 0;
    let paired = scan.distinct + minus_one as usize;
    if paired % 2 != 0 {
        return Err(Error::Inconsistent("β and 1/β must pair up".into()));
    }
    let count = (paired / 2) as u64;
    let r24 = minus_one as u64;
    let r12 = nine as u64;
    let r4 = count - r12 - r24;
    let r_inf = elliptic_supersingular(&[0, -1, 0, 1], p)? as u64;
    let (e1, e2, e3) = (epsilon(-1, p), epsilon(-2, p), epsilon(-3, p));
    let (k, eps) = (p / 8, p % 8);
    let mass = ratio(r4 as i128, 4)
        + ratio(r12 as i128, 4)
        + ratio(r24 as i128, 8)
        + ratio(r_inf as i128, 16);
    let expected_mass = ratio(p as i128 - 1, 32);
    let expected_count = if eps == 1 || eps == 3 { k } else { k + 1 };
    let mut checks = scan.checks;
    checks.push(check("count by p = 8k + eps", expected_count, count));
    checks.push(check_rational(
        "R_4 = (p-1)/8 - eps1/8 - eps2/4 - eps3/2",
        ratio(p as i128 - 1, 8) - ratio(e1 as i128, 8) - ratio(e2 as i128, 4)
            - ratio(e3 as i128, 2),
        Rational::from(r4 as i128),
    ));
    checks.push(check_rational(
        "R_4 = k - eps3/2",
        Rational::from(k as i128) - ratio(e3 as i128, 2),
        Rational::from(r4 as i128),
    ));
    checks.push(check("R_12 = eps3/2", e3 / 2, r12));
    checks.push(check("R_24 = eps2/2", e2 / 2, r24));
    checks.push(check("R_inf = eps1/2", e1 / 2, r_inf));
    checks.push(check_rational("mass = (p-1)/32", expected_mass, mass));
    Ok(IkoCaseData {
        case: "caseSecond".into(),
        p,
        eps1: e1,
        eps2: e2,
        eps3: e3,
        k,
        eps,
        d_degree: scan.d_degree,
        distinct_roots: scan.distinct,
        count,
        classes_by_aut: BTreeMap::from([(4, r4), (12, r12), (24, r24)]),
        r_infinity: r_inf,
        mass,
        expected_mass,
        checks,
        notes: vec![
            "β and 1/β give isomorphic curves; β = 9 has reduced automorphism group D6, \
             β = -1 has S4"
                .into(),
            "#redAut(X, τ) is 4 for D6 and 8 for S4; classes are tallied by #redAut(X)".into(),
            "boundary: join of two copies of y^2 = x^3 - x, weight 1/16".into(),
        ],
    })
}

/// A non-ordinary fiber of y^d = x(x - 1)(x - t)^(d - 1) next to the two
/// hyperelliptic curves Z_{±1,t} of its decomposition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DihedralFiber {
    pub t: RootEncoding,
    pub a_number: u64,
    pub alpha: u64,
    pub a_plus: u64,
    pub a_minus: u64,
}

/// Invariants of every non-ordinary fiber of the odd-d dihedral family, one
/// entry per irreducible factor of D.
pub fn dihedral_fiber_comparison(d: u64, p: u64, seed: u64) -> Result<Vec<DihedralFiber>> {
    let it = InertiaType::new(d, vec![1, 1, d - 1, d - 1])?;
    let cm = cartier::cartier_superelliptic_4pt(&it, p)?;
    let dpoly = match cartier::det_cartier(&cm) {
        DetCartier::Polynomial(x) => x,
        DetCartier::NotGenericallyOrdinary => return Err(Error::NotGenericallyOrdinary(p)),
    };
    let gz = (d - 1) / 2;
    let z: Vec<CartierMatrix> = cartier::dihedral_decomposition(d, p)?
        .iter()
        .map(|f| cartier::cartier_hyperelliptic(f, p, gz))
        .collect::<Result<_>>()?;
    let degenerate = [FpPoly::monomial(p, 1, 1), FpPoly::from_i64(p, &[-1, 1])];
    let fz = factor::factor_over_fp(&dpoly, seed)?;
    fz.factors
        .par_iter()
        .filter(|(q, _)| !degenerate.contains(q))
        .map(|(q, _)| {
            let k = ExtField::new(q)?;
            let t = k.generator();
            let inv = cartier::fiber_invariants(&cm, &k, &t, &dpoly)?;
            let a_of = |m: &CartierMatrix| gz - crate::linalg::rank(&m.specialize(&k, &t), &k) as u64;
            Ok(DihedralFiber {
                t: RootEncoding::new(&k, &t),
                a_number: inv.a_number,
                alpha: inv.alpha,
                a_plus: a_of(&z[0]),
                a_minus: a_of(&z[1]),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn it(s: &str) -> InertiaType {
        s.parse().unwrap()
    }

    #[test]
    fn legendre_at_five() {
        let r = mass_lhs_4pt(&it("2:1,1,1,1"), 5, &MassOptions::default()).unwrap();
        assert_eq!(r.d_degree, Some(2));
        assert_eq!(r.lhs, ratio(1, 6));
        assert_eq!(r.verdict, Verdict::Equal);
    }

    #[test]
    fn legendre_sweep_is_equal() {
        for p in (5..=43).filter(|&p| field::is_prime(p)) {
            let r = mass_lhs_4pt(&it("2:1,1,1,1"), p, &MassOptions::default()).unwrap();
            assert_eq!(r.lhs, ratio(p as i128 - 1, 24), "p = {p}");
            assert_eq!(r.verdict, Verdict::Equal);
        }
    }

    #[test]
    fn legendre_mass_ignores_marked_label() {
        for p in [7u64, 13, 17] {
            let masses: Vec<Rational> = (0..4)
                .map(|m| {
                    let opts = MassOptions { marked: m, ..Default::default() };
                    mass_lhs_4pt(&it("2:1,1,1,1"), p, &opts).unwrap().lhs
                })
                .collect();
            assert!(masses.iter().all(|m| *m == masses[0]), "p = {p}: {masses:?}");
        }
    }

    #[test]
    fn five_fold_cover_at_eleven() {
        let r = mass_lhs_4pt(&it("5:1,3,3,3"), 11, &MassOptions::default()).unwrap();
        assert_eq!(r.lhs, ratio(2, 15));
        assert_eq!(r.verdict, Verdict::Equal);
    }

    #[test]
    fn dihedral_three_at_seven() {
        let r = mass_lhs_4pt(&it("3:1,1,2,2"), 7, &MassOptions::default()).unwrap();
        assert_eq!(r.lhs, ratio(1, 6));
        assert_eq!(r.verdict, Verdict::Equal);
    }

    #[test]
    fn off_congruence_is_interior_only() {
        let r = mass_lhs_4pt(&it("3:1,1,2,2"), 11, &MassOptions::default()).unwrap();
        assert_eq!(r.verdict, Verdict::InteriorOnly);
    }

    #[test]
    fn reports_are_deterministic() {
        let a = mass_lhs_4pt(&it("5:1,1,1,2"), 11, &MassOptions::default()).unwrap();
        let b = mass_lhs_4pt(&it("5:1,1,1,2"), 11, &MassOptions::default()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.verdict, Verdict::Equal);
    }

    #[test]
    fn linearized_genus_three_at_five() {
        let h = FpPoly::from_i64(5, &[1, 1, 0, 0, 0, 0, 0, 1]);
        let r = hyperelliptic_linearized_verify(&h, &MassOptions::default()).unwrap();
        assert_eq!(r.rhs, Rational::from(3));
        assert_eq!(r.verdict, Verdict::Equal);
    }

    #[test]
    fn symmetries_of_branch_loci_stay_in_the_splitting_field() {
        // roots 0, 1, 2, 3, 5 of h over F_31; t outside F_31 never adds symmetry
        let p = 31;
        let roots = [0, 1, 2, 3, 5];
        let h = roots
            .iter()
            .fold(FpPoly::one(p), |acc, &r| &acc * &FpPoly::from_i64(p, &[-r, 1]));
        assert_eq!(linearized_genus(&h, DEFAULT_SEED).unwrap(), 2);
        let k = ExtField::of_degree(p, 2, 3);
        let base: Vec<Proj> = roots.iter().map(|&r| (k.from_i64(r), k.one())).collect();
        for t in crate::oracle::elements(&k).into_iter().filter(|t| k.as_base(t).is_none()).step_by(9) {
            let mut pts = base.clone();
            pts.push((t, k.one()));
            assert_eq!(cover::mobius_stabilizer_order(&k, &pts), 1);
        }
    }

    #[test]
    fn symmetric_h_is_rejected() {
        // roots 0, 1, -1, 2, -2: x -> -x permutes them
        let h = FpPoly::from_i64(7, &[0, 4, 0, -5, 0, 1]);
        assert!(matches!(
            hyperelliptic_linearized_verify(&h, &MassOptions::default()),
            Err(Error::PglSymmetry(_))
        ));
    }

    #[test]
    fn dihedral_fibers_split_evenly() {
        let fibers = dihedral_fiber_comparison(3, 7, DEFAULT_SEED).unwrap();
        assert!(!fibers.is_empty());
        for f in fibers {
            assert_eq!(f.a_number, 2 * f.a_plus);
            assert_eq!(f.a_plus, f.a_minus);
            assert_eq!(f.alpha, f.a_number);
        }
    }

    #[test]
    fn case_b_small_primes() {
        for p in [5u64, 7, 11, 13] {
            let d = iko_genus2_case_b(p, DEFAULT_SEED).unwrap();
            assert!(d.all_pass(), "{}", d.to_pretty());
        }
        assert_eq!(iko_genus2_case_b(7, DEFAULT_SEED).unwrap().count, 1);
    }

    #[test]
    fn case_second_small_primes() {
        for p in [7u64, 11, 13, 17] {
            let d = iko_genus2_case_second(p, DEFAULT_SEED).unwrap();
            assert!(d.all_pass(), "{}", d.to_pretty());
        }
        assert_eq!(iko_genus2_case_second(13, DEFAULT_SEED).unwrap().count, 2);
    }
}
