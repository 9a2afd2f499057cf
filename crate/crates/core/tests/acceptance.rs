//! End-to-end acceptance run: one PASS/FAIL line per criterion, nonzero
//! exit status when any criterion fails.

use std::process::ExitCode;
use std::time::Instant;

use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use cycmass::cover::InertiaType;
use cycmass::ext::ExtField;
use cycmass::factor::DEFAULT_SEED;
use cycmass::field::is_prime;
use cycmass::mass::{self, Family, MassOptions, Verdict};
use cycmass::oracle;
use cycmass::poly::FpPoly;
use cycmass::taut::{self, Rational};
use cycmass::Error;

type Outcome = Result<String, String>;

fn q(n: i128, d: i128) -> Rational {
    Ratio::new(n, d)
}

fn ty(s: &str) -> InertiaType {
    s.parse().expect("valid inertia type")
}

fn primes(lo: u64, hi: u64) -> impl Iterator<Item = u64> {
    (lo..=hi).filter(|&p| is_prime(p))
}

fn smallest_prime_one_mod(d: u64) -> u64 {
    (2..).find(|&p| is_prime(p) && p % d == 1).expect("Dirichlet")
}

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn verify_4pt(it: &InertiaType, p: u64) -> Result<mass::MassReport, String> {
    mass::verify(&Family::FourPoint(it.clone()), p, &MassOptions::default())
        .map_err(|e| format!("{it} at p = {p}: {e}"))
}

fn eichler_deuring() -> Outcome {
    let leg = ty("2:1,1,1,1");
    let mut n = 0;
    for p in primes(5, 97) {
        let r = verify_4pt(&leg, p)?;
        let want = q(p as i128 - 1, 24);
        ensure(r.verdict == Verdict::Equal && r.lhs == want && r.rhs == want, || {
            format!("p = {p}: lhs {} rhs {} verdict {}", r.lhs, r.rhs, r.verdict)
        })?;
        ensure(r.d_degree == Some((p as usize - 1) / 2), || format!("p = {p}: deg D {:?}", r.d_degree))?;
        let simple = r.d_factors.iter().all(|f| f.multiplicity == 1);
        let away = r.d_factors.iter().all(|f| f.factor != [0, 1] && f.factor != [p - 1, 1]);
        ensure(simple && away, || format!("p = {p}: D has a repeated root or a root in {{0, 1}}"))?;
        n += 1;
    }
    Ok(format!("{n} primes, lhs = rhs = (p-1)/24, D squarefree of degree (p-1)/2"))
}

fn moonen() -> Outcome {
    let rows = taut::moonen_table(13, Some(3)).map_err(|e| e.to_string())?;
    let a_nu: Vec<(String, u64)> = taut::moonen_inertia_types()
        .into_iter()
        .map(|(l, _, a)| (l.to_string(), a))
        .collect();
    let mut out = Vec::new();
    for (row, (label, a)) in rows.iter().zip(a_nu) {
        let it = ty(&row.family);
        let p = smallest_prime_one_mod(it.d);
        ensure(p <= 200, || format!("{label}: no prime below 200"))?;
        let r = verify_4pt(&it, p)?;
        let want = Rational::from(p as i128 - 1) * row.deg_lambda1 / Rational::from(row.delta as i128);
        ensure(r.verdict == Verdict::Equal && r.lhs == want, || {
            format!("{label} p = {p}: lhs {} want {want}", r.lhs)
        })?;
        for c in &r.classes {
            ensure(c.a_number == a && c.alpha == c.a_number, || {
                format!("{label} p = {p}: class with a = {}, alpha = {}, expected a = {a}", c.a_number, c.alpha)
            })?;
        }
        out.push(format!("{label}@{p}"));
    }
    Ok(format!("table recomputed; {} rows equal: {}", out.len(), out.join(" ")))
}

fn corollaries() -> Outcome {
    let mut cases: Vec<(InertiaType, Box<dyn Fn(i128, i128) -> Rational>)> = Vec::new();
    for d in [5u64, 7, 11] {
        cases.push((ty(&format!("{d}:1,1,1,{}", d - 3)), Box::new(|p, d| q((p - 1) * (d * d - 1), 72 * d * d))));
    }
    for d in [3u64, 5, 7] {
        cases.push((ty(&format!("{d}:1,1,{},{}", d - 1, d - 1)), Box::new(|p, d| q((p - 1) * (d * d - 1), 32 * d * d))));
    }
    for d in [4u64, 8] {
        cases.push((ty(&format!("{d}:1,{},{},{}", d / 2, d / 2, d - 1)), Box::new(|p, _| q(p - 1, 32))));
    }
    let mut out = Vec::new();
    for (it, closed) in cases {
        let p = smallest_prime_one_mod(it.d);
        let r = verify_4pt(&it, p)?;
        let want = closed(p as i128, it.d as i128);
        ensure(r.verdict == Verdict::Equal && r.lhs == want, || {
            format!("{it} at p = {p}: lhs {} rhs {} closed form {want}", r.lhs, r.rhs)
        })?;
        out.push(format!("{it}@{p}={want}"));
    }
    Ok(out.join(" "))
}

/// 1 - (a | p) by Euler's criterion.
fn eps(a: i64, p: u64) -> i128 {
    let x = a.rem_euclid(p as i64) as u128;
    let mut acc = 1u128;
    let mut base = x;
    let mut e = (p - 1) / 2;
    while e > 0 {
        if e & 1 == 1 {
            acc = acc * base % p as u128;
        }
        base = base * base % p as u128;
        e >>= 1;
    }
    if acc == 1 {
        0
    } else {
        2
    }
}

fn iko() -> Outcome {
    let mut n = 0;
    for p in primes(5, 97) {
        let b = mass::iko_genus2_case_b(p, DEFAULT_SEED).map_err(|e| format!("caseB p = {p}: {e}"))?;
        let e3 = eps(-3, p);
        let pi = p as i128;
        let want_n = if p % 6 == 1 { (p - 1) / 6 } else { (p + 1) / 6 };
        let (r6, r12, rinf) = (b.r(6) as i128, b.r(12) as i128, b.r_infinity as i128);
        ensure(b.count == want_n, || format!("caseB p = {p}: N = {} want {want_n}", b.count))?;
        ensure(r12 * 2 == e3 && rinf * 2 == e3, || format!("caseB p = {p}: R_12 = {r12}, R_inf = {rinf}"))?;
        ensure(Rational::from(r6) == q(pi - 1, 6) - q(e3, 3), || format!("caseB p = {p}: R_6 = {r6}"))?;
        let m = q(r6, 6) + q(r12, 12) + q(rinf, 36);
        ensure(m == q(pi - 1, 36), || format!("caseB p = {p}: mass {m}"))?;
        ensure(b.all_pass(), || format!("caseB p = {p}: internal checks\n{}", b.to_pretty()))?;
        n += 1;
        if p < 7 {
            continue;
        }
        let s = mass::iko_genus2_case_second(p, DEFAULT_SEED).map_err(|e| format!("caseSecond p = {p}: {e}"))?;
        let (k, e) = (p / 8, p % 8);
        let want = if e == 1 || e == 3 { k } else { k + 1 };
        ensure(s.count == want, || format!("caseSecond p = {p}: count {} want {want}", s.count))?;
        let (e1, e2) = (eps(-1, p), eps(-2, p));
        let (r4, r12, r24, rinf) = (s.r(4) as i128, s.r(12) as i128, s.r(24) as i128, s.r_infinity as i128);
        ensure(
            Rational::from(r4) == q(pi - 1, 8) - q(e1, 8) - q(e2, 4) - q(e3, 2)
                && r12 * 2 == e3
                && r24 * 2 == e2
                && rinf * 2 == e1,
            || format!("caseSecond p = {p}: R_4 {r4} R_12 {r12} R_24 {r24} R_inf {rinf}"),
        )?;
        let m = q(r4, 4) + q(r12, 4) + q(r24, 8) + q(rinf, 16);
        ensure(m == q(pi - 1, 32), || format!("caseSecond p = {p}: mass {m}"))?;
        ensure(s.all_pass(), || format!("caseSecond p = {p}: internal checks\n{}", s.to_pretty()))?;
    }
    Ok(format!("{n} primes: caseB counts and mass (p-1)/36; caseSecond (p >= 7) counts and mass (p-1)/32"))
}

/// Whether y^2 = h(x), deg h = 2g + 1, is ordinary: the coefficient of T^g
/// in its L-polynomial, from point counts over F_{p^r}, r <= g, is prime to p.
fn ordinary_by_point_count(h: &FpPoly, g: usize) -> bool {
    let p = h.modulus();
    let mut s = Vec::new();
    for r in 1..=g {
        let k = ExtField::of_degree(p, r, 7);
        let q = k.order().unwrap() as i128;
        let affine: i128 = oracle::elements(&k)
            .iter()
            .map(|x| 1 + oracle::quadratic_character(&k, &k.eval_poly(h, x)) as i128)
            .sum();
        s.push(q + 1 - (affine + 1));
    }
    // Newton: e_1 = s_1, 2 e_2 = e_1 s_1 - s_2, 3 e_3 = e_2 s_1 - e_1 s_2 + s_3
    let mut e = vec![1i128];
    for n in 1..=g {
        let mut acc = 0;
        for i in 1..=n {
            let sign = if i % 2 == 1 { 1 } else { -1 };
            acc += sign * e[n - i] * s[i - 1];
        }
        e.push(acc / n as i128);
    }
    e[g].rem_euclid(p as i128) != 0
}

fn linearized() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let mut summary = Vec::new();
    for g in [2usize, 3] {
        for p in [7u64, 11, 13] {
            let (mut full, mut dropped, mut rejected, mut tries) = (0, 0, 0, 0);
            while full < 5 {
                tries += 1;
                ensure(tries < 200, || format!("g = {g} p = {p}: too few admissible h"))?;
                let mut c: Vec<u64> = (0..=2 * g).map(|_| rng.gen_range(0..p)).collect();
                c.push(1);
                let h = FpPoly::new(p, c);
                let r = match mass::hyperelliptic_linearized_verify(&h, &MassOptions::default()) {
                    Ok(r) => r,
                    Err(Error::PglSymmetry(_)) | Err(Error::Invalid(_)) => {
                        rejected += 1;
                        continue;
                    }
                    Err(e) => return Err(format!("h = {h:?}: {e}")),
                };
                if r.verdict == Verdict::NotApplicable {
                    rejected += 1;
                    continue;
                }
                let want = q((p as i128 - 1) * g as i128, 4);
                ensure(r.verdict == Verdict::Equal && r.lhs == want && r.rhs == want, || {
                    format!("g = {g} p = {p} h = {h:?}: lhs {} rhs {}", r.lhs, r.rhs)
                })?;
                let top = g * (p as usize - 1) / 2;
                let deg = r.d_degree.unwrap_or(0);
                if ordinary_by_point_count(&h, g) {
                    ensure(deg == top, || format!("g = {g} p = {p} h = {h:?}: deg D = {deg}, want {top}"))?;
                    full += 1;
                } else {
                    let drop = r.boundary_contributions.iter().find(|b| b.label == "t = ∞").map_or(0, |b| b.alpha);
                    ensure(deg < top && deg + drop as usize == top, || {
                        format!("g = {g} p = {p} h = {h:?}: deg D = {deg} with non-ordinary y^2 = h(x)")
                    })?;
                    dropped += 1;
                }
            }
            summary.push(format!("g{g}p{p}:{full}+{dropped}/{rejected}"));
        }
    }
    Ok(format!(
        "lhs = rhs = (p-1)g/4 for every admissible h; deg D = g(p-1)/2 whenever y^2 = h(x) is ordinary \
         [full+dropped/rejected] {}",
        summary.join(" ")
    ))
}

fn random_inertia_types(count: usize, rng: &mut ChaCha8Rng) -> Vec<InertiaType> {
    let mut out = Vec::new();
    while out.len() < count {
        let d = rng.gen_range(2..=12u64);
        let a: Vec<u64> = (0..3).map(|_| rng.gen_range(1..d)).collect();
        let a4 = (d - a.iter().sum::<u64>() % d) % d;
        if a4 == 0 {
            continue;
        }
        let mut full = a.clone();
        full.push(a4);
        if let Ok(it) = InertiaType::new(d, full) {
            out.push(it);
        }
    }
    out
}

fn tautological() -> Outcome {
    for g in 2..=50u64 {
        let (deg, _) = taut::deg_lambda1_linearized(g).map_err(|e| e.to_string())?;
        ensure(deg == q(g as i128, 4), || format!("g = {g}: {deg}"))?;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(DEFAULT_SEED);
    let types = random_inertia_types(10, &mut rng);
    for it in &types {
        let base = taut::deg_lambda1_4pt(it).map_err(|e| e.to_string())?;
        for ell in it.units() {
            let twisted = InertiaType::new(it.d, it.a.iter().map(|&x| x * ell % it.d).collect())
                .map_err(|e| e.to_string())?;
            let deg = taut::deg_lambda1_4pt(&twisted).map_err(|e| e.to_string())?;
            ensure(deg == base, || format!("{it} twisted by {ell}: {deg} vs {base}"))?;
        }
        let via_boundary = taut::lambda1_boundary_expression(it).evaluate_4pt().map_err(|e| e.to_string())?;
        ensure(via_boundary == base, || format!("{it}: boundary expression {via_boundary} vs {base}"))?;
    }
    let names: Vec<String> = types.iter().map(|t| t.to_string()).collect();
    Ok(format!("g/4 for g = 2..50; twists and boundary expression agree on {}", names.join(" ")))
}

fn oracle_suite() -> Outcome {
    let mut entries = 0;
    for (s, p) in [("3:1,1,2,2", 7u64), ("3:1,1,2,2", 13), ("5:1,3,3,3", 11), ("2:1,1,1,1", 7)] {
        let r = oracle::oracle_check(&ty(s), p, 2, 5, DEFAULT_SEED, true).map_err(|e| e.to_string())?;
        ensure(r.passed() && r.samples.len() == 5, || format!("{s} p = {p}: {r:?}"))?;
        entries += r.entries_checked;
    }
    let mut fibers = 0;
    for p in [5u64, 7, 11, 13] {
        let (n, bad) = oracle::legendre_prank_against_point_counts(p).map_err(|e| e.to_string())?;
        ensure(bad == 0, || format!("p = {p}: {bad} of {n} fibers disagree"))?;
        fibers += n;
    }
    Ok(format!(
        "{entries} matrix entries at 20 random t agree; exact-form checks hold; {fibers} genus-one fibers agree with point counts"
    ))
}

fn dihedral() -> Outcome {
    let mut out = Vec::new();
    for d in [3u64, 5] {
        let p = smallest_prime_one_mod(d);
        let fibers = mass::dihedral_fiber_comparison(d, p, DEFAULT_SEED).map_err(|e| e.to_string())?;
        ensure(!fibers.is_empty(), || format!("d = {d}: no non-ordinary fibers"))?;
        for f in &fibers {
            ensure(
                f.a_number == 2 * f.a_plus && f.a_plus == f.a_minus && f.a_number % 2 == 0 && f.alpha == f.a_number,
                || format!("d = {d} p = {p}: {f:?}"),
            )?;
        }
        out.push(format!("d={d}@{p}:{} fibers", fibers.len()));
    }
    Ok(out.join(" "))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("Eichler-Deuring sweep", eichler_deuring),
        ("Moonen table", moonen),
        ("four-point corollaries", corollaries),
        ("genus-two dihedral counts", iko),
        ("linearized hyperelliptic", linearized),
        ("tautological identities", tautological),
        ("Cartier oracle suite", oracle_suite),
        ("dihedral decomposition", dihedral),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name} ({secs:.1}s): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name} ({secs:.1}s): {why}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
