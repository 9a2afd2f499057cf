//! cycmass: mass formulas for families of cyclic covers of P^1 over F_p.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Value};

use cycmass::cover::{InertiaType, DEFAULT_MARKED_LABEL};
use cycmass::factor::DEFAULT_SEED;
use cycmass::field;
use cycmass::mass::{self, Family, IkoCaseData, MassOptions, MassReport, Verdict};
use cycmass::oracle;
use cycmass::poly::FpPoly;
use cycmass::taut::{self, render, Rational};

#[derive(Parser, Debug)]
#[command(name = "cycmass", version, about = "Exact mass formulas for one-parameter families of cyclic covers of P^1 in characteristic p")]
struct Cli {
    /// Seed for randomized polynomial splitting, recorded in every report.
    #[arg(long, global = true, default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Pretty)]
    format: Format,
    /// Worker threads; defaults to all cores.
    #[arg(long, global = true, env = "CYCMASS_JOBS")]
    jobs: Option<usize>,
    /// Write one file per report (plus a summary for sweeps) instead of
    /// printing to stdout.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Branch label (1-based; 1, 2, 3, 4 sit at 0, 1, t, ∞) kept fixed in
    /// genus one.
    #[arg(long, global = true, default_value_t = DEFAULT_MARKED_LABEL)]
    marked_label: usize,
    /// Accept verdicts that sum only the smooth fibers (p not 1 mod d).
    #[arg(long, global = true)]
    allow_interior_only: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Tsv,
    Pretty,
}

impl Format {
    fn extension(self) -> &'static str {
        match self {
            Format::Json => "json",
            Format::Tsv => "tsv",
            Format::Pretty => "txt",
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Genus, eigenspace dimensions, δ, deg λ1 and the closed-form mass.
    Invariants {
        /// Inertia type "d:a1,...,an".
        spec: String,
        #[arg(short)]
        p: Option<u64>,
    },
    /// Both sides of the mass formula, for one prime or a range.
    Verify {
        /// Inertia type "d:a1,a2,a3,a4", or "hyperelliptic" with --h.
        spec: String,
        /// Coefficients of h, constant term first (hyperelliptic only).
        #[arg(long)]
        h: Option<String>,
        #[arg(short, conflicts_with = "p_range")]
        p: Option<u64>,
        /// Inclusive prime range "a..b".
        #[arg(long)]
        p_range: Option<String>,
    },
    /// The fourteen four-point families with (deg λ1, δ, z, a_ν, n, μ) at p.
    Moonen {
        #[arg(short)]
        p: u64,
    },
    /// Class counts of the two genus-two dihedral families.
    Iko {
        #[arg(value_enum)]
        case: IkoCase,
        #[arg(short, conflicts_with = "p_range")]
        p: Option<u64>,
        #[arg(long)]
        p_range: Option<String>,
    },
    /// Symbolic Cartier matrix against the direct operator at random fibers.
    OracleCheck {
        spec: String,
        #[arg(short)]
        p: u64,
        /// Number of random parameter values.
        #[arg(long, default_value_t = 5)]
        samples: usize,
        /// Degree of the field the parameters are drawn from.
        #[arg(long, default_value_t = 2)]
        degree: usize,
        /// Also recompute every matrix entry from the fully expanded product.
        #[arg(long)]
        full_expansion_oracle: bool,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum IkoCase {
    #[value(name = "caseB")]
    CaseB,
    #[value(name = "caseSecond")]
    CaseSecond,
}

/// One emitted document: its file stem and its rendering in each format.
struct Doc {
    stem: String,
    json: Value,
    tsv: String,
    pretty: String,
    ok: bool,
}

fn usage(msg: impl Into<String>) -> String {
    msg.into()
}

fn parse_primes(p: Option<u64>, range: Option<&str>) -> Result<Vec<u64>, String> {
    match (p, range) {
        (Some(p), None) => {
            field::check_prime(p).map_err(|e| e.to_string())?;
            Ok(vec![p])
        }
        (None, Some(r)) => {
            let (a, b) = r
                .split_once("..")
                .ok_or_else(|| usage(format!("prime range must look like a..b, got {r}")))?;
            let a: u64 = a.trim().parse().map_err(|_| usage(format!("bad range start {a}")))?;
            let b: u64 = b.trim().parse().map_err(|_| usage(format!("bad range end {b}")))?;
            let ps: Vec<u64> = (a..=b).filter(|&q| field::is_prime(q)).collect();
            if ps.is_empty() {
                return Err(usage(format!("no primes in {r}")));
            }
            Ok(ps)
        }
        _ => Err(usage("give exactly one of -p or --p-range")),
    }
}

fn parse_h(coeffs: &str, p: u64) -> Result<FpPoly, String> {
    let c: Vec<i64> = coeffs
        .split(',')
        .map(|s| s.trim().parse().map_err(|_| format!("bad coefficient {s}")))
        .collect::<Result<_, _>>()?;
    Ok(FpPoly::from_i64(p, &c))
}

fn slug(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() { c } else { '-' })
        .collect()
}

fn report_doc(r: &MassReport, stem: String, allow_interior: bool, expect_na: bool) -> Doc {
    let ok = match r.verdict {
        Verdict::Equal => true,
        Verdict::Unequal => false,
        Verdict::NotApplicable => expect_na,
        Verdict::InteriorOnly => allow_interior,
    };
    Doc {
        stem,
        json: serde_json::to_value(r).expect("report serializes"),
        tsv: r.tsv_rows().join("\n"),
        pretty: r.to_pretty(),
        ok,
    }
}

fn cmd_verify(
    cli: &Cli,
    spec: &str,
    h: Option<&str>,
    primes: &[u64],
) -> Result<Vec<Doc>, String> {
    let marked = cli.marked_label.checked_sub(1).filter(|&m| m < 4).ok_or_else(|| {
        usage(format!("marked label must be 1..4, got {}", cli.marked_label))
    })?;
    let opts = MassOptions { seed: cli.seed, marked };
    let family_of = |p: u64| -> Result<(Family, bool), String> {
        if spec == "hyperelliptic" {
            let coeffs = h.ok_or_else(|| usage("hyperelliptic needs --h"))?;
            return Ok((Family::Linearized(parse_h(coeffs, p)?), true));
        }
        let it: InertiaType = spec.parse().map_err(|e: cycmass::Error| e.to_string())?;
        if it.d % p == 0 {
            return Err(usage(format!("p = {p} divides d = {}", it.d)));
        }
        let generic = it.generically_ordinary_4pt(p).map_err(|e| e.to_string())?;
        Ok((Family::FourPoint(it), !generic))
    };
    let docs: Vec<Result<Doc, String>> = primes
        .par_iter()
        .map(|&p| {
            let (family, expect_na) = family_of(p)?;
            let r = mass::verify(&family, p, &opts).map_err(|e| format!("p = {p}: {e}"))?;
            let stem = format!("{}_p{p}", slug(spec));
            Ok(report_doc(&r, stem, cli.allow_interior_only, expect_na))
        })
        .collect();
    let mut out = docs.into_iter().collect::<Result<Vec<_>, _>>()?;
    if out.len() > 1 {
        out.push(summary_doc(spec, &out));
    }
    Ok(out)
}

fn summary_doc(spec: &str, docs: &[Doc]) -> Doc {
    let rows: Vec<Value> = docs
        .iter()
        .map(|d| {
            json!({
                "p": d.json["p"],
                "verdict": d.json["verdict"],
                "lhs": d.json["lhs"],
                "rhs": d.json["rhs"],
                "D_degree": d.json["D_degree"],
            })
        })
        .collect();
    let ok = docs.iter().all(|d| d.ok);
    let mut pretty = format!("{spec}: {} primes, all accepted: {ok}\n", docs.len());
    let mut tsv = String::new();
    for r in &rows {
        let _ = writeln!(pretty, "  p = {}: {} (lhs {}, rhs {})", r["p"], r["verdict"].as_str().unwrap_or(""), r["lhs"].as_str().unwrap_or(""), r["rhs"].as_str().unwrap_or(""));
        let _ = writeln!(tsv, "{spec}\t{}\tsummary\t{}\t{}\t{}", r["p"], r["verdict"].as_str().unwrap_or(""), r["lhs"].as_str().unwrap_or(""), r["rhs"].as_str().unwrap_or(""));
    }
    Doc {
        stem: format!("{}_summary", slug(spec)),
        json: json!({ "family": spec, "reports": rows, "all_accepted": ok }),
        tsv: tsv.trim_end().to_string(),
        pretty,
        ok,
    }
}

fn mu_closed_form(r: Rational) -> String {
    if *r.numer() == 1 {
        format!("(p-1)/{}", r.denom())
    } else {
        format!("{}(p-1)/{}", r.numer(), r.denom())
    }
}

fn cmd_invariants(cli: &Cli, spec: &str, p: Option<u64>) -> Result<Vec<Doc>, String> {
    let it: InertiaType = spec.parse().map_err(|e: cycmass::Error| e.to_string())?;
    let sig = it.signature();
    let marked = cli.marked_label.checked_sub(1);
    let (delta, _) = it.delta_degree(marked);
    let mut json = json!({
        "family": spec,
        "d": it.d,
        "a": it.a,
        "genus": sig.genus,
        "signature": sig.f,
        "delta": delta,
    });
    let mut pretty = format!("{spec}: g = {}, signature ({}), delta = {delta}\n", sig.genus,
        sig.f.iter().map(u64::to_string).collect::<Vec<_>>().join(","));
    if it.n() == 4 {
        let deg = taut::deg_lambda1_4pt(&it).map_err(|e| e.to_string())?;
        let per = deg / Rational::from(delta as i128);
        json["deg_lambda1"] = json!(render(&deg));
        json["mass_closed_form"] = json!(mu_closed_form(per));
        let _ = writeln!(pretty, "  deg lambda1 = {}, mu(p) = {}", render(&deg), mu_closed_form(per));
        if let Some(p) = p {
            field::check_prime(p).map_err(|e| e.to_string())?;
            let td = taut::taut_data_4pt(&it, p, marked).map_err(|e| e.to_string())?;
            json["p"] = json!(p);
            json["mass_rhs"] = json!(render(&td.mass_rhs));
            json["warning"] = json!(td.warning);
            let _ = writeln!(pretty, "  mu({p}) = {}", render(&td.mass_rhs));
            if let Some(w) = td.warning {
                let _ = writeln!(pretty, "  warning: {w}");
            }
        }
    }
    let tsv = format!(
        "{spec}\t{}\t{}\t{delta}\t{}\t{}",
        sig.genus,
        sig.f.iter().map(u64::to_string).collect::<Vec<_>>().join(","),
        json["deg_lambda1"].as_str().unwrap_or(""),
        json["mass_closed_form"].as_str().unwrap_or("")
    );
    Ok(vec![Doc { stem: format!("{}_invariants", slug(spec)), json, tsv, pretty, ok: true }])
}

fn cmd_moonen(cli: &Cli, p: u64) -> Result<Vec<Doc>, String> {
    field::check_prime(p).map_err(|e| e.to_string())?;
    let rows = taut::moonen_table(p, cli.marked_label.checked_sub(1)).map_err(|e| e.to_string())?;
    let mut pretty = format!("{:<6} {:<12} {:>2} {:>8} {:>3} {:>3} {:>3} {:>6} {:>6} {:>8}\n", "row", "family", "g", "deglam1", "dlt", "z", "a", "n", "table", "mu");
    let mut tsv = String::new();
    for r in &rows {
        let _ = writeln!(pretty, "{:<6} {:<12} {:>2} {:>8} {:>3} {:>3} {:>3} {:>6} {:>6} {:>8}{}",
            r.label, r.family, r.g, render(&r.deg_lambda1), r.delta, r.z, r.a_nu, render(&r.n), render(&r.n_table), render(&r.mu),
            if r.p_is_one_mod_d { "" } else { "  (p not 1 mod d)" });
        let _ = writeln!(tsv, "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}", r.label, r.family, r.g, render(&r.deg_lambda1), r.delta, r.z, r.a_nu, render(&r.n), render(&r.n_table), render(&r.mu));
    }
    Ok(vec![Doc {
        stem: format!("moonen_p{p}"),
        json: json!({ "p": p, "rows": rows }),
        tsv: tsv.trim_end().to_string(),
        pretty,
        ok: true,
    }])
}

fn iko_doc(d: &IkoCaseData) -> Doc {
    let by_aut: Vec<String> = d.classes_by_aut.iter().map(|(n, r)| format!("R_{n}={r}")).collect();
    Doc {
        stem: format!("{}_p{}", d.case, d.p),
        json: serde_json::to_value(d).expect("case data serializes"),
        tsv: format!("{}\t{}\t{}\t{}\t{}\t{}\t{}", d.case, d.p, d.count, by_aut.join(","), d.r_infinity, render(&d.mass), d.all_pass()),
        pretty: d.to_pretty(),
        ok: d.all_pass(),
    }
}

fn cmd_iko(cli: &Cli, case: IkoCase, primes: &[u64]) -> Result<Vec<Doc>, String> {
    let docs: Vec<Result<Doc, String>> = primes
        .par_iter()
        .map(|&p| {
            let d = match case {
                IkoCase::CaseB => mass::iko_genus2_case_b(p, cli.seed),
                IkoCase::CaseSecond => mass::iko_genus2_case_second(p, cli.seed),
            }
            .map_err(|e| format!("p = {p}: {e}"))?;
            Ok(iko_doc(&d))
        })
        .collect();
    docs.into_iter().collect()
}

fn cmd_oracle(cli: &Cli, spec: &str, p: u64, samples: usize, degree: usize, full: bool) -> Result<Vec<Doc>, String> {
    field::check_prime(p).map_err(|e| e.to_string())?;
    let it: InertiaType = spec.parse().map_err(|e: cycmass::Error| e.to_string())?;
    let r = oracle::oracle_check(&it, p, degree, samples, cli.seed, full).map_err(|e| e.to_string())?;
    let pretty = format!(
        "{spec} at p = {p}: {} entries checked, {} mismatches; {} exactness checks, {} failures; full expansion {}\n",
        r.entries_checked,
        r.entry_mismatches,
        r.exactness_checked,
        r.exactness_failures,
        r.full_expansion_agrees.map_or("not run".to_string(), |b| if b { "agrees".into() } else { "DISAGREES".into() })
    );
    Ok(vec![Doc {
        stem: format!("{}_p{p}_oracle", slug(spec)),
        json: serde_json::to_value(&r).expect("oracle report serializes"),
        tsv: format!("{spec}\t{p}\t{}\t{}\t{}\t{}", r.entries_checked, r.entry_mismatches, r.exactness_failures, r.passed()),
        pretty,
        ok: r.passed(),
    }])
}

fn tsv_header(cmd: &Command) -> &'static str {
    match cmd {
        Command::Verify { .. } => MassReport::TSV_HEADER,
        Command::Invariants { .. } => "family\tgenus\tsignature\tdelta\tdeg_lambda1\tmass",
        Command::Moonen { .. } => "row\tfamily\tg\tdeg_lambda1\tdelta\tz\ta_nu\tn\tn_table\tmu",
        Command::Iko { .. } => "case\tp\tcount\tclasses_by_aut\tr_infinity\tmass\tchecks_pass",
        Command::OracleCheck { .. } => "family\tp\tentries\tmismatches\texactness_failures\tpassed",
    }
}

fn render_doc(doc: &Doc, format: Format, header: &str) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(&doc.json).expect("json") + "\n",
        Format::Tsv => format!("{header}\n{}\n", doc.tsv),
        Format::Pretty => doc.pretty.clone(),
    }
}

fn emit(docs: &[Doc], cli: &Cli) -> Result<(), String> {
    let header = tsv_header(&cli.command);
    match &cli.out_dir {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(|e| format!("{}: {e}", dir.display()))?;
            for d in docs {
                let path: PathBuf = Path::new(dir).join(format!("{}.{}", d.stem, cli.format.extension()));
                fs::write(&path, render_doc(d, cli.format, header)).map_err(|e| format!("{}: {e}", path.display()))?;
            }
        }
        None => match cli.format {
            Format::Json if docs.len() == 1 => print!("{}", render_doc(&docs[0], cli.format, header)),
            Format::Json => {
                let all: Vec<&Value> = docs.iter().map(|d| &d.json).collect();
                println!("{}", serde_json::to_string_pretty(&all).expect("json"));
            }
            Format::Tsv => {
                println!("{header}");
                for d in docs.iter().filter(|d| !d.tsv.is_empty()) {
                    println!("{}", d.tsv);
                }
            }
            Format::Pretty => docs.iter().for_each(|d| print!("{}", d.pretty)),
        },
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, String> {
    if let Some(n) = cli.jobs {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| e.to_string())?;
    }
    let docs = match &cli.command {
        Command::Invariants { spec, p } => cmd_invariants(cli, spec, *p)?,
        Command::Verify { spec, h, p, p_range } => {
            let primes = parse_primes(*p, p_range.as_deref())?;
            cmd_verify(cli, spec, h.as_deref(), &primes)?
        }
        Command::Moonen { p } => cmd_moonen(cli, *p)?,
        Command::Iko { case, p, p_range } => {
            let primes = parse_primes(*p, p_range.as_deref())?;
            cmd_iko(cli, *case, &primes)?
        }
        Command::OracleCheck { spec, p, samples, degree, full_expansion_oracle } => {
            cmd_oracle(cli, spec, *p, *samples, *degree, *full_expansion_oracle)?
        }
    };
    emit(&docs, cli)?;
    let ok = docs.iter().all(|d| d.ok);
    if !ok && !cli.allow_interior_only && docs.iter().any(|d| d.json["verdict"] == "interior-only") {
        eprintln!("note: p is not 1 mod d for some run; pass --allow-interior-only to accept interior sums");
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
