//! Command-line frontend. Every command renders either aligned text or a
//! versioned JSON document; identical arguments give identical bytes.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::central::{self, CentralizerReport, DEFAULT_MAX_ENUM};
use crate::error::{Error, Result};
use crate::ff::{parse_field, Field, FieldElem};
use crate::forms::{self, IsometryElement};
use crate::invariants::{self, Family};
use crate::linalg::{self, InvariantTuple, Matrix};
use crate::poly::{self, Poly};

pub const SCHEMA: u32 = 1;
pub const MAX_ENUM_ENV: &str = "ULTRAINV_MAX_ENUM";

#[derive(Parser, Debug)]
#[command(
    name = "ultrainv",
    version,
    about = "Conjugacy invariants, centralizers and double-centralizer exponents of finite classical groups"
)]
struct Cli {
    /// Seed for sampled inputs.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Enumeration budget (overrides ULTRAINV_MAX_ENUM).
    #[arg(long, global = true)]
    max_enum: Option<u64>,
    /// Emit JSON instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads for batch commands.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Polynomials over GF(p^k).
    #[command(subcommand)]
    Poly(PolyCmd),
    /// Matrices: invariants, orders, conjugacy.
    #[command(subcommand)]
    Mat(MatCmd),
    /// Centralizers and double centralizers.
    #[command(subcommand)]
    Cent(CentCmd),
    /// The exponent invariant e_G(o).
    #[command(subcommand)]
    E(ECmd),
}

#[derive(Args, Debug)]
struct FieldPoly {
    /// Field descriptor p^k.
    #[arg(long)]
    field: String,
    /// Coefficient codes, constant first (`ω` allowed for the generator).
    #[arg(long, allow_hyphen_values = true)]
    poly: String,
}

#[derive(Subcommand, Debug)]
enum PolyCmd {
    /// Primary factorization.
    Factor(FieldPoly),
    /// The dual χ*.
    Dual {
        #[command(flatten)]
        fp: FieldPoly,
        /// Power of the Frobenius in the involution (0 or k/2).
        #[arg(long, default_value_t = 0)]
        sigma: u32,
    },
    /// The scalar action χ.z.
    Act {
        #[command(flatten)]
        fp: FieldPoly,
        #[arg(long)]
        z: String,
    },
    /// Irreducible divisors of X^o − μ.
    Cyclodiv {
        #[arg(long)]
        field: String,
        #[arg(long)]
        o: u64,
        #[arg(long, default_value = "1")]
        mu: String,
    },
    /// Orbit and stabilizer of χ under the scalar subgroup of the given order.
    Orbit {
        #[command(flatten)]
        fp: FieldPoly,
        /// Order of Z (default q − 1).
        #[arg(long)]
        z_order: Option<u64>,
    },
}

#[derive(Subcommand, Debug)]
enum MatCmd {
    /// Invariant tuple.
    Invariant { file: PathBuf },
    /// Multiplicative order.
    Order { file: PathBuf },
    /// Conjugacy test, with a witness.
    Conjtest {
        a: PathBuf,
        b: PathBuf,
        /// Test in the isometry group of this form instead of GL.
        #[arg(long)]
        form: Option<String>,
    },
    /// Frobenius normal form.
    Form { file: PathBuf },
}

#[derive(Args, Debug)]
struct Element {
    file: PathBuf,
    /// Form descriptor `kind p^k n`; without it the element lives in GL.
    #[arg(long, conflicts_with = "gl")]
    form: Option<String>,
    /// Work in GL (the default).
    #[arg(long)]
    gl: bool,
}

#[derive(Subcommand, Debug)]
enum CentCmd {
    /// Centralizer C(g).
    Report {
        #[command(flatten)]
        el: Element,
        /// Enumerate the elements.
        #[arg(long)]
        enumerate: bool,
    },
    /// Double centralizer C²(g), enumerated, with its exponent modulo Z.
    Double {
        #[command(flatten)]
        el: Element,
        /// Use the conformal centralizer.
        #[arg(long)]
        conformal: bool,
    },
    /// Conformal centralizer {h : g^h ∈ Zg}.
    Conformal {
        #[command(flatten)]
        el: Element,
        #[arg(long)]
        enumerate: bool,
    },
}

#[derive(Args, Debug)]
struct Triple {
    #[arg(long)]
    family: String,
    #[arg(long)]
    q: u64,
    #[arg(long)]
    o: u64,
}

#[derive(Subcommand, Debug)]
enum ECmd {
    /// Closed form e_G(o).
    Formula(Triple),
    /// Brute-force e_G(o).
    Oracle {
        #[command(flatten)]
        t: Triple,
        #[arg(long, default_value_t = invariants::DEFAULT_N_BUDGET)]
        n_budget: usize,
    },
    /// e_G(o) for o ≤ o_max over all families, or the t_r table.
    Table {
        #[arg(long)]
        q: u64,
        #[arg(long, default_value_t = 30)]
        o_max: u64,
        /// Print t_r = (q^r − 1)/(q − 1) for primes r ≤ r_max instead.
        #[arg(long)]
        tr: bool,
        #[arg(long, default_value_t = 13)]
        r_max: u64,
        #[arg(long, default_value_t = 1)]
        threshold: u64,
    },
    /// Find o with e_{G1}(o) ≠ e_{G2}(o); groups as FAMILY:q.
    Distinguish {
        a: String,
        b: String,
        #[arg(long, default_value_t = 1000)]
        o_bound: u64,
    },
    /// Formula against oracle over a grid; nonzero exit on mismatch.
    Sweep {
        /// JSON list of {family, q, o}; defaults to the built-in grid.
        #[arg(long)]
        grid: Option<PathBuf>,
        /// Additional seeded random triples.
        #[arg(long, default_value_t = 0)]
        extra: usize,
        #[arg(long, default_value_t = invariants::DEFAULT_N_BUDGET)]
        n_budget: usize,
    },
}

/// Result of one invocation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct RunConfig {
    pub seed: u64,
    pub max_enum: u64,
    pub json: bool,
    #[serde(skip)]
    pub jobs: usize,
}

struct Rendered {
    text: String,
    json: Value,
    code: i32,
}

impl Rendered {
    fn ok(text: String, json: Value) -> Self {
        Rendered {
            text,
            json,
            code: 0,
        }
    }
}

/// Parses and runs; never exits the process.
pub fn execute<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind::*;
            let msg = e.render().to_string();
            return match e.kind() {
                DisplayHelp | DisplayVersion | DisplayHelpOnMissingArgumentOrSubcommand => {
                    Outcome {
                        code: 0,
                        stdout: msg,
                        stderr: String::new(),
                    }
                }
                _ => Outcome {
                    code: 2,
                    stdout: String::new(),
                    stderr: msg,
                },
            };
        }
    };
    let max_enum = match cli.max_enum.map(Ok).unwrap_or_else(env_max_enum) {
        Ok(m) => m,
        Err(e) => return failure(&e),
    };
    let cfg = RunConfig {
        seed: cli.seed,
        max_enum,
        json: cli.json,
        jobs: cli.jobs.max(1),
    };
    let (name, result) = match &cli.cmd {
        Cmd::Poly(c) => ("poly", cmd_poly(c)),
        Cmd::Mat(c) => ("mat", cmd_mat(c, &cfg)),
        Cmd::Cent(c) => ("cent", cmd_cent(c, &cfg)),
        Cmd::E(c) => ("e", cmd_e(c, &cfg)),
    };
    match result {
        Ok(r) => {
            let stdout = if cfg.json {
                let doc =
                    json!({ "schema": SCHEMA, "command": name, "config": cfg, "result": r.json });
                let mut s = serde_json::to_string_pretty(&doc).expect("serializable");
                s.push('\n');
                s
            } else {
                r.text
            };
            Outcome {
                code: r.code,
                stdout,
                stderr: String::new(),
            }
        }
        Err(e) => failure(&e),
    }
}

/// Entry point for the binary: prints and returns the exit code.
pub fn run<I: IntoIterator<Item = OsString>>(args: I) -> i32 {
    let out = execute(args);
    print!("{}", out.stdout);
    eprint!("{}", out.stderr);
    out.code
}

fn failure(e: &Error) -> Outcome {
    Outcome {
        code: e.exit_code(),
        stdout: String::new(),
        stderr: format!("error: {e}\n"),
    }
}

fn env_max_enum() -> Result<u64> {
    match std::env::var(MAX_ENUM_ENV) {
        Ok(v) => v
            .trim()
            .parse()
            .map_err(|_| Error::parse(1, 1, format!("{MAX_ENUM_ENV}={v:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_MAX_ENUM),
    }
}

/// Integers above 2^53 become strings.
fn big_json(v: &BigUint) -> Value {
    match v.to_u64() {
        Some(x) if x <= 1 << 53 => json!(x),
        _ => json!(v.to_string()),
    }
}

fn read_input(path: &Path) -> Result<String> {
    let mut s = String::new();
    let res = if path == Path::new("-") {
        std::io::stdin().read_to_string(&mut s).map(|_| ())
    } else {
        std::fs::read_to_string(path).map(|t| s = t)
    };
    res.map_err(|e| Error::parse(0, 0, format!("{}: {e}", path.display())))?;
    Ok(s)
}

fn read_matrix(path: &Path) -> Result<Matrix> {
    Matrix::parse(&read_input(path)?)
}

/// A field element: a code, or `ω`/`w` (the generator), optionally `ω^j`.
fn parse_elem(field: &Field, tok: &str) -> Result<FieldElem> {
    let t = tok.trim();
    let sym = t.strip_prefix('ω').or_else(|| t.strip_prefix('w'));
    if let Some(rest) = sym {
        let e: u64 = match rest {
            "" => 1,
            "²" => 2,
            r => r
                .trim_start_matches('^')
                .parse()
                .map_err(|_| Error::parse(1, 1, format!("bad exponent in {t:?}")))?,
        };
        return Ok(field.pow(field.generator(), e));
    }
    let c: u64 = t
        .parse()
        .map_err(|_| Error::parse(1, 1, format!("bad field element {t:?}")))?;
    if c >= field.q() {
        return Err(Error::parse(
            1,
            1,
            format!("code {c} not below q = {}", field.q()),
        ));
    }
    Ok(FieldElem(c))
}

fn parse_poly(field: &Field, s: &str) -> Result<Poly> {
    let mut codes = Vec::new();
    for tok in s.split(',') {
        codes.push(parse_elem(field, tok)?.0.to_string());
    }
    Poly::parse_csv(field, &codes.join(","))
}

fn poly_json(p: &Poly) -> Value {
    json!({ "csv": p.to_csv(), "display": p.to_string() })
}

// ---- poly ----

fn cmd_poly(c: &PolyCmd) -> Result<Rendered> {
    match c {
        PolyCmd::Factor(fp) => {
            let field = parse_field(&fp.field)?;
            let f = parse_poly(&field, &fp.poly)?;
            let fac = f.factor()?;
            let j: Vec<Value> = fac
                .factors
                .iter()
                .map(|(p, e)| json!({ "poly": poly_json(p), "exponent": e }))
                .collect();
            Ok(Rendered::ok(
                format!("{fac}\n"),
                json!({ "input": poly_json(&f), "factors": j }),
            ))
        }
        PolyCmd::Dual { fp, sigma } => {
            let field = parse_field(&fp.field)?;
            let f = parse_poly(&field, &fp.poly)?;
            let d = f.dual(*sigma)?;
            let sd = d == f;
            let text = format!("{d}{}\n", if sd { " (self-dual)" } else { "" });
            Ok(Rendered::ok(
                text,
                json!({ "input": poly_json(&f), "dual": poly_json(&d), "self_dual": sd }),
            ))
        }
        PolyCmd::Act { fp, z } => {
            let field = parse_field(&fp.field)?;
            let f = parse_poly(&field, &fp.poly)?;
            let z = parse_elem(&field, z)?;
            let a = f.scalar_act(z)?;
            Ok(Rendered::ok(
                format!("{a}\n"),
                json!({ "input": poly_json(&f), "z": z.0, "result": poly_json(&a) }),
            ))
        }
        PolyCmd::Cyclodiv { field, o, mu } => {
            let field = parse_field(field)?;
            let mu = parse_elem(&field, mu)?;
            let ds = poly::divisors_of_cyclotomic(&field, *o, mu)?;
            let text: String = ds.iter().map(|d| format!("{d}\n")).collect();
            Ok(Rendered::ok(
                text,
                json!({ "o": o, "mu": mu.0, "divisors": ds.iter().map(poly_json).collect::<Vec<_>>() }),
            ))
        }
        PolyCmd::Orbit { fp, z_order } => {
            let field = parse_field(&fp.field)?;
            let f = parse_poly(&field, &fp.poly)?;
            let z = poly::cyclic_subgroup(&field, z_order.unwrap_or(field.q() - 1))?;
            let (orbit, stab) = f.orbit_stabilizer(&z)?;
            let mut text = String::new();
            writeln!(text, "orbit ({}):", orbit.len()).unwrap();
            for p in &orbit {
                writeln!(text, "  {p}").unwrap();
            }
            let st: Vec<u64> = stab.iter().map(|s| s.0).collect();
            writeln!(text, "stabilizer: {st:?}").unwrap();
            Ok(Rendered::ok(
                text,
                json!({ "z": z.iter().map(|x| x.0).collect::<Vec<_>>(), "orbit": orbit.iter().map(poly_json).collect::<Vec<_>>(), "stabilizer": st }),
            ))
        }
    }
}

// ---- mat ----

fn tuple_text(t: &InvariantTuple) -> String {
    let name = |k: &linalg::Primary| {
        if k.exp == 1 {
            k.irr.to_string()
        } else {
            k.to_string()
        }
    };
    let cs: Vec<String> = t
        .entries
        .iter()
        .map(|(k, c)| format!("{}: {c}", name(k)))
        .collect();
    let qs: Vec<String> = t
        .entries
        .keys()
        .map(|k| format!("{}", t.q_chi(k)))
        .collect();
    format!("{{{}}}\nq-values: {}\n", cs.join(", "), qs.join(", "))
}

fn cmd_mat(c: &MatCmd, _cfg: &RunConfig) -> Result<Rendered> {
    match c {
        MatCmd::Invariant { file } => {
            let g = read_matrix(file)?;
            let t = linalg::invariant_tuple(&g);
            Ok(Rendered::ok(tuple_text(&t), t.to_json()))
        }
        MatCmd::Order { file } => {
            let g = read_matrix(file)?;
            let o = linalg::element_order(&g)?;
            Ok(Rendered::ok(format!("{o}\n"), json!({ "order": o })))
        }
        MatCmd::Conjtest { a, b, form } => {
            let (ga, gb) = (read_matrix(a)?, read_matrix(b)?);
            if let Some(desc) = form {
                let f = forms::parse_form(desc)?;
                let ea = IsometryElement::new(f.clone(), ga)?;
                let eb = IsometryElement::new(f, gb)?;
                let yes = forms::isometry_conjugacy_test(&ea, &eb)?;
                let text = if yes {
                    "conjugate\n"
                } else {
                    "not conjugate\n"
                };
                return Ok(Rendered::ok(
                    text.into(),
                    json!({ "conjugate": yes, "form": desc }),
                ));
            }
            let (yes, w) = linalg::conjugacy_test(&ga, &gb)?;
            let text = match &w {
                Some(w) => format!("conjugate, witness P = \n{w}"),
                None => "not conjugate\n".into(),
            };
            Ok(Rendered::ok(
                text,
                json!({ "conjugate": yes, "witness": w }),
            ))
        }
        MatCmd::Form { file } => {
            let g = read_matrix(file)?;
            let (t, p) = linalg::frobenius_form(&g);
            let nf = linalg::realize_invariant(g.field(), g.n(), &t)?;
            let text = format!(
                "{}normal form:\n{nf}transform P (P⁻¹gP = normal form):\n{p}",
                tuple_text(&t)
            );
            Ok(Rendered::ok(
                text,
                json!({ "tuple": t.to_json(), "normal_form": nf, "transform": p }),
            ))
        }
    }
}

// ---- cent ----

fn report_text(r: &CentralizerReport) -> String {
    let mut s = String::new();
    writeln!(
        s,
        "{} in {}{} over {}, n = {}",
        r.what,
        r.mode,
        if r.conformal { " (conformal)" } else { "" },
        r.field,
        r.n
    )
    .unwrap();
    if r.representative {
        writeln!(s, "computed on a realized conjugate").unwrap();
    }
    if let Some(o) = &r.order {
        writeln!(s, "order {o}").unwrap();
    }
    if let Some(c) = r.element_count {
        writeln!(s, "elements {c}").unwrap();
    }
    if !r.by_mu.is_empty() {
        let parts: Vec<String> = r.by_mu.iter().map(|(m, c)| format!("{m}: {c}")).collect();
        writeln!(s, "by μ: {}", parts.join(", ")).unwrap();
    }
    writeln!(s, "generators {}", r.generators).unwrap();
    writeln!(s, "Z = {:?}, T = {:?}", r.z, r.t).unwrap();
    if let Some(a) = r.abelian {
        writeln!(s, "abelian mod Z: {a}, block-scalar: {}", r.block_scalar).unwrap();
    }
    if let Some(e) = r.exponent_mod_center {
        writeln!(s, "exponent {e}").unwrap();
    }
    if !r.lambda.is_empty() {
        writeln!(s, "λ-table:").unwrap();
        for row in &r.lambda {
            writeln!(s, "  {} ↦ {{{}}}", row.chi, row.values.join(", ")).unwrap();
        }
    }
    for f in &r.flagged {
        writeln!(s, "flagged: {f}").unwrap();
    }
    for (k, v) in &r.checks {
        writeln!(s, "check {k}: {}", if *v { "ok" } else { "FAILED" }).unwrap();
    }
    s
}

fn element_structure(el: &Element) -> Result<(Matrix, Option<IsometryElement>)> {
    let g = read_matrix(&el.file)?;
    match &el.form {
        Some(desc) => {
            let f = forms::parse_form(desc)?;
            if f.field.q() != g.field().q() || f.n != g.n() {
                return Err(Error::DimensionMismatch(format!(
                    "matrix over {} of size {} vs form {desc}",
                    g.field(),
                    g.n()
                )));
            }
            Ok((g.clone(), Some(IsometryElement::new(f, g)?)))
        }
        None => Ok((g, None)),
    }
}

fn cmd_cent(c: &CentCmd, cfg: &RunConfig) -> Result<Rendered> {
    let budget = cfg.max_enum;
    let rep = match c {
        CentCmd::Report { el, enumerate } => match element_structure(el)? {
            (_, Some(e)) => central::centralizer_in_isometry(&e, false, *enumerate, budget)?,
            (g, None) => central::centralizer_in_gl(&g, *enumerate, budget)?,
        },
        CentCmd::Conformal { el, enumerate } => match element_structure(el)? {
            (_, Some(e)) => central::centralizer_in_isometry(&e, true, *enumerate, budget)?,
            (_, None) => {
                return Err(Error::KindMismatch(
                    "the conformal centralizer needs --form".into(),
                ));
            }
        },
        CentCmd::Double { el, conformal } => match element_structure(el)? {
            (_, Some(e)) => central::double_centralizer_isometry(&e, *conformal, budget)?,
            (g, None) => central::double_centralizer_gl(&g, *conformal, budget)?,
        },
    };
    let json = serde_json::to_value(&rep).expect("serializable");
    let mut out = Rendered::ok(report_text(&rep), json);
    if !rep.all_checks_pass() {
        out.code = 1;
    }
    Ok(out)
}

// ---- e ----

fn evalue_json(e: &invariants::EValue) -> Value {
    json!({ "family": e.family, "q": e.q, "o": e.o, "e": big_json(&e.value), "branch": e.branch })
}

fn cmd_e(c: &ECmd, cfg: &RunConfig) -> Result<Rendered> {
    match c {
        ECmd::Formula(t) => {
            let e = invariants::e_value(Family::parse(&t.family)?, t.q, t.o)?;
            Ok(Rendered::ok(format!("{}\n", e.value), evalue_json(&e)))
        }
        ECmd::Oracle { t, n_budget } => {
            let fam = Family::parse(&t.family)?;
            let r = invariants::e_oracle(fam, t.q, t.o, *n_budget, cfg.max_enum)?;
            let mut text = format!("{}\n", r.e);
            writeln!(text, "n = {}, assignment {:?}", r.n, r.assignment).unwrap();
            if r.outside_hypotheses {
                writeln!(text, "note: gcd(o, |Z|) ≠ 1").unwrap();
            }
            for f in &r.flagged {
                writeln!(text, "flagged: {f}").unwrap();
            }
            let code = if r.checks_passed { 0 } else { 1 };
            Ok(Rendered {
                text,
                json: serde_json::to_value(&r).expect("serializable"),
                code,
            })
        }
        ECmd::Table {
            q,
            o_max,
            tr,
            r_max,
            threshold,
        } => {
            if *tr {
                let t = invariants::t_r_table(*q, *r_max, *threshold)?;
                let mut text = format!("{:>4}  {:>22}  {:>12}\n", "r", "t_r", "prime>thr");
                for row in &t.rows {
                    let pa = row.prime_above.map_or("-".to_string(), |x| x.to_string());
                    writeln!(text, "{:>4}  {:>22}  {:>12}", row.r, row.t_r, pa).unwrap();
                }
                writeln!(text, "pairwise coprime: {}", t.pairwise_coprime()).unwrap();
                let mut j = serde_json::to_value(&t).expect("serializable");
                j["pairwise_coprime"] = json!(t.pairwise_coprime());
                return Ok(Rendered::ok(text, j));
            }
            let mut text = format!("{:>5}", "o");
            for f in Family::ALL {
                write!(text, "  {:>14}", format!("{f}({q})")).unwrap();
            }
            text.push('\n');
            let mut rows = Vec::new();
            for o in 1..=*o_max {
                write!(text, "{o:>5}").unwrap();
                let mut row = serde_json::Map::new();
                row.insert("o".into(), json!(o));
                for f in Family::ALL {
                    let cell = invariants::e_value(f, *q, o).ok();
                    let s = cell
                        .as_ref()
                        .map_or("-".to_string(), |e| e.value.to_string());
                    write!(text, "  {s:>14}").unwrap();
                    row.insert(
                        f.to_string(),
                        cell.map_or(Value::Null, |e| big_json(&e.value)),
                    );
                }
                text.push('\n');
                rows.push(Value::Object(row));
            }
            Ok(Rendered::ok(text, json!({ "q": q, "rows": rows })))
        }
        ECmd::Distinguish { a, b, o_bound } => {
            let ga = invariants::parse_group(a)?;
            let gb = invariants::parse_group(b)?;
            let r = invariants::distinguish(ga, gb, *o_bound);
            let text = match r.verdict {
                invariants::Verdict::Distinguished => format!(
                    "distinguished: o={}, e=({},{})\n",
                    r.witness_o.unwrap(),
                    r.e1.as_ref().unwrap(),
                    r.e2.as_ref().unwrap()
                ),
                invariants::Verdict::ExceptionalPair => {
                    format!(
                        "exceptional pair (open){}\n",
                        r.note.as_ref().map_or(String::new(), |n| format!(": {n}"))
                    )
                }
                invariants::Verdict::NotFoundWithinBound => {
                    format!("not found for o ≤ {o_bound}\n")
                }
            };
            Ok(Rendered::ok(
                text,
                serde_json::to_value(&r).expect("serializable"),
            ))
        }
        ECmd::Sweep {
            grid,
            extra,
            n_budget,
        } => {
            let mut triples = match grid {
                Some(path) => parse_grid(&read_input(path)?)?,
                None => default_grid(),
            };
            triples.extend(random_triples(cfg.seed, *extra));
            let rows = sweep(&triples, *n_budget, cfg.max_enum, cfg.jobs)?;
            Ok(render_sweep(&rows))
        }
    }
}

// ---- sweep ----

#[derive(Clone, Debug, Deserialize)]
struct GridEntry {
    family: String,
    q: u64,
    o: u64,
}

fn parse_grid(text: &str) -> Result<Vec<(Family, u64, u64)>> {
    let entries: Vec<GridEntry> = serde_json::from_str(text)
        .map_err(|e| Error::parse(e.line(), e.column(), format!("grid: {e}")))?;
    entries
        .iter()
        .map(|g| Ok((Family::parse(&g.family)?, g.q, g.o)))
        .collect()
}

/// Triples where oracle and closed form are compared by default.
pub fn default_grid() -> Vec<(Family, u64, u64)> {
    let mut v: Vec<(Family, u64, u64)> = [
        (2, 3),
        (2, 5),
        (2, 7),
        (3, 2),
        (3, 4),
        (3, 5),
        (4, 3),
        (5, 3),
    ]
    .iter()
    .map(|&(q, o)| (Family::PGL, q, o))
    .collect();
    v.extend([
        (Family::PSp, 3, 2),
        (Family::PSp, 3, 4),
        (Family::PSp, 3, 5),
        (Family::PGO, 3, 2),
    ]);
    v.extend([(Family::PGU, 2, 3), (Family::PGU, 2, 9)]);
    v
}

fn random_triples(seed: u64, count: usize) -> Vec<(Family, u64, u64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let fam = Family::ALL[rng.gen_range(0..4)];
        let q = [2u64, 3, 4, 5][rng.gen_range(0..4)];
        let o = rng.gen_range(1..=8u64);
        let p = crate::arith::prime_power(q).unwrap().0;
        if o % p == 0 || (fam == Family::PGO && p == 2) {
            continue;
        }
        out.push((fam, q, o));
    }
    out
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct SweepRow {
    pub family: Family,
    pub q: u64,
    pub o: u64,
    pub formula: Option<String>,
    pub oracle: Option<u64>,
    pub n: Option<usize>,
    pub outside_hypotheses: bool,
    pub matches: Option<bool>,
    pub error: Option<String>,
}

/// Runs the oracle for each distinct triple on `jobs` threads; rows come back
/// sorted by `(family, q, o)`.
pub fn sweep(
    triples: &[(Family, u64, u64)],
    n_budget: usize,
    max_enum: u64,
    jobs: usize,
) -> Result<Vec<SweepRow>> {
    let mut ts = triples.to_vec();
    ts.sort();
    ts.dedup();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| Error::UnsupportedCharacteristic(format!("thread pool: {e}")))?;
    let rows = pool.install(|| {
        ts.par_iter()
            .map(|&(family, q, o)| {
                let formula = invariants::closed_form(family, q, o);
                let oracle = invariants::e_oracle(family, q, o, n_budget, max_enum);
                let mut row = SweepRow {
                    family,
                    q,
                    o,
                    formula: formula.as_ref().ok().map(|f| f.to_string()),
                    oracle: None,
                    n: None,
                    outside_hypotheses: invariants::coprimality(family, q, o).is_err(),
                    matches: None,
                    error: None,
                };
                match (&formula, &oracle) {
                    (Ok(f), Ok(r)) => {
                        row.oracle = Some(r.e);
                        row.n = Some(r.n);
                        row.matches = Some(*f == BigUint::from(r.e) && r.checks_passed);
                    }
                    (Err(e), _) | (_, Err(e)) => row.error = Some(e.to_string()),
                }
                row
            })
            .collect::<Vec<_>>()
    });
    Ok(rows)
}

fn render_sweep(rows: &[SweepRow]) -> Rendered {
    let mut text = format!(
        "{:<6}{:>4}{:>5}{:>12}{:>12}{:>5}  result\n",
        "family", "q", "o", "formula", "oracle", "n"
    );
    let mut mismatches = 0;
    for r in rows {
        let res = match (r.matches, &r.error) {
            (Some(true), _) => "ok".to_string(),
            (Some(false), _) => {
                mismatches += 1;
                "MISMATCH".to_string()
            }
            (None, Some(e)) => format!("skipped: {e}"),
            (None, None) => "skipped".to_string(),
        };
        let star = if r.outside_hypotheses { "*" } else { "" };
        writeln!(
            text,
            "{:<6}{:>4}{:>5}{:>12}{:>12}{:>5}  {res}{star}",
            r.family.to_string(),
            r.q,
            r.o,
            r.formula.as_deref().unwrap_or("-"),
            r.oracle.map_or("-".into(), |e| e.to_string()),
            r.n.map_or("-".into(), |n| n.to_string()),
        )
        .unwrap();
    }
    writeln!(
        text,
        "{} rows, {} mismatches (* outside gcd(o,|Z|) = 1)",
        rows.len(),
        mismatches
    )
    .unwrap();
    let json = json!({ "rows": rows, "mismatches": mismatches });
    Rendered {
        text,
        json,
        code: if mismatches > 0 { 1 } else { 0 },
    }
}
