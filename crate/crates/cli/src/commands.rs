//! Command implementations. Each produces a [`Report`].

use clap::Subcommand;
use thiserror::Error;

use reldiff::coeffield::FieldDescriptor;
use reldiff::dgroup::{self, DGroupError, RelativeDGroup};
use reldiff::dvariety::{self, polys, DVarietyError, RelativeDVariety, Verdict};
use reldiff::expr::{format_rat, format_tuple};
use reldiff::kolchin::{self, brute_force_count, dim_poly, inclusion_exclusion_count, LeaderSet};
use reldiff::poly::Rat;
use reldiff::prolong::{self, Partition, ProlongError, TauPoint};
use reldiff::reduce::{membership_verdict, AutoreducedSet, Membership, ReduceError};

use crate::report::{certificate, verdict_name, Report};
use crate::session::{GroupDecl, Object, Session, VarietyDecl};

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Re-check the field declaration.
    FieldCheck,
    /// Generators of the relative prolongation of a variety.
    Prolong { variety: String },
    /// Validate the section and the integrability condition.
    DvarietyCheck { variety: String },
    /// Group law, section, homomorphism and crossed-homomorphism checks.
    DgroupCheck { group: String },
    /// Logarithmic derivative, symbolic unless `--at` names a point.
    Logderiv {
        group: String,
        #[arg(long)]
        at: Option<String>,
        #[arg(long, conflicts_with = "at")]
        symbolic: bool,
    },
    /// Is a point of the fiber over the identity integrable?
    Integrable {
        group: String,
        alpha: String,
        #[arg(long)]
        witness: Option<String>,
    },
    /// Integrability of a linear system `D_i x = A_i x`.
    Ppv { matrices: String },
    /// Dimension polynomial of a leader set, or the sharp-point bound of a
    /// variety or group.
    Kolchin { target: String },
    /// Reduce a polynomial (by name or inline) modulo a presentation.
    Reduce {
        poly: String,
        #[arg(value_parser = ["mod"])]
        keyword: String,
        set: String,
    },
    /// Run every command line of a file in order.
    Batch { file: std::path::PathBuf },
}

impl Command {
    pub fn echo(&self) -> String {
        match self {
            Command::FieldCheck => "field-check".into(),
            Command::Prolong { variety } => format!("prolong {variety}"),
            Command::DvarietyCheck { variety } => format!("dvariety-check {variety}"),
            Command::DgroupCheck { group } => format!("dgroup-check {group}"),
            Command::Logderiv { group, at, .. } => match at {
                Some(p) => format!("logderiv {group} --at {p}"),
                None => format!("logderiv {group} --symbolic"),
            },
            Command::Integrable {
                group,
                alpha,
                witness,
            } => match witness {
                Some(w) => format!("integrable {group} {alpha} --witness {w}"),
                None => format!("integrable {group} {alpha}"),
            },
            Command::Ppv { matrices } => format!("ppv {matrices}"),
            Command::Kolchin { target } => format!("kolchin {target}"),
            Command::Reduce { poly, set, .. } => format!("reduce {poly} mod {set}"),
            Command::Batch { file } => format!("batch {}", file.display()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Options {
    pub max_order: u32,
    pub check_assoc: bool,
}

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("no object named `{0}`")]
    Missing(String),
    #[error("`{name}` is a {found}, expected {expected}")]
    WrongKind {
        name: String,
        found: &'static str,
        expected: &'static str,
    },
    #[error("`{0}` declares no section")]
    NoSection(String),
    #[error("in `{name}`: {message}")]
    Semantic { name: String, message: String },
    #[error("cannot parse `{src}`: {message}")]
    Expression { src: String, message: String },
}

impl CommandError {
    fn semantic(name: &str, e: impl std::fmt::Display) -> Self {
        CommandError::Semantic {
            name: name.to_string(),
            message: e.to_string(),
        }
    }
}

type Result<T> = std::result::Result<T, CommandError>;

fn lookup<'a>(s: &'a Session, name: &str) -> Result<&'a Object> {
    s.get(name)
        .ok_or_else(|| CommandError::Missing(name.to_string()))
}

fn wrong(name: &str, o: &Object, expected: &'static str) -> CommandError {
    CommandError::WrongKind {
        name: name.to_string(),
        found: o.kind(),
        expected,
    }
}

/// Varieties and groups both carry a variety.
fn variety_of<'a>(s: &'a Session, name: &str) -> Result<&'a VarietyDecl> {
    match lookup(s, name)? {
        Object::Variety(v) => Ok(v),
        Object::Group(g) => Ok(&g.variety),
        o => Err(wrong(name, o, "variety or group")),
    }
}

fn group_of<'a>(s: &'a Session, name: &str) -> Result<&'a GroupDecl> {
    match lookup(s, name)? {
        Object::Group(g) => Ok(g),
        o => Err(wrong(name, o, "group")),
    }
}

fn autoreduced(name: &str, v: &VarietyDecl) -> Result<AutoreducedSet> {
    AutoreducedSet::new(polys(&v.generators), v.prime).map_err(|e| CommandError::semantic(name, e))
}

fn dvariety(s: &Session, name: &str, v: &VarietyDecl) -> Result<RelativeDVariety> {
    if v.section.is_empty() && !s.field.outer().is_empty() {
        return Err(CommandError::NoSection(name.to_string()));
    }
    RelativeDVariety::new(
        autoreduced(name, v)?,
        v.coords.clone(),
        Partition::of_field(&s.field),
        v.section.clone(),
    )
    .map_err(|e| CommandError::semantic(name, e))
}

fn dgroup_of(s: &Session, name: &str) -> Result<RelativeDGroup> {
    let g = group_of(s, name)?;
    let dv = dvariety(s, name, &g.variety)?;
    RelativeDGroup::new(dv, g.law.clone()).map_err(|e| CommandError::semantic(name, e))
}

fn point(s: &Session, name: &str) -> Result<Vec<Rat>> {
    match lookup(s, name)? {
        Object::Point(p) => Ok(p.clone()),
        o => Err(wrong(name, o, "point")),
    }
}

fn tau(s: &Session, name: &str) -> Result<TauPoint> {
    match lookup(s, name)? {
        Object::Tau(t) => Ok(t.clone()),
        o => Err(wrong(name, o, "tau point")),
    }
}

fn show_tau(t: &TauPoint, f: &FieldDescriptor) -> String {
    let mut parts = vec![format_tuple(&t.base, f)];
    parts.extend(t.fibers.iter().map(|u| format_tuple(u, f)));
    parts.join("; ")
}

fn outer_name(f: &FieldDescriptor, i: usize) -> String {
    f.derivations()[f.outer()[i]].name.clone()
}

pub fn run(s: &Session, cmd: &Command, opts: &Options) -> Result<Report> {
    let mut rep = Report::new(cmd.echo());
    let f = &s.field;
    match cmd {
        Command::FieldCheck => field_check(s, &mut rep),
        Command::Prolong { variety } => {
            let v = variety_of(s, variety)?;
            let set = autoreduced(variety, v)?;
            let pres = prolong::prolongation_gens(f, &Partition::of_field(f), &set, &v.coords)
                .map_err(|e: ProlongError| CommandError::semantic(variety, e))?;
            let sec = rep.section("base generators");
            for (i, g) in set.elements().iter().enumerate() {
                sec.value(
                    format!("A{}", i + 1),
                    format_rat(&Rat::from_poly(g.clone()), f),
                );
            }
            for (i, row) in pres.lifted.iter().enumerate() {
                let name = outer_name(f, i);
                let fibers: Vec<String> = pres.fibers[i]
                    .iter()
                    .map(|u| u.name().to_string())
                    .collect();
                let sec = rep.section(format!("lift along {name}, fiber ({})", fibers.join(", ")));
                for (j, g) in row.iter().enumerate() {
                    sec.value(format!("d[{name}] A{}", j + 1), format_rat(g, f));
                }
            }
        }
        Command::DvarietyCheck { variety } => {
            let v = variety_of(s, variety)?;
            let dv = dvariety(s, variety, v)?;
            let e = |e: DVarietyError| CommandError::semantic(variety, e);
            let sec = dvariety::validate_section(f, &dv).map_err(e)?;
            let int = dvariety::check_integrability(f, &dv).map_err(e)?;
            rep.section("section").residuals(f, &dv.variety, &sec);
            rep.section("integrability").residuals(f, &dv.variety, &int);
            rep.merge_verdict(sec.verdict);
            rep.merge_verdict(int.verdict);
        }
        Command::DgroupCheck { group } => {
            let g = dgroup_of(s, group)?;
            let e = |e: DGroupError| CommandError::semantic(group, e);
            let r = dgroup::check_dgroup(f, &g, opts.check_assoc).map_err(e)?;
            let square = g.square_set(f).map_err(e)?;
            rep.section("group law").residuals(f, g.set(), &r.law);
            rep.section("section").residuals(f, g.set(), &r.section);
            rep.section("integrability")
                .residuals(f, g.set(), &r.integrability);
            rep.section("s is a homomorphism")
                .residuals(f, &square, &r.section_hom);
            rep.section("nabla is a homomorphism")
                .residuals(f, &square, &r.nabla_hom);
            rep.merge_verdict(r.verdict);
            let ch = dgroup::check_crossed_hom(f, &g).map_err(e)?;
            rep.section("logarithmic derivative is a crossed homomorphism")
                .residuals(f, &square, &ch);
            rep.merge_verdict(ch.verdict);
        }
        Command::Logderiv { group, at, .. } => {
            let g = dgroup_of(s, group)?;
            let e = |e: DGroupError| CommandError::semantic(group, e);
            let pt = match at {
                Some(p) => point(s, p)?,
                None => g
                    .coords()
                    .iter()
                    .map(|c| Rat::var(reldiff::poly::Var::indet(c.clone())))
                    .collect(),
            };
            let l = dgroup::log_derivative(f, &g, &pt).map_err(e)?;
            let sec = rep.section("logarithmic derivative");
            sec.value("at", format_tuple(&pt, f));
            sec.value("value", show_tau(&l, f));
            for (i, u) in l.fibers.iter().enumerate() {
                sec.value(
                    format!("fiber along {}", outer_name(f, i)),
                    format_tuple(u, f),
                );
            }
            let sec = rep.section("base is the identity");
            let mut verdicts = Vec::new();
            for (j, (b, e0)) in l.base.iter().zip(&g.law.identity).enumerate() {
                let c =
                    dvariety::check_residual(f, g.set(), format!("component {}", j + 1), b - e0)
                        .map_err(|x| CommandError::semantic(group, x))?;
                verdicts.push(c.verdict);
                sec.residual(f, g.set(), &c);
            }
            rep.merge_verdict(Verdict::all(verdicts));
        }
        Command::Integrable {
            group,
            alpha,
            witness,
        } => {
            let g = dgroup_of(s, group)?;
            let a = tau(s, alpha)?;
            let w = witness.as_ref().map(|n| point(s, n)).transpose()?;
            let r = dgroup::integrable_point_check(f, &g, &a, w.as_deref())
                .map_err(|e| CommandError::semantic(group, e))?;
            let sec = rep.section("twisted section");
            for (i, row) in r.twisted.section.iter().enumerate() {
                sec.value(format!("along {}", outer_name(f, i)), format_tuple(row, f));
            }
            rep.section("twisted section is valid")
                .residuals(f, g.set(), &r.section);
            rep.section("twisted integrability")
                .residuals(f, g.set(), &r.integrability);
            if let Some(wr) = &r.witness {
                let sec = rep.section("witness");
                sec.value("logarithmic derivative", show_tau(&wr.log_derivative, f));
                sec.check(
                    "solves",
                    wr.difference
                        .iter()
                        .map(|d| format_rat(d, f))
                        .collect::<Vec<_>>()
                        .join(", "),
                    if wr.solves {
                        Verdict::Pass
                    } else {
                        Verdict::Inconclusive
                    },
                );
            }
            rep.merge_verdict(r.verdict);
        }
        Command::Ppv { matrices } => {
            let m = match lookup(s, matrices)? {
                Object::Matrices(m) => m,
                o => return Err(wrong(matrices, o, "matrices")),
            };
            let res = dgroup::linear_integrability(f, &Partition::of_field(f), m)
                .map_err(|e| CommandError::semantic(matrices, e))?;
            let sec = rep.section("integrability D_i A_j - D_j A_i - [A_i, A_j]");
            if res.is_empty() {
                sec.check("pairs", "none (single derivation)", Verdict::Pass);
            }
            let mut verdicts = Vec::new();
            for p in &res {
                let rows: Vec<String> = p.residual.iter().map(|r| format_tuple(r, f)).collect();
                sec.check(
                    format!(
                        "{}, {}",
                        outer_name(f, p.first - 1),
                        outer_name(f, p.second - 1)
                    ),
                    format!("[{}]", rows.join(", ")),
                    p.verdict,
                );
                verdicts.push(p.verdict);
            }
            rep.merge_verdict(Verdict::all(verdicts));
        }
        Command::Kolchin { target } => match lookup(s, target)? {
            Object::Leaders(l) => kolchin_leaders(l, opts, &mut rep),
            Object::Variety(_) | Object::Group(_) => kolchin_sharp(s, target, opts, &mut rep)?,
            o => return Err(wrong(target, o, "leaders, variety or group")),
        },
        Command::Reduce { poly, set, .. } => {
            let v = variety_of(s, set)?;
            let a = autoreduced(set, v)?;
            let p = match s.get(poly) {
                Some(Object::Poly(p)) => p.clone(),
                Some(o) => return Err(wrong(poly, o, "polynomial")),
                None => s.parse_expr(poly).map_err(|e| CommandError::Expression {
                    src: poly.clone(),
                    message: e.to_string(),
                })?,
            };
            let (m, cert) = membership_verdict(f, &p, &a)
                .map_err(|e: ReduceError| CommandError::semantic(set, e))?;
            let verdict = Verdict::from_membership(m);
            let sec = rep.section("reduction");
            sec.value("input", format_rat(&p, f));
            sec.items.push(crate::report::Item {
                label: "membership".into(),
                value: match m {
                    Membership::InIdeal => "in ideal".into(),
                    Membership::NotInIdeal => "not in ideal".into(),
                    Membership::Unknown => "unknown (set not declared prime)".into(),
                },
                verdict: Some(verdict_name(verdict)),
                certificate: Some(certificate(f, &a, &p, &cert)),
            });
            rep.merge_verdict(verdict);
        }
        Command::Batch { .. } => unreachable!("batch is expanded by the caller"),
    }
    Ok(rep)
}

fn field_check(s: &Session, rep: &mut Report) {
    let f = &s.field;
    let sec = rep.section("derivations");
    for d in f.derivations() {
        let class = match d.class {
            reldiff::coeffield::DerivationClass::Outer => "outer",
            reldiff::coeffield::DerivationClass::Inner => "inner",
        };
        sec.value(d.name.clone(), class);
    }
    let sec = rep.section("table");
    for (k, d) in f.derivations().iter().enumerate() {
        for g in f.generators() {
            let v = f.table_entry(k, g).cloned().unwrap_or_else(Rat::zero);
            sec.value(format!("{} {}", d.name, g.name()), format_rat(&v, f));
        }
    }
    let sec = rep.section("commutativity");
    for g in f.generators() {
        for k in 0..f.derivations().len() {
            for l in (k + 1)..f.derivations().len() {
                let x = Rat::var(reldiff::poly::Var::Gen(g.clone()));
                let r = &f.derive(k, &f.derive(l, &x)) - &f.derive(l, &f.derive(k, &x));
                let v = if r.is_zero() {
                    Verdict::Pass
                } else {
                    Verdict::Fail
                };
                sec.check(
                    format!(
                        "[{}, {}] {}",
                        f.derivations()[k].name,
                        f.derivations()[l].name,
                        g.name()
                    ),
                    format_rat(&r, f),
                    v,
                );
            }
        }
    }
}

fn kolchin_leaders(l: &LeaderSet, opts: &Options, rep: &mut Report) {
    let p = dim_poly(l);
    let (t, d) = p.type_and_dim();
    let sec = rep.section("dimension polynomial");
    sec.value("omega", p.to_string());
    sec.value("type", t.to_string());
    sec.value("typical dimension", d.to_string());
    let h_max = opts.max_order;
    let counts_agree =
        (0..=h_max).all(|h| inclusion_exclusion_count(l, h) == brute_force_count(l, h));
    let th = l.stability_threshold();
    let poly_agrees = (th..=th + h_max).all(|h| p.eval(h as i64) == brute_force_count(l, h));
    let sec = rep.section("enumeration");
    for h in 0..=h_max {
        sec.value(format!("h = {h}"), brute_force_count(l, h).to_string());
    }
    let v = |b: bool| if b { Verdict::Pass } else { Verdict::Fail };
    sec.check(
        format!("inclusion-exclusion, h = 0..{h_max}"),
        "matches enumeration",
        v(counts_agree),
    );
    sec.check(
        format!("polynomial, h = {th}..{}", th + h_max),
        "matches enumeration",
        v(poly_agrees),
    );
    rep.merge_verdict(v(counts_agree && poly_agrees));
}

fn kolchin_sharp(s: &Session, name: &str, opts: &Options, rep: &mut Report) -> Result<()> {
    let f = &s.field;
    let v = variety_of(s, name)?;
    let set = autoreduced(name, v)?;
    let part = Partition::of_field(f);
    let leaders = LeaderSet::from_autoreduced(&set, &v.coords, part.inner())
        .map_err(|e| CommandError::semantic(name, e))?;
    let mu = if v.section.is_empty() {
        1
    } else {
        dvariety(s, name, v)?.section_order()
    };
    let r = kolchin::sharp_bound_check(&leaders, part.outer().len(), mu, opts.max_order);
    let sec = rep.section("sharp points");
    sec.value("omega", r.sharp.to_string());
    let (t, d) = r.sharp.type_and_dim();
    sec.value("type", t.to_string());
    sec.value("typical dimension", d.to_string());
    let sec = rep.section("variety over the inner derivations");
    sec.value("omega", r.variety.to_string());
    let (t, d) = r.variety.type_and_dim();
    sec.value("type", t.to_string());
    sec.value("typical dimension", d.to_string());
    let scaled = if mu == 1 {
        "h".to_string()
    } else {
        format!("{mu}h")
    };
    let sec = rep.section(format!("bound omega_sharp(h) <= omega_V({scaled})"));
    for (h, a, b) in &r.rows {
        let ok = if a <= b { Verdict::Pass } else { Verdict::Fail };
        sec.check(format!("h = {h}"), format!("{a} <= {b}"), ok);
    }
    let types = if r.types_agree {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    sec.check(
        "types agree",
        format!("{} = {}", r.sharp.degree(), r.variety.degree()),
        types,
    );
    rep.merge_verdict(if r.passed() {
        Verdict::Pass
    } else {
        Verdict::Fail
    });
    Ok(())
}
