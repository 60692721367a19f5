//! Session files: a field block followed by named objects.
//!
//! ```text
//! # comment
//! field
//!   generators t, w, E
//!   derivation dt outer
//!   derivation dw outer
//!   table dt E = 2*w*E
//! end
//! indeterminates x, y, X, Y
//! variety V
//!   coords x, y
//!   generator x*y - 1
//!   section dt = (x*y, 0)
//!   prime
//! end
//! group G
//!   coords x, y
//!   right X, Y
//!   mul (x*X, y + Y)
//!   inv (1/x, -y)
//!   identity (1, 0)
//!   section dt = (x*y, 0)
//! end
//! point g = (E, 2*w)
//! tau alpha = (1, 0; 0, 0; 2*t, 2)
//! poly f = x*y - 1
//! matrices M
//!   A dt = [[v]]
//! end
//! leaders L
//!   derivations 2
//!   x: [0, 1]
//!   y: [0, 1]; [1, 0]
//! end
//! ```
//!
//! Table entries left out are zero.

use std::collections::BTreeMap;
use std::fmt;

use reldiff::coeffield::{DerivationClass, DerivationName, FieldDescriptor, FieldError};
use reldiff::dgroup::{LinearSystem, Matrix, RationalGroupLaw};
use reldiff::expr::{format_rat, format_tuple, parse, parse_tuple, ParseError, Scope};
use reldiff::kolchin::LeaderSet;
use reldiff::poly::{Rat, Symbol};
use reldiff::prolong::{fiber_symbols, TauPoint};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum SessionError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("line {line}: {source}")]
    Field { line: usize, source: FieldError },
}

impl SessionError {
    fn at(line: usize, column: usize, message: impl Into<String>) -> Self {
        SessionError::Syntax {
            line,
            column,
            message: message.into(),
        }
    }
}

/// A variety with its presentation and (optional) section.
#[derive(Debug, Clone)]
pub struct VarietyDecl {
    pub coords: Vec<Symbol>,
    pub generators: Vec<Rat>,
    pub prime: bool,
    /// Per outer derivation, in the field's order; empty when undeclared.
    pub section: Vec<Vec<Rat>>,
}

#[derive(Debug, Clone)]
pub struct GroupDecl {
    pub variety: VarietyDecl,
    pub law: RationalGroupLaw,
}

#[derive(Debug, Clone)]
pub enum Object {
    Variety(VarietyDecl),
    Group(GroupDecl),
    Point(Vec<Rat>),
    Tau(TauPoint),
    Poly(Rat),
    Matrices(LinearSystem),
    Leaders(LeaderSet),
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Variety(_) => "variety",
            Object::Group(_) => "group",
            Object::Point(_) => "point",
            Object::Tau(_) => "tau point",
            Object::Poly(_) => "polynomial",
            Object::Matrices(_) => "matrices",
            Object::Leaders(_) => "leaders",
        }
    }
}

#[derive(Debug, Clone)]
pub struct Session {
    pub field: FieldDescriptor,
    pub indets: Vec<Symbol>,
    /// Declaration order is kept for reports.
    pub objects: Vec<(String, Object)>,
}

impl Session {
    pub fn get(&self, name: &str) -> Option<&Object> {
        self.objects.iter().find(|(n, _)| n == name).map(|(_, o)| o)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut Object> {
        self.objects
            .iter_mut()
            .find(|(n, _)| n == name)
            .map(|(_, o)| o)
    }

    /// Indeterminates plus the fiber coordinates, for parsing expressions.
    pub fn scope_symbols(&self) -> Vec<Symbol> {
        scope_symbols(&self.field, &self.indets)
    }

    pub fn parse_expr(&self, src: &str) -> Result<Rat, ParseError> {
        let syms = self.scope_symbols();
        parse(src, &Scope::new(&self.field, &syms))
    }
}

fn scope_symbols(field: &FieldDescriptor, indets: &[Symbol]) -> Vec<Symbol> {
    let mut out = indets.to_vec();
    for i in 1..=field.outer().len() {
        for s in fiber_symbols(i, 2 * indets.len().max(1)) {
            if !out.iter().any(|o| o.name() == s.name()) {
                out.push(s);
            }
        }
    }
    out
}

/// One meaningful line with its position in the file.
struct Line<'a> {
    number: usize,
    /// Byte offset of `text` within the raw line.
    indent: usize,
    text: &'a str,
}

impl Line<'_> {
    /// Column (1-based) of byte offset `off` in `text`.
    fn col(&self, off: usize) -> usize {
        self.indent + off + 1
    }

    fn err(&self, off: usize, message: impl Into<String>) -> SessionError {
        SessionError::at(self.number, self.col(off), message)
    }

    /// First word and the rest, with the byte offset of the rest.
    fn split(&self) -> (&str, &str, usize) {
        match self.text.find(char::is_whitespace) {
            Some(i) => {
                let rest = self.text[i..].trim_start();
                let off = self.text.len() - rest.len();
                (&self.text[..i], rest, off)
            }
            None => (self.text, "", self.text.len()),
        }
    }
}

fn lines(src: &str) -> Vec<Line<'_>> {
    src.lines()
        .enumerate()
        .filter_map(|(i, raw)| {
            let body = raw.split('#').next().unwrap_or("");
            let text = body.trim();
            if text.is_empty() {
                return None;
            }
            let indent = body.len() - body.trim_start().len();
            Some(Line {
                number: i + 1,
                indent,
                text,
            })
        })
        .collect()
}

fn is_ident(s: &str) -> bool {
    let mut c = s.chars();
    matches!(c.next(), Some(ch) if ch.is_ascii_alphabetic() || ch == '_')
        && c.all(|ch| ch.is_ascii_alphanumeric() || ch == '_')
}

fn names(line: &Line<'_>, s: &str, off: usize) -> Result<Vec<String>, SessionError> {
    let mut out = Vec::new();
    let mut pos = off;
    if s.trim().is_empty() {
        return Ok(out);
    }
    for part in s.split(',') {
        let name = part.trim();
        let lead = part.len() - part.trim_start().len();
        if !is_ident(name) {
            return Err(line.err(pos + lead, format!("expected a name, found `{name}`")));
        }
        out.push(name.to_string());
        pos += part.len() + 1;
    }
    Ok(out)
}

/// `name = rest`, returning the name and the offset of `rest`.
fn binding<'a>(
    line: &Line<'a>,
    s: &'a str,
    off: usize,
) -> Result<(&'a str, &'a str, usize), SessionError> {
    let eq = s
        .find('=')
        .ok_or_else(|| line.err(off + s.len(), "expected `=`"))?;
    let name = s[..eq].trim();
    if !is_ident(name) {
        return Err(line.err(off, format!("expected a name, found `{name}`")));
    }
    let rest = s[eq + 1..].trim_start();
    let roff = off + s.len() - rest.len();
    Ok((name, rest.trim_end(), roff))
}

pub fn parse_session(src: &str) -> Result<Session, SessionError> {
    let lines = lines(src);
    let first = lines
        .first()
        .ok_or_else(|| SessionError::at(1, 1, "empty session: expected a `field` block"))?;
    if first.text != "field" {
        return Err(first.err(0, "expected a `field` block first"));
    }
    let end = block_end(&lines, 0)?;
    let field = parse_field(&lines[1..end], first.number)?;
    let mut i = end + 1;
    let mut session = Session {
        field,
        indets: Vec::new(),
        objects: Vec::new(),
    };
    while i < lines.len() {
        let line = &lines[i];
        let (kw, rest, off) = line.split();
        match kw {
            "indeterminates" => {
                if !session.objects.is_empty() || !session.indets.is_empty() {
                    return Err(
                        line.err(0, "indeterminates must be declared once, before any object")
                    );
                }
                for (k, n) in names(line, rest, off)?.into_iter().enumerate() {
                    if session.field.generator(&n).is_some()
                        || session.indets.iter().any(|s| s.name() == n)
                    {
                        return Err(line.err(off, format!("duplicate name `{n}`")));
                    }
                    session.indets.push(Symbol::new(k as u32, &n));
                }
                i += 1;
            }
            "variety" | "group" | "matrices" | "leaders" => {
                let name = rest.trim();
                if !is_ident(name) {
                    return Err(line.err(off, format!("expected a name, found `{name}`")));
                }
                let end = block_end(&lines, i)?;
                let body = &lines[i + 1..end];
                let obj = match kw {
                    "variety" => Object::Variety(parse_variety(&session, body, line)?.0),
                    "group" => Object::Group(parse_group(&session, body, line)?),
                    "matrices" => Object::Matrices(parse_matrices(&session, body, line)?),
                    _ => Object::Leaders(parse_leaders(body, line)?),
                };
                add(&mut session, line, off, name, obj)?;
                i = end + 1;
            }
            "point" | "tau" | "poly" => {
                let (name, value, voff) = binding(line, rest, off)?;
                let obj = match kw {
                    "point" => Object::Point(tuple(&session, line, value, voff)?),
                    "tau" => Object::Tau(tau_point(&session, line, value, voff)?),
                    _ => Object::Poly(expr(&session, line, value, voff)?),
                };
                add(&mut session, line, off, name, obj)?;
                i += 1;
            }
            other => return Err(line.err(0, format!("unknown declaration `{other}`"))),
        }
    }
    Ok(session)
}

fn add(
    session: &mut Session,
    line: &Line<'_>,
    off: usize,
    name: &str,
    obj: Object,
) -> Result<(), SessionError> {
    if session.get(name).is_some() {
        return Err(line.err(off, format!("duplicate object name `{name}`")));
    }
    session.objects.push((name.to_string(), obj));
    Ok(())
}

fn block_end(lines: &[Line<'_>], start: usize) -> Result<usize, SessionError> {
    lines[start + 1..]
        .iter()
        .position(|l| l.text == "end")
        .map(|p| start + 1 + p)
        .ok_or_else(|| lines[start].err(0, "block is missing `end`"))
}

fn parse_field(body: &[Line<'_>], header: usize) -> Result<FieldDescriptor, SessionError> {
    let mut gens: Vec<String> = Vec::new();
    let mut derivs: Vec<DerivationName> = Vec::new();
    let mut table: Vec<(String, String, String)> = Vec::new();
    for line in body {
        let (kw, rest, off) = line.split();
        match kw {
            "generators" => gens.extend(names(line, rest, off)?),
            "derivation" => {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                match parts.as_slice() {
                    [name, "outer"] if is_ident(name) => derivs.push(DerivationName::outer(name)),
                    [name, "inner"] if is_ident(name) => derivs.push(DerivationName::inner(name)),
                    _ => return Err(line.err(off, "expected `derivation <name> outer|inner`")),
                }
            }
            "table" => {
                let parts: Vec<&str> = rest.splitn(2, char::is_whitespace).collect();
                if parts.len() != 2 {
                    return Err(line.err(off, "expected `table <derivation> <generator> = <expr>`"));
                }
                let goff = off + rest.len() - parts[1].trim_start().len();
                let (gen, value, _) = binding(line, parts[1].trim_start(), goff)?;
                table.push((parts[0].to_string(), gen.to_string(), value.to_string()));
            }
            other => return Err(line.err(0, format!("unknown field entry `{other}`"))),
        }
    }
    // entries left out are zero
    for d in &derivs {
        for g in &gens {
            if !table.iter().any(|(a, b, _)| a == &d.name && b == g) {
                table.push((d.name.clone(), g.clone(), "0".to_string()));
            }
        }
    }
    let gen_refs: Vec<&str> = gens.iter().map(|s| s.as_str()).collect();
    let triples: Vec<(&str, &str, &str)> = table
        .iter()
        .map(|(a, b, c)| (a.as_str(), b.as_str(), c.as_str()))
        .collect();
    let line = body
        .iter()
        .find(|l| l.text.starts_with("table"))
        .map_or(header, |l| l.number);
    FieldDescriptor::declare(&gen_refs, derivs, &triples)
        .map_err(|source| SessionError::Field { line, source })
}

fn expr_err(line: &Line<'_>, off: usize, e: ParseError) -> SessionError {
    line.err(off + e.offset(), e.to_string())
}

fn expr(session: &Session, line: &Line<'_>, src: &str, off: usize) -> Result<Rat, SessionError> {
    session.parse_expr(src).map_err(|e| expr_err(line, off, e))
}

fn tuple(
    session: &Session,
    line: &Line<'_>,
    src: &str,
    off: usize,
) -> Result<Vec<Rat>, SessionError> {
    let syms = session.scope_symbols();
    parse_tuple(src, &Scope::new(&session.field, &syms)).map_err(|e| expr_err(line, off, e))
}

/// Split at top-level occurrences of `sep` (outside brackets), keeping
/// byte offsets.
fn split_top(s: &str, sep: char) -> Vec<(usize, &str)> {
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    for (i, c) in s.char_indices() {
        match c {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            c if c == sep && depth == 0 => {
                out.push((start, &s[start..i]));
                start = i + c.len_utf8();
            }
            _ => {}
        }
    }
    out.push((start, &s[start..]));
    out
}

fn tau_point(
    session: &Session,
    line: &Line<'_>,
    src: &str,
    off: usize,
) -> Result<TauPoint, SessionError> {
    let inner = src
        .strip_prefix('(')
        .and_then(|s| s.strip_suffix(')'))
        .ok_or_else(|| line.err(off, "expected `(base; fiber; …)`"))?;
    let mut parts = Vec::new();
    for (p, piece) in split_top(inner, ';') {
        let poff = off + 1 + p;
        let wrapped = format!("({piece})");
        let syms = session.scope_symbols();
        // the added parenthesis shifts offsets by one
        let t = parse_tuple(&wrapped, &Scope::new(&session.field, &syms))
            .map_err(|e| line.err(poff + e.offset().saturating_sub(1), e.to_string()))?;
        parts.push(t);
    }
    let base = parts.remove(0);
    let r = session.field.outer().len();
    if parts.len() != r {
        return Err(line.err(
            off,
            format!("expected {r} fiber tuples, found {}", parts.len()),
        ));
    }
    TauPoint::new(base, parts).map_err(|e| line.err(off, e.to_string()))
}

fn coords(
    session: &Session,
    line: &Line<'_>,
    rest: &str,
    off: usize,
) -> Result<Vec<Symbol>, SessionError> {
    names(line, rest, off)?
        .into_iter()
        .map(|n| {
            session
                .indets
                .iter()
                .find(|s| s.name() == n)
                .cloned()
                .ok_or_else(|| line.err(off, format!("`{n}` is not a declared indeterminate")))
        })
        .collect()
}

fn outer_index(
    session: &Session,
    line: &Line<'_>,
    name: &str,
    off: usize,
) -> Result<usize, SessionError> {
    let k = session
        .field
        .derivation_index(name)
        .ok_or_else(|| line.err(off, format!("unknown derivation `{name}`")))?;
    session
        .field
        .outer()
        .iter()
        .position(|&o| o == k)
        .ok_or_else(|| line.err(off, format!("`{name}` is not an outer derivation")))
}

/// Parse the variety lines of a block; lines it does not know are returned
/// for the caller.
fn parse_variety<'a, 'b>(
    session: &Session,
    body: &'b [Line<'a>],
    header: &Line<'_>,
) -> Result<(VarietyDecl, Vec<&'b Line<'a>>), SessionError> {
    let r = session.field.outer().len();
    let mut decl = VarietyDecl {
        coords: Vec::new(),
        generators: Vec::new(),
        prime: false,
        section: Vec::new(),
    };
    let mut sections: Vec<Option<Vec<Rat>>> = vec![None; r];
    let mut any_section = false;
    let mut rest_lines = Vec::new();
    for line in body {
        let (kw, rest, off) = line.split();
        match kw {
            "coords" => decl.coords = coords(session, line, rest, off)?,
            "generator" => decl.generators.push(expr(session, line, rest, off)?),
            "prime" => decl.prime = true,
            "section" => {
                let (name, value, voff) = binding(line, rest, off)?;
                let i = outer_index(session, line, name, off)?;
                let t = tuple(session, line, value, voff)?;
                if !decl.coords.is_empty() && t.len() != decl.coords.len() {
                    return Err(
                        line.err(voff, format!("expected {} components", decl.coords.len()))
                    );
                }
                sections[i] = Some(t);
                any_section = true;
            }
            _ => rest_lines.push(line),
        }
    }
    if decl.coords.is_empty() {
        return Err(header.err(0, "block declares no `coords`"));
    }
    // The zero ideal is prime.
    decl.prime |= decl.generators.is_empty();
    if any_section {
        for (i, s) in sections.into_iter().enumerate() {
            let k = session.field.outer()[i];
            let name = &session.field.derivations()[k].name;
            decl.section
                .push(s.ok_or_else(|| header.err(0, format!("no section given for `{name}`")))?);
        }
    }
    Ok((decl, rest_lines))
}

fn parse_group(
    session: &Session,
    body: &[Line<'_>],
    header: &Line<'_>,
) -> Result<GroupDecl, SessionError> {
    let (variety, extra) = parse_variety(session, body, header)?;
    let mut right = None;
    let mut mul = None;
    let mut inv = None;
    let mut identity = None;
    for line in extra {
        let (kw, rest, off) = line.split();
        match kw {
            "right" => right = Some(coords(session, line, rest, off)?),
            "mul" => mul = Some(tuple(session, line, rest, off)?),
            "inv" => inv = Some(tuple(session, line, rest, off)?),
            "identity" => identity = Some(tuple(session, line, rest, off)?),
            other => return Err(line.err(0, format!("unknown group entry `{other}`"))),
        }
    }
    let missing = |what: &str| header.err(0, format!("group block is missing `{what}`"));
    let law = RationalGroupLaw::new(
        variety.coords.clone(),
        right.ok_or_else(|| missing("right"))?,
        mul.ok_or_else(|| missing("mul"))?,
        inv.ok_or_else(|| missing("inv"))?,
        identity.ok_or_else(|| missing("identity"))?,
    )
    .map_err(|e| header.err(0, e.to_string()))?;
    Ok(GroupDecl { variety, law })
}

fn parse_matrices(
    session: &Session,
    body: &[Line<'_>],
    header: &Line<'_>,
) -> Result<LinearSystem, SessionError> {
    let r = session.field.outer().len();
    let mut slots: Vec<Option<Matrix>> = vec![None; r];
    for line in body {
        let (kw, rest, off) = line.split();
        if kw != "A" {
            return Err(line.err(
                0,
                format!("expected `A <derivation> = [[…]]`, found `{kw}`"),
            ));
        }
        let (name, value, voff) = binding(line, rest, off)?;
        let i = outer_index(session, line, name, off)?;
        let inner = value
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| line.err(voff, "expected a nested array `[[…], …]`"))?;
        let mut m = Vec::new();
        for (p, row) in split_top(inner, ',') {
            let row = row.trim();
            let roff = voff + 1 + p;
            let body = row
                .strip_prefix('[')
                .and_then(|s| s.strip_suffix(']'))
                .ok_or_else(|| line.err(roff, "expected a row `[…]`"))?;
            m.push(tuple(session, line, &format!("({body})"), roff)?);
        }
        for c in m.iter().flatten() {
            if c.has_der_vars() {
                return Err(line.err(voff, "matrix entries must lie in the coefficient field"));
            }
        }
        slots[i] = Some(m);
    }
    let mut matrices = Vec::new();
    for (i, s) in slots.into_iter().enumerate() {
        let k = session.field.outer()[i];
        let name = &session.field.derivations()[k].name;
        matrices.push(s.ok_or_else(|| header.err(0, format!("no matrix given for `{name}`")))?);
    }
    LinearSystem::new(matrices).map_err(|e| header.err(0, e.to_string()))
}

fn parse_leaders(body: &[Line<'_>], header: &Line<'_>) -> Result<LeaderSet, SessionError> {
    let mut m = None;
    let mut per: BTreeMap<usize, Vec<Vec<u32>>> = BTreeMap::new();
    let mut order = 0;
    for line in body {
        let (kw, rest, off) = line.split();
        if kw == "derivations" {
            m = Some(
                rest.trim()
                    .parse::<usize>()
                    .map_err(|_| line.err(off, "expected a derivation count"))?,
            );
            continue;
        }
        let colon = line
            .text
            .find(':')
            .ok_or_else(|| line.err(0, "expected `<label>: [..]; [..]`"))?;
        let list = line.text[colon + 1..].trim();
        let loff = line.text.len() - line.text[colon + 1..].trim_start().len();
        let mut leaders = Vec::new();
        if !list.is_empty() {
            for (p, item) in split_top(list, ';') {
                let item = item.trim();
                let body = item
                    .strip_prefix('[')
                    .and_then(|s| s.strip_suffix(']'))
                    .ok_or_else(|| line.err(loff + p, "expected `[e1, e2, …]`"))?;
                let v = body
                    .split(',')
                    .map(|x| x.trim().parse::<u32>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|_| line.err(loff + p, "expected nonnegative integers"))?;
                leaders.push(v);
            }
        }
        per.insert(order, leaders);
        order += 1;
    }
    let m = m.ok_or_else(|| header.err(0, "leaders block is missing `derivations`"))?;
    LeaderSet::new(m, per.into_values().collect()).map_err(|e| header.err(0, e.to_string()))
}

fn names_line(syms: &[Symbol]) -> String {
    syms.iter().map(|s| s.name()).collect::<Vec<_>>().join(", ")
}

fn write_variety(
    out: &mut fmt::Formatter<'_>,
    f: &FieldDescriptor,
    v: &VarietyDecl,
) -> fmt::Result {
    writeln!(out, "  coords {}", names_line(&v.coords))?;
    for g in &v.generators {
        writeln!(out, "  generator {}", format_rat(g, f))?;
    }
    if v.prime && !v.generators.is_empty() {
        writeln!(out, "  prime")?;
    }
    for (i, row) in v.section.iter().enumerate() {
        let name = &f.derivations()[f.outer()[i]].name;
        writeln!(out, "  section {name} = {}", format_tuple(row, f))?;
    }
    Ok(())
}

/// Canonical session text; parsing it gives back the same session.
impl fmt::Display for Session {
    fn fmt(&self, out: &mut fmt::Formatter<'_>) -> fmt::Result {
        let f = &self.field;
        writeln!(out, "field")?;
        writeln!(out, "  generators {}", names_line(f.generators()))?;
        for d in f.derivations() {
            let class = match d.class {
                DerivationClass::Outer => "outer",
                DerivationClass::Inner => "inner",
            };
            writeln!(out, "  derivation {} {class}", d.name)?;
        }
        for (k, d) in f.derivations().iter().enumerate() {
            for g in f.generators() {
                if let Some(e) = f.table_entry(k, g).filter(|e| !e.is_zero()) {
                    writeln!(
                        out,
                        "  table {} {} = {}",
                        d.name,
                        g.name(),
                        format_rat(e, f)
                    )?;
                }
            }
        }
        writeln!(out, "end")?;
        if !self.indets.is_empty() {
            writeln!(out, "indeterminates {}", names_line(&self.indets))?;
        }
        for (name, obj) in &self.objects {
            match obj {
                Object::Variety(v) => {
                    writeln!(out, "variety {name}")?;
                    write_variety(out, f, v)?;
                    writeln!(out, "end")?;
                }
                Object::Group(g) => {
                    writeln!(out, "group {name}")?;
                    write_variety(out, f, &g.variety)?;
                    writeln!(out, "  right {}", names_line(&g.law.right))?;
                    writeln!(out, "  mul {}", format_tuple(&g.law.mul, f))?;
                    writeln!(out, "  inv {}", format_tuple(&g.law.inv, f))?;
                    writeln!(out, "  identity {}", format_tuple(&g.law.identity, f))?;
                    writeln!(out, "end")?;
                }
                Object::Point(p) => writeln!(out, "point {name} = {}", format_tuple(p, f))?,
                Object::Tau(t) => {
                    let parts: Vec<String> = std::iter::once(&t.base)
                        .chain(&t.fibers)
                        .map(|c| {
                            let s = format_tuple(c, f);
                            s[1..s.len() - 1].to_string()
                        })
                        .collect();
                    writeln!(out, "tau {name} = ({})", parts.join("; "))?;
                }
                Object::Poly(p) => writeln!(out, "poly {name} = {}", format_rat(p, f))?,
                Object::Matrices(m) => {
                    writeln!(out, "matrices {name}")?;
                    for (i, a) in m.matrices().iter().enumerate() {
                        let rows: Vec<String> = a
                            .iter()
                            .map(|r| {
                                let s = format_tuple(r, f);
                                format!("[{}]", &s[1..s.len() - 1])
                            })
                            .collect();
                        let d = &f.derivations()[f.outer()[i]].name;
                        writeln!(out, "  A {d} = [{}]", rows.join(", "))?;
                    }
                    writeln!(out, "end")?;
                }
                Object::Leaders(l) => {
                    writeln!(out, "leaders {name}")?;
                    writeln!(out, "  derivations {}", l.derivations())?;
                    for (j, ls) in l.leaders().iter().enumerate() {
                        let items: Vec<String> = ls
                            .iter()
                            .map(|e| {
                                let v: Vec<String> = e.iter().map(|k| k.to_string()).collect();
                                format!("[{}]", v.join(", "))
                            })
                            .collect();
                        writeln!(out, "  y{}: {}", j + 1, items.join("; "))?;
                    }
                    writeln!(out, "end")?;
                }
            }
        }
        Ok(())
    }
}
