//! Line-oriented module file format (`kmod` version 1).
//!
//! See docs/module-format.md for the grammar. Parsing validates every
//! object it builds: the Eisenstein polynomial, each Kisin module (via the
//! linearization check in the constructor) and each morphism (Frobenius
//! compatibility). Rendering is canonical: records sorted by name, zero
//! entries omitted, so parse(render(x)) reproduces x.

use std::collections::BTreeMap;
use std::fmt;

use strongdiv_core::breuil::{from_kisin, BreuilModule, SMat};
use strongdiv_core::kisin::{check_morphism, make_kisin, KisinModule, KisinMorphism, SigmaMat};
use strongdiv_core::series::{EisensteinPoly, RingContext, SElem, SigmaElem};

#[derive(Debug)]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub msg: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.col, self.msg)
    }
}

impl std::error::Error for ParseError {}

pub struct MorphismRecord {
    pub src: String,
    pub dst: String,
    pub f: KisinMorphism,
}

pub struct BreuilRecord {
    pub from: String,
    pub r: u32,
    pub module: BreuilModule,
}

impl fmt::Debug for ModuleFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "ModuleFile(p={}, {} kisin, {} morphisms, {} breuil)",
            self.ctx.p(),
            self.kisin.len(),
            self.morphisms.len(),
            self.breuil.len()
        )
    }
}

pub struct ModuleFile {
    pub ctx: RingContext,
    pub eis_coeffs: Vec<i64>,
    pub kisin: BTreeMap<String, KisinModule>,
    pub morphisms: BTreeMap<String, MorphismRecord>,
    pub breuil: BTreeMap<String, BreuilRecord>,
}

struct Tok<'a> {
    text: &'a str,
    col: usize,
}

fn tokens(line: &str) -> Vec<Tok<'_>> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in line.char_indices() {
        if ch.is_whitespace() {
            if let Some(s) = start.take() {
                out.push(Tok { text: &line[s..i], col: s + 1 });
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push(Tok { text: &line[s..], col: s + 1 });
    }
    out
}

fn err(line: usize, col: usize, msg: impl Into<String>) -> ParseError {
    ParseError { line, col, msg: msg.into() }
}

fn parse_key<'a>(t: &Tok<'a>, key: &str, line: usize) -> Result<&'a str, ParseError> {
    t.text
        .strip_prefix(key)
        .and_then(|rest| rest.strip_prefix('='))
        .ok_or_else(|| err(line, t.col, format!("expected {}=<value>", key)))
}

fn parse_u64(s: &str, line: usize, col: usize) -> Result<u64, ParseError> {
    s.parse().map_err(|_| err(line, col, format!("invalid number `{}`", s)))
}

fn parse_usize(s: &str, line: usize, col: usize) -> Result<usize, ParseError> {
    s.parse().map_err(|_| err(line, col, format!("invalid number `{}`", s)))
}

fn parse_ints(s: &str, line: usize, col: usize) -> Result<Vec<i64>, ParseError> {
    s.split(',')
        .map(|t| t.parse().map_err(|_| err(line, col, format!("invalid coefficient `{}`", t))))
        .collect()
}

fn valid_name(s: &str) -> bool {
    let mut chars = s.chars();
    match chars.next() {
        Some(c) if c.is_ascii_alphabetic() => {}
        _ => return false,
    }
    chars.all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-')
}

fn want_len(toks: &[Tok<'_>], n: usize, line: usize, what: &str) -> Result<(), ParseError> {
    if toks.len() < n {
        return Err(err(line, toks.last().map(|t| t.col).unwrap_or(1), format!("{}: missing fields", what)));
    }
    if toks.len() > n {
        return Err(err(line, toks[n].col, format!("{}: unknown extra field `{}`", what, toks[n].text)));
    }
    Ok(())
}

struct PendingMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Vec<i64>>,
}

impl PendingMatrix {
    fn new(rows: usize, cols: usize) -> Self {
        PendingMatrix { rows, cols, entries: vec![Vec::new(); rows * cols] }
    }

    fn to_sigma(&self, ctx: &RingContext) -> SigmaMat {
        let entries: Vec<SigmaElem> =
            self.entries.iter().map(|c| ctx.sigma_poly(c)).collect();
        SigmaMat::new(self.rows, self.cols, entries).expect("consistent dimensions")
    }
}

pub fn parse_module_file(text: &str) -> Result<ModuleFile, ParseError> {
    let mut lines = text.lines().enumerate();

    // header
    let (_, header) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .ok_or_else(|| err(1, 1, "empty file: expected `kmod 1` header"))?;
    let htoks = tokens(header);
    if htoks.len() != 2 || htoks[0].text != "kmod" || htoks[1].text != "1" {
        return Err(err(1, htoks.first().map(|t| t.col).unwrap_or(1), "expected `kmod 1` header"));
    }

    // context
    let (ctx_idx, ctx_line) = lines
        .by_ref()
        .find(|(_, l)| !l.trim().is_empty() && !l.trim_start().starts_with('#'))
        .ok_or_else(|| err(2, 1, "expected `ctx` line"))?;
    let lno = ctx_idx + 1;
    let ctoks = tokens(ctx_line);
    if ctoks.is_empty() || ctoks[0].text != "ctx" {
        return Err(err(lno, ctoks.first().map(|t| t.col).unwrap_or(1), "expected `ctx` line"));
    }
    want_len(&ctoks, 5, lno, "ctx")?;
    let p = parse_u64(parse_key(&ctoks[1], "p", lno)?, lno, ctoks[1].col)?;
    let n = parse_u64(parse_key(&ctoks[2], "N", lno)?, lno, ctoks[2].col)? as u32;
    let m = parse_usize(parse_key(&ctoks[3], "M", lno)?, lno, ctoks[3].col)?;
    let eis_coeffs = parse_ints(parse_key(&ctoks[4], "E", lno)?, lno, ctoks[4].col)?;
    let eis = EisensteinPoly::new(eis_coeffs.clone(), p)
        .map_err(|e| err(lno, ctoks[4].col, format!("non-Eisenstein polynomial: {}", e)))?;
    let ctx = RingContext::new(p, n, m, eis)
        .map_err(|e| err(lno, ctoks[1].col, format!("invalid context: {}", e)))?;

    let mut kisin_pending: BTreeMap<String, (usize, u32, PendingMatrix)> = BTreeMap::new();
    let mut morph_pending: Vec<(usize, String, String, String, PendingMatrix)> = Vec::new();
    let mut breuil_pending: Vec<(usize, String, String, u32, Vec<(usize, usize, Vec<i64>)>)> =
        Vec::new();

    for (idx, raw) in lines {
        let lno = idx + 1;
        let line = raw.trim_end();
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            continue;
        }
        let toks = tokens(line);
        match toks[0].text {
            "kisin" => {
                want_len(&toks, 3, lno, "kisin").or_else(|_| want_len(&toks, 4, lno, "kisin"))?;
                let name = toks[1].text.to_string();
                if !valid_name(&name) {
                    return Err(err(lno, toks[1].col, format!("invalid name `{}`", name)));
                }
                if kisin_pending.contains_key(&name) {
                    return Err(err(lno, toks[1].col, format!("duplicate module `{}`", name)));
                }
                let rank = parse_usize(parse_key(&toks[2], "rank", lno)?, lno, toks[2].col)?;
                let denom = if toks.len() == 4 {
                    parse_u64(parse_key(&toks[3], "denom", lno)?, lno, toks[3].col)? as u32
                } else {
                    0
                };
                kisin_pending.insert(name, (lno, denom, PendingMatrix::new(rank, rank)));
            }
            "frob" => {
                want_len(&toks, 5, lno, "frob")?;
                let name = toks[1].text;
                let (_, _, pm) = kisin_pending
                    .get_mut(name)
                    .ok_or_else(|| err(lno, toks[1].col, format!("unknown module `{}`", name)))?;
                let i = parse_usize(toks[2].text, lno, toks[2].col)?;
                let j = parse_usize(toks[3].text, lno, toks[3].col)?;
                if i >= pm.rows || j >= pm.cols {
                    return Err(err(lno, toks[2].col, "entry index out of range"));
                }
                let coeffs = parse_ints(toks[4].text, lno, toks[4].col)?;
                if coeffs.len() > m {
                    return Err(err(lno, toks[4].col, "polynomial degree exceeds truncation"));
                }
                pm.entries[i * pm.cols + j] = coeffs;
            }
            "morphism" => {
                want_len(&toks, 4, lno, "morphism")?;
                let name = toks[1].text.to_string();
                if !valid_name(&name) {
                    return Err(err(lno, toks[1].col, format!("invalid name `{}`", name)));
                }
                if morph_pending.iter().any(|(_, n, _, _, _)| *n == name) {
                    return Err(err(lno, toks[1].col, format!("duplicate morphism `{}`", name)));
                }
                let src = parse_key(&toks[2], "src", lno)?.to_string();
                let dst = parse_key(&toks[3], "dst", lno)?.to_string();
                let sr = kisin_pending
                    .get(&src)
                    .ok_or_else(|| err(lno, toks[2].col, format!("unknown module `{}`", src)))?
                    .2
                    .rows;
                let dr = kisin_pending
                    .get(&dst)
                    .ok_or_else(|| err(lno, toks[3].col, format!("unknown module `{}`", dst)))?
                    .2
                    .rows;
                morph_pending.push((lno, name, src, dst, PendingMatrix::new(dr, sr)));
            }
            "mat" => {
                want_len(&toks, 5, lno, "mat")?;
                let name = toks[1].text;
                let rec = morph_pending
                    .iter_mut()
                    .find(|(_, n, _, _, _)| n == name)
                    .ok_or_else(|| err(lno, toks[1].col, format!("unknown morphism `{}`", name)))?;
                let i = parse_usize(toks[2].text, lno, toks[2].col)?;
                let j = parse_usize(toks[3].text, lno, toks[3].col)?;
                if i >= rec.4.rows || j >= rec.4.cols {
                    return Err(err(lno, toks[2].col, "entry index out of range"));
                }
                let coeffs = parse_ints(toks[4].text, lno, toks[4].col)?;
                if coeffs.len() > m {
                    return Err(err(lno, toks[4].col, "polynomial degree exceeds truncation"));
                }
                rec.4.entries[i * rec.4.cols + j] = coeffs;
            }
            "breuil" => {
                want_len(&toks, 4, lno, "breuil")?;
                let name = toks[1].text.to_string();
                if !valid_name(&name) {
                    return Err(err(lno, toks[1].col, format!("invalid name `{}`", name)));
                }
                let from = parse_key(&toks[2], "from", lno)?.to_string();
                if !kisin_pending.contains_key(&from) {
                    return Err(err(lno, toks[2].col, format!("unknown module `{}`", from)));
                }
                let r = parse_u64(parse_key(&toks[3], "r", lno)?, lno, toks[3].col)? as u32;
                if breuil_pending.iter().any(|(_, n, _, _, _)| *n == name) {
                    return Err(err(lno, toks[1].col, format!("duplicate record `{}`", name)));
                }
                breuil_pending.push((lno, name, from, r, Vec::new()));
            }
            "nmat" => {
                want_len(&toks, 5, lno, "nmat")?;
                let name = toks[1].text;
                let rec = breuil_pending
                    .iter_mut()
                    .find(|(_, n, _, _, _)| n == name)
                    .ok_or_else(|| err(lno, toks[1].col, format!("unknown record `{}`", name)))?;
                let i = parse_usize(toks[2].text, lno, toks[2].col)?;
                let j = parse_usize(toks[3].text, lno, toks[3].col)?;
                let coeffs = parse_ints(toks[4].text, lno, toks[4].col)?;
                if coeffs.len() > m {
                    return Err(err(lno, toks[4].col, "coefficient list exceeds truncation"));
                }
                rec.4.push((i, j, coeffs));
            }
            other => {
                return Err(err(lno, toks[0].col, format!("unknown directive `{}`", other)));
            }
        }
    }

    let mut kisin = BTreeMap::new();
    for (name, (lno, denom, pm)) in &kisin_pending {
        let mat = pm.to_sigma(&ctx);
        let module = make_kisin(&ctx, mat, *denom)
            .map_err(|e| err(*lno, 1, format!("invalid Kisin module `{}`: {}", name, e)))?;
        kisin.insert(name.clone(), module);
    }

    let mut morphisms = BTreeMap::new();
    for (lno, name, src, dst, pm) in morph_pending {
        let f = KisinMorphism::new(kisin[&src].clone(), kisin[&dst].clone(), pm.to_sigma(&ctx))
            .map_err(|e| err(lno, 1, format!("invalid morphism `{}`: {}", name, e)))?;
        let ok = check_morphism(&ctx, &f)
            .map_err(|e| err(lno, 1, format!("morphism `{}`: {}", name, e)))?;
        if !ok {
            return Err(err(lno, 1, format!("morphism `{}` is not Frobenius-compatible", name)));
        }
        morphisms.insert(name, MorphismRecord { src, dst, f });
    }

    let mut breuil = BTreeMap::new();
    for (lno, name, from, r, nmats) in breuil_pending {
        let mut b = from_kisin(&ctx, &kisin[&from], r)
            .map_err(|e| err(lno, 1, format!("record `{}`: {}", name, e)))?;
        if !nmats.is_empty() {
            let mut nm = SMat::zero(&ctx, b.rank, b.rank);
            for (i, j, coeffs) in nmats {
                if i >= b.rank || j >= b.rank {
                    return Err(err(lno, 1, format!("record `{}`: nmat index out of range", name)));
                }
                let mut e = SElem { coeffs: vec![0; m], prec: n };
                for (t, &c) in coeffs.iter().enumerate() {
                    e.coeffs[t] = ctx.chain().reduce_i64(c);
                }
                nm.set(i, j, e);
            }
            b = b.with_monodromy(nm);
        }
        breuil.insert(name, BreuilRecord { from, r, module: b });
    }

    Ok(ModuleFile { ctx, eis_coeffs, kisin, morphisms, breuil })
}

fn render_coeffs_u64(c: &[u64]) -> Option<String> {
    let last = c.iter().rposition(|&x| x != 0)?;
    Some(c[..=last].iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","))
}

pub fn render_module_file(f: &ModuleFile) -> String {
    let mut out = String::from("kmod 1\n");
    out.push_str(&format!(
        "ctx p={} N={} M={} E={}\n",
        f.ctx.p(),
        f.ctx.precision(),
        f.ctx.trunc(),
        f.eis_coeffs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
    ));
    for (name, m) in &f.kisin {
        if m.denom_exp == 0 {
            out.push_str(&format!("kisin {} rank={}\n", name, m.rank));
        } else {
            out.push_str(&format!("kisin {} rank={} denom={}\n", name, m.rank, m.denom_exp));
        }
        for i in 0..m.rank {
            for j in 0..m.rank {
                if let Some(c) = render_coeffs_u64(&m.frobenius.get(i, j).coeffs) {
                    out.push_str(&format!("frob {} {} {} {}\n", name, i, j, c));
                }
            }
        }
    }
    for (name, rec) in &f.morphisms {
        out.push_str(&format!("morphism {} src={} dst={}\n", name, rec.src, rec.dst));
        let mat = &rec.f.matrix;
        for i in 0..mat.rows {
            for j in 0..mat.cols {
                if let Some(c) = render_coeffs_u64(&mat.get(i, j).coeffs) {
                    out.push_str(&format!("mat {} {} {} {}\n", name, i, j, c));
                }
            }
        }
    }
    for (name, rec) in &f.breuil {
        out.push_str(&format!("breuil {} from={} r={}\n", name, rec.from, rec.r));
        if let Some(nm) = &rec.module.monodromy {
            for i in 0..nm.rows {
                for j in 0..nm.cols {
                    if let Some(c) = render_coeffs_u64(&nm.get(i, j).coeffs) {
                        out.push_str(&format!("nmat {} {} {} {}\n", name, i, j, c));
                    }
                }
            }
        }
    }
    out
}

/// A file containing only a context line.
pub fn render_ctx_only(ctx: &RingContext, eis_coeffs: &[i64]) -> String {
    format!(
        "kmod 1\nctx p={} N={} M={} E={}\n",
        ctx.p(),
        ctx.precision(),
        ctx.trunc(),
        eis_coeffs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(","),
    )
}
