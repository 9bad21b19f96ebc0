//! The line-oriented PMD data format and typed parsers for the shipped
//! tables: class characters (n|h_v cells), theta corrections (kappa(k^2)
//! sums), coefficient tables (r/D-sectioned), singular parts, group
//! constants, relation descriptors, and power maps.
//!
//! Format: UTF-8, `#` comments, `key = value` header pairs, `[section]`
//! headers, whitespace-separated cells. `.` denotes a zero cell. Strict
//! mode (the default here) rejects unknown keys and sections.

use crate::arith::Lambency;
use crate::jacobi::VectorForm;
use crate::qseries::QSeries;
use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{Signed, Zero};
use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DataError {
    #[error("{file}:{line}: {msg}")]
    Parse { file: String, line: usize, msg: String },
    #[error("unknown data file `{0}`")]
    UnknownFile(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

fn perr(file: &str, line: usize, msg: impl Into<String>) -> DataError {
    DataError::Parse { file: file.to_string(), line, msg: msg.into() }
}

/// A parsed PMD document: ordered header pairs plus named record sections.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PmdDocument {
    pub name: String,
    pub header: Vec<(String, String)>,
    pub sections: Vec<(String, Vec<String>)>,
}

impl PmdDocument {
    pub fn kind(&self) -> Option<&str> {
        self.get("kind")
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn section(&self, name: &str) -> Option<&[String]> {
        self.sections.iter().find(|(n, _)| n == name).map(|(_, v)| v.as_slice())
    }
}

/// Parse a PMD byte stream. Truncated or malformed lines error with their
/// location.
pub fn load(name: &str, bytes: &[u8]) -> Result<PmdDocument, DataError> {
    let text = std::str::from_utf8(bytes)
        .map_err(|e| perr(name, 0, format!("not utf-8: {e}")))?;
    let mut doc = PmdDocument { name: name.to_string(), header: Vec::new(), sections: Vec::new() };
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        let lno = i + 1;
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(rest) = line.strip_prefix('[') {
            let sect = rest
                .strip_suffix(']')
                .ok_or_else(|| perr(name, lno, "unterminated section header"))?;
            doc.sections.push((sect.to_string(), Vec::new()));
        } else if doc.sections.is_empty() {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| perr(name, lno, "expected key = value before first section"))?;
            doc.header.push((k.trim().to_string(), v.trim().to_string()));
        } else {
            doc.sections.last_mut().unwrap().1.push(line.split_whitespace().collect::<Vec<_>>().join(" "));
        }
    }
    if doc.header.is_empty() && doc.sections.is_empty() {
        return Err(perr(name, 0, "empty document"));
    }
    Ok(doc)
}

/// Serialize with deterministic key ordering and canonical spacing;
/// load(emit(d)) = d.
pub fn emit(doc: &PmdDocument) -> Vec<u8> {
    let mut out = String::new();
    for (k, v) in &doc.header {
        let _ = writeln!(out, "{k} = {v}");
    }
    for (name, records) in &doc.sections {
        let _ = writeln!(out, "[{name}]");
        for rec in records {
            let _ = writeln!(out, "{rec}");
        }
    }
    out.into_bytes()
}

// ---------------------------------------------------------------- registry

macro_rules! builtin_files {
    ($($name:literal),* $(,)?) => {
        &[$(($name, include_str!(concat!("../data/", $name)))),*]
    };
}

/// The embedded data directory: one file per shipped table.
pub static BUILTIN: &[(&str, &str)] = builtin_files![
    "groups_m3.pmd",
    "groups_m4.pmd",
    "chars_m3_1.pmd",
    "chars_m3_3p3.pmd",
    "chars_m3_7p7.pmd",
    "chars_m3_13p13.pmd",
    "chars_m4_1.pmd",
    "chars_m4_2p2.pmd",
    "chars_m4_5p5.pmd",
    "chars_m4_10p2_5_10.pmd",
    "chars_m4_13p13.pmd",
    "chars_m4_17p17.pmd",
    "chars_m4_26p2_13_26.pmd",
    "theta_m3_1.pmd",
    "theta_m3_3p3.pmd",
    "theta_m3_7p7.pmd",
    "theta_m3_13p13.pmd",
    "coeffs_m3_1.pmd",
    "coeffs_m3_3p3.pmd",
    "coeffs_m3_7p7.pmd",
    "coeffs_m3_13p13.pmd",
    "coeffs_m3_19p19.pmd",
    "coeffs_m3_21p3_7_21.pmd",
    "coeffs_m3_31p31.pmd",
    "coeffs_m3_39p3_13_39.pmd",
    "coeffs_m4_1.pmd",
    "coeffs_m4_2p2.pmd",
    "coeffs_m4_5p5.pmd",
    "coeffs_m4_10p2_5_10.pmd",
    "coeffs_m4_13p13.pmd",
    "coeffs_m4_17p17.pmd",
    "coeffs_m4_26p2_13_26.pmd",
    "coeffs_m4_29p29.pmd",
    "coeffs_m4_34p2_17_34.pmd",
    "coeffs_m4_41p41.pmd",
    "singular_m4_1.pmd",
    "singular_m4_2p2.pmd",
    "singular_m4_5p5.pmd",
    "singular_m4_10p2_5_10.pmd",
    "singular_m4_13p13.pmd",
    "singular_m4_17p17.pmd",
    "singular_m4_26p2_13_26.pmd",
    "relations_m3.pmd",
    "relations_m4.pmd",
    "powers_m3_1.pmd",
    "powers_m3_3p3.pmd",
    "powers_m3_7p7.pmd",
    "powers_m3_13p13.pmd",
    "powers_m4_1.pmd",
    "powers_m4_2p2.pmd",
    "powers_m4_5p5.pmd",
    "powers_m4_10p2_5_10.pmd",
    "powers_m4_13p13.pmd",
    "powers_m4_17p17.pmd",
    "powers_m4_26p2_13_26.pmd",
];

/// Where data files come from: the embedded copies, or a directory override
/// (the PENUMBRA_DATA_DIR environment variable, or --data-dir on the CLI).
#[derive(Debug, Clone)]
pub enum DataSource {
    Builtin,
    Dir(PathBuf),
}

impl DataSource {
    pub fn from_env() -> DataSource {
        match std::env::var_os("PENUMBRA_DATA_DIR") {
            Some(dir) => DataSource::Dir(dir.into()),
            None => DataSource::Builtin,
        }
    }

    pub fn read(&self, name: &str) -> Result<PmdDocument, DataError> {
        match self {
            DataSource::Builtin => {
                let (_, text) = BUILTIN
                    .iter()
                    .find(|(n, _)| *n == name)
                    .ok_or_else(|| DataError::UnknownFile(name.to_string()))?;
                load(name, text.as_bytes())
            }
            DataSource::Dir(dir) => {
                let bytes = std::fs::read(dir.join(name))?;
                load(name, &bytes)
            }
        }
    }
}

pub fn ell_slug(ell: &str) -> String {
    ell.replace('+', "p").replace(',', "_")
}

pub fn d0_slug(d0: i64) -> String {
    format!("m{}", -d0)
}

/// Parse a lambdency string "D0:ell", e.g. "-3:21+3,7,21".
pub fn parse_lambdency(s: &str) -> Result<(i64, Lambency), DataError> {
    let (d0s, ells) = s
        .split_once(':')
        .ok_or_else(|| perr(s, 0, "expected D0:ell"))?;
    let d0: i64 = d0s.trim().parse().map_err(|_| perr(s, 0, "bad discriminant"))?;
    let ell = Lambency::parse(ells.trim()).map_err(|e| perr(s, 0, e.to_string()))?;
    Ok((d0, ell))
}

// ------------------------------------------------------------ class labels

/// A conjugacy-class label like `12AB`: the element order plus the letters
/// of the (possibly merged) classes it covers.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClassLabel {
    pub order: u64,
    pub letters: String,
}

impl ClassLabel {
    pub fn parse(s: &str) -> Option<ClassLabel> {
        let split = s.find(|c: char| c.is_ascii_uppercase())?;
        let order: u64 = s[..split].parse().ok()?;
        let letters = &s[split..];
        if letters.is_empty() || !letters.chars().all(|c| c.is_ascii_uppercase()) {
            return None;
        }
        Some(ClassLabel { order, letters: letters.to_string() })
    }

    /// Whether this label covers every letter of `other` (same order).
    pub fn covers(&self, other: &ClassLabel) -> bool {
        self.order == other.order && other.letters.chars().all(|c| self.letters.contains(c))
    }

    /// Whether the two labels share a letter at the same order.
    pub fn overlaps(&self, other: &ClassLabel) -> bool {
        self.order == other.order && other.letters.chars().any(|c| self.letters.contains(c))
    }
}

impl std::fmt::Display for ClassLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}{}", self.order, self.letters)
    }
}

// -------------------------------------------------------------- characters

/// Level and character parameters of one conjugacy class: chi = rho_{n|h}^v,
/// plus the special-matrix flag for the classes that carry it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassSpec {
    pub class: ClassLabel,
    pub n: u64,
    pub h: u64,
    pub v: u64,
    pub special_matrix: bool,
}

/// Parse a character cell: "n" -> (n,1,1); "n|h" -> (n,h,1); "n|h_v" ->
/// (n,h,v). An "A." (or "A·") prefix marks the special matrix.
pub fn parse_character_cell(text: &str) -> Result<(u64, u64, u64, bool), DataError> {
    let mut t = text.trim();
    let mut special = false;
    for prefix in ["A.", "A\u{b7}", "A\u{2022}"] {
        if let Some(rest) = t.strip_prefix(prefix) {
            special = true;
            t = rest;
            break;
        }
    }
    let bad = |msg: &str| perr(text, 0, msg.to_string());
    let (ns, rest) = match t.split_once('|') {
        Some((a, b)) => (a, Some(b)),
        None => (t, None),
    };
    let n: u64 = ns.trim().parse().map_err(|_| bad("malformed n"))?;
    let (h, v) = match rest {
        None => (1, 1),
        Some(hv) => match hv.split_once('_') {
            None => (hv.trim().parse().map_err(|_| bad("malformed h"))?, 1),
            Some((hs, vs)) => (
                hs.trim().parse().map_err(|_| bad("malformed h"))?,
                vs.trim().parse().map_err(|_| bad("malformed v"))?,
            ),
        },
    };
    Ok((n, h, v, special))
}

pub fn parse_characters(doc: &PmdDocument) -> Result<Vec<ClassSpec>, DataError> {
    expect_kind(doc, "characters")?;
    enforce_layout(doc, &["kind", "lambdency"], &["classes"], ParseMode::Strict)?;
    let mut out = Vec::new();
    for (i, rec) in doc.section("classes").unwrap_or(&[]).iter().enumerate() {
        let (name, cell) = rec
            .split_once(' ')
            .ok_or_else(|| perr(&doc.name, i, "expected `class cell`"))?;
        let class = ClassLabel::parse(name)
            .ok_or_else(|| perr(&doc.name, i, format!("bad class label {name}")))?;
        let (n, h, v, special_matrix) = parse_character_cell(cell)?;
        out.push(ClassSpec { class, n, h, v, special_matrix });
    }
    Ok(out)
}

fn expect_kind(doc: &PmdDocument, kind: &str) -> Result<(), DataError> {
    if doc.kind() != Some(kind) {
        return Err(perr(&doc.name, 0, format!("expected kind = {kind}, found {:?}", doc.kind())));
    }
    Ok(())
}

/// Strict mode (the default in the typed parsers) rejects unknown header
/// keys and sections; lenient mode reports them as warnings instead.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ParseMode {
    #[default]
    Strict,
    Lenient,
}

/// Unknown header keys and sections relative to an expected layout.
pub fn layout_warnings(doc: &PmdDocument, keys: &[&str], sections: &[&str]) -> Vec<String> {
    let mut warnings = Vec::new();
    for (k, _) in &doc.header {
        if !keys.contains(&k.as_str()) {
            warnings.push(format!("{}: unknown key `{k}`", doc.name));
        }
    }
    for (s, _) in &doc.sections {
        if !sections.contains(&s.as_str()) {
            warnings.push(format!("{}: unknown section `[{s}]`", doc.name));
        }
    }
    warnings
}

fn enforce_layout(
    doc: &PmdDocument,
    keys: &[&str],
    sections: &[&str],
    mode: ParseMode,
) -> Result<Vec<String>, DataError> {
    let warnings = layout_warnings(doc, keys, sections);
    if mode == ParseMode::Strict {
        if let Some(w) = warnings.first() {
            return Err(perr(&doc.name, 0, w.clone()));
        }
    }
    Ok(warnings)
}

// -------------------------------------------------------- theta corrections

/// Parse a theta-correction sum of terms "kappa(k2)": e.g. "18(9)",
/// "1/2(9)-3/2(81)", "-1(4)+3(36)". A bare "(k2)" means kappa = 1.
pub fn parse_theta_correction(text: &str) -> Result<Vec<(BigRational, u64)>, DataError> {
    let t: String = text.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = |msg: String| perr(text, 0, msg);
    let mut out = Vec::new();
    let mut rest = t.as_str();
    while !rest.is_empty() {
        let mut sign = BigInt::from(1);
        if let Some(r) = rest.strip_prefix('-') {
            sign = BigInt::from(-1);
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        }
        let open = rest.find('(').ok_or_else(|| bad("missing (k^2)".into()))?;
        let kappa_s = &rest[..open];
        let close = rest.find(')').ok_or_else(|| bad("unterminated (k^2)".into()))?;
        let k2: u64 = rest[open + 1..close]
            .parse()
            .map_err(|_| bad(format!("bad square {}", &rest[open + 1..close])))?;
        let kappa = if kappa_s.is_empty() {
            BigRational::from_integer(BigInt::from(1))
        } else if let Some((p, q)) = kappa_s.split_once('/') {
            BigRational::new(
                p.parse::<BigInt>().map_err(|_| bad(format!("bad numerator {p}")))?,
                q.parse::<BigInt>().map_err(|_| bad(format!("bad denominator {q}")))?,
            )
        } else {
            BigRational::from_integer(kappa_s.parse::<BigInt>().map_err(|_| bad(format!("bad kappa {kappa_s}")))?)
        };
        out.push((kappa * BigRational::from_integer(sign), k2));
        rest = &rest[close + 1..];
    }
    if out.is_empty() {
        return Err(bad("empty correction".into()));
    }
    Ok(out)
}

pub type ThetaCorrections = Vec<(ClassLabel, Vec<(BigRational, u64)>)>;

pub fn parse_theta_corrections(doc: &PmdDocument) -> Result<ThetaCorrections, DataError> {
    expect_kind(doc, "theta-corrections")?;
    enforce_layout(doc, &["kind", "lambdency"], &["corrections"], ParseMode::Strict)?;
    let mut out = Vec::new();
    for (i, rec) in doc.section("corrections").unwrap_or(&[]).iter().enumerate() {
        let (name, cell) = rec
            .split_once(' ')
            .ok_or_else(|| perr(&doc.name, i, "expected `class sum`"))?;
        let class = ClassLabel::parse(name)
            .ok_or_else(|| perr(&doc.name, i, format!("bad class label {name}")))?;
        out.push((class, parse_theta_correction(cell)?));
    }
    Ok(out)
}

// -------------------------------------------------------- coefficient table

/// A coefficient table: columns keyed by class label, rows keyed by (r, D),
/// integer entries. `.` cells are zero. Rows must satisfy D = r^2 mod 4m.
#[derive(Debug, Clone)]
pub struct CoefficientTable {
    pub d0: i64,
    pub lambency: Lambency,
    pub classes: Vec<ClassLabel>,
    pub rows: Vec<(u64, i64, Vec<BigInt>)>,
}

impl CoefficientTable {
    /// Largest tabulated discriminant.
    pub fn d_max(&self) -> i64 {
        self.rows.iter().map(|&(_, d, _)| d).max().unwrap_or(0)
    }

    pub fn column_index(&self, class: &ClassLabel) -> Option<usize> {
        // prefer exact cover, fall back to letter overlap
        if let Some(i) = self.classes.iter().position(|c| c.covers(class)) {
            return Some(i);
        }
        self.classes.iter().position(|c| c.overlaps(class))
    }

    /// Assemble the column for one class into a VectorForm: components
    /// carry the tabulated coefficients, with omitted valid rows zero up to
    /// the table range; weight parity 1.
    pub fn vector_form(&self, class: &ClassLabel) -> Option<VectorForm> {
        let col = self.column_index(class)?;
        let m = self.lambency.m();
        let four_m = 4 * m as i64;
        let bound = self.d_max() + 1;
        let mut comps: Vec<BTreeMap<i64, BigRational>> = vec![BTreeMap::new(); 2 * m as usize];
        for (r, d, vals) in &self.rows {
            let c = BigRational::from_integer(vals[col].clone());
            if c.is_zero() {
                continue;
            }
            let r = (*r % (2 * m)) as usize;
            comps[r].insert(*d, c.clone());
            // parity twin
            let neg = (2 * m as usize - r) % (2 * m as usize);
            if neg != r {
                comps[neg].insert(*d, c);
            }
        }
        let components = comps
            .into_iter()
            .map(|map| QSeries::from_parts(four_m as u64, map, bound))
            .collect();
        Some(VectorForm::new(m, components, 1).expect("table rows satisfy support"))
    }
}

pub fn parse_coeff_table(doc: &PmdDocument) -> Result<CoefficientTable, DataError> {
    expect_kind(doc, "coefficients")?;
    enforce_layout(doc, &["kind", "lambdency"], &["classes", "rows"], ParseMode::Strict)?;
    let lam = doc
        .get("lambdency")
        .ok_or_else(|| perr(&doc.name, 0, "missing lambdency"))?;
    let (d0, lambency) = parse_lambdency(lam)?;
    let classes_line = doc
        .section("classes")
        .and_then(|s| s.first())
        .ok_or_else(|| perr(&doc.name, 0, "missing [classes]"))?;
    let classes: Vec<ClassLabel> = classes_line
        .split_whitespace()
        .map(|s| ClassLabel::parse(s).ok_or_else(|| perr(&doc.name, 0, format!("bad class {s}"))))
        .collect::<Result<_, _>>()?;
    let m = lambency.m();
    let four_m = 4 * m as i64;
    let mut rows = Vec::new();
    for (i, rec) in doc.section("rows").unwrap_or(&[]).iter().enumerate() {
        let mut it = rec.split_whitespace();
        let r: u64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| perr(&doc.name, i, "bad r"))?;
        let d: i64 = it
            .next()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| perr(&doc.name, i, "bad D"))?;
        if (d - (r * r) as i64).rem_euclid(four_m) != 0 {
            return Err(perr(&doc.name, i, format!("row (r={r}, D={d}) violates D = r^2 mod {four_m}")));
        }
        let vals: Vec<BigInt> = it
            .map(|s| {
                if s == "." {
                    Ok(BigInt::from(0))
                } else {
                    s.parse::<BigInt>().map_err(|_| perr(&doc.name, i, format!("bad cell {s}")))
                }
            })
            .collect::<Result<_, _>>()?;
        if vals.len() != classes.len() {
            return Err(perr(&doc.name, i, format!("expected {} cells, found {}", classes.len(), vals.len())));
        }
        rows.push((r, d, vals));
    }
    Ok(CoefficientTable { d0, lambency, classes, rows })
}

// ----------------------------------------------------------- singular parts

/// One monomial of a singular-part coefficient: a rational multiple of an
/// optional i, sqrt(n), xi^k = e(1/64)^k, omega^k = e(1/20)^k. Stored
/// symbolically, never evaluated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularTerm {
    pub coeff: BigRational,
    pub has_i: bool,
    pub sqrt: Option<u64>,
    pub xi_pow: i64,
    pub omega_pow: i64,
}

/// A singular-part record: at the given cusp the collapsed series grows
/// like (sum of terms) * q^{-pole}.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SingularPart {
    pub class: ClassLabel,
    pub cusp: Ratio<u64>,
    pub terms: Vec<SingularTerm>,
    pub pole: u64,
}

fn parse_singular_coeff(text: &str) -> Result<Vec<SingularTerm>, DataError> {
    let bad = |msg: String| perr(text, 0, msg);
    let mut out = Vec::new();
    // split into signed monomials, keeping ^-k exponents intact
    let mut terms: Vec<String> = Vec::new();
    let mut cur = String::new();
    let chars: Vec<char> = text.chars().collect();
    for (i, &ch) in chars.iter().enumerate() {
        if (ch == '+' || ch == '-') && i > 0 && chars[i - 1] != '^' && !cur.is_empty() {
            terms.push(std::mem::take(&mut cur));
        }
        cur.push(ch);
    }
    if !cur.is_empty() {
        terms.push(cur);
    }
    for t in terms {
        let mut rest = t.as_str();
        let mut sign = 1i64;
        if let Some(r) = rest.strip_prefix('-') {
            sign = -1;
            rest = r;
        } else if let Some(r) = rest.strip_prefix('+') {
            rest = r;
        }
        let mut coeff = BigRational::from_integer(BigInt::from(sign));
        let mut term = SingularTerm { coeff: coeff.clone(), has_i: false, sqrt: None, xi_pow: 0, omega_pow: 0 };
        let mut saw_number = false;
        for factor in rest.split('*') {
            if factor.is_empty() {
                return Err(bad("empty factor".into()));
            }
            if factor == "i" {
                term.has_i = true;
            } else if let Some(ns) = factor.strip_prefix("sqrt") {
                term.sqrt = Some(ns.parse().map_err(|_| bad(format!("bad sqrt {ns}")))?);
            } else if let Some(ks) = factor.strip_prefix("xi^") {
                term.xi_pow = ks.parse().map_err(|_| bad(format!("bad xi power {ks}")))?;
            } else if let Some(ks) = factor.strip_prefix("om^") {
                term.omega_pow = ks.parse().map_err(|_| bad(format!("bad omega power {ks}")))?;
            } else {
                // integer, possibly glued to a trailing i as in "2i"
                let (num, tail) = match factor.strip_suffix('i') {
                    Some(n) if !n.is_empty() => (n, true),
                    _ => (factor, false),
                };
                let n: BigInt = num.parse().map_err(|_| bad(format!("bad factor {factor}")))?;
                coeff = BigRational::from_integer(BigInt::from(sign) * n);
                term.has_i |= tail;
                saw_number = true;
            }
        }
        if saw_number {
            term.coeff = coeff;
        }
        out.push(term);
    }
    Ok(out)
}

fn emit_singular_coeff(terms: &[SingularTerm]) -> String {
    let mut out = String::new();
    for (i, t) in terms.iter().enumerate() {
        let neg = t.coeff.is_negative();
        let mag = t.coeff.abs();
        if neg {
            out.push('-');
        } else if i > 0 {
            out.push('+');
        }
        let mut factors: Vec<String> = Vec::new();
        let one = BigRational::from_integer(BigInt::from(1));
        let unit_like = t.has_i || t.sqrt.is_some() || t.xi_pow != 0 || t.omega_pow != 0;
        if mag != one || !unit_like {
            factors.push(mag.to_string());
        }
        if t.has_i {
            factors.push("i".to_string());
        }
        if let Some(n) = t.sqrt {
            factors.push(format!("sqrt{n}"));
        }
        if t.xi_pow != 0 {
            factors.push(format!("xi^{}", t.xi_pow));
        }
        if t.omega_pow != 0 {
            factors.push(format!("om^{}", t.omega_pow));
        }
        out.push_str(&factors.join("*"));
    }
    out
}

pub fn parse_singular_table(doc: &PmdDocument) -> Result<Vec<SingularPart>, DataError> {
    expect_kind(doc, "singular-parts")?;
    enforce_layout(doc, &["kind", "lambdency"], &["singular"], ParseMode::Strict)?;
    let mut out = Vec::new();
    for (i, rec) in doc.section("singular").unwrap_or(&[]).iter().enumerate() {
        let cells: Vec<&str> = rec.split_whitespace().collect();
        if cells.len() != 4 {
            return Err(perr(&doc.name, i, "expected `class cusp coeff pole`"));
        }
        let class = ClassLabel::parse(cells[0])
            .ok_or_else(|| perr(&doc.name, i, format!("bad class {}", cells[0])))?;
        let cusp = match cells[1].split_once('/') {
            Some((a, b)) => Ratio::new(
                a.parse().map_err(|_| perr(&doc.name, i, "bad cusp"))?,
                b.parse().map_err(|_| perr(&doc.name, i, "bad cusp"))?,
            ),
            None => Ratio::from_integer(cells[1].parse().map_err(|_| perr(&doc.name, i, "bad cusp"))?),
        };
        let terms = parse_singular_coeff(cells[2])?;
        let pole: u64 = cells[3].parse().map_err(|_| perr(&doc.name, i, "bad pole"))?;
        out.push(SingularPart { class, cusp, terms, pole });
    }
    Ok(out)
}

/// Canonical record line for a singular part (round-trips through parse).
pub fn emit_singular_part(p: &SingularPart) -> String {
    let cusp = if *p.cusp.denom() == 1 {
        p.cusp.numer().to_string()
    } else {
        format!("{}/{}", p.cusp.numer(), p.cusp.denom())
    };
    format!("{} {} {} {}", p.class, cusp, emit_singular_coeff(&p.terms), p.pole)
}

// ------------------------------------------------------------------- groups

/// Per-lambdency group metadata: group name, the constants C(0,0) and
/// C(D0,r0), and the Sturm weight k where a proof-grade bound is tabulated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupRow {
    pub lambency: Lambency,
    pub group: String,
    pub c00: i64,
    pub cd0r0: i64,
    pub sturm_k: Option<u64>,
}

pub fn parse_groups(doc: &PmdDocument) -> Result<(i64, Vec<GroupRow>), DataError> {
    expect_kind(doc, "groups")?;
    enforce_layout(doc, &["kind", "d0"], &["groups"], ParseMode::Strict)?;
    let d0: i64 = doc
        .get("d0")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| perr(&doc.name, 0, "missing d0"))?;
    let mut out = Vec::new();
    for (i, rec) in doc.section("groups").unwrap_or(&[]).iter().enumerate() {
        let cells: Vec<&str> = rec.split_whitespace().collect();
        if cells.len() != 5 {
            return Err(perr(&doc.name, i, "expected `ell group c00 cd0r0 k`"));
        }
        let lambency = Lambency::parse(cells[0]).map_err(|e| perr(&doc.name, i, e.to_string()))?;
        let c00 = cells[2].parse().map_err(|_| perr(&doc.name, i, "bad c00"))?;
        let cd0r0 = cells[3].parse().map_err(|_| perr(&doc.name, i, "bad cd0r0"))?;
        let sturm_k = if cells[4] == "." {
            None
        } else {
            Some(cells[4].parse().map_err(|_| perr(&doc.name, i, "bad k"))?)
        };
        out.push(GroupRow { lambency, group: cells[1].to_string(), c00, cd0r0, sturm_k });
    }
    Ok((d0, out))
}

// ---------------------------------------------------------------- relations

/// Weights appearing in the multiplicative relations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelationWeight {
    /// w_s = 1.
    One,
    /// w_s = (-1)^{s/2+1} for even s; odd components vanish on both sides.
    Alternating,
    /// w_s = 1 if s^2 = 0 mod 3, else -1/2.
    IndicatorThird,
}

impl RelationWeight {
    pub fn weight(&self, s: u64) -> BigRational {
        match self {
            RelationWeight::One => BigRational::from_integer(BigInt::from(1)),
            RelationWeight::Alternating => {
                if s % 2 == 1 {
                    BigRational::zero()
                } else if (s / 2) % 2 == 1 {
                    BigRational::from_integer(BigInt::from(1))
                } else {
                    BigRational::from_integer(BigInt::from(-1))
                }
            }
            RelationWeight::IndicatorThird => {
                if (s * s) % 3 == 0 {
                    BigRational::from_integer(BigInt::from(1))
                } else {
                    BigRational::new(BigInt::from(-1), BigInt::from(2))
                }
            }
        }
    }
}

/// One multiplicative relation: F^{(D0,lhs)}_{g,r}(tau) =
/// scale * sum_{s = r mod 2 m_lhs} w_s F^{(D0,rhs)}_{h,s}((m_rhs/m_lhs) tau).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RelationDescriptor {
    pub lhs_ell: Lambency,
    pub lhs_class: ClassLabel,
    pub rhs_ell: Lambency,
    pub rhs_class: ClassLabel,
    pub scale: BigRational,
    pub weight: RelationWeight,
}

pub fn parse_relations(doc: &PmdDocument) -> Result<(i64, Vec<RelationDescriptor>), DataError> {
    expect_kind(doc, "relations")?;
    enforce_layout(doc, &["kind", "d0"], &["relations"], ParseMode::Strict)?;
    let d0: i64 = doc
        .get("d0")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| perr(&doc.name, 0, "missing d0"))?;
    let mut out = Vec::new();
    for (i, rec) in doc.section("relations").unwrap_or(&[]).iter().enumerate() {
        let cells: Vec<&str> = rec.split_whitespace().collect();
        if cells.len() != 6 {
            return Err(perr(&doc.name, i, "expected 6 cells"));
        }
        let lhs_ell = Lambency::parse(cells[0]).map_err(|e| perr(&doc.name, i, e.to_string()))?;
        let lhs_class = ClassLabel::parse(cells[1])
            .ok_or_else(|| perr(&doc.name, i, format!("bad class {}", cells[1])))?;
        let rhs_ell = Lambency::parse(cells[2]).map_err(|e| perr(&doc.name, i, e.to_string()))?;
        let rhs_class = ClassLabel::parse(cells[3])
            .ok_or_else(|| perr(&doc.name, i, format!("bad class {}", cells[3])))?;
        let scale = match cells[4].split_once('/') {
            Some((p, q)) => BigRational::new(
                p.parse().map_err(|_| perr(&doc.name, i, "bad scale"))?,
                q.parse().map_err(|_| perr(&doc.name, i, "bad scale"))?,
            ),
            None => BigRational::from_integer(
                cells[4].parse().map_err(|_| perr(&doc.name, i, "bad scale"))?,
            ),
        };
        let weight = match cells[5] {
            "one" => RelationWeight::One,
            "alt" => RelationWeight::Alternating,
            "I" => RelationWeight::IndicatorThird,
            other => return Err(perr(&doc.name, i, format!("unknown weight {other}"))),
        };
        out.push(RelationDescriptor { lhs_ell, lhs_class, rhs_ell, rhs_class, scale, weight });
    }
    Ok((d0, out))
}

// --------------------------------------------------------------- power maps

/// A power-map row: class^p lands in target (all shipped rows have p equal
/// to the element order, so the target is the identity class).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PowerMapRow {
    pub class: ClassLabel,
    pub p: u64,
    pub target: ClassLabel,
}

pub fn parse_power_maps(doc: &PmdDocument) -> Result<Vec<PowerMapRow>, DataError> {
    expect_kind(doc, "power-maps")?;
    enforce_layout(doc, &["kind", "lambdency"], &["powers"], ParseMode::Strict)?;
    let mut out = Vec::new();
    for (i, rec) in doc.section("powers").unwrap_or(&[]).iter().enumerate() {
        let cells: Vec<&str> = rec.split_whitespace().collect();
        if cells.len() != 3 {
            return Err(perr(&doc.name, i, "expected `class p target`"));
        }
        out.push(PowerMapRow {
            class: ClassLabel::parse(cells[0])
                .ok_or_else(|| perr(&doc.name, i, format!("bad class {}", cells[0])))?,
            p: cells[1].parse().map_err(|_| perr(&doc.name, i, "bad prime"))?,
            target: ClassLabel::parse(cells[2])
                .ok_or_else(|| perr(&doc.name, i, format!("bad class {}", cells[2])))?,
        });
    }
    Ok(out)
}

// -------------------------------------------------------------- vector form

/// Serialize a VectorForm as an r/D-sectioned coefficient block, one line
/// per stored coefficient: `r D numerator[/denominator]`.
pub fn vector_form_document(name: &str, lambdency: &str, f: &VectorForm) -> PmdDocument {
    let mut records = Vec::new();
    for (r, d, c) in f.support() {
        let cell = if c.is_integer() {
            c.numer().to_string()
        } else {
            format!("{}/{}", c.numer(), c.denom())
        };
        records.push(format!("{r} {d} {cell}"));
    }
    PmdDocument {
        name: name.to_string(),
        header: vec![
            ("kind".into(), "vector-form".into()),
            ("lambdency".into(), lambdency.into()),
            ("m".into(), f.m().to_string()),
            ("weight-parity".into(), f.weight_parity().to_string()),
        ],
        sections: vec![("rows".into(), records)],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn character_cell_examples() {
        assert_eq!(parse_character_cell("3|3_2").unwrap(), (3, 3, 2, false));
        assert_eq!(parse_character_cell("7").unwrap(), (7, 1, 1, false));
        assert_eq!(parse_character_cell("24|12_11").unwrap(), (24, 12, 11, false));
        assert_eq!(parse_character_cell("A.8|2_1").unwrap(), (8, 2, 1, true));
        assert!(parse_character_cell("x|y").is_err());
    }

    #[test]
    fn theta_correction_examples() {
        let one = |n: i64| BigRational::from_integer(BigInt::from(n));
        assert_eq!(parse_theta_correction("18(9)").unwrap(), vec![(one(18), 9)]);
        assert_eq!(
            parse_theta_correction("1/2(9)-3/2(81)").unwrap(),
            vec![
                (BigRational::new(BigInt::from(1), BigInt::from(2)), 9),
                (BigRational::new(BigInt::from(-3), BigInt::from(2)), 81),
            ]
        );
        assert_eq!(
            parse_theta_correction("-1(4)+3(36)").unwrap(),
            vec![(one(-1), 4), (one(3), 36)]
        );
        assert_eq!(parse_theta_correction("(4)").unwrap(), vec![(one(1), 4)]);
        assert!(parse_theta_correction("18").is_err());
    }

    #[test]
    fn class_labels() {
        let l = ClassLabel::parse("12AB").unwrap();
        assert_eq!(l.order, 12);
        assert!(l.covers(&ClassLabel::parse("12A").unwrap()));
        assert!(l.overlaps(&ClassLabel::parse("12BC").unwrap()));
        assert!(!l.covers(&ClassLabel::parse("12BC").unwrap()));
        assert!(!l.overlaps(&ClassLabel::parse("6A").unwrap()));
        assert!(ClassLabel::parse("12").is_none());
    }

    #[test]
    fn document_round_trip() {
        for (name, text) in BUILTIN {
            let doc = load(name, text.as_bytes()).unwrap();
            let emitted = emit(&doc);
            let again = load(name, &emitted).unwrap();
            assert_eq!(doc, again, "round trip for {name}");
            // stable output across runs
            assert_eq!(emitted, emit(&again));
        }
    }

    #[test]
    fn rejects_malformed_input() {
        assert!(load("x", b"").is_err(), "empty stream");
        assert!(load("x", b"kind coefficients\n").is_err(), "missing =");
        assert!(load("x", b"kind = y\n[rows\n1 2 3\n").is_err(), "unterminated section");
    }

    #[test]
    fn strict_mode_rejects_unknown_keys() {
        let text = b"kind = groups\nd0 = -3\nflavor = extra\n[groups]\n1 Th 248 2 10\n";
        let doc = load("x", text).unwrap();
        assert!(parse_groups(&doc).is_err(), "unknown key must fail strict parsing");
        let warnings = layout_warnings(&doc, &["kind", "d0"], &["groups"]);
        assert_eq!(warnings.len(), 1, "lenient mode reports it as a warning");
        let text = b"kind = groups\nd0 = -3\n[groups]\n1 Th 248 2 10\n[extra]\nrow\n";
        let doc = load("x", text).unwrap();
        assert!(parse_groups(&doc).is_err(), "unknown section must fail strict parsing");
    }

    #[test]
    fn builtin_tables_parse() {
        let src = DataSource::Builtin;
        let mut coeff_files = 0;
        for (name, _) in BUILTIN {
            let doc = src.read(name).unwrap();
            match doc.kind().unwrap() {
                "coefficients" => {
                    let t = parse_coeff_table(&doc).unwrap();
                    assert!(!t.rows.is_empty());
                    coeff_files += 1;
                }
                "characters" => {
                    assert!(!parse_characters(&doc).unwrap().is_empty());
                }
                "theta-corrections" => {
                    assert!(!parse_theta_corrections(&doc).unwrap().is_empty());
                }
                "singular-parts" => {
                    assert!(!parse_singular_table(&doc).unwrap().is_empty());
                }
                "groups" => {
                    let (_, rows) = parse_groups(&doc).unwrap();
                    assert!(!rows.is_empty());
                }
                "relations" => {
                    let (_, rows) = parse_relations(&doc).unwrap();
                    assert!(!rows.is_empty());
                }
                "power-maps" => {
                    assert!(!parse_power_maps(&doc).unwrap().is_empty());
                }
                other => panic!("unexpected kind {other} in {name}"),
            }
        }
        assert_eq!(coeff_files, 18);
    }

    #[test]
    fn singular_parts_round_trip() {
        let src = DataSource::Builtin;
        for name in ["singular_m4_1.pmd", "singular_m4_2p2.pmd", "singular_m4_5p5.pmd"] {
            let doc = src.read(name).unwrap();
            let parts = parse_singular_table(&doc).unwrap();
            for (rec, part) in doc.section("singular").unwrap().iter().zip(&parts) {
                assert_eq!(rec, &emit_singular_part(part), "in {name}");
            }
        }
    }

    #[test]
    fn coefficient_table_reads() {
        let doc = DataSource::Builtin.read("coeffs_m3_1.pmd").unwrap();
        let t = parse_coeff_table(&doc).unwrap();
        assert_eq!(t.d0, -3);
        assert_eq!(t.lambency.m(), 1);
        let c1a = t.vector_form(&ClassLabel::parse("1A").unwrap()).unwrap();
        let big = |n: i64| BigRational::from_integer(BigInt::from(n));
        assert_eq!(c1a.coefficient(-3, 1).unwrap(), big(2));
        assert_eq!(c1a.coefficient(0, 0).unwrap(), big(248));
        assert_eq!(c1a.coefficient(4, 0).unwrap(), big(54000));
        assert_eq!(c1a.coefficient(5, 1).unwrap(), big(-171990));
        // merged column lookup by letter
        let f12b = t.vector_form(&ClassLabel::parse("12B").unwrap()).unwrap();
        assert_eq!(f12b.coefficient(0, 0).unwrap(), big(2));
    }
}
