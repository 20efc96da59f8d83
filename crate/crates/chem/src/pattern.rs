//! Query graphs written in a SMARTS subset.
//!
//! Atom primitives: `*`, `a`, `A`, element symbols (uppercase aliphatic,
//! lowercase aromatic), `#n`, `Hn`, `Dn`, `R`, `R0`, charges and `:n` atom
//! maps, combined with `!`, `&` (or juxtaposition), `,` and `;`. Tetrahedral
//! marks are accepted and ignored. Bond primitives: `- = # : ~ @ / \` with
//! the same operators; an omitted bond means single or aromatic. Everything
//! else (recursive SMARTS, `X`, `v`, `x`, `r`, ring sizes, ...) is rejected
//! with the offset of the offending byte.

use crate::element::Element;
use crate::mol::{BondKind, MolGraph};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PatternError {
    #[error("bad pattern at offset {offset}: {reason}")]
    BadPattern { offset: usize, reason: String },
    #[error("atom map {0} used more than once")]
    DuplicateAtomMap(u32),
}

fn bad(offset: usize, reason: impl Into<String>) -> PatternError {
    PatternError::BadPattern {
        offset,
        reason: reason.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AtomPrimitive {
    Any,
    Aromatic,
    Aliphatic,
    Element { element: Element, aromatic: bool },
    AtomicNumber(u8),
    TotalHydrogens(u8),
    Degree(u8),
    InRing(bool),
    Charge(i8),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr<P> {
    Prim(P),
    Not(Box<Expr<P>>),
    And(Vec<Expr<P>>),
    Or(Vec<Expr<P>>),
}

impl<P: Copy> Expr<P> {
    pub fn eval(&self, f: &impl Fn(P) -> bool) -> bool {
        match self {
            Expr::Prim(p) => f(*p),
            Expr::Not(e) => !e.eval(f),
            Expr::And(es) => es.iter().all(|e| e.eval(f)),
            Expr::Or(es) => es.iter().any(|e| e.eval(f)),
        }
    }

    /// Primitives that must all hold: the top-level conjunction, ignoring
    /// negated and disjunctive parts.
    pub fn conjuncts(&self) -> Vec<P> {
        match self {
            Expr::Prim(p) => vec![*p],
            Expr::And(es) => es.iter().flat_map(|e| e.conjuncts()).collect(),
            Expr::Not(_) | Expr::Or(_) => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BondPrimitive {
    Single,
    Double,
    Triple,
    Aromatic,
    Any,
    InRing,
    /// Omitted bond symbol: single or aromatic.
    Implicit,
}

pub type AtomExpr = Expr<AtomPrimitive>;
pub type BondExpr = Expr<BondPrimitive>;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryAtom {
    pub expr: AtomExpr,
    pub map: Option<u32>,
    /// Byte offset of the atom in the source text.
    pub offset: usize,
}

/// Properties a query atom pins down, as used when the atom is written into
/// a product of template application.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct AtomSpec {
    pub element: Option<Element>,
    pub aromatic: Option<bool>,
    pub charge: Option<i8>,
    pub hydrogens: Option<u8>,
}

impl QueryAtom {
    pub fn spec(&self) -> AtomSpec {
        let mut s = AtomSpec::default();
        for p in self.expr.conjuncts() {
            match p {
                AtomPrimitive::Element { element, aromatic } => {
                    s.element = Some(element);
                    s.aromatic = Some(aromatic);
                }
                AtomPrimitive::AtomicNumber(n) => {
                    s.element = s.element.or(Element::from_atomic_number(n));
                }
                AtomPrimitive::Aromatic => s.aromatic = Some(true),
                AtomPrimitive::Aliphatic => s.aromatic = Some(false),
                AtomPrimitive::Charge(c) => s.charge = Some(c),
                AtomPrimitive::TotalHydrogens(h) => s.hydrogens = Some(h),
                _ => {}
            }
        }
        s
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QueryBond {
    pub a: usize,
    pub b: usize,
    pub expr: BondExpr,
}

impl QueryBond {
    /// Concrete bond order pinned by the expression, if any.
    pub fn kind(&self) -> Option<BondKind> {
        let mut kind = None;
        for p in self.expr.conjuncts() {
            let k = match p {
                BondPrimitive::Single => BondKind::Single,
                BondPrimitive::Double => BondKind::Double,
                BondPrimitive::Triple => BondKind::Triple,
                BondPrimitive::Aromatic => BondKind::Aromatic,
                _ => continue,
            };
            kind = Some(k);
        }
        kind
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PatternGraph {
    atoms: Vec<QueryAtom>,
    bonds: Vec<QueryBond>,
    adjacency: Vec<Vec<(usize, usize)>>,
}

impl PatternGraph {
    /// Build from parts. Bonds must reference valid, distinct atoms and atom
    /// maps must be unique.
    pub fn new(atoms: Vec<QueryAtom>, bonds: Vec<QueryBond>) -> Result<Self, PatternError> {
        let mut adjacency = vec![Vec::new(); atoms.len()];
        for (i, b) in bonds.iter().enumerate() {
            if b.a >= atoms.len() || b.b >= atoms.len() || b.a == b.b {
                return Err(bad(0, format!("bond {i} has invalid endpoints")));
            }
            if adjacency[b.a].iter().any(|(n, _)| *n == b.b) {
                return Err(bad(atoms[b.b].offset, "duplicate bond"));
            }
            adjacency[b.a].push((b.b, i));
            adjacency[b.b].push((b.a, i));
        }
        let mut seen = BTreeMap::new();
        for a in &atoms {
            if let Some(m) = a.map {
                if seen.insert(m, ()).is_some() {
                    return Err(PatternError::DuplicateAtomMap(m));
                }
            }
        }
        Ok(PatternGraph {
            atoms,
            bonds,
            adjacency,
        })
    }

    pub fn atoms(&self) -> &[QueryAtom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &QueryAtom {
        &self.atoms[i]
    }

    pub fn bonds(&self) -> &[QueryBond] {
        &self.bonds
    }

    pub fn bond(&self, i: usize) -> &QueryBond {
        &self.bonds[i]
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn neighbors(&self, atom: usize) -> &[(usize, usize)] {
        &self.adjacency[atom]
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a].iter().find(|(n, _)| *n == b).map(|(_, k)| *k)
    }

    /// Pattern atom carrying atom map `map`.
    pub fn atom_with_map(&self, map: u32) -> Option<usize> {
        self.atoms.iter().position(|a| a.map == Some(map))
    }

    pub fn maps(&self) -> impl Iterator<Item = u32> + '_ {
        self.atoms.iter().filter_map(|a| a.map)
    }
}

/// Whether target atom `i` satisfies primitive `p`.
pub fn atom_primitive_holds(p: AtomPrimitive, mol: &MolGraph, i: usize) -> bool {
    let atom = mol.atom(i);
    match p {
        AtomPrimitive::Any => true,
        AtomPrimitive::Aromatic => atom.aromatic,
        AtomPrimitive::Aliphatic => !atom.aromatic,
        AtomPrimitive::Element { element, aromatic } => atom.element == element && atom.aromatic == aromatic,
        AtomPrimitive::AtomicNumber(n) => atom.element.atomic_number() == n,
        AtomPrimitive::TotalHydrogens(h) => {
            let explicit = mol
                .neighbors(i)
                .iter()
                .filter(|(n, _)| mol.atom(*n).element == Element::H)
                .count();
            usize::from(atom.hydrogens) + explicit == usize::from(h)
        }
        AtomPrimitive::Degree(d) => mol.degree(i) == usize::from(d),
        AtomPrimitive::InRing(r) => mol.is_ring_atom(i) == r,
        AtomPrimitive::Charge(c) => atom.charge == c,
    }
}

pub fn bond_primitive_holds(p: BondPrimitive, mol: &MolGraph, k: usize) -> bool {
    let kind = mol.bond(k).kind;
    match p {
        BondPrimitive::Single => kind == BondKind::Single,
        BondPrimitive::Double => kind == BondKind::Double,
        BondPrimitive::Triple => kind == BondKind::Triple,
        BondPrimitive::Aromatic => kind == BondKind::Aromatic,
        BondPrimitive::Any => true,
        BondPrimitive::InRing => mol.is_ring_bond(k),
        BondPrimitive::Implicit => matches!(kind, BondKind::Single | BondKind::Aromatic),
    }
}

pub fn atom_matches(q: &QueryAtom, mol: &MolGraph, i: usize) -> bool {
    q.expr.eval(&|p| atom_primitive_holds(p, mol, i))
}

pub fn bond_matches(q: &QueryBond, mol: &MolGraph, k: usize) -> bool {
    q.expr.eval(&|p| bond_primitive_holds(p, mol, k))
}

/// Parse one pattern (components separated by `.` allowed).
pub fn parse_pattern(text: &str) -> Result<PatternGraph, PatternError> {
    parse_pattern_at(text, 0)
}

/// Parse with offsets reported relative to `base` (used when the pattern is
/// a slice of a larger template string).
pub(crate) fn parse_pattern_at(text: &str, base: usize) -> Result<PatternGraph, PatternError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
        base,
        atoms: Vec::new(),
        bonds: Vec::new(),
    };
    p.run()?;
    let Parser { atoms, bonds, .. } = p;
    PatternGraph::new(atoms, bonds)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    base: usize,
    atoms: Vec<QueryAtom>,
    bonds: Vec<QueryBond>,
}

const BOND_CHARS: &[u8] = b"-=#:~@/\\!&,;";

impl Parser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn err(&self, at: usize, reason: impl Into<String>) -> PatternError {
        bad(self.base + at, reason)
    }

    fn run(&mut self) -> Result<(), PatternError> {
        if self.src.is_empty() {
            return Err(self.err(0, "empty pattern"));
        }
        let mut prev: Option<usize> = None;
        let mut pending: Option<(BondExpr, usize)> = None;
        let mut branches: Vec<(usize, usize)> = Vec::new();
        let mut rings: BTreeMap<u32, (usize, Option<BondExpr>, usize)> = BTreeMap::new();
        while let Some(c) = self.peek() {
            let start = self.pos;
            match c {
                b'(' => {
                    let Some(p) = prev else {
                        return Err(self.err(start, "branch without a preceding atom"));
                    };
                    if pending.is_some() {
                        return Err(self.err(start, "bond before branch"));
                    }
                    branches.push((p, start));
                    self.pos += 1;
                }
                b')' => {
                    if pending.is_some() {
                        return Err(self.err(start, "dangling bond"));
                    }
                    let Some((p, _)) = branches.pop() else {
                        return Err(self.err(start, "unbalanced parenthesis"));
                    };
                    prev = Some(p);
                    self.pos += 1;
                }
                b'.' => {
                    if pending.is_some() {
                        return Err(self.err(start, "dangling bond"));
                    }
                    prev = None;
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => {
                    let Some(p) = prev else {
                        return Err(self.err(start, "ring closure without an atom"));
                    };
                    let label = self.ring_label()?;
                    let expr = pending.take().map(|(e, _)| e);
                    match rings.remove(&label) {
                        None => {
                            rings.insert(label, (p, expr, start));
                        }
                        Some((open, open_expr, _)) => {
                            if open == p || self.bonds.iter().any(|b| (b.a, b.b) == (open, p) || (b.a, b.b) == (p, open)) {
                                return Err(self.err(start, "invalid ring closure"));
                            }
                            let expr = match (open_expr, expr) {
                                (Some(x), Some(y)) if x != y => {
                                    return Err(self.err(start, "conflicting ring closure bonds"))
                                }
                                (x, y) => x.or(y).unwrap_or(Expr::Prim(BondPrimitive::Implicit)),
                            };
                            self.bonds.push(QueryBond { a: open, b: p, expr });
                        }
                    }
                }
                _ if BOND_CHARS.contains(&c) => {
                    if pending.is_some() || prev.is_none() {
                        return Err(self.err(start, "unexpected bond"));
                    }
                    let end = self.src[start..]
                        .iter()
                        .position(|b| !BOND_CHARS.contains(b))
                        .map_or(self.src.len(), |n| start + n);
                    let expr = parse_bond_expr(&self.src[start..end], self.base + start)?;
                    self.pos = end;
                    pending = Some((expr, start));
                }
                _ => {
                    let atom = if c == b'[' {
                        self.bracket_atom()?
                    } else {
                        self.bare_atom()?
                    };
                    self.atoms.push(atom);
                    let idx = self.atoms.len() - 1;
                    if let Some(p) = prev {
                        let expr = pending
                            .take()
                            .map(|(e, _)| e)
                            .unwrap_or(Expr::Prim(BondPrimitive::Implicit));
                        self.bonds.push(QueryBond { a: p, b: idx, expr });
                    }
                    prev = Some(idx);
                }
            }
        }
        if let Some((_, at)) = pending {
            return Err(self.err(at, "dangling bond"));
        }
        if let Some((_, at)) = branches.first() {
            return Err(self.err(*at, "unbalanced parenthesis"));
        }
        if let Some((_, (_, _, at))) = rings.iter().next() {
            return Err(self.err(*at, "unclosed ring"));
        }
        Ok(())
    }

    fn ring_label(&mut self) -> Result<u32, PatternError> {
        let c = self.src[self.pos];
        if c == b'%' {
            match self.src.get(self.pos + 1..self.pos + 3) {
                Some(d) if d.iter().all(u8::is_ascii_digit) => {
                    self.pos += 3;
                    Ok(u32::from(d[0] - b'0') * 10 + u32::from(d[1] - b'0'))
                }
                _ => Err(self.err(self.pos, "bad %nn ring label")),
            }
        } else {
            self.pos += 1;
            Ok(u32::from(c - b'0'))
        }
    }

    fn bare_atom(&mut self) -> Result<QueryAtom, PatternError> {
        let start = self.pos;
        let rest = &self.src[self.pos..];
        let (prim, len) = match rest {
            [b'C', b'l', ..] => (elem(Element::CL, false), 2),
            [b'B', b'r', ..] => (elem(Element::BR, false), 2),
            [b'*', ..] => (AtomPrimitive::Any, 1),
            [b'a', ..] => (AtomPrimitive::Aromatic, 1),
            [b'A', ..] => (AtomPrimitive::Aliphatic, 1),
            [c @ (b'B' | b'C' | b'N' | b'O' | b'P' | b'S' | b'F' | b'I'), ..] => {
                (elem(Element::from_symbol(&(*c as char).to_string()).unwrap(), false), 1)
            }
            [c @ (b'b' | b'c' | b'n' | b'o' | b'p' | b's'), ..] => (
                elem(
                    Element::from_symbol(&(c.to_ascii_uppercase() as char).to_string()).unwrap(),
                    true,
                ),
                1,
            ),
            _ => return Err(self.err(start, "unsupported atom")),
        };
        self.pos += len;
        Ok(QueryAtom {
            expr: Expr::Prim(prim),
            map: None,
            offset: self.base + start,
        })
    }

    fn bracket_atom(&mut self) -> Result<QueryAtom, PatternError> {
        let start = self.pos;
        let close = self.src[start..]
            .iter()
            .position(|b| *b == b']')
            .map(|n| start + n)
            .ok_or_else(|| self.err(start, "unterminated bracket atom"))?;
        let mut body_end = close;
        let mut map = None;
        if let Some(colon) = self.src[start + 1..close].iter().rposition(|b| *b == b':') {
            let colon = start + 1 + colon;
            let digits = &self.src[colon + 1..close];
            if digits.is_empty() || !digits.iter().all(u8::is_ascii_digit) {
                return Err(self.err(colon, "bad atom map"));
            }
            map = Some(
                std::str::from_utf8(digits)
                    .unwrap()
                    .parse::<u32>()
                    .map_err(|_| self.err(colon, "atom map too large"))?,
            );
            body_end = colon;
        }
        if body_end == start + 1 {
            return Err(self.err(start, "empty bracket atom"));
        }
        let mut body = BracketParser {
            src: &self.src[..body_end],
            pos: start + 1,
            base: self.base,
            first: start + 1,
        };
        let expr = body.semi()?;
        if body.pos != body_end {
            return Err(body.err(body.pos, "unsupported atom primitive"));
        }
        self.pos = close + 1;
        Ok(QueryAtom {
            expr,
            map,
            offset: self.base + start,
        })
    }
}

fn elem(element: Element, aromatic: bool) -> AtomPrimitive {
    AtomPrimitive::Element { element, aromatic }
}

struct BracketParser<'a> {
    src: &'a [u8],
    pos: usize,
    base: usize,
    first: usize,
}

impl BracketParser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn err(&self, at: usize, reason: impl Into<String>) -> PatternError {
        bad(self.base + at, reason)
    }

    fn semi(&mut self) -> Result<AtomExpr, PatternError> {
        let mut parts = vec![self.or()?];
        while self.peek() == Some(b';') {
            self.pos += 1;
            parts.push(self.or()?);
        }
        Ok(flatten(parts, Expr::And))
    }

    fn or(&mut self) -> Result<AtomExpr, PatternError> {
        let mut parts = vec![self.and()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            parts.push(self.and()?);
        }
        Ok(flatten(parts, Expr::Or))
    }

    fn and(&mut self) -> Result<AtomExpr, PatternError> {
        let mut parts = vec![self.unary()?];
        loop {
            match self.peek() {
                Some(b'&') => {
                    self.pos += 1;
                    parts.push(self.unary()?);
                }
                Some(b';' | b',') | None => break,
                Some(_) => parts.push(self.unary()?),
            }
        }
        Ok(flatten(parts, Expr::And))
    }

    fn unary(&mut self) -> Result<AtomExpr, PatternError> {
        if self.peek() == Some(b'!') {
            self.pos += 1;
            return Ok(Expr::Not(Box::new(self.unary()?)));
        }
        self.primitive().map(Expr::Prim)
    }

    fn number(&mut self) -> Option<u32> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        (self.pos > start).then(|| {
            std::str::from_utf8(&self.src[start..self.pos])
                .unwrap()
                .parse()
                .unwrap_or(u32::MAX)
        })
    }

    fn small(&self, v: u32, at: usize) -> Result<u8, PatternError> {
        u8::try_from(v).map_err(|_| self.err(at, "number out of range"))
    }

    fn primitive(&mut self) -> Result<AtomPrimitive, PatternError> {
        let start = self.pos;
        let Some(c) = self.peek() else {
            return Err(self.err(start, "missing atom primitive"));
        };
        let rest = &self.src[self.pos..];
        let prim = match c {
            b'*' => {
                self.pos += 1;
                AtomPrimitive::Any
            }
            b'a' if rest.get(1) != Some(&b's') => {
                self.pos += 1;
                AtomPrimitive::Aromatic
            }
            b'A' if !rest.get(1).is_some_and(|c| c.is_ascii_lowercase()) => {
                self.pos += 1;
                AtomPrimitive::Aliphatic
            }
            b'#' => {
                self.pos += 1;
                let n = self.number().ok_or_else(|| self.err(start, "# needs a number"))?;
                let n = self.small(n, start)?;
                if Element::from_atomic_number(n).is_none() || n == 0 {
                    return Err(self.err(start, "unknown atomic number"));
                }
                AtomPrimitive::AtomicNumber(n)
            }
            b'H' => {
                self.pos += 1;
                // A leading H not followed by a count is the hydrogen element.
                let element_h = start == self.first && matches!(self.peek(), None | Some(b'+' | b'-'));
                if element_h {
                    elem(Element::H, false)
                } else {
                    let n = self.number().unwrap_or(1);
                    AtomPrimitive::TotalHydrogens(self.small(n, start)?)
                }
            }
            b'D' => {
                self.pos += 1;
                let n = self.number().unwrap_or(1);
                AtomPrimitive::Degree(self.small(n, start)?)
            }
            b'R' => {
                self.pos += 1;
                match self.number() {
                    None => AtomPrimitive::InRing(true),
                    Some(0) => AtomPrimitive::InRing(false),
                    Some(_) => return Err(self.err(start, "ring-count queries are not supported")),
                }
            }
            b'+' | b'-' => {
                self.pos += 1;
                let sign: i32 = if c == b'+' { 1 } else { -1 };
                let mut magnitude = 1;
                if let Some(n) = self.number() {
                    magnitude = n.min(15) as i32;
                } else {
                    while self.peek() == Some(c) {
                        self.pos += 1;
                        magnitude += 1;
                    }
                }
                AtomPrimitive::Charge((sign * magnitude).clamp(-15, 15) as i8)
            }
            b'@' => {
                while matches!(self.peek(), Some(b'@' | b'?')) {
                    self.pos += 1;
                }
                AtomPrimitive::Any
            }
            b'A'..=b'Z' => {
                let two = rest
                    .get(..2)
                    .filter(|t| t[1].is_ascii_lowercase())
                    .and_then(|t| Element::from_symbol(std::str::from_utf8(t).unwrap()));
                if let Some(e) = two {
                    self.pos += 2;
                    elem(e, false)
                } else {
                    let e = Element::from_symbol(&(c as char).to_string())
                        .filter(|e| *e != Element::WILDCARD)
                        .ok_or_else(|| self.err(start, "unsupported atom primitive"))?;
                    self.pos += 1;
                    elem(e, false)
                }
            }
            b'b' | b'c' | b'n' | b'o' | b'p' | b's' => {
                if rest.starts_with(b"se") {
                    self.pos += 2;
                    elem(Element::SE, true)
                } else {
                    self.pos += 1;
                    elem(Element::from_symbol(&(c.to_ascii_uppercase() as char).to_string()).unwrap(), true)
                }
            }
            b'a' => {
                self.pos += 2;
                elem(Element::from_symbol("As").unwrap(), true)
            }
            _ => return Err(self.err(start, "unsupported atom primitive")),
        };
        Ok(prim)
    }
}

fn flatten<P>(mut parts: Vec<Expr<P>>, wrap: fn(Vec<Expr<P>>) -> Expr<P>) -> Expr<P> {
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        wrap(parts)
    }
}

fn parse_bond_expr(src: &[u8], base: usize) -> Result<BondExpr, PatternError> {
    let mut p = BondParser { src, pos: 0, base };
    let e = p.semi()?;
    if p.pos != src.len() {
        return Err(bad(base + p.pos, "bad bond expression"));
    }
    Ok(e)
}

struct BondParser<'a> {
    src: &'a [u8],
    pos: usize,
    base: usize,
}

impl BondParser<'_> {
    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn semi(&mut self) -> Result<BondExpr, PatternError> {
        let mut parts = vec![self.or()?];
        while self.peek() == Some(b';') {
            self.pos += 1;
            parts.push(self.or()?);
        }
        Ok(flatten(parts, Expr::And))
    }

    fn or(&mut self) -> Result<BondExpr, PatternError> {
        let mut parts = vec![self.and()?];
        while self.peek() == Some(b',') {
            self.pos += 1;
            parts.push(self.and()?);
        }
        Ok(flatten(parts, Expr::Or))
    }

    fn and(&mut self) -> Result<BondExpr, PatternError> {
        let mut parts = vec![self.unary()?];
        loop {
            match self.peek() {
                Some(b'&') => {
                    self.pos += 1;
                    parts.push(self.unary()?);
                }
                Some(b';' | b',') | None => break,
                Some(_) => parts.push(self.unary()?),
            }
        }
        Ok(flatten(parts, Expr::And))
    }

    fn unary(&mut self) -> Result<BondExpr, PatternError> {
        match self.peek() {
            Some(b'!') => {
                self.pos += 1;
                Ok(Expr::Not(Box::new(self.unary()?)))
            }
            Some(c) => {
                let prim = match c {
                    b'-' | b'/' | b'\\' => BondPrimitive::Single,
                    b'=' => BondPrimitive::Double,
                    b'#' => BondPrimitive::Triple,
                    b':' => BondPrimitive::Aromatic,
                    b'~' => BondPrimitive::Any,
                    b'@' => BondPrimitive::InRing,
                    _ => return Err(bad(self.base + self.pos, "bad bond primitive")),
                };
                self.pos += 1;
                Ok(Expr::Prim(prim))
            }
            None => Err(bad(self.base + self.pos, "missing bond primitive")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bracket_primitives() {
        let p = parse_pattern("[CH2;!R:3]").unwrap();
        let a = p.atom(0);
        assert_eq!(a.map, Some(3));
        assert_eq!(
            a.expr,
            Expr::And(vec![
                Expr::And(vec![
                    Expr::Prim(elem(Element::C, false)),
                    Expr::Prim(AtomPrimitive::TotalHydrogens(2))
                ]),
                Expr::Not(Box::new(Expr::Prim(AtomPrimitive::InRing(true))))
            ])
        );
        let spec = a.spec();
        assert_eq!(spec.element, Some(Element::C));
        assert_eq!(spec.hydrogens, Some(2));
    }

    #[test]
    fn charges_and_lists() {
        let p = parse_pattern("[N+:1](=O)[O-].[C,N;+0]").unwrap();
        assert_eq!(p.atom(0).spec().charge, Some(1));
        assert_eq!(p.atom(2).spec().charge, Some(-1));
        assert_eq!(p.atom_count(), 4);
        assert_eq!(p.bonds().len(), 2);
    }

    #[test]
    fn bond_expressions() {
        let p = parse_pattern("C-!@C=C~C").unwrap();
        assert_eq!(
            p.bond(0).expr,
            Expr::And(vec![
                Expr::Prim(BondPrimitive::Single),
                Expr::Not(Box::new(Expr::Prim(BondPrimitive::InRing)))
            ])
        );
        assert_eq!(p.bond(0).kind(), Some(BondKind::Single));
        assert_eq!(p.bond(2).kind(), None);
    }

    #[test]
    fn ring_closures() {
        let p = parse_pattern("c1ccccc1").unwrap();
        assert_eq!(p.bonds().len(), 6);
        assert_eq!(p.bond(5).expr, Expr::Prim(BondPrimitive::Implicit));
    }

    #[test]
    fn unsupported_features_are_rejected_with_offsets() {
        for (text, at) in [("C[$(CC)]", 2), ("[CX4]", 2), ("CC[R2]", 3), ("C$C", 1), ("[C", 0), ("C1CC", 1)] {
            match parse_pattern(text) {
                Err(PatternError::BadPattern { offset, .. }) => assert_eq!(offset, at, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
    }

    #[test]
    fn duplicate_maps() {
        assert_eq!(parse_pattern("[C:1][C:1]"), Err(PatternError::DuplicateAtomMap(1)));
    }
}
