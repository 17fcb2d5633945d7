//! Line-oriented recursive-descent parser for the DSL. Total: every input
//! yields a document or a positioned error.

use std::collections::BTreeMap;

use crate::term::{Op, Term};

use super::{
    CellDecl, Document, LatticeBody, LatticeDecl, MapDecl, MatrixDecl, MultDecl, MvSetDecl,
    Section, SetDecl, TermDecl, TextError,
};

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Comma,
    Sep, // newline or `;`
    Lt,
    Star,
    Eq,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("`{s}`"),
            Tok::LBrace => "`{`".to_string(),
            Tok::RBrace => "`}`".to_string(),
            Tok::LParen => "`(`".to_string(),
            Tok::RParen => "`)`".to_string(),
            Tok::Comma => "`,`".to_string(),
            Tok::Sep => "end of line".to_string(),
            Tok::Lt => "`<`".to_string(),
            Tok::Star => "`*`".to_string(),
            Tok::Eq => "`=`".to_string(),
        }
    }
}

struct Lexer;

impl Lexer {
    fn run(text: &str) -> Result<Vec<(Tok, usize, usize)>, TextError> {
        let mut out = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = lineno + 1;
            let mut chars = raw.char_indices().peekable();
            while let Some(&(i, ch)) = chars.peek() {
                let col = i + 1;
                match ch {
                    '#' => break,
                    c if c.is_whitespace() => {
                        chars.next();
                    }
                    '{' => {
                        out.push((Tok::LBrace, line, col));
                        chars.next();
                    }
                    '}' => {
                        out.push((Tok::RBrace, line, col));
                        chars.next();
                    }
                    '(' => {
                        out.push((Tok::LParen, line, col));
                        chars.next();
                    }
                    ')' => {
                        out.push((Tok::RParen, line, col));
                        chars.next();
                    }
                    ',' => {
                        out.push((Tok::Comma, line, col));
                        chars.next();
                    }
                    ';' => {
                        out.push((Tok::Sep, line, col));
                        chars.next();
                    }
                    '<' => {
                        out.push((Tok::Lt, line, col));
                        chars.next();
                    }
                    '*' => {
                        out.push((Tok::Star, line, col));
                        chars.next();
                    }
                    '=' => {
                        out.push((Tok::Eq, line, col));
                        chars.next();
                    }
                    c if c.is_ascii_alphanumeric() || c == '_' || c == '-' => {
                        let mut ident = String::new();
                        while let Some(&(_, c)) = chars.peek() {
                            if c.is_ascii_alphanumeric() || c == '_' || c == '-' {
                                ident.push(c);
                                chars.next();
                            } else {
                                break;
                            }
                        }
                        out.push((Tok::Ident(ident), line, col));
                    }
                    other => {
                        return Err(TextError::Syntax {
                            line,
                            col,
                            message: format!("unexpected character `{other}`"),
                        });
                    }
                }
            }
            out.push((Tok::Sep, line, raw.len() + 1));
        }
        Ok(out)
    }
}

struct Parser {
    toks: Vec<(Tok, usize, usize)>,
    pos: usize,
}

impl Parser {
    fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _, _)| t)
    }

    fn here(&self) -> (usize, usize) {
        self.toks
            .get(self.pos)
            .or_else(|| self.toks.last())
            .map(|&(_, l, c)| (l, c))
            .unwrap_or((1, 1))
    }

    fn error(&self, message: impl Into<String>) -> TextError {
        let (line, col) = self.here();
        TextError::Syntax {
            line,
            col,
            message: message.into(),
        }
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).map(|(t, _, _)| t.clone());
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn skip_seps(&mut self) {
        while matches!(self.peek(), Some(Tok::Sep)) {
            self.pos += 1;
        }
    }

    fn expect(&mut self, tok: &Tok) -> Result<(), TextError> {
        match self.peek() {
            Some(t) if t == tok => {
                self.pos += 1;
                Ok(())
            }
            Some(t) => Err(self.error(format!("expected {}, found {}", tok.describe(), t.describe()))),
            None => Err(self.error(format!("expected {}, found end of input", tok.describe()))),
        }
    }

    fn ident(&mut self, what: &str) -> Result<String, TextError> {
        match self.peek() {
            Some(Tok::Ident(_)) => match self.bump() {
                Some(Tok::Ident(s)) => Ok(s),
                _ => unreachable!(),
            },
            Some(t) => Err(self.error(format!("expected {what}, found {}", t.describe()))),
            None => Err(self.error(format!("expected {what}, found end of input"))),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), TextError> {
        let got = self.ident(&format!("`{kw}`"))?;
        if got != kw {
            self.pos -= 1;
            return Err(self.error(format!("expected `{kw}`, found `{got}`")));
        }
        Ok(())
    }

    /// Zero or more `(a, b)` pairs, newlines allowed between them.
    fn pairs(&mut self) -> Result<Vec<(String, String)>, TextError> {
        let mut out = Vec::new();
        loop {
            self.skip_seps();
            if !matches!(self.peek(), Some(Tok::LParen)) {
                break;
            }
            self.expect(&Tok::LParen)?;
            let a = self.ident("an element label")?;
            self.expect(&Tok::Comma)?;
            let b = self.ident("a confidence label")?;
            self.expect(&Tok::RParen)?;
            out.push((a, b));
        }
        Ok(out)
    }

    fn idents_to_line_end(&mut self, what: &str) -> Result<Vec<String>, TextError> {
        let mut out = Vec::new();
        while let Some(Tok::Ident(_)) = self.peek() {
            out.push(self.ident(what)?);
        }
        if out.is_empty() {
            return Err(self.error(format!("expected at least one {what}")));
        }
        Ok(out)
    }

    fn lattice_section(&mut self) -> Result<LatticeDecl, TextError> {
        let name = self.ident("a lattice name")?;
        self.expect(&Tok::LBrace)?;
        let mut elems: Option<Vec<String>> = None;
        let mut covers: Vec<(String, String)> = Vec::new();
        let mut mult: Option<MultDecl> = None;
        let mut prod: Option<(String, String)> = None;
        loop {
            self.skip_seps();
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Ident(kw)) => match kw.as_str() {
                    "elems" => {
                        self.pos += 1;
                        if elems.is_some() {
                            return Err(self.error("duplicate `elems` clause"));
                        }
                        elems = Some(self.idents_to_line_end("element label")?);
                    }
                    "covers" => {
                        self.pos += 1;
                        loop {
                            match self.peek() {
                                Some(Tok::Ident(_)) => {
                                    let lo = self.ident("an element label")?;
                                    self.expect(&Tok::Lt)?;
                                    let hi = self.ident("an element label")?;
                                    covers.push((lo, hi));
                                }
                                _ => break,
                            }
                        }
                    }
                    "mult" => {
                        self.pos += 1;
                        if mult.is_some() {
                            return Err(self.error("duplicate `mult` clause"));
                        }
                        let kind = self.ident("`meet` or `unit`")?;
                        mult = Some(match kind.as_str() {
                            "meet" => MultDecl::Meet,
                            "unit" => {
                                let unit = self.ident("the unit element label")?;
                                self.expect(&Tok::LBrace)?;
                                let mut entries = Vec::new();
                                loop {
                                    self.skip_seps();
                                    if matches!(self.peek(), Some(Tok::RBrace)) {
                                        self.pos += 1;
                                        break;
                                    }
                                    let a = self.ident("an element label")?;
                                    self.expect(&Tok::Star)?;
                                    let b = self.ident("an element label")?;
                                    self.expect(&Tok::Eq)?;
                                    let r = self.ident("an element label")?;
                                    entries.push((a, b, r));
                                }
                                entries.sort();
                                MultDecl::Table { unit, entries }
                            }
                            other => {
                                self.pos -= 1;
                                return Err(
                                    self.error(format!("expected `meet` or `unit`, found `{other}`"))
                                );
                            }
                        });
                    }
                    "product" => {
                        self.pos += 1;
                        if prod.is_some() {
                            return Err(self.error("duplicate `product` clause"));
                        }
                        let first = self.ident("a lattice name")?;
                        let second = self.ident("a lattice name")?;
                        prod = Some((first, second));
                    }
                    other => {
                        return Err(self.error(format!(
                            "expected `elems`, `covers`, `mult`, `product` or `}}`, found `{other}`"
                        )));
                    }
                },
                Some(t) => {
                    let msg = format!("expected a lattice clause or `}}`, found {}", t.describe());
                    return Err(self.error(msg));
                }
                None => return Err(self.error("expected `}`, found end of input")),
            }
        }
        let body = match (elems, prod) {
            (Some(_), Some(_)) => {
                return Err(self.error("a lattice is either explicit or a product, not both"))
            }
            (None, Some((first, second))) => {
                if mult.is_some() || !covers.is_empty() {
                    return Err(
                        self.error("a product lattice cannot carry `covers` or `mult` clauses")
                    );
                }
                LatticeBody::Product { first, second }
            }
            (Some(elems), None) => {
                let mut covers = covers;
                covers.sort();
                covers.dedup();
                LatticeBody::Explicit {
                    elems,
                    covers,
                    mult,
                }
            }
            (None, None) => return Err(self.error("a lattice needs `elems` or `product`")),
        };
        Ok(LatticeDecl { name, body })
    }

    fn mvset_section(&mut self) -> Result<MvSetDecl, TextError> {
        let name = self.ident("a set name")?;
        self.keyword("over")?;
        let carrier = self.ident("a lattice name")?;
        self.keyword("scale")?;
        let scale = self.ident("a lattice name")?;
        self.expect(&Tok::LBrace)?;
        let mut entries = self.pairs()?;
        self.skip_seps();
        self.expect(&Tok::RBrace)?;
        entries.sort();
        Ok(MvSetDecl {
            name,
            carrier,
            scale,
            entries,
        })
    }

    fn set_section(&mut self) -> Result<SetDecl, TextError> {
        let name = self.ident("a set name")?;
        self.keyword("over")?;
        let carrier = self.ident("a lattice name")?;
        self.expect(&Tok::LBrace)?;
        self.skip_seps();
        let mut elems = self.idents_to_line_end("element label")?;
        self.skip_seps();
        self.expect(&Tok::RBrace)?;
        elems.sort();
        elems.dedup();
        Ok(SetDecl {
            name,
            carrier,
            elems,
        })
    }

    fn term_expr(&mut self, params: &[String]) -> Result<Term, TextError> {
        let head = self.ident("a term")?;
        if matches!(self.peek(), Some(Tok::LParen)) {
            let op = Op::from_keyword(&head).ok_or_else(|| {
                self.error(format!(
                    "`{head}` is not an operation (use or/and/mul/imp/xor)"
                ))
            })?;
            self.expect(&Tok::LParen)?;
            let lhs = self.term_expr(params)?;
            self.expect(&Tok::Comma)?;
            let rhs = self.term_expr(params)?;
            self.expect(&Tok::RParen)?;
            Ok(Term::apply(op, lhs, rhs))
        } else if params.iter().any(|p| p == &head) {
            Ok(Term::var(head))
        } else {
            Ok(Term::constant(head))
        }
    }

    fn term_section(&mut self) -> Result<TermDecl, TextError> {
        let name = self.ident("a term name")?;
        self.expect(&Tok::LParen)?;
        let mut params = Vec::new();
        loop {
            params.push(self.ident("a parameter name")?);
            match self.peek() {
                Some(Tok::Comma) => {
                    self.pos += 1;
                }
                _ => break,
            }
        }
        self.expect(&Tok::RParen)?;
        self.expect(&Tok::Eq)?;
        let body = self.term_expr(&params)?;
        Ok(TermDecl { name, params, body })
    }

    fn map_section(&mut self) -> Result<MapDecl, TextError> {
        let name = self.ident("a map name")?;
        self.expect(&Tok::LBrace)?;
        let mut carrier: Option<String> = None;
        let mut scale: Option<String> = None;
        let mut concepts: Option<Vec<String>> = None;
        let mut init: BTreeMap<String, Vec<(String, String)>> = BTreeMap::new();
        let mut matrices: Vec<MatrixDecl> = Vec::new();
        loop {
            self.skip_seps();
            match self.peek() {
                Some(Tok::RBrace) => {
                    self.pos += 1;
                    break;
                }
                Some(Tok::Ident(kw)) => match kw.as_str() {
                    "carrier" => {
                        self.pos += 1;
                        carrier = Some(self.ident("a lattice name")?);
                    }
                    "scale" => {
                        self.pos += 1;
                        scale = Some(self.ident("a lattice name")?);
                    }
                    "concepts" => {
                        self.pos += 1;
                        concepts = Some(self.idents_to_line_end("concept name")?);
                    }
                    "init" => {
                        self.pos += 1;
                        let concept = self.ident("a concept name")?;
                        let mut entries = self.pairs()?;
                        entries.sort();
                        if init.insert(concept.clone(), entries).is_some() {
                            return Err(
                                self.error(format!("duplicate `init` for concept `{concept}`"))
                            );
                        }
                    }
                    "matrix" => {
                        self.pos += 1;
                        let mname = self.ident("a matrix name")?;
                        self.expect(&Tok::LBrace)?;
                        let mut cells: BTreeMap<(String, String), Vec<(String, String)>> =
                            BTreeMap::new();
                        loop {
                            self.skip_seps();
                            match self.peek() {
                                Some(Tok::RBrace) => {
                                    self.pos += 1;
                                    break;
                                }
                                Some(Tok::Ident(kw)) if kw == "cell" => {
                                    self.pos += 1;
                                    let from = self.ident("a concept name")?;
                                    let to = self.ident("a concept name")?;
                                    let mut entries = self.pairs()?;
                                    entries.sort();
                                    if cells.insert((from.clone(), to.clone()), entries).is_some()
                                    {
                                        return Err(self.error(format!(
                                            "duplicate cell `{from}` `{to}` in matrix `{mname}`"
                                        )));
                                    }
                                }
                                Some(t) => {
                                    let msg = format!(
                                        "expected `cell` or `}}`, found {}",
                                        t.describe()
                                    );
                                    return Err(self.error(msg));
                                }
                                None => {
                                    return Err(self.error("expected `}`, found end of input"))
                                }
                            }
                        }
                        matrices.push(MatrixDecl {
                            name: mname,
                            cells: cells
                                .into_iter()
                                .map(|((from, to), entries)| CellDecl { from, to, entries })
                                .collect(),
                        });
                    }
                    other => {
                        return Err(self.error(format!(
                            "expected `carrier`, `scale`, `concepts`, `init`, `matrix` or `}}`, found `{other}`"
                        )));
                    }
                },
                Some(t) => {
                    let msg = format!("expected a map clause or `}}`, found {}", t.describe());
                    return Err(self.error(msg));
                }
                None => return Err(self.error("expected `}`, found end of input")),
            }
        }
        let carrier = carrier.ok_or_else(|| self.error(format!("map `{name}` has no `carrier`")))?;
        let scale = scale.ok_or_else(|| self.error(format!("map `{name}` has no `scale`")))?;
        let concepts =
            concepts.ok_or_else(|| self.error(format!("map `{name}` has no `concepts`")))?;
        Ok(MapDecl {
            name,
            carrier,
            scale,
            concepts,
            init,
            matrices,
        })
    }
}

/// Parses DSL text into a document.
pub fn parse(text: &str) -> Result<Document, TextError> {
    let toks = Lexer::run(text)?;
    let mut parser = Parser { toks, pos: 0 };
    let mut doc = Document::new();
    loop {
        parser.skip_seps();
        if parser.at_end() {
            return Ok(doc);
        }
        let kw = parser.ident("a section keyword (lattice/mvset/set/term/map)")?;
        let section = match kw.as_str() {
            "lattice" => Section::Lattice(parser.lattice_section()?),
            "mvset" => Section::MvSet(parser.mvset_section()?),
            "set" => Section::Set(parser.set_section()?),
            "term" => Section::Term(parser.term_section()?),
            "map" => Section::Map(parser.map_section()?),
            other => {
                parser.pos -= 1;
                return Err(parser.error(format!(
                    "expected `lattice`, `mvset`, `set`, `term` or `map`, found `{other}`"
                )));
            }
        };
        doc.insert(section)?;
    }
}
