//! The text DSL: parsing, canonical serialization, loading into validated
//! structures, and the built-in fixtures.
//!
//! A document is a list of named sections (`lattice`, `mvset`, `set`,
//! `term`, `map`); names are unique across kinds and forward references are
//! resolved in a second pass when loading. Canonical serialization is
//! deterministic: sections sorted by name, sorted clause contents, LF line
//! endings, no trailing whitespace.

mod fixtures;
mod parse;

pub use fixtures::{fixture_names, load_fixture};
pub use parse::parse;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::Serialize;
use thiserror::Error;

use crate::aggregation::{AggregationError, AssessmentSet};
use crate::lattice::{product, Lattice, LatticeBuilder, LatticeError, MultSpec};
use crate::mvcm::{MapSpec, MvcmError, WeightMatrix};
use crate::mvset::{MvSet, MvSetError};
use crate::term::{Term, TermDef, TermError};

#[derive(Debug, Error)]
pub enum TextError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("duplicate section name `{0}`")]
    DuplicateSection(String),
    #[error("unresolved reference `{0}` in `{1}`")]
    UnresolvedReference(String, String),
    #[error("unknown fixture `{0}`")]
    UnknownFixture(String),
    #[error("in section `{0}`: {1}")]
    Load(String, String),
}

impl TextError {
    fn load(section: &str, err: impl std::fmt::Display) -> Self {
        TextError::Load(section.to_string(), err.to_string())
    }
}

/// Monoid multiplication clause of a lattice section.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum MultDecl {
    Meet,
    Table {
        unit: String,
        entries: Vec<(String, String, String)>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum LatticeBody {
    Explicit {
        elems: Vec<String>,
        covers: Vec<(String, String)>,
        mult: Option<MultDecl>,
    },
    Product {
        first: String,
        second: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LatticeDecl {
    pub name: String,
    pub body: LatticeBody,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MvSetDecl {
    pub name: String,
    pub carrier: String,
    pub scale: String,
    /// `(element, confidence)` label pairs, kept sorted.
    pub entries: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SetDecl {
    pub name: String,
    pub carrier: String,
    /// Element labels, kept sorted and deduplicated.
    pub elems: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TermDecl {
    pub name: String,
    pub params: Vec<String>,
    pub body: Term,
}

/// One weight cell: the influence of `from` on `to`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellDecl {
    pub from: String,
    pub to: String,
    pub entries: Vec<(String, String)>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MatrixDecl {
    pub name: String,
    /// Cells sorted by `(from, to)`.
    pub cells: Vec<CellDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MapDecl {
    pub name: String,
    pub carrier: String,
    pub scale: String,
    pub concepts: Vec<String>,
    /// Initial multi-valued value per concept, keyed by concept name.
    pub init: BTreeMap<String, Vec<(String, String)>>,
    pub matrices: Vec<MatrixDecl>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Section {
    Lattice(LatticeDecl),
    MvSet(MvSetDecl),
    Set(SetDecl),
    Term(TermDecl),
    Map(MapDecl),
}

impl Section {
    pub fn name(&self) -> &str {
        match self {
            Section::Lattice(d) => &d.name,
            Section::MvSet(d) => &d.name,
            Section::Set(d) => &d.name,
            Section::Term(d) => &d.name,
            Section::Map(d) => &d.name,
        }
    }
}

/// A parsed document: sections keyed by their (globally unique) names.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct Document {
    sections: BTreeMap<String, Section>,
}

impl Document {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, section: Section) -> Result<(), TextError> {
        let name = section.name().to_string();
        if self.sections.contains_key(&name) {
            return Err(TextError::DuplicateSection(name));
        }
        self.sections.insert(name, section);
        Ok(())
    }

    pub fn sections(&self) -> impl Iterator<Item = &Section> {
        self.sections.values()
    }

    pub fn get(&self, name: &str) -> Option<&Section> {
        self.sections.get(name)
    }

    pub fn is_empty(&self) -> bool {
        self.sections.is_empty()
    }

    /// Machine-readable export; the text DSL stays the parse source of truth.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("document serializes")
    }
}

fn write_pairs(out: &mut String, pairs: &[(String, String)]) {
    for (i, (a, b)) in pairs.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "({a}, {b})");
    }
}

fn term_text(term: &Term) -> String {
    term.to_string()
}

/// Canonical text form: deterministic and idempotent under reparsing.
pub fn serialize(doc: &Document) -> String {
    let mut out = String::new();
    for (i, section) in doc.sections().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        match section {
            Section::Lattice(d) => {
                let _ = writeln!(out, "lattice {} {{", d.name);
                match &d.body {
                    LatticeBody::Explicit {
                        elems,
                        covers,
                        mult,
                    } => {
                        let _ = writeln!(out, "  elems {}", elems.join(" "));
                        if !covers.is_empty() {
                            let list: Vec<String> = covers
                                .iter()
                                .map(|(a, b)| format!("{a}<{b}"))
                                .collect();
                            let _ = writeln!(out, "  covers {}", list.join(" "));
                        }
                        match mult {
                            None => {}
                            Some(MultDecl::Meet) => {
                                let _ = writeln!(out, "  mult meet");
                            }
                            Some(MultDecl::Table { unit, entries }) => {
                                let _ = writeln!(out, "  mult unit {unit} {{");
                                for (a, b, r) in entries {
                                    let _ = writeln!(out, "    {a} * {b} = {r}");
                                }
                                let _ = writeln!(out, "  }}");
                            }
                        }
                    }
                    LatticeBody::Product { first, second } => {
                        let _ = writeln!(out, "  product {first} {second}");
                    }
                }
                let _ = writeln!(out, "}}");
            }
            Section::MvSet(d) => {
                let mut line = format!("mvset {} over {} scale {} {{ ", d.name, d.carrier, d.scale);
                write_pairs(&mut line, &d.entries);
                if d.entries.is_empty() {
                    line.pop();
                }
                let _ = writeln!(out, "{line} }}");
            }
            Section::Set(d) => {
                let _ = writeln!(
                    out,
                    "set {} over {} {{ {} }}",
                    d.name,
                    d.carrier,
                    d.elems.join(" ")
                );
            }
            Section::Term(d) => {
                let _ = writeln!(
                    out,
                    "term {}({}) = {}",
                    d.name,
                    d.params.join(", "),
                    term_text(&d.body)
                );
            }
            Section::Map(d) => {
                let _ = writeln!(out, "map {} {{", d.name);
                let _ = writeln!(out, "  carrier {}", d.carrier);
                let _ = writeln!(out, "  scale {}", d.scale);
                let _ = writeln!(out, "  concepts {}", d.concepts.join(" "));
                for concept in &d.concepts {
                    if let Some(entries) = d.init.get(concept) {
                        let mut line = format!("  init {concept} ");
                        write_pairs(&mut line, entries);
                        let _ = writeln!(out, "{line}");
                    }
                }
                for matrix in &d.matrices {
                    let _ = writeln!(out, "  matrix {} {{", matrix.name);
                    for cell in &matrix.cells {
                        let mut line = format!("    cell {} {} ", cell.from, cell.to);
                        write_pairs(&mut line, &cell.entries);
                        let _ = writeln!(out, "{line}");
                    }
                    let _ = writeln!(out, "  }}");
                }
                let _ = writeln!(out, "}}");
            }
        }
    }
    out
}

/// Build-time options for loading documents.
#[derive(Debug, Clone, Copy)]
pub struct LoadConfig {
    pub max_elements: usize,
    pub skip_exhaustive: bool,
}

impl Default for LoadConfig {
    fn default() -> Self {
        Self {
            max_elements: crate::lattice::DEFAULT_MAX_ELEMENTS,
            skip_exhaustive: false,
        }
    }
}

/// Everything a document resolves to.
#[derive(Debug, Default)]
pub struct Model {
    pub lattices: BTreeMap<String, Arc<Lattice>>,
    pub mvsets: BTreeMap<String, MvSet>,
    pub sets: BTreeMap<String, AssessmentSet>,
    pub terms: BTreeMap<String, TermDef>,
    pub maps: BTreeMap<String, MapSpec>,
}

/// Resolves a document into validated lattices, sets, terms, and maps.
/// Lattice references (including product components) may point forward.
pub fn load(doc: &Document, config: &LoadConfig) -> Result<Model, TextError> {
    let mut model = Model::default();

    // lattices first, resolving product dependencies recursively
    let decls: BTreeMap<&str, &LatticeDecl> = doc
        .sections()
        .filter_map(|s| match s {
            Section::Lattice(d) => Some((d.name.as_str(), d)),
            _ => None,
        })
        .collect();
    let mut visiting: Vec<String> = Vec::new();
    for name in decls.keys() {
        resolve_lattice(name, &decls, config, &mut model.lattices, &mut visiting)?;
    }

    let find_lattice = |model: &Model, name: &str, section: &str| {
        model
            .lattices
            .get(name)
            .cloned()
            .ok_or_else(|| TextError::UnresolvedReference(name.to_string(), section.to_string()))
    };

    for section in doc.sections() {
        match section {
            Section::Lattice(_) => {}
            Section::MvSet(d) => {
                let carrier = find_lattice(&model, &d.carrier, &d.name)?;
                let scale = find_lattice(&model, &d.scale, &d.name)?;
                let pairs = d
                    .entries
                    .iter()
                    .map(|(x, m)| {
                        Ok((
                            carrier.element(x).map_err(|e| TextError::load(&d.name, e))?,
                            scale.element(m).map_err(|e| TextError::load(&d.name, e))?,
                        ))
                    })
                    .collect::<Result<Vec<_>, TextError>>()?;
                let set = MvSet::new(carrier, scale, pairs)
                    .map_err(|e: MvSetError| TextError::load(&d.name, e))?;
                model.mvsets.insert(d.name.clone(), set);
            }
            Section::Set(d) => {
                let carrier = find_lattice(&model, &d.carrier, &d.name)?;
                let elems = d
                    .elems
                    .iter()
                    .map(|x| carrier.element(x).map_err(|e| TextError::load(&d.name, e)))
                    .collect::<Result<Vec<_>, TextError>>()?;
                let set = AssessmentSet::new(carrier, elems)
                    .map_err(|e: AggregationError| TextError::load(&d.name, e))?;
                model.sets.insert(d.name.clone(), set);
            }
            Section::Term(d) => {
                let def = TermDef::new(d.name.clone(), d.params.clone(), d.body.clone())
                    .map_err(|e: TermError| TextError::load(&d.name, e))?;
                model.terms.insert(d.name.clone(), def);
            }
            Section::Map(d) => {
                let spec = load_map(&model, d)?;
                model.maps.insert(d.name.clone(), spec);
            }
        }
    }
    Ok(model)
}

fn resolve_lattice(
    name: &str,
    decls: &BTreeMap<&str, &LatticeDecl>,
    config: &LoadConfig,
    done: &mut BTreeMap<String, Arc<Lattice>>,
    visiting: &mut Vec<String>,
) -> Result<Arc<Lattice>, TextError> {
    if let Some(l) = done.get(name) {
        return Ok(l.clone());
    }
    if visiting.iter().any(|v| v == name) {
        return Err(TextError::UnresolvedReference(
            name.to_string(),
            format!("cyclic product involving `{name}`"),
        ));
    }
    let decl = decls.get(name).copied().ok_or_else(|| {
        TextError::UnresolvedReference(
            name.to_string(),
            visiting.last().cloned().unwrap_or_else(|| "document".to_string()),
        )
    })?;
    visiting.push(name.to_string());
    let lattice = match &decl.body {
        LatticeBody::Explicit {
            elems,
            covers,
            mult,
        } => {
            let mut builder = LatticeBuilder::new(name)
                .elements(elems.clone())
                .covers(covers.clone())
                .max_elements(config.max_elements)
                .skip_exhaustive(config.skip_exhaustive);
            builder = match mult {
                None => builder,
                Some(MultDecl::Meet) => builder.mult(MultSpec::Meet),
                Some(MultDecl::Table { unit, entries }) => builder.mult(MultSpec::Table {
                    unit: unit.clone(),
                    entries: entries.clone(),
                }),
            };
            builder
                .build()
                .map_err(|e: LatticeError| TextError::load(name, e))?
        }
        LatticeBody::Product { first, second } => {
            let a = resolve_lattice(first, decls, config, done, visiting)?;
            let b = resolve_lattice(second, decls, config, done, visiting)?;
            product(name, &a, &b, config.max_elements)
                .map_err(|e: LatticeError| TextError::load(name, e))?
        }
    };
    visiting.pop();
    done.insert(name.to_string(), lattice.clone());
    Ok(lattice)
}

fn load_map(model: &Model, d: &MapDecl) -> Result<MapSpec, TextError> {
    let carrier = model
        .lattices
        .get(&d.carrier)
        .cloned()
        .ok_or_else(|| TextError::UnresolvedReference(d.carrier.clone(), d.name.clone()))?;
    let scale = model
        .lattices
        .get(&d.scale)
        .cloned()
        .ok_or_else(|| TextError::UnresolvedReference(d.scale.clone(), d.name.clone()))?;
    let n = d.concepts.len();
    let index_of = |concept: &str| -> Result<usize, TextError> {
        d.concepts
            .iter()
            .position(|c| c == concept)
            .ok_or_else(|| {
                TextError::load(&d.name, format!("unknown concept `{concept}`"))
            })
    };
    for concept in d.init.keys() {
        index_of(concept)?;
    }
    let mut initial = Vec::with_capacity(n);
    for concept in &d.concepts {
        let entries = d.init.get(concept).ok_or_else(|| {
            TextError::load(
                &d.name,
                format!("concept `{concept}` has no initial value (init is required)"),
            )
        })?;
        let pairs = entries
            .iter()
            .map(|(x, m)| {
                Ok((
                    carrier.element(x).map_err(|e| TextError::load(&d.name, e))?,
                    scale.element(m).map_err(|e| TextError::load(&d.name, e))?,
                ))
            })
            .collect::<Result<Vec<_>, TextError>>()?;
        initial.push(
            MvSet::new(carrier.clone(), scale.clone(), pairs)
                .map_err(|e| TextError::load(&d.name, e))?,
        );
    }
    let mut matrices = Vec::with_capacity(d.matrices.len());
    for m in &d.matrices {
        let mut cells = vec![MvSet::empty(carrier.clone(), scale.clone()); n * n];
        for cell in &m.cells {
            let from = index_of(&cell.from)?;
            let to = index_of(&cell.to)?;
            let pairs = cell
                .entries
                .iter()
                .map(|(x, mm)| {
                    Ok((
                        carrier.element(x).map_err(|e| TextError::load(&d.name, e))?,
                        scale.element(mm).map_err(|e| TextError::load(&d.name, e))?,
                    ))
                })
                .collect::<Result<Vec<_>, TextError>>()?;
            cells[from * n + to] = MvSet::new(carrier.clone(), scale.clone(), pairs)
                .map_err(|e| TextError::load(&d.name, e))?;
        }
        matrices.push(WeightMatrix::new(m.name.clone(), cells));
    }
    MapSpec::new(
        d.name.clone(),
        d.concepts.clone(),
        carrier,
        scale,
        initial,
        matrices,
    )
    .map_err(|e: MvcmError| TextError::load(&d.name, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::term::Op;

    #[test]
    fn empty_input_is_empty_document() {
        let doc = parse("").unwrap();
        assert!(doc.is_empty());
        let doc = parse("# only a comment\n\n").unwrap();
        assert!(doc.is_empty());
    }

    #[test]
    fn minimal_lattice_block() {
        let doc = parse("lattice C2 { elems 0 1; covers 0<1 }").unwrap();
        match doc.get("C2") {
            Some(Section::Lattice(LatticeDecl {
                body: LatticeBody::Explicit { elems, covers, mult },
                ..
            })) => {
                assert_eq!(elems, &["0", "1"]);
                assert_eq!(covers, &[("0".to_string(), "1".to_string())]);
                assert!(mult.is_none());
            }
            other => panic!("unexpected parse: {other:?}"),
        }
    }

    #[test]
    fn term_block_distinguishes_vars_and_constants() {
        let doc = parse("term t(x, y) = or(and(x, y), imp(x, b))").unwrap();
        match doc.get("t") {
            Some(Section::Term(TermDecl { params, body, .. })) => {
                assert_eq!(params, &["x", "y"]);
                match body {
                    Term::Apply(Op::Join, lhs, rhs) => {
                        assert!(matches!(**lhs, Term::Apply(Op::Meet, _, _)));
                        match &**rhs {
                            Term::Apply(Op::Implies, x, b) => {
                                assert_eq!(**x, Term::var("x"));
                                assert_eq!(**b, Term::constant("b"));
                            }
                            other => panic!("unexpected: {other:?}"),
                        }
                    }
                    other => panic!("unexpected: {other:?}"),
                }
            }
            other => panic!("unexpected parse: {other:?}"),
        }
    }

    #[test]
    fn syntax_errors_carry_positions() {
        let err = parse("lattice L {\n  elems a b\n  covers a>b\n}").unwrap_err();
        match err {
            TextError::Syntax { line, col, .. } => {
                assert_eq!(line, 3);
                assert!(col > 0);
            }
            other => panic!("unexpected error: {other:?}"),
        }
        assert!(parse("widget W {}").is_err());
        // parser is total: arbitrary bytes give an error, never a panic
        assert!(parse("lattice { { } } (((").is_err());
    }

    #[test]
    fn duplicate_sections_rejected() {
        let err = parse("set A over L { x }\nset A over L { y }").unwrap_err();
        assert!(matches!(err, TextError::DuplicateSection(_)));
    }

    #[test]
    fn fixtures_parse_and_roundtrip() {
        for name in fixture_names() {
            let doc = load_fixture(name).unwrap();
            let text = serialize(&doc);
            let reparsed = parse(&text).unwrap();
            assert_eq!(doc, reparsed, "round-trip of fixture {name}");
            assert_eq!(text, serialize(&reparsed), "idempotence for {name}");
        }
        assert!(matches!(
            load_fixture("nope"),
            Err(TextError::UnknownFixture(_))
        ));
    }

    #[test]
    fn fixtures_validate() {
        for name in ["L1", "L2", "L", "M"] {
            let doc = load_fixture(name).unwrap();
            let model = load(&doc, &LoadConfig::default()).unwrap();
            let l = &model.lattices[name];
            assert!(l.is_distributive(), "{name} distributive");
            assert!(l.is_atomic(), "{name} atomic");
            assert!(l.is_atomistic(), "{name} atomistic");
            assert!(l.is_residuated(), "{name} residuated");
            assert!(l.is_integrally_closed().unwrap(), "{name} integrally closed");
            assert!(l.is_integral().unwrap(), "{name} integral");
            assert!(l.has_atom_repr(), "{name} atom representation");
        }
    }

    #[test]
    fn product_fixture_has_paper_atoms() {
        let doc = load_fixture("L").unwrap();
        let model = load(&doc, &LoadConfig::default()).unwrap();
        let l = &model.lattices["L"];
        assert_eq!(l.len(), 32);
        let mut atoms: Vec<String> = l
            .atoms()
            .iter()
            .map(|&a| l.label(a).unwrap().to_string())
            .collect();
        atoms.sort();
        assert_eq!(atoms, ["0c", "0d", "b", "ba0", "bn0"]);
        assert_eq!(l.label(l.top()).unwrap(), "1h");
        assert_eq!(l.label(l.bottom()).unwrap(), "0");
    }

    #[test]
    fn hybrid_fixture_loads() {
        let doc = load_fixture("hybrid-energy-map").unwrap();
        let model = load(&doc, &LoadConfig::default()).unwrap();
        let map = &model.maps["hybrid-energy-map"];
        assert_eq!(map.concepts().len(), 5);
        assert_eq!(map.concepts()[0], "C1");
        assert_eq!(map.concepts()[4], "C5");
        assert_eq!(map.matrices().len(), 2);
    }

    #[test]
    fn unresolved_references_detected() {
        let doc = parse("lattice P { product A B }").unwrap();
        let err = load(&doc, &LoadConfig::default()).unwrap_err();
        assert!(matches!(err, TextError::UnresolvedReference(_, _)));

        let doc = parse("mvset S over нет scale M { }");
        assert!(doc.is_err()); // non-ascii rejected by the lexer

        let doc = parse("set S over Missing { a }").unwrap();
        assert!(matches!(
            load(&doc, &LoadConfig::default()),
            Err(TextError::UnresolvedReference(_, _))
        ));
    }

    #[test]
    fn map_requires_explicit_init() {
        let text = "\
lattice C2 { elems 0 1; covers 0<1; mult meet }
map m {
  carrier C2
  scale C2
  concepts A B
  init A (1, 1)
  matrix W { cell A B (1, 1) }
}
";
        let doc = parse(text).unwrap();
        let err = load(&doc, &LoadConfig::default()).unwrap_err();
        match err {
            TextError::Load(name, msg) => {
                assert_eq!(name, "m");
                assert!(msg.contains("no initial value"), "{msg}");
            }
            other => panic!("unexpected error: {other:?}"),
        }
    }

    #[test]
    fn json_export_is_deterministic() {
        let doc = load_fixture("L2").unwrap();
        assert_eq!(doc.to_json(), doc.to_json());
        assert!(doc.to_json().contains("\"L2\""));
    }
}
