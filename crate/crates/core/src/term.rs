//! Expression trees over lattice operations, interpretable in any lattice
//! that provides the operations they mention.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::lattice::{Elem, Lattice, LatticeError};

#[derive(Debug, Error)]
pub enum TermError {
    #[error("term variable `{0}` has no value")]
    MissingVariable(String),
    #[error("unknown constant `{0}` in lattice `{1}`")]
    UnknownConstant(String, String),
    #[error("term is not interpretable in lattice `{lattice}`: {reason}")]
    UninterpretableTerm { lattice: String, reason: String },
    #[error("bad term definition: {0}")]
    BadDefinition(String),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// Binary lattice operations a term may mention.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
pub enum Op {
    Join,
    Meet,
    Mult,
    Implies,
    RingSum,
}

impl Op {
    pub fn keyword(self) -> &'static str {
        match self {
            Op::Join => "or",
            Op::Meet => "and",
            Op::Mult => "mul",
            Op::Implies => "imp",
            Op::RingSum => "xor",
        }
    }

    pub fn from_keyword(kw: &str) -> Option<Self> {
        match kw {
            "or" => Some(Op::Join),
            "and" => Some(Op::Meet),
            "mul" => Some(Op::Mult),
            "imp" => Some(Op::Implies),
            "xor" => Some(Op::RingSum),
            _ => None,
        }
    }
}

/// A term over variables, named constants, and lattice operations.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub enum Term {
    Var(String),
    Const(String),
    Apply(Op, Box<Term>, Box<Term>),
}

impl Term {
    pub fn var(name: impl Into<String>) -> Self {
        Term::Var(name.into())
    }

    pub fn constant(label: impl Into<String>) -> Self {
        Term::Const(label.into())
    }

    pub fn apply(op: Op, lhs: Term, rhs: Term) -> Self {
        Term::Apply(op, Box::new(lhs), Box::new(rhs))
    }

    pub fn join(lhs: Term, rhs: Term) -> Self {
        Term::apply(Op::Join, lhs, rhs)
    }

    pub fn meet(lhs: Term, rhs: Term) -> Self {
        Term::apply(Op::Meet, lhs, rhs)
    }

    pub fn implies(lhs: Term, rhs: Term) -> Self {
        Term::apply(Op::Implies, lhs, rhs)
    }

    pub fn ring_sum(lhs: Term, rhs: Term) -> Self {
        Term::apply(Op::RingSum, lhs, rhs)
    }

    /// Free variables in first-occurrence order.
    pub fn free_vars(&self) -> Vec<String> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        self.walk(&mut |t| {
            if let Term::Var(v) = t {
                if seen.insert(v.clone()) {
                    out.push(v.clone());
                }
            }
        });
        out
    }

    fn walk(&self, f: &mut impl FnMut(&Term)) {
        f(self);
        if let Term::Apply(_, l, r) = self {
            l.walk(f);
            r.walk(f);
        }
    }

    /// Checks that every operation and constant the term mentions is
    /// available in `lattice`.
    pub fn check_interpretable(&self, lattice: &Lattice) -> Result<(), TermError> {
        let mut err = None;
        self.walk(&mut |t| {
            if err.is_some() {
                return;
            }
            match t {
                Term::Const(label) => {
                    if lattice.element(label).is_err() {
                        err = Some(TermError::UninterpretableTerm {
                            lattice: lattice.name().to_string(),
                            reason: format!("constant `{label}` does not name an element"),
                        });
                    }
                }
                Term::Apply(op, _, _) => {
                    let missing = match op {
                        Op::Join | Op::Meet => None,
                        Op::Mult => (!lattice.has_mult()).then(|| "no monoid multiplication"),
                        Op::Implies => (!lattice.is_brouwer() && !lattice.is_residuated())
                            .then(|| "no implication (not Brouwer, not residuated)"),
                        Op::RingSum => {
                            (!lattice.has_atom_repr()).then(|| "no atom representation")
                        }
                    };
                    if let Some(reason) = missing {
                        err = Some(TermError::UninterpretableTerm {
                            lattice: lattice.name().to_string(),
                            reason: format!("`{}` needs {reason}", op.keyword()),
                        });
                    }
                }
                Term::Var(_) => {}
            }
        });
        match err {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Bottom-up evaluation in `lattice` under a valuation of the free
    /// variables.
    pub fn eval(
        &self,
        lattice: &Lattice,
        valuation: &BTreeMap<String, Elem>,
    ) -> Result<Elem, TermError> {
        match self {
            Term::Var(name) => valuation
                .get(name)
                .copied()
                .ok_or_else(|| TermError::MissingVariable(name.clone())),
            Term::Const(label) => lattice.element(label).map_err(|_| {
                TermError::UnknownConstant(label.clone(), lattice.name().to_string())
            }),
            Term::Apply(op, lhs, rhs) => {
                let a = lhs.eval(lattice, valuation)?;
                let b = rhs.eval(lattice, valuation)?;
                let out = match op {
                    Op::Join => lattice.join(a, b)?,
                    Op::Meet => lattice.meet(a, b)?,
                    Op::Mult => lattice.mult(a, b).map_err(|_| {
                        TermError::UninterpretableTerm {
                            lattice: lattice.name().to_string(),
                            reason: "`mul` needs a monoid multiplication".to_string(),
                        }
                    })?,
                    Op::Implies => {
                        if lattice.is_brouwer() {
                            lattice.heyting_implies(a, b)?
                        } else if lattice.is_residuated() {
                            lattice.residuals(a, b)?.0
                        } else {
                            return Err(TermError::UninterpretableTerm {
                                lattice: lattice.name().to_string(),
                                reason: "`imp` needs a Brouwer or residuated lattice".to_string(),
                            });
                        }
                    }
                    Op::RingSum => lattice.ring_sum(a, b).map_err(|e| {
                        TermError::UninterpretableTerm {
                            lattice: lattice.name().to_string(),
                            reason: format!("`xor` unavailable: {e}"),
                        }
                    })?,
                };
                Ok(out)
            }
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Const(c) => write!(f, "{c}"),
            Term::Apply(op, l, r) => write!(f, "{}({l}, {r})", op.keyword()),
        }
    }
}

/// A named term with an explicit parameter list fixing argument order.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize)]
pub struct TermDef {
    name: String,
    params: Vec<String>,
    body: Term,
}

impl TermDef {
    /// Parameters must be distinct, non-empty, and cover exactly the free
    /// variables of the body.
    pub fn new(
        name: impl Into<String>,
        params: Vec<String>,
        body: Term,
    ) -> Result<Self, TermError> {
        let name = name.into();
        if params.is_empty() {
            return Err(TermError::BadDefinition(format!(
                "term `{name}` needs at least one parameter"
            )));
        }
        let unique: BTreeSet<&String> = params.iter().collect();
        if unique.len() != params.len() {
            return Err(TermError::BadDefinition(format!(
                "term `{name}` repeats a parameter"
            )));
        }
        let free = body.free_vars();
        for v in &free {
            if !unique.contains(v) {
                return Err(TermError::BadDefinition(format!(
                    "term `{name}` uses undeclared variable `{v}`"
                )));
            }
        }
        for p in &params {
            if !free.contains(p) {
                return Err(TermError::BadDefinition(format!(
                    "term `{name}` declares unused parameter `{p}`"
                )));
            }
        }
        Ok(Self { name, params, body })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn params(&self) -> &[String] {
        &self.params
    }

    pub fn arity(&self) -> usize {
        self.params.len()
    }

    pub fn body(&self) -> &Term {
        &self.body
    }

    /// Evaluates the body against positional arguments.
    pub fn eval(&self, lattice: &Lattice, args: &[Elem]) -> Result<Elem, TermError> {
        if args.len() != self.params.len() {
            return Err(TermError::BadDefinition(format!(
                "term `{}` expects {} arguments, got {}",
                self.name,
                self.params.len(),
                args.len()
            )));
        }
        let valuation: BTreeMap<String, Elem> = self
            .params
            .iter()
            .cloned()
            .zip(args.iter().copied())
            .collect();
        self.body.eval(lattice, &valuation)
    }
}
