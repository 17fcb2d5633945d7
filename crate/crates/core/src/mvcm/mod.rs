//! Multi-valued cognitive maps: concepts valued in a carrier lattice with
//! confidence degrees in a scale lattice, iterated under expert weight
//! matrices until a fixed point, with loop-correcting coefficients.

mod engine;
mod trace;

pub use engine::{detect_cycle, run, step};
pub use trace::{RenderFormat, TraceRow, TraceTable};

use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::aggregation::AggregationError;
use crate::lattice::{Elem, Lattice, LatticeError};
use crate::mvset::{MvSet, MvSetError};
use crate::term::TermError;

#[derive(Debug, Error)]
pub enum MvcmError {
    #[error("map `{0}` is malformed: {1}")]
    BadSpec(String, String),
    #[error("matrix index {0} is out of range; the map has {1} matrices")]
    BadMatrixIndex(usize, usize),
    #[error("lattice `{0}` is unsuitable for this run: {1}")]
    UnsuitableCarrier(String, String),
    #[error(transparent)]
    MvSet(#[from] MvSetError),
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Aggregation(#[from] AggregationError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// How incoming influences combine in the update rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Combine {
    /// Lattice join.
    Join,
    /// Ring sum (symmetric difference of atom sets).
    Sum,
}

/// Which weight matrices a run uses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightMode {
    /// One fixed matrix by index.
    Single(usize),
    /// Branch over every matrix choice at every step.
    Enumerate,
    /// Replace each cell by the pessimistic mean across matrices, then run.
    Pessimistic,
    /// Replace each cell by the optimistic mean across matrices, then run.
    Optimistic,
}

/// One expert's weight matrix; `cells[from * n + to]` is the influence of
/// concept `from` on concept `to`.
#[derive(Debug, Clone)]
pub struct WeightMatrix {
    name: String,
    cells: Vec<MvSet>,
}

impl WeightMatrix {
    pub fn new(name: impl Into<String>, cells: Vec<MvSet>) -> Self {
        Self {
            name: name.into(),
            cells,
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn cell(&self, from: usize, to: usize, n: usize) -> &MvSet {
        &self.cells[from * n + to]
    }
}

/// A validated cognitive map: concepts, initial multi-valued values, and at
/// least one weight matrix, all over one carrier/scale pair.
#[derive(Debug, Clone)]
pub struct MapSpec {
    name: String,
    concepts: Vec<String>,
    carrier: Arc<Lattice>,
    scale: Arc<Lattice>,
    initial: Vec<MvSet>,
    matrices: Vec<WeightMatrix>,
}

impl MapSpec {
    /// Validates shapes and canonicalizes weight cells: an entry whose value
    /// is bottom means "no influence" and is dropped (bottom is the identity
    /// of both combination modes, so omission is equivalent).
    pub fn new(
        name: impl Into<String>,
        concepts: Vec<String>,
        carrier: Arc<Lattice>,
        scale: Arc<Lattice>,
        initial: Vec<MvSet>,
        matrices: Vec<WeightMatrix>,
    ) -> Result<Self, MvcmError> {
        let name = name.into();
        let n = concepts.len();
        let bad = |msg: String| MvcmError::BadSpec(name.clone(), msg);
        if n == 0 {
            return Err(bad("a map needs at least one concept".to_string()));
        }
        let mut seen = std::collections::BTreeSet::new();
        for c in &concepts {
            if !seen.insert(c) {
                return Err(bad(format!("duplicate concept `{c}`")));
            }
        }
        if initial.len() != n {
            return Err(bad(format!(
                "{} initial values for {} concepts",
                initial.len(),
                n
            )));
        }
        if matrices.is_empty() {
            return Err(bad("a map needs at least one weight matrix".to_string()));
        }
        let check_spaces = |s: &MvSet, what: &str| -> Result<(), MvcmError> {
            if s.carrier().id() != carrier.id() || s.scale().id() != scale.id() {
                return Err(MvcmError::BadSpec(
                    name.clone(),
                    format!("{what} is not over the map's carrier and scale"),
                ));
            }
            Ok(())
        };
        for (i, s) in initial.iter().enumerate() {
            check_spaces(s, &format!("initial value of `{}`", concepts[i]))?;
        }
        let mut seen_names = std::collections::BTreeSet::new();
        let mut canon_matrices = Vec::with_capacity(matrices.len());
        for m in matrices {
            if !seen_names.insert(m.name.clone()) {
                return Err(bad(format!("duplicate matrix name `{}`", m.name)));
            }
            if m.cells.len() != n * n {
                return Err(bad(format!(
                    "matrix `{}` has {} cells for {} concepts",
                    m.name,
                    m.cells.len(),
                    n
                )));
            }
            let mut cells = Vec::with_capacity(n * n);
            for cell in &m.cells {
                check_spaces(cell, &format!("a cell of matrix `{}`", m.name))?;
                let kept: Vec<(Elem, Elem)> = cell
                    .entries()
                    .filter(|&(v, _)| v != carrier.bottom())
                    .collect();
                cells.push(MvSet::new(carrier.clone(), scale.clone(), kept)?);
            }
            canon_matrices.push(WeightMatrix {
                name: m.name,
                cells,
            });
        }
        Ok(Self {
            name,
            concepts,
            carrier,
            scale,
            initial,
            matrices: canon_matrices,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn len(&self) -> usize {
        self.concepts.len()
    }

    pub fn concepts(&self) -> &[String] {
        &self.concepts
    }

    pub fn concept(&self, i: usize) -> &str {
        &self.concepts[i]
    }

    pub fn carrier(&self) -> &Arc<Lattice> {
        &self.carrier
    }

    pub fn scale(&self) -> &Arc<Lattice> {
        &self.scale
    }

    pub fn initial(&self) -> &[MvSet] {
        &self.initial
    }

    pub fn matrices(&self) -> &[WeightMatrix] {
        &self.matrices
    }

    pub fn matrix(&self, idx: usize) -> Result<&WeightMatrix, MvcmError> {
        self.matrices
            .get(idx)
            .ok_or(MvcmError::BadMatrixIndex(idx, self.matrices.len()))
    }

    /// Same map with a different matrix list (used by the mean weight modes).
    pub(crate) fn with_matrices(&self, matrices: Vec<WeightMatrix>) -> Self {
        Self {
            matrices,
            ..self.clone()
        }
    }
}

/// Convergence coefficients of one concept at one iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Coeffs {
    pub f: Elem,
    pub r: Elem,
    pub c: Elem,
}

/// Full iteration state: per-concept values and coefficients.
///
/// Equality and hashing ignore the iteration index, so a state recurring at
/// a later `k` is recognized as the same state.
#[derive(Debug, Clone)]
pub struct MapState {
    pub k: usize,
    pub values: Vec<MvSet>,
    pub coeffs: Vec<Coeffs>,
}

impl PartialEq for MapState {
    fn eq(&self, other: &Self) -> bool {
        self.values == other.values && self.coeffs == other.coeffs
    }
}

impl Eq for MapState {}

impl Hash for MapState {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.values.hash(state);
        self.coeffs.hash(state);
    }
}

impl MapState {
    /// The k = 0 state: initial values, all coefficients at top.
    pub fn initial(spec: &MapSpec) -> Self {
        let top = spec.carrier().top();
        Self {
            k: 0,
            values: spec.initial().to_vec(),
            coeffs: vec![
                Coeffs {
                    f: top,
                    r: top,
                    c: top,
                };
                spec.len()
            ],
        }
    }
}

/// Parameters of a run.
#[derive(Debug, Clone, Copy)]
pub struct RunConfig {
    pub combine: Combine,
    pub weights: WeightMode,
    pub max_iter: usize,
    /// Enumerate mode forks over matrix choices up to this depth; past it,
    /// each branch continues with its last chosen matrix.
    pub fork_depth: usize,
}

impl RunConfig {
    pub fn new(combine: Combine, weights: WeightMode) -> Self {
        Self {
            combine,
            weights,
            max_iter: 50,
            fork_depth: 4,
        }
    }

    pub fn max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    pub fn fork_depth(mut self, depth: usize) -> Self {
        self.fork_depth = depth;
        self
    }
}

/// Whether a run reached a stable state everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    /// Every branch reached a fixed point by iteration `at`.
    Converged { at: usize },
    /// The iteration budget ran out first.
    NotConverged { max_iter: usize },
}

/// Final state of one branch of a run.
#[derive(Debug, Clone)]
pub struct BranchResult {
    pub id: String,
    pub state: MapState,
    pub looped: bool,
    pub last_matrix: usize,
    pub done: bool,
}

/// Everything a run produces.
#[derive(Debug)]
pub struct RunOutcome {
    pub trace: TraceTable,
    pub status: RunStatus,
    pub branches: Vec<BranchResult>,
    /// Per-concept values merged across branch results.
    pub merged: Vec<MvSet>,
}

impl RunOutcome {
    pub fn converged(&self) -> bool {
        matches!(self.status, RunStatus::Converged { .. })
    }
}
