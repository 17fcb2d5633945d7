//! Finite bounded lattices: construction, validation, and element operations.
//!
//! A [`Lattice`] is immutable after a successful build. All structure checks
//! (order axioms, join/meet existence, monoid laws, residuation, implication
//! tables, atom representation) run eagerly at build time, so element
//! operations never fail afterwards except on [`LatticeError::ForeignElement`]
//! or when the lattice lacks the requested structure.

mod build;
#[cfg(test)]
pub(crate) mod tests;

pub use build::{product, LatticeBuilder, MultSpec, DEFAULT_MAX_ELEMENTS};

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicU32, Ordering};
use thiserror::Error;

/// Errors raised while building or operating on a lattice.
#[derive(Debug, Error)]
pub enum LatticeError {
    #[error("duplicate element label `{0}`")]
    DuplicateLabel(String),
    #[error("unknown element label `{0}`")]
    UnknownLabel(String),
    #[error("cover relation contains a cycle through `{0}`")]
    CycleInOrder(String),
    #[error("not a lattice: {0}")]
    NotALattice(String),
    #[error("bad monoid: {0}")]
    BadMonoid(String),
    #[error("element does not belong to lattice `{0}`")]
    ForeignElement(String),
    #[error("lattice `{0}` is not a Brouwer lattice; implication is undefined")]
    NotBrouwer(String),
    #[error("lattice `{0}` has no monoid multiplication")]
    NoMultiplication(String),
    #[error("multiplication on `{0}` is not residuated: {1}")]
    NotResiduated(String, String),
    #[error("lattice `{0}` is not atom-representable: {1}")]
    NotAtomRepresentable(String, String),
    #[error("ring sum undefined on `{0}`: {1}")]
    SumNotInLattice(String, String),
    #[error("lattice `{name}` would have {size} elements, above the cap of {cap}")]
    TooLarge { name: String, size: usize, cap: usize },
}

/// Identity token for a built lattice instance.
///
/// Two builds of structurally equal lattices get distinct ids; an [`Elem`]
/// is only valid in the lattice that created it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LatticeId(u32);

static NEXT_LATTICE_ID: AtomicU32 = AtomicU32::new(1);

impl LatticeId {
    fn fresh() -> Self {
        Self(NEXT_LATTICE_ID.fetch_add(1, Ordering::Relaxed))
    }
}

/// Handle to an element of a specific lattice.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Elem {
    lat: LatticeId,
    ix: u32,
}

impl Elem {
    /// The lattice this element belongs to.
    pub fn lattice_id(&self) -> LatticeId {
        self.lat
    }
}

/// Monoid multiplication with precomputed residual tables.
struct Monoid {
    mult_m: Vec<u32>,
    unit_ix: u32,
    /// `right_m[a][b]` is a->b = max{y : a*y <= b}; `left_m[a][b]` is b<-a.
    residuals: Option<(Vec<u32>, Vec<u32>)>,
    residuals_err: Option<String>,
    integrally_closed: bool,
    integral: bool,
}

/// Elements read as sets of atoms, with precomputed ring-sum and set-difference.
struct AtomRepr {
    masks: Vec<u64>,
    ring_m: Vec<u32>,
    diff_m: Vec<u32>,
}

enum ReprFailure {
    NotRepresentable(String),
    SumMissing(String),
}

/// An immutable finite bounded lattice.
pub struct Lattice {
    id: LatticeId,
    name: String,
    labels: Vec<String>,
    by_label: BTreeMap<String, u32>,
    n: usize,
    leq_m: Vec<bool>,
    join_m: Vec<u32>,
    meet_m: Vec<u32>,
    top_ix: u32,
    bottom_ix: u32,
    covers: Vec<(u32, u32)>,
    atoms_ix: Vec<u32>,
    generators_ix: Vec<u32>,
    distributive: bool,
    /// Implication table, present iff the lattice is Brouwer (= distributive).
    implies_m: Option<Vec<u32>>,
    atomic: bool,
    atomistic: bool,
    repr: Option<AtomRepr>,
    repr_failure: Option<ReprFailure>,
    monoid: Option<Monoid>,
}

impl fmt::Debug for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lattice")
            .field("name", &self.name)
            .field("elements", &self.n)
            .finish()
    }
}

impl Lattice {
    pub fn id(&self) -> LatticeId {
        self.id
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    /// Number of elements.
    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false // a valid lattice has at least one element
    }

    fn at(&self, ix: usize) -> Elem {
        Elem {
            lat: self.id,
            ix: ix as u32,
        }
    }

    /// Validates that `e` belongs to this lattice and returns its index.
    fn ix(&self, e: Elem) -> Result<usize, LatticeError> {
        if e.lat != self.id || (e.ix as usize) >= self.n {
            return Err(LatticeError::ForeignElement(self.name.clone()));
        }
        Ok(e.ix as usize)
    }

    /// All elements in id order.
    pub fn elements(&self) -> impl Iterator<Item = Elem> + '_ {
        (0..self.n).map(|i| self.at(i))
    }

    /// Looks an element up by its label.
    pub fn element(&self, label: &str) -> Result<Elem, LatticeError> {
        self.by_label
            .get(label)
            .map(|&ix| self.at(ix as usize))
            .ok_or_else(|| LatticeError::UnknownLabel(label.to_string()))
    }

    pub fn label(&self, e: Elem) -> Result<&str, LatticeError> {
        Ok(&self.labels[self.ix(e)?])
    }

    pub fn top(&self) -> Elem {
        self.at(self.top_ix as usize)
    }

    pub fn bottom(&self) -> Elem {
        self.at(self.bottom_ix as usize)
    }

    pub fn leq(&self, a: Elem, b: Elem) -> Result<bool, LatticeError> {
        let (a, b) = (self.ix(a)?, self.ix(b)?);
        Ok(self.leq_raw(a, b))
    }

    pub fn join(&self, a: Elem, b: Elem) -> Result<Elem, LatticeError> {
        let (a, b) = (self.ix(a)?, self.ix(b)?);
        Ok(self.at(self.join_raw(a, b)))
    }

    pub fn meet(&self, a: Elem, b: Elem) -> Result<Elem, LatticeError> {
        let (a, b) = (self.ix(a)?, self.ix(b)?);
        Ok(self.at(self.meet_raw(a, b)))
    }

    fn leq_raw(&self, a: usize, b: usize) -> bool {
        self.leq_m[a * self.n + b]
    }

    fn join_raw(&self, a: usize, b: usize) -> usize {
        self.join_m[a * self.n + b] as usize
    }

    fn meet_raw(&self, a: usize, b: usize) -> usize {
        self.meet_m[a * self.n + b] as usize
    }

    /// Elements covering bottom.
    pub fn atoms(&self) -> Vec<Elem> {
        self.atoms_ix.iter().map(|&i| self.at(i as usize)).collect()
    }

    /// A minimal generating set, computed by greedy elimination.
    ///
    /// Bottom counts as the empty join and is never reported; candidates are
    /// dropped highest-id first, so elements declared early are preferred as
    /// generators. Minimal generating sets are not unique in general.
    pub fn generators(&self) -> Vec<Elem> {
        self.generators_ix
            .iter()
            .map(|&i| self.at(i as usize))
            .collect()
    }

    /// Covering pairs `(lower, upper)` of the order, in id order.
    pub fn cover_pairs(&self) -> Vec<(Elem, Elem)> {
        self.covers
            .iter()
            .map(|&(a, b)| (self.at(a as usize), self.at(b as usize)))
            .collect()
    }

    pub fn is_distributive(&self) -> bool {
        self.distributive
    }

    /// True iff every two distinct computed generators meet to bottom.
    ///
    /// This is the generator-based notion of atomicity; see also
    /// [`Lattice::is_atomistic`] for the standard one.
    pub fn is_atomic(&self) -> bool {
        self.atomic
    }

    /// True iff every element is the join of the atoms below it.
    pub fn is_atomistic(&self) -> bool {
        self.atomistic
    }

    /// True iff the internal implication is total (equivalent, for finite
    /// lattices, to distributivity).
    pub fn is_brouwer(&self) -> bool {
        self.implies_m.is_some()
    }

    /// Internal implication: the largest `c` with `a /\ c = a /\ b`.
    pub fn heyting_implies(&self, a: Elem, b: Elem) -> Result<Elem, LatticeError> {
        let (a, b) = (self.ix(a)?, self.ix(b)?);
        let table = self
            .implies_m
            .as_ref()
            .ok_or_else(|| LatticeError::NotBrouwer(self.name.clone()))?;
        Ok(self.at(table[a * self.n + b] as usize))
    }

    pub fn has_mult(&self) -> bool {
        self.monoid.is_some()
    }

    /// Unit of the monoid multiplication, when present.
    pub fn unit(&self) -> Option<Elem> {
        self.monoid.as_ref().map(|m| self.at(m.unit_ix as usize))
    }

    pub fn mult(&self, a: Elem, b: Elem) -> Result<Elem, LatticeError> {
        let (a, b) = (self.ix(a)?, self.ix(b)?);
        let m = self
            .monoid
            .as_ref()
            .ok_or_else(|| LatticeError::NoMultiplication(self.name.clone()))?;
        Ok(self.at(m.mult_m[a * self.n + b] as usize))
    }

    pub fn is_residuated(&self) -> bool {
        self.monoid
            .as_ref()
            .is_some_and(|m| m.residuals.is_some())
    }

    /// The residual pair `(a -> b, b <- a)` of the monoid multiplication.
    pub fn residuals(&self, a: Elem, b: Elem) -> Result<(Elem, Elem), LatticeError> {
        let (a, b) = (self.ix(a)?, self.ix(b)?);
        let m = self
            .monoid
            .as_ref()
            .ok_or_else(|| LatticeError::NoMultiplication(self.name.clone()))?;
        let (right, left) = m.residuals.as_ref().ok_or_else(|| {
            LatticeError::NotResiduated(
                self.name.clone(),
                m.residuals_err.clone().unwrap_or_default(),
            )
        })?;
        Ok((
            self.at(right[a * self.n + b] as usize),
            self.at(left[a * self.n + b] as usize),
        ))
    }

    /// True iff `x -> x = x <- x = unit` for every `x`.
    pub fn is_integrally_closed(&self) -> Result<bool, LatticeError> {
        let m = self
            .monoid
            .as_ref()
            .ok_or_else(|| LatticeError::NoMultiplication(self.name.clone()))?;
        if m.residuals.is_none() {
            return Err(LatticeError::NotResiduated(
                self.name.clone(),
                m.residuals_err.clone().unwrap_or_default(),
            ));
        }
        Ok(m.integrally_closed)
    }

    /// True iff every element is below the monoid unit.
    pub fn is_integral(&self) -> Result<bool, LatticeError> {
        let m = self
            .monoid
            .as_ref()
            .ok_or_else(|| LatticeError::NoMultiplication(self.name.clone()))?;
        Ok(m.integral)
    }

    pub fn has_atom_repr(&self) -> bool {
        self.repr.is_some()
    }

    fn repr(&self) -> Result<&AtomRepr, LatticeError> {
        match (&self.repr, &self.repr_failure) {
            (Some(r), _) => Ok(r),
            (None, Some(ReprFailure::NotRepresentable(msg))) => Err(
                LatticeError::NotAtomRepresentable(self.name.clone(), msg.clone()),
            ),
            (None, Some(ReprFailure::SumMissing(msg))) => {
                Err(LatticeError::SumNotInLattice(self.name.clone(), msg.clone()))
            }
            (None, None) => Err(LatticeError::NotAtomRepresentable(
                self.name.clone(),
                "representation was not computed".to_string(),
            )),
        }
    }

    /// The injective map element -> atoms below it, when the lattice admits it.
    pub fn atom_repr(&self) -> Result<BTreeMap<Elem, Vec<Elem>>, LatticeError> {
        let repr = self.repr()?;
        let mut out = BTreeMap::new();
        for i in 0..self.n {
            let mask = repr.masks[i];
            let atoms = self
                .atoms_ix
                .iter()
                .enumerate()
                .filter(|(k, _)| mask & (1 << k) != 0)
                .map(|(_, &a)| self.at(a as usize))
                .collect();
            out.insert(self.at(i), atoms);
        }
        Ok(out)
    }

    /// Symmetric difference of `a` and `b` read as sets of atoms.
    pub fn ring_sum(&self, a: Elem, b: Elem) -> Result<Elem, LatticeError> {
        let (a, b) = (self.ix(a)?, self.ix(b)?);
        let repr = self.repr()?;
        Ok(self.at(repr.ring_m[a * self.n + b] as usize))
    }

    /// The element whose atom set is `atoms(a) \ atoms(b)`.
    pub fn set_difference(&self, a: Elem, b: Elem) -> Result<Elem, LatticeError> {
        let (a, b) = (self.ix(a)?, self.ix(b)?);
        let repr = self.repr()?;
        Ok(self.at(repr.diff_m[a * self.n + b] as usize))
    }

    /// Longest-chain height of each element above bottom, used to order
    /// product elements.
    fn heights(&self) -> Vec<usize> {
        let mut order: Vec<usize> = (0..self.n).collect();
        order.sort_by_key(|&i| (0..self.n).filter(|&j| self.leq_raw(j, i)).count());
        let mut h = vec![0usize; self.n];
        for &i in &order {
            for &(lo, hi) in &self.covers {
                if hi as usize == i {
                    h[i] = h[i].max(h[lo as usize] + 1);
                }
            }
        }
        h
    }
}
