//! Multi-valued sets: finite maps from elements of a carrier lattice to
//! confidence degrees in a scale lattice, with the extension principle that
//! pushes them through lattice terms.
//!
//! A set is kept in canonical form: entries at bottom confidence are not
//! stored (an element absent from the map has confidence bottom).

use std::collections::BTreeMap;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::sync::Arc;

use thiserror::Error;

use crate::lattice::{Elem, Lattice, LatticeError};
use crate::term::{Term, TermDef, TermError};

#[derive(Debug, Error)]
pub enum MvSetError {
    #[error("multi-valued sets live in different carrier lattices")]
    MismatchedCarriers,
    #[error("multi-valued sets use different confidence scales")]
    MismatchedScales,
    #[error("duplicate entry for element `{0}`")]
    DuplicateEntry(String),
    #[error("term `{term}` expects {expected} arguments, got {got}")]
    ArityMismatch {
        term: String,
        expected: usize,
        got: usize,
    },
    #[error(transparent)]
    Term(#[from] TermError),
    #[error(transparent)]
    Lattice(#[from] LatticeError),
}

/// A set of `(value, confidence)` pairs over a carrier lattice `L` and a
/// confidence scale `M`.
#[derive(Clone)]
pub struct MvSet {
    carrier: Arc<Lattice>,
    scale: Arc<Lattice>,
    entries: BTreeMap<Elem, Elem>,
}

impl PartialEq for MvSet {
    fn eq(&self, other: &Self) -> bool {
        self.carrier.id() == other.carrier.id()
            && self.scale.id() == other.scale.id()
            && self.entries == other.entries
    }
}

impl Eq for MvSet {}

impl Hash for MvSet {
    fn hash<H: Hasher>(&self, state: &mut H) {
        self.carrier.id().hash(state);
        self.scale.id().hash(state);
        self.entries.hash(state);
    }
}

impl fmt::Debug for MvSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MvSet{self}")
    }
}

impl fmt::Display for MvSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, (x, m)) in self.entries.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(
                f,
                "({}, {})",
                self.carrier.label(*x).unwrap_or("?"),
                self.scale.label(*m).unwrap_or("?")
            )?;
        }
        write!(f, "}}")
    }
}

impl MvSet {
    /// Builds a set from explicit pairs; bottom confidences are dropped and
    /// a repeated element is an error.
    pub fn new(
        carrier: Arc<Lattice>,
        scale: Arc<Lattice>,
        pairs: impl IntoIterator<Item = (Elem, Elem)>,
    ) -> Result<Self, MvSetError> {
        let mut entries = BTreeMap::new();
        for (x, m) in pairs {
            carrier.label(x)?;
            scale.label(m)?;
            if m == scale.bottom() {
                continue;
            }
            if entries.insert(x, m).is_some() {
                return Err(MvSetError::DuplicateEntry(
                    carrier.label(x).unwrap_or("?").to_string(),
                ));
            }
        }
        Ok(Self {
            carrier,
            scale,
            entries,
        })
    }

    pub fn empty(carrier: Arc<Lattice>, scale: Arc<Lattice>) -> Self {
        Self {
            carrier,
            scale,
            entries: BTreeMap::new(),
        }
    }

    pub fn singleton(
        carrier: Arc<Lattice>,
        scale: Arc<Lattice>,
        value: Elem,
        confidence: Elem,
    ) -> Result<Self, MvSetError> {
        Self::new(carrier, scale, [(value, confidence)])
    }

    pub fn carrier(&self) -> &Arc<Lattice> {
        &self.carrier
    }

    pub fn scale(&self) -> &Arc<Lattice> {
        &self.scale
    }

    /// Elements with non-bottom confidence, in id order.
    pub fn support(&self) -> Vec<Elem> {
        self.entries.keys().copied().collect()
    }

    /// Confidence of `x`, bottom when absent.
    pub fn confidence(&self, x: Elem) -> Result<Elem, MvSetError> {
        self.carrier.label(x)?;
        Ok(self
            .entries
            .get(&x)
            .copied()
            .unwrap_or_else(|| self.scale.bottom()))
    }

    pub fn entries(&self) -> impl Iterator<Item = (Elem, Elem)> + '_ {
        self.entries.iter().map(|(&x, &m)| (x, m))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn same_spaces(&self, other: &MvSet) -> Result<(), MvSetError> {
        if self.carrier.id() != other.carrier.id() {
            return Err(MvSetError::MismatchedCarriers);
        }
        if self.scale.id() != other.scale.id() {
            return Err(MvSetError::MismatchedScales);
        }
        Ok(())
    }

    /// Pointwise union with confidences joined in the scale.
    pub fn merged(&self, other: &MvSet) -> Result<MvSet, MvSetError> {
        self.same_spaces(other)?;
        let mut entries = self.entries.clone();
        for (x, m) in other.entries() {
            let joined = match entries.get(&x) {
                Some(&cur) => self.scale.join(cur, m)?,
                None => m,
            };
            entries.insert(x, joined);
        }
        Ok(MvSet {
            carrier: self.carrier.clone(),
            scale: self.scale.clone(),
            entries,
        })
    }
}

fn check_args(def: &TermDef, args: &[MvSet]) -> Result<(Arc<Lattice>, Arc<Lattice>), MvSetError> {
    if args.len() != def.arity() {
        return Err(MvSetError::ArityMismatch {
            term: def.name().to_string(),
            expected: def.arity(),
            got: args.len(),
        });
    }
    let first = &args[0];
    for other in &args[1..] {
        first.same_spaces(other)?;
    }
    def.body().check_interpretable(first.carrier())?;
    def.body().check_interpretable(first.scale())?;
    Ok((first.carrier().clone(), first.scale().clone()))
}

/// Runs `per_tuple` for every tuple drawn from the supports of `args`.
fn for_each_tuple(
    args: &[MvSet],
    mut per_tuple: impl FnMut(&[(Elem, Elem)]) -> Result<(), MvSetError>,
) -> Result<(), MvSetError> {
    let supports: Vec<Vec<(Elem, Elem)>> = args.iter().map(|a| a.entries().collect()).collect();
    if supports.iter().any(|s| s.is_empty()) {
        return Ok(());
    }
    let mut odometer = vec![0usize; supports.len()];
    let mut tuple: Vec<(Elem, Elem)> = odometer
        .iter()
        .enumerate()
        .map(|(k, &i)| supports[k][i])
        .collect();
    loop {
        per_tuple(&tuple)?;
        let mut pos = supports.len();
        loop {
            if pos == 0 {
                return Ok(());
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < supports[pos].len() {
                tuple[pos] = supports[pos][odometer[pos]];
                break;
            }
            odometer[pos] = 0;
            tuple[pos] = supports[pos][0];
        }
    }
}

fn extend_with(
    def: &TermDef,
    args: &[MvSet],
    confidence_of_tuple: impl Fn(&Term, &Arc<Lattice>, &BTreeMap<String, Elem>) -> Result<Elem, MvSetError>,
) -> Result<MvSet, MvSetError> {
    let (carrier, scale) = check_args(def, args)?;
    let mut acc: BTreeMap<Elem, Elem> = BTreeMap::new();
    for_each_tuple(args, |tuple| {
        let mut values = BTreeMap::new();
        let mut confs = BTreeMap::new();
        for (param, &(x, m)) in def.params().iter().zip(tuple) {
            values.insert(param.clone(), x);
            confs.insert(param.clone(), m);
        }
        let y = def.body().eval(&carrier, &values)?;
        let c = confidence_of_tuple(def.body(), &scale, &confs)?;
        if c != scale.bottom() {
            let joined = match acc.get(&y) {
                Some(&cur) => scale.join(cur, c)?,
                None => c,
            };
            acc.insert(y, joined);
        }
        Ok(())
    })?;
    Ok(MvSet {
        carrier,
        scale,
        entries: acc,
    })
}

/// The corrected extension principle: the image value's confidence is the
/// join, over all tuples reaching it, of the term applied to the argument
/// confidences in the scale lattice. Unreached values stay at bottom.
pub fn extend(def: &TermDef, args: &[MvSet]) -> Result<MvSet, MvSetError> {
    extend_with(def, args, |body, scale, confs| {
        Ok(body.eval(scale, confs)?)
    })
}

/// The classical sup-min principle with joins and meets: confidence is the
/// join over tuples of the meet of the argument confidences. Reference
/// implementation for comparison only.
pub fn classical_extend(def: &TermDef, args: &[MvSet]) -> Result<MvSet, MvSetError> {
    extend_with(def, args, |_, scale, confs| {
        let mut it = confs.values();
        let first = *it.next().expect("terms have at least one parameter");
        it.try_fold(first, |acc, &m| Ok(scale.meet(acc, m)?))
    })
}
