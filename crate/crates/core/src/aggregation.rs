//! Set-valued means and a difference measure over partially ordered expert
//! assessments, with confidence propagation for the means.

use std::collections::BTreeSet;
use std::fmt;
use std::sync::Arc;

use thiserror::Error;

use crate::lattice::{Elem, Lattice, LatticeError};
use crate::mvset::{MvSet, MvSetError};

#[derive(Debug, Error)]
pub enum AggregationError {
    #[error("assessment sets live in different carrier lattices")]
    MismatchedCarriers,
    #[error("multi-valued inputs use different scales or carriers")]
    MismatchedScales,
    #[error("an assessment set cannot be empty")]
    EmptySet,
    #[error("aggregation needs at least two sets")]
    FewerThanTwoSets,
    #[error(transparent)]
    Lattice(#[from] LatticeError),
    #[error(transparent)]
    MvSet(#[from] MvSetError),
}

/// Which mean to take of two assessment sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeanKind {
    /// Joins of pairwise meets.
    Pessimistic,
    /// Meets of pairwise joins.
    Optimistic,
}

impl fmt::Display for MeanKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MeanKind::Pessimistic => "pessimistic",
            MeanKind::Optimistic => "optimistic",
        })
    }
}

/// A non-empty, deduplicated set of lattice elements.
#[derive(Debug, Clone)]
pub struct AssessmentSet {
    carrier: Arc<Lattice>,
    elems: BTreeSet<Elem>,
}

impl PartialEq for AssessmentSet {
    fn eq(&self, other: &Self) -> bool {
        self.carrier.id() == other.carrier.id() && self.elems == other.elems
    }
}

impl Eq for AssessmentSet {}

impl AssessmentSet {
    pub fn new(
        carrier: Arc<Lattice>,
        elems: impl IntoIterator<Item = Elem>,
    ) -> Result<Self, AggregationError> {
        let mut set = BTreeSet::new();
        for e in elems {
            carrier.label(e)?;
            set.insert(e);
        }
        if set.is_empty() {
            return Err(AggregationError::EmptySet);
        }
        Ok(Self {
            carrier,
            elems: set,
        })
    }

    pub fn carrier(&self) -> &Arc<Lattice> {
        &self.carrier
    }

    /// Elements in id order.
    pub fn elems(&self) -> Vec<Elem> {
        self.elems.iter().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        false // construction rejects empty sets
    }

    pub fn contains(&self, e: Elem) -> bool {
        self.elems.contains(&e)
    }

    fn same_carrier(&self, other: &AssessmentSet) -> Result<(), AggregationError> {
        if self.carrier.id() != other.carrier.id() {
            return Err(AggregationError::MismatchedCarriers);
        }
        Ok(())
    }

    /// Sorted labels, for display and tests.
    pub fn labels(&self) -> Vec<String> {
        self.elems
            .iter()
            .map(|&e| self.carrier.label(e).unwrap_or("?").to_string())
            .collect()
    }
}

impl fmt::Display for AssessmentSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, e) in self.elems.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            f.write_str(self.carrier.label(*e).unwrap_or("?"))?;
        }
        write!(f, "}}")
    }
}

/// Difference measure: `{ /\_{a in A} (b \ a) : b in B }` united with the
/// symmetric family, where `\` reads elements as sets of atoms.
pub fn difference(
    a: &AssessmentSet,
    b: &AssessmentSet,
) -> Result<AssessmentSet, AggregationError> {
    a.same_carrier(b)?;
    let l = a.carrier();
    let mut out = BTreeSet::new();
    for (xs, ys) in [(a, b), (b, a)] {
        for &y in &ys.elems {
            let mut acc: Option<Elem> = None;
            for &x in &xs.elems {
                let d = l.set_difference(y, x)?;
                acc = Some(match acc {
                    None => d,
                    Some(cur) => l.meet(cur, d)?,
                });
            }
            out.insert(acc.expect("assessment sets are non-empty"));
        }
    }
    Ok(AssessmentSet {
        carrier: l.clone(),
        elems: out,
    })
}

/// Pairwise mean of two sets: for each element of one set, fold the other
/// set through meet-then-join (pessimistic) or join-then-meet (optimistic).
pub fn mean(
    kind: MeanKind,
    a: &AssessmentSet,
    b: &AssessmentSet,
) -> Result<AssessmentSet, AggregationError> {
    a.same_carrier(b)?;
    let l = a.carrier();
    let mut out = BTreeSet::new();
    for (xs, ys) in [(a, b), (b, a)] {
        for &y in &ys.elems {
            let mut acc: Option<Elem> = None;
            for &x in &xs.elems {
                let inner = match kind {
                    MeanKind::Pessimistic => l.meet(y, x)?,
                    MeanKind::Optimistic => l.join(y, x)?,
                };
                acc = Some(match acc {
                    None => inner,
                    Some(cur) => match kind {
                        MeanKind::Pessimistic => l.join(cur, inner)?,
                        MeanKind::Optimistic => l.meet(cur, inner)?,
                    },
                });
            }
            out.insert(acc.expect("assessment sets are non-empty"));
        }
    }
    Ok(AssessmentSet {
        carrier: l.clone(),
        elems: out,
    })
}

/// Union of the pairwise means over all unordered pairs of distinct inputs.
pub fn nary_mean(
    kind: MeanKind,
    sets: &[AssessmentSet],
) -> Result<AssessmentSet, AggregationError> {
    if sets.len() < 2 {
        return Err(AggregationError::FewerThanTwoSets);
    }
    let mut out: Option<AssessmentSet> = None;
    for i in 0..sets.len() {
        for j in i + 1..sets.len() {
            let pair = mean(kind, &sets[i], &sets[j])?;
            out = Some(match out {
                None => pair,
                Some(mut cur) => {
                    cur.same_carrier(&pair)?;
                    cur.elems.extend(pair.elems);
                    cur
                }
            });
        }
    }
    Ok(out.expect("at least one pair"))
}

/// How tuples are drawn when computing a mean confidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PreimageMode {
    /// Tuples come from the supplied supports only (the default).
    SupportOnly,
    /// Tuples range over the whole carrier, with absent elements at bottom
    /// confidence; brute-force oracle for small lattices.
    FullPreimage,
}

/// Confidence of `target` as an aggregated value of the inputs: the join,
/// over all tuples whose mean set contains `target`, of the mean applied to
/// the tuple's confidences in the scale (a set in the scale, collapsed by
/// join). Bottom when no tuple reaches the target.
pub fn mean_confidence(
    kind: MeanKind,
    inputs: &[MvSet],
    target: Elem,
    mode: PreimageMode,
) -> Result<Elem, AggregationError> {
    if inputs.len() < 2 {
        return Err(AggregationError::FewerThanTwoSets);
    }
    let carrier = inputs[0].carrier().clone();
    let scale = inputs[0].scale().clone();
    for other in &inputs[1..] {
        if other.carrier().id() != carrier.id() || other.scale().id() != scale.id() {
            return Err(AggregationError::MismatchedScales);
        }
    }
    carrier.label(target)?;

    let domains: Vec<Vec<Elem>> = match mode {
        PreimageMode::SupportOnly => inputs.iter().map(|s| s.support()).collect(),
        PreimageMode::FullPreimage => inputs
            .iter()
            .map(|_| carrier.elements().collect())
            .collect(),
    };
    if domains.iter().any(|d| d.is_empty()) {
        return Ok(scale.bottom());
    }

    let mut acc = scale.bottom();
    let mut odometer = vec![0usize; domains.len()];
    loop {
        let tuple: Vec<Elem> = odometer
            .iter()
            .enumerate()
            .map(|(k, &i)| domains[k][i])
            .collect();
        if tuple_mean_contains(kind, &carrier, &tuple, target)? {
            let confs: Vec<Elem> = tuple
                .iter()
                .zip(inputs)
                .map(|(&x, s)| s.confidence(x))
                .collect::<Result<_, _>>()?;
            let mean_set = tuple_mean(kind, &scale, &confs)?;
            for m in mean_set {
                acc = scale.join(acc, m)?;
            }
        }
        let mut pos = domains.len();
        loop {
            if pos == 0 {
                return Ok(acc);
            }
            pos -= 1;
            odometer[pos] += 1;
            if odometer[pos] < domains[pos].len() {
                break;
            }
            odometer[pos] = 0;
        }
    }
}

/// The n-ary mean of a tuple read as singleton sets: all pairwise means,
/// united. For a pair this is `{a /\ b}` or `{a \/ b}`.
fn tuple_mean(
    kind: MeanKind,
    l: &Arc<Lattice>,
    tuple: &[Elem],
) -> Result<BTreeSet<Elem>, AggregationError> {
    let mut out = BTreeSet::new();
    for i in 0..tuple.len() {
        for j in i + 1..tuple.len() {
            let v = match kind {
                MeanKind::Pessimistic => l.meet(tuple[i], tuple[j])?,
                MeanKind::Optimistic => l.join(tuple[i], tuple[j])?,
            };
            out.insert(v);
        }
    }
    Ok(out)
}

fn tuple_mean_contains(
    kind: MeanKind,
    l: &Arc<Lattice>,
    tuple: &[Elem],
    target: Elem,
) -> Result<bool, AggregationError> {
    for i in 0..tuple.len() {
        for j in i + 1..tuple.len() {
            let v = match kind {
                MeanKind::Pessimistic => l.meet(tuple[i], tuple[j])?,
                MeanKind::Optimistic => l.join(tuple[i], tuple[j])?,
            };
            if v == target {
                return Ok(true);
            }
        }
    }
    Ok(false)
}
