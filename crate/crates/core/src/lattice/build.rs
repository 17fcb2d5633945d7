//! Lattice construction and eager validation.

use std::collections::BTreeMap;
use std::sync::Arc;

use super::{AtomRepr, Lattice, LatticeError, LatticeId, Monoid, ReprFailure};

/// Default cap on lattice size; validation is cubic in the element count.
pub const DEFAULT_MAX_ELEMENTS: usize = 256;

/// Monoid multiplication supplied to the builder.
#[derive(Debug, Clone)]
pub enum MultSpec {
    /// Use the lattice meet as multiplication (unit = top).
    Meet,
    /// Explicit total table: `(lhs, rhs, result)` for every pair of labels.
    Table {
        unit: String,
        entries: Vec<(String, String, String)>,
    },
}

/// Builds a validated [`Lattice`] from labels and covering pairs.
pub struct LatticeBuilder {
    name: String,
    elements: Vec<String>,
    covers: Vec<(String, String)>,
    mult: Option<MultSpec>,
    max_elements: usize,
    skip_exhaustive: bool,
}

impl LatticeBuilder {
    pub fn new(name: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            elements: Vec::new(),
            covers: Vec::new(),
            mult: None,
            max_elements: DEFAULT_MAX_ELEMENTS,
            skip_exhaustive: false,
        }
    }

    /// Declares elements; declaration order assigns ids.
    pub fn elements<I, S>(mut self, labels: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.elements.extend(labels.into_iter().map(Into::into));
        self
    }

    pub fn cover(mut self, lower: impl Into<String>, upper: impl Into<String>) -> Self {
        self.covers.push((lower.into(), upper.into()));
        self
    }

    pub fn covers<I, S, T>(mut self, pairs: I) -> Self
    where
        I: IntoIterator<Item = (S, T)>,
        S: Into<String>,
        T: Into<String>,
    {
        self.covers
            .extend(pairs.into_iter().map(|(a, b)| (a.into(), b.into())));
        self
    }

    pub fn mult(mut self, spec: MultSpec) -> Self {
        self.mult = Some(spec);
        self
    }

    pub fn max_elements(mut self, cap: usize) -> Self {
        self.max_elements = cap;
        self
    }

    /// Skips the cubic monoid-law and distributivity sweeps. The
    /// distributivity flag is then derived from implication totality, which
    /// is equivalent for finite lattices.
    pub fn skip_exhaustive(mut self, skip: bool) -> Self {
        self.skip_exhaustive = skip;
        self
    }

    pub fn build(self) -> Result<Arc<Lattice>, LatticeError> {
        let n = self.elements.len();
        if n == 0 {
            return Err(LatticeError::NotALattice(
                "a lattice needs at least one element".to_string(),
            ));
        }
        if n > self.max_elements {
            return Err(LatticeError::TooLarge {
                name: self.name.clone(),
                size: n,
                cap: self.max_elements,
            });
        }

        let mut by_label = BTreeMap::new();
        for (i, label) in self.elements.iter().enumerate() {
            if by_label.insert(label.clone(), i as u32).is_some() {
                return Err(LatticeError::DuplicateLabel(label.clone()));
            }
        }
        let resolve = |label: &str| -> Result<usize, LatticeError> {
            by_label
                .get(label)
                .map(|&i| i as usize)
                .ok_or_else(|| LatticeError::UnknownLabel(label.to_string()))
        };

        // Reflexive-transitive closure of the declared covers.
        let mut leq = vec![false; n * n];
        for i in 0..n {
            leq[i * n + i] = true;
        }
        for (lo, hi) in &self.covers {
            let (lo, hi) = (resolve(lo)?, resolve(hi)?);
            leq[lo * n + hi] = true;
        }
        for k in 0..n {
            for i in 0..n {
                if leq[i * n + k] {
                    for j in 0..n {
                        if leq[k * n + j] {
                            leq[i * n + j] = true;
                        }
                    }
                }
            }
        }
        for i in 0..n {
            for j in 0..n {
                if i != j && leq[i * n + j] && leq[j * n + i] {
                    return Err(LatticeError::CycleInOrder(self.elements[i].clone()));
                }
            }
        }

        let core = OrderCore {
            labels: &self.elements,
            n,
            leq: &leq,
        };
        let (join_m, meet_m) = core.bound_tables()?;
        let tables = Tables {
            core,
            join_m: &join_m,
            meet_m: &meet_m,
        };

        let bottom_ix = (0..n).fold(0, |acc, i| tables.meet(acc, i));
        let top_ix = (0..n).fold(0, |acc, i| tables.join(acc, i));

        // Canonical covering pairs recomputed from the closed order.
        let mut covers = Vec::new();
        for a in 0..n {
            for b in 0..n {
                if a != b
                    && tables.leq(a, b)
                    && !(0..n).any(|c| c != a && c != b && tables.leq(a, c) && tables.leq(c, b))
                {
                    covers.push((a as u32, b as u32));
                }
            }
        }
        let atoms_ix: Vec<u32> = covers
            .iter()
            .filter(|&&(lo, _)| lo as usize == bottom_ix)
            .map(|&(_, hi)| hi)
            .collect();

        // Implication table: for each (a, b) the greatest c with a/\c <= a/\b.
        // The candidate set is downward closed, so the fold-join is the
        // greatest element iff it is itself a candidate.
        let mut implies_m = Some(vec![0u32; n * n]);
        'imp: for a in 0..n {
            for b in 0..n {
                let target = tables.meet(a, b);
                let mut m = bottom_ix;
                for c in 0..n {
                    if tables.leq(tables.meet(a, c), target) {
                        m = tables.join(m, c);
                    }
                }
                if tables.leq(tables.meet(a, m), target) {
                    if let Some(t) = implies_m.as_mut() {
                        t[a * n + b] = m as u32;
                    }
                } else {
                    implies_m = None;
                    break 'imp;
                }
            }
        }

        let distributive = if self.skip_exhaustive {
            implies_m.is_some()
        } else {
            let brute = tables.distributive_brute();
            debug_assert_eq!(brute, implies_m.is_some());
            brute
        };
        if !distributive {
            implies_m = None;
        }

        let generators_ix = tables.generators(bottom_ix);
        let atomic = generators_ix.iter().enumerate().all(|(i, &g)| {
            generators_ix[..i]
                .iter()
                .all(|&h| tables.meet(g as usize, h as usize) == bottom_ix)
        });
        let atomistic = (0..n).all(|e| {
            let joined = atoms_ix
                .iter()
                .filter(|&&a| tables.leq(a as usize, e))
                .fold(bottom_ix, |acc, &a| tables.join(acc, a as usize));
            joined == e
        });

        let (repr, repr_failure) =
            tables.atom_repr(distributive, atomistic, &atoms_ix, bottom_ix);

        let monoid = match &self.mult {
            None => None,
            Some(spec) => Some(tables.monoid(
                spec,
                &resolve,
                top_ix,
                bottom_ix,
                self.skip_exhaustive,
            )?),
        };

        Ok(Arc::new(Lattice {
            id: LatticeId::fresh(),
            name: self.name,
            labels: self.elements,
            by_label,
            n,
            leq_m: leq,
            join_m,
            meet_m,
            top_ix: top_ix as u32,
            bottom_ix: bottom_ix as u32,
            covers,
            atoms_ix,
            generators_ix,
            distributive,
            implies_m,
            atomic,
            atomistic,
            repr,
            repr_failure,
            monoid,
        }))
    }
}

struct OrderCore<'a> {
    labels: &'a [String],
    n: usize,
    leq: &'a [bool],
}

impl OrderCore<'_> {
    /// Computes total join/meet tables, failing if some pair lacks a unique
    /// least upper bound or greatest lower bound.
    fn bound_tables(&self) -> Result<(Vec<u32>, Vec<u32>), LatticeError> {
        let n = self.n;
        let mut join_m = vec![0u32; n * n];
        let mut meet_m = vec![0u32; n * n];
        for a in 0..n {
            for b in a..n {
                let lub = self.extremum(a, b, true)?;
                let glb = self.extremum(a, b, false)?;
                join_m[a * n + b] = lub as u32;
                join_m[b * n + a] = lub as u32;
                meet_m[a * n + b] = glb as u32;
                meet_m[b * n + a] = glb as u32;
            }
        }
        Ok((join_m, meet_m))
    }

    /// Least upper bound (`upper = true`) or greatest lower bound of a pair.
    fn extremum(&self, a: usize, b: usize, upper: bool) -> Result<usize, LatticeError> {
        let n = self.n;
        let bound = |c: usize| {
            if upper {
                self.leq[a * n + c] && self.leq[b * n + c]
            } else {
                self.leq[c * n + a] && self.leq[c * n + b]
            }
        };
        let mut best: Option<usize> = None;
        for c in (0..n).filter(|&c| bound(c)) {
            best = Some(match best {
                None => c,
                Some(cur) => {
                    let better = if upper {
                        self.leq[c * n + cur]
                    } else {
                        self.leq[cur * n + c]
                    };
                    if better {
                        c
                    } else {
                        cur
                    }
                }
            });
        }
        let best = best.ok_or_else(|| {
            LatticeError::NotALattice(format!(
                "elements `{}` and `{}` have no common {} bound",
                self.labels[a],
                self.labels[b],
                if upper { "upper" } else { "lower" }
            ))
        })?;
        for c in (0..n).filter(|&c| bound(c)) {
            let ok = if upper {
                self.leq[best * n + c]
            } else {
                self.leq[c * n + best]
            };
            if !ok {
                return Err(LatticeError::NotALattice(format!(
                    "elements `{}` and `{}` have no unique {} bound",
                    self.labels[a],
                    self.labels[b],
                    if upper { "least upper" } else { "greatest lower" }
                )));
            }
        }
        Ok(best)
    }
}

struct Tables<'a> {
    core: OrderCore<'a>,
    join_m: &'a [u32],
    meet_m: &'a [u32],
}

impl Tables<'_> {
    fn leq(&self, a: usize, b: usize) -> bool {
        self.core.leq[a * self.core.n + b]
    }

    fn join(&self, a: usize, b: usize) -> usize {
        self.join_m[a * self.core.n + b] as usize
    }

    fn meet(&self, a: usize, b: usize) -> usize {
        self.meet_m[a * self.core.n + b] as usize
    }

    fn label(&self, i: usize) -> &str {
        &self.core.labels[i]
    }

    fn distributive_brute(&self) -> bool {
        let n = self.core.n;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if self.meet(a, self.join(b, c)) != self.join(self.meet(a, b), self.meet(a, c))
                    {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Join/meet closure of a seed set; bottom is always included.
    fn closure(&self, seed: &[usize], bottom: usize) -> Vec<bool> {
        let n = self.core.n;
        let mut present = vec![false; n];
        let mut members: Vec<usize> = Vec::new();
        let mut queue: Vec<usize> = Vec::new();
        for &s in std::iter::once(&bottom).chain(seed) {
            if !present[s] {
                present[s] = true;
                members.push(s);
                queue.push(s);
            }
        }
        while let Some(x) = queue.pop() {
            for i in 0..members.len() {
                let y = members[i];
                for z in [self.join(x, y), self.meet(x, y)] {
                    if !present[z] {
                        present[z] = true;
                        members.push(z);
                        queue.push(z);
                    }
                }
            }
        }
        present
    }

    /// Greedy minimal generating set: drop candidates highest-id first when
    /// expressible from the rest (bottom is the empty join and always free).
    fn generators(&self, bottom: usize) -> Vec<u32> {
        let n = self.core.n;
        let mut gens: Vec<usize> = (0..n).filter(|&i| i != bottom).collect();
        for cand in (0..n).rev() {
            if cand == bottom || !gens.contains(&cand) {
                continue;
            }
            let seed: Vec<usize> = gens.iter().copied().filter(|&g| g != cand).collect();
            if self.closure(&seed, bottom)[cand] {
                gens.retain(|&g| g != cand);
            }
        }
        gens.into_iter().map(|g| g as u32).collect()
    }

    fn atom_repr(
        &self,
        distributive: bool,
        atomistic: bool,
        atoms_ix: &[u32],
        bottom: usize,
    ) -> (Option<AtomRepr>, Option<ReprFailure>) {
        let n = self.core.n;
        if !distributive {
            return (
                None,
                Some(ReprFailure::NotRepresentable(
                    "lattice is not distributive".to_string(),
                )),
            );
        }
        if !atomistic {
            return (
                None,
                Some(ReprFailure::NotRepresentable(
                    "some element is not the join of its atoms (atom-set map not injective)"
                        .to_string(),
                )),
            );
        }
        if atoms_ix.len() > 64 {
            return (
                None,
                Some(ReprFailure::NotRepresentable(format!(
                    "{} atoms exceed the representation limit",
                    atoms_ix.len()
                ))),
            );
        }
        let mut masks = vec![0u64; n];
        let mut by_mask = BTreeMap::new();
        for e in 0..n {
            let mut mask = 0u64;
            for (k, &a) in atoms_ix.iter().enumerate() {
                if self.leq(a as usize, e) {
                    mask |= 1 << k;
                }
            }
            if by_mask.insert(mask, e).is_some() {
                return (
                    None,
                    Some(ReprFailure::NotRepresentable(format!(
                        "elements share the atom set of `{}`",
                        self.label(e)
                    ))),
                );
            }
            masks[e] = mask;
        }
        let mut ring_m = vec![0u32; n * n];
        let mut diff_m = vec![0u32; n * n];
        for a in 0..n {
            for b in 0..n {
                let sum = masks[a] ^ masks[b];
                let diff = masks[a] & !masks[b];
                match (by_mask.get(&sum), by_mask.get(&diff)) {
                    (Some(&s), Some(&d)) => {
                        ring_m[a * n + b] = s as u32;
                        diff_m[a * n + b] = d as u32;
                    }
                    _ => {
                        return (
                            None,
                            Some(ReprFailure::SumMissing(format!(
                                "no element carries the atom set of `{}` (+) `{}`",
                                self.label(a),
                                self.label(b)
                            ))),
                        );
                    }
                }
            }
        }
        let _ = bottom;
        (
            Some(AtomRepr {
                masks,
                ring_m,
                diff_m,
            }),
            None,
        )
    }

    fn monoid(
        &self,
        spec: &MultSpec,
        resolve: &dyn Fn(&str) -> Result<usize, LatticeError>,
        top: usize,
        bottom: usize,
        skip_exhaustive: bool,
    ) -> Result<Monoid, LatticeError> {
        let n = self.core.n;
        let (mult_m, unit_ix) = match spec {
            MultSpec::Meet => (self.meet_m.to_vec(), top),
            MultSpec::Table { unit, entries } => {
                let unit_ix = resolve(unit)?;
                let mut table = vec![u32::MAX; n * n];
                for (a, b, r) in entries {
                    let (a, b, r) = (resolve(a)?, resolve(b)?, resolve(r)?);
                    if table[a * n + b] != u32::MAX {
                        return Err(LatticeError::BadMonoid(format!(
                            "duplicate table entry for `{}` * `{}`",
                            self.label(a),
                            self.label(b)
                        )));
                    }
                    table[a * n + b] = r as u32;
                }
                if let Some(pos) = table.iter().position(|&v| v == u32::MAX) {
                    return Err(LatticeError::BadMonoid(format!(
                        "missing table entry for `{}` * `{}`",
                        self.label(pos / n),
                        self.label(pos % n)
                    )));
                }
                (table, unit_ix)
            }
        };
        let mul = |a: usize, b: usize| mult_m[a * n + b] as usize;

        for x in 0..n {
            if mul(unit_ix, x) != x || mul(x, unit_ix) != x {
                return Err(LatticeError::BadMonoid(format!(
                    "`{}` is not a unit at `{}`",
                    self.label(unit_ix),
                    self.label(x)
                )));
            }
            if mul(x, bottom) != bottom || mul(bottom, x) != bottom {
                return Err(LatticeError::BadMonoid(format!(
                    "bottom does not annihilate at `{}`",
                    self.label(x)
                )));
            }
        }
        if !skip_exhaustive {
            for a in 0..n {
                for b in 0..n {
                    for c in 0..n {
                        if mul(mul(a, b), c) != mul(a, mul(b, c)) {
                            return Err(LatticeError::BadMonoid(format!(
                                "associativity fails at `{}`, `{}`, `{}`",
                                self.label(a),
                                self.label(b),
                                self.label(c)
                            )));
                        }
                        let jbc = self.join(b, c);
                        if mul(a, jbc) != self.join(mul(a, b), mul(a, c))
                            || mul(jbc, a) != self.join(mul(b, a), mul(c, a))
                        {
                            return Err(LatticeError::BadMonoid(format!(
                                "multiplication does not distribute over join at `{}`, `{}`, `{}`",
                                self.label(a),
                                self.label(b),
                                self.label(c)
                            )));
                        }
                    }
                }
            }
        }

        // Residual tables: max{y : a*y <= b} exists iff the fold-join of the
        // (downward-closed, by distributivity over join) candidate set is
        // itself a candidate.
        let mut right = vec![0u32; n * n];
        let mut left = vec![0u32; n * n];
        let mut residuals_err = None;
        'res: for a in 0..n {
            for b in 0..n {
                let mut ry = bottom;
                let mut lx = bottom;
                for c in 0..n {
                    if self.leq(mul(a, c), b) {
                        ry = self.join(ry, c);
                    }
                    if self.leq(mul(c, a), b) {
                        lx = self.join(lx, c);
                    }
                }
                if !self.leq(mul(a, ry), b) || !self.leq(mul(lx, a), b) {
                    residuals_err = Some(format!(
                        "no greatest residual for `{}` and `{}`",
                        self.label(a),
                        self.label(b)
                    ));
                    break 'res;
                }
                right[a * n + b] = ry as u32;
                left[a * n + b] = lx as u32;
            }
        }
        let residuals = if residuals_err.is_none() {
            Some((right, left))
        } else {
            None
        };

        if let (Some((right, left)), false) = (&residuals, skip_exhaustive) {
            for x in 0..n {
                for y in 0..n {
                    for z in 0..n {
                        let prod = self.leq(mul(x, y), z);
                        let viaright = self.leq(y, right[x * n + z] as usize);
                        let vialeft = self.leq(x, left[y * n + z] as usize);
                        if prod != viaright || prod != vialeft {
                            return Err(LatticeError::BadMonoid(format!(
                                "residuation law fails at `{}`, `{}`, `{}`",
                                self.label(x),
                                self.label(y),
                                self.label(z)
                            )));
                        }
                    }
                }
            }
        }

        let integrally_closed = residuals.as_ref().is_some_and(|(right, left)| {
            (0..n).all(|x| {
                right[x * n + x] as usize == unit_ix && left[x * n + x] as usize == unit_ix
            })
        });
        let integral = (0..n).all(|x| self.leq(x, unit_ix));

        Ok(Monoid {
            mult_m,
            unit_ix: unit_ix as u32,
            residuals,
            residuals_err,
            integrally_closed,
            integral,
        })
    }
}

/// Componentwise product of two lattices.
///
/// Element ids are assigned in height order (atoms first). Labels follow the
/// scheme `first ++ second`, with the second component elided at its bottom;
/// if that produces collisions, every element falls back to `first:second`.
pub fn product(
    name: impl Into<String>,
    a: &Lattice,
    b: &Lattice,
    max_elements: usize,
) -> Result<Arc<Lattice>, LatticeError> {
    let name = name.into();
    let size = a.len() * b.len();
    if size > max_elements {
        return Err(LatticeError::TooLarge {
            name,
            size,
            cap: max_elements,
        });
    }
    let (ha, hb) = (a.heights(), b.heights());
    let mut pairs: Vec<(usize, usize)> = (0..a.len())
        .flat_map(|i| (0..b.len()).map(move |j| (i, j)))
        .collect();
    pairs.sort_by_key(|&(i, j)| (ha[i] + hb[j], i, j));

    let elide = |i: usize, j: usize| {
        let mut label = a.labels[i].clone();
        if j != b.bottom_ix as usize {
            label.push_str(&b.labels[j]);
        }
        label
    };
    let mut labels: Vec<String> = pairs.iter().map(|&(i, j)| elide(i, j)).collect();
    let mut seen = BTreeMap::new();
    let collision = labels.iter().enumerate().any(|(k, l)| {
        seen.insert(l.clone(), k).is_some()
    });
    if collision {
        labels = pairs
            .iter()
            .map(|&(i, j)| format!("{}:{}", a.labels[i], b.labels[j]))
            .collect();
    }

    let index_of: BTreeMap<(usize, usize), usize> = pairs
        .iter()
        .enumerate()
        .map(|(k, &p)| (p, k))
        .collect();
    let mut covers = Vec::new();
    for (k, &(i, j)) in pairs.iter().enumerate() {
        for &(lo, hi) in &a.covers {
            if hi as usize == i {
                covers.push((labels[index_of[&(lo as usize, j)]].clone(), labels[k].clone()));
            }
        }
        for &(lo, hi) in &b.covers {
            if hi as usize == j {
                covers.push((labels[index_of[&(i, lo as usize)]].clone(), labels[k].clone()));
            }
        }
    }

    let mut builder = LatticeBuilder::new(name)
        .elements(labels.clone())
        .covers(covers)
        .max_elements(max_elements);
    if let (Some(ma), Some(mb)) = (&a.monoid, &b.monoid) {
        let unit = labels[index_of[&(ma.unit_ix as usize, mb.unit_ix as usize)]].clone();
        let mut entries = Vec::with_capacity(size * size);
        for (k1, &(i1, j1)) in pairs.iter().enumerate() {
            for (k2, &(i2, j2)) in pairs.iter().enumerate() {
                let ri = ma.mult_m[i1 * a.len() + i2] as usize;
                let rj = mb.mult_m[j1 * b.len() + j2] as usize;
                entries.push((
                    labels[k1].clone(),
                    labels[k2].clone(),
                    labels[index_of[&(ri, rj)]].clone(),
                ));
            }
        }
        builder = builder.mult(MultSpec::Table { unit, entries });
    }
    builder.build()
}
