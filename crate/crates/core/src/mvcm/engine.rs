//! The iteration engine: the update rule, convergence coefficients, cycle
//! handling, and the run driver with its weight modes.

use std::sync::Arc;

use crate::aggregation::{mean_confidence, nary_mean, AssessmentSet, MeanKind, PreimageMode};
use crate::lattice::{Elem, Lattice};
use crate::mvset::{extend, MvSet};
use crate::term::{Term, TermDef};

use super::{
    BranchResult, Coeffs, Combine, MapSpec, MapState, MvcmError, RunConfig, RunOutcome, RunStatus,
    TraceTable, WeightMatrix, WeightMode,
};

fn combine_fold(combine: Combine, terms: Vec<Term>) -> Term {
    let mut it = terms.into_iter();
    let first = it.next().expect("at least one term");
    it.fold(first, |acc, t| match combine {
        Combine::Join => Term::join(acc, t),
        Combine::Sum => Term::ring_sum(acc, t),
    })
}

/// Term variables and arguments for the combined influence on concept `to`:
/// the fold of `w_j /\ A_j` over sources with a non-empty weight cell, or a
/// synthetic bottom when nothing flows in.
fn influence(
    spec: &MapSpec,
    matrix: &WeightMatrix,
    values: &[MvSet],
    to: usize,
    combine: Combine,
    params: &mut Vec<String>,
    args: &mut Vec<MvSet>,
) -> Result<Term, MvcmError> {
    let n = spec.len();
    let sources: Vec<usize> = (0..n)
        .filter(|&j| !matrix.cell(j, to, n).is_empty())
        .collect();
    if sources.is_empty() {
        params.push("z".to_string());
        args.push(MvSet::singleton(
            spec.carrier().clone(),
            spec.scale().clone(),
            spec.carrier().bottom(),
            spec.scale().top(),
        )?);
        return Ok(Term::var("z"));
    }
    let mut terms = Vec::with_capacity(sources.len());
    for j in sources {
        params.push(format!("w{j}"));
        args.push(matrix.cell(j, to, n).clone());
        params.push(format!("a{j}"));
        args.push(values[j].clone());
        terms.push(Term::meet(
            Term::var(format!("w{j}")),
            Term::var(format!("a{j}")),
        ));
    }
    Ok(combine_fold(combine, terms))
}

/// Joins the support of a coefficient set into one element; top when the
/// set is empty (a dead concept constrains nothing).
fn crisp(carrier: &Arc<Lattice>, set: &MvSet) -> Result<Elem, MvcmError> {
    let mut acc: Option<Elem> = None;
    for (v, _) in set.entries() {
        acc = Some(match acc {
            None => v,
            Some(cur) => carrier.join(cur, v)?,
        });
    }
    Ok(acc.unwrap_or_else(|| carrier.top()))
}

enum CoeffTarget {
    /// `f`: implication into the join of consecutive values.
    Join,
    /// `r`: implication into the meet of consecutive values.
    Meet,
}

/// One convergence coefficient of concept `i`, computed through the
/// extension principle from the new and previous multi-valued values, then
/// collapsed to a single element by joining the result's support.
fn coefficient(
    spec: &MapSpec,
    matrix: &WeightMatrix,
    prev: &MapState,
    new_values: &[MvSet],
    combine: Combine,
    i: usize,
    target: CoeffTarget,
) -> Result<Elem, MvcmError> {
    let mut params = Vec::new();
    let mut args = Vec::new();
    let inf = influence(spec, matrix, new_values, i, combine, &mut params, &mut args)?;
    let ai = format!("a{i}");
    if !params.contains(&ai) {
        params.push(ai.clone());
        args.push(new_values[i].clone());
    }
    params.push("p".to_string());
    args.push(prev.values[i].clone());
    let consequent = match target {
        CoeffTarget::Join => Term::join(Term::var(&ai), Term::var("p")),
        CoeffTarget::Meet => Term::meet(Term::var(&ai), Term::var("p")),
    };
    let def = TermDef::new(
        format!("coeff-{}", spec.concept(i)),
        params,
        Term::implies(inf, consequent),
    )?;
    let out = extend(&def, &args)?;
    crisp(spec.carrier(), &out)
}

/// One iteration of the map under one weight matrix.
///
/// Each concept's new value is `c /\ f /\ COMBINE_j (w_ji /\ A_j)` pushed
/// through the extension principle, so supports and confidences propagate
/// together. Coefficients `f` and `r` are then recomputed from the new
/// values; `c` stays at top until `looped` is set, after which it takes the
/// corrective lower bound `f => r`.
pub fn step(
    spec: &MapSpec,
    state: &MapState,
    combine: Combine,
    matrix_choice: usize,
    looped: bool,
) -> Result<MapState, MvcmError> {
    let matrix = spec.matrix(matrix_choice)?;
    let carrier = spec.carrier();
    let scale = spec.scale();
    let n = spec.len();

    let mut new_values = Vec::with_capacity(n);
    for i in 0..n {
        let mut params = vec!["c".to_string(), "f".to_string()];
        let mut args = vec![
            MvSet::singleton(
                carrier.clone(),
                scale.clone(),
                state.coeffs[i].c,
                scale.top(),
            )?,
            MvSet::singleton(
                carrier.clone(),
                scale.clone(),
                state.coeffs[i].f,
                scale.top(),
            )?,
        ];
        let inf = influence(spec, matrix, &state.values, i, combine, &mut params, &mut args)?;
        let body = Term::meet(Term::var("c"), Term::meet(Term::var("f"), inf));
        let def = TermDef::new(format!("update-{}", spec.concept(i)), params, body)?;
        new_values.push(extend(&def, &args)?);
    }

    let mut coeffs = Vec::with_capacity(n);
    for i in 0..n {
        let f = coefficient(
            spec,
            matrix,
            state,
            &new_values,
            combine,
            i,
            CoeffTarget::Join,
        )?;
        let r = coefficient(
            spec,
            matrix,
            state,
            &new_values,
            combine,
            i,
            CoeffTarget::Meet,
        )?;
        let c = if looped {
            carrier.heyting_implies(f, r)?
        } else {
            carrier.top()
        };
        coeffs.push(Coeffs { f, r, c });
    }

    Ok(MapState {
        k: state.k + 1,
        values: new_values,
        coeffs,
    })
}

/// First recurrence of a full state in an append-only history: the distance
/// back to the earlier occurrence of the latest state (1 = fixed point).
pub fn detect_cycle(history: &[MapState]) -> Option<usize> {
    let last = history.last()?;
    history[..history.len() - 1]
        .iter()
        .rposition(|s| s == last)
        .map(|i| history.len() - 1 - i)
}

struct Branch {
    id: String,
    state: MapState,
    history: Vec<MapState>,
    looped: bool,
    last_matrix: usize,
    done: bool,
}

fn check_carrier(spec: &MapSpec, config: &RunConfig) -> Result<(), MvcmError> {
    let l = spec.carrier();
    let m = spec.scale();
    let fail = |lat: &Arc<Lattice>, msg: &str| {
        Err(MvcmError::UnsuitableCarrier(
            lat.name().to_string(),
            msg.to_string(),
        ))
    };
    if !l.is_brouwer() {
        return fail(l, "coefficients need an internal implication (Brouwer lattice)");
    }
    if !l.is_residuated() {
        return fail(l, "the convergence theorem needs a residuated lattice (add a multiplication)");
    }
    if !l.is_integrally_closed()? {
        return fail(l, "the convergence theorem needs an integrally closed lattice");
    }
    if !l.is_atomic() {
        return fail(l, "the convergence theorem needs an atomic lattice");
    }
    if !(m.is_brouwer() || m.is_residuated()) {
        return fail(m, "confidence propagation of coefficients needs implication in the scale");
    }
    if config.combine == Combine::Sum {
        if !l.has_atom_repr() {
            return fail(l, "ring-sum combination needs an atom representation");
        }
        if !m.has_atom_repr() {
            return fail(m, "ring-sum combination propagates confidences with the ring sum, so the scale needs an atom representation too");
        }
    }
    Ok(())
}

/// Replaces each weight cell by the mean of its per-matrix value sets, with
/// confidences assigned by the mean-confidence rule. An absent influence
/// reads as bottom held with full confidence. With a single matrix the
/// aggregation is the identity.
fn aggregated_matrix(spec: &MapSpec, kind: MeanKind) -> Result<WeightMatrix, MvcmError> {
    let n = spec.len();
    let carrier = spec.carrier();
    let scale = spec.scale();
    let name = format!("{kind}-mean");
    if spec.matrices().len() == 1 {
        return Ok(WeightMatrix::new(name, spec.matrices()[0].cells.clone()));
    }
    let mut cells = Vec::with_capacity(n * n);
    for from in 0..n {
        for to in 0..n {
            let normalized: Vec<MvSet> = spec
                .matrices()
                .iter()
                .map(|m| {
                    let cell = m.cell(from, to, n);
                    if cell.is_empty() {
                        MvSet::singleton(
                            carrier.clone(),
                            scale.clone(),
                            carrier.bottom(),
                            scale.top(),
                        )
                    } else {
                        Ok(cell.clone())
                    }
                })
                .collect::<Result<_, _>>()?;
            let value_sets: Vec<AssessmentSet> = normalized
                .iter()
                .map(|s| AssessmentSet::new(carrier.clone(), s.support()))
                .collect::<Result<_, _>>()?;
            let mean_values = nary_mean(kind, &value_sets)?;
            let mut pairs = Vec::new();
            for v in mean_values.elems() {
                // a mean value of bottom is "no influence"; keep cells in the
                // same canonical form MapSpec::new enforces
                if v == carrier.bottom() {
                    continue;
                }
                let conf = mean_confidence(kind, &normalized, v, PreimageMode::SupportOnly)?;
                pairs.push((v, conf));
            }
            cells.push(MvSet::new(carrier.clone(), scale.clone(), pairs)?);
        }
    }
    Ok(WeightMatrix::new(name, cells))
}

/// Child branch id: matrix numbers are 1-based and concatenated while the
/// tree is forking; past the fork depth the id is stable.
fn child_id(parent: &str, choice: usize, forking: bool) -> String {
    if !forking {
        return parent.to_string();
    }
    let digit = (choice + 1).to_string();
    if parent == "-" {
        digit
    } else {
        format!("{parent}{digit}")
    }
}

/// Runs the map to a fixed point, correcting coefficients on loops, within
/// `config.max_iter` iterations.
pub fn run(spec: &MapSpec, config: &RunConfig) -> Result<RunOutcome, MvcmError> {
    check_carrier(spec, config)?;

    let (effective, enumerate, root_id) = match config.weights {
        WeightMode::Single(idx) => {
            let m = spec.matrix(idx)?;
            (
                spec.with_matrices(vec![m.clone()]),
                false,
                (idx + 1).to_string(),
            )
        }
        WeightMode::Pessimistic => (
            spec.with_matrices(vec![aggregated_matrix(spec, MeanKind::Pessimistic)?]),
            false,
            "pmean".to_string(),
        ),
        WeightMode::Optimistic => (
            spec.with_matrices(vec![aggregated_matrix(spec, MeanKind::Optimistic)?]),
            false,
            "omean".to_string(),
        ),
        WeightMode::Enumerate => (spec.clone(), true, "-".to_string()),
    };
    let matrix_count = effective.matrices().len();
    let merging = enumerate && matrix_count > 1;

    let mut trace = TraceTable::new();
    let initial = MapState::initial(&effective);
    trace.record_state(&effective, &root_id, &initial);

    let mut branches = vec![Branch {
        id: root_id,
        history: vec![initial.clone()],
        state: initial,
        looped: false,
        last_matrix: 0,
        done: false,
    }];

    let mut status = RunStatus::NotConverged {
        max_iter: config.max_iter,
    };
    for k in 1..=config.max_iter {
        let forking = merging && k <= config.fork_depth;
        let mut next: Vec<Branch> = Vec::new();
        for branch in &branches {
            if branch.done {
                continue;
            }
            let choices: Vec<usize> = if forking {
                (0..matrix_count).collect()
            } else {
                vec![branch.last_matrix]
            };
            for choice in choices {
                let mut child_state = step(
                    &effective,
                    &branch.state,
                    config.combine,
                    choice,
                    branch.looped,
                )?;
                let mut looped = branch.looped;
                let done = child_state == branch.state;
                if !done && !looped {
                    let mut probe = branch.history.clone();
                    probe.push(child_state.clone());
                    if detect_cycle(&probe).is_some() {
                        // the loop correction: take the lower bound of the
                        // admissible interval from here on
                        looped = true;
                        for c in child_state.coeffs.iter_mut() {
                            c.c = effective.carrier().heyting_implies(c.f, c.r)?;
                        }
                    }
                }
                let id = child_id(&branch.id, choice, forking);
                trace.record_state(&effective, &id, &child_state);
                let mut history = branch.history.clone();
                history.push(child_state.clone());
                next.push(Branch {
                    id,
                    state: child_state,
                    history,
                    looped,
                    last_matrix: choice,
                    done,
                });
            }
        }
        for branch in branches {
            if branch.done {
                next.push(branch);
            }
        }
        next.sort_by(|a, b| a.id.cmp(&b.id));
        let mut deduped: Vec<Branch> = Vec::new();
        for b in next {
            let dup = deduped.iter().any(|kept| {
                kept.state == b.state
                    && kept.looped == b.looped
                    && kept.last_matrix == b.last_matrix
                    && kept.done == b.done
            });
            if !dup {
                deduped.push(b);
            }
        }
        branches = deduped;

        if merging {
            let states: Vec<&MapState> = branches.iter().map(|b| &b.state).collect();
            trace.record_merged(&effective, k, &states)?;
        }

        if branches.iter().all(|b| b.done) {
            status = RunStatus::Converged { at: k };
            break;
        }
    }

    trace.set_status(status);

    let mut merged: Vec<MvSet> = branches[0].state.values.clone();
    for b in &branches[1..] {
        for (acc, v) in merged.iter_mut().zip(&b.state.values) {
            *acc = acc.merged(v)?;
        }
    }

    let branches = branches
        .into_iter()
        .map(|b| BranchResult {
            id: b.id,
            state: b.state,
            looped: b.looped,
            last_matrix: b.last_matrix,
            done: b.done,
        })
        .collect();

    Ok(RunOutcome {
        trace,
        status,
        branches,
        merged,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::tests::boolean3;
    use crate::mvcm::RunStatus;

    /// Crisp spec helper: weights and initial values as single elements held
    /// with top confidence.
    fn crisp_spec(
        concepts: &[&str],
        initial: &[&str],
        weights: &[(&str, &str, &str)],
    ) -> MapSpec {
        let l = boolean3();
        let m = boolean3();
        let n = concepts.len();
        let init: Vec<MvSet> = initial
            .iter()
            .map(|v| {
                MvSet::singleton(l.clone(), m.clone(), l.element(v).unwrap(), m.top()).unwrap()
            })
            .collect();
        let mut cells = vec![MvSet::empty(l.clone(), m.clone()); n * n];
        for (from, to, w) in weights {
            let fi = concepts.iter().position(|c| c == from).unwrap();
            let ti = concepts.iter().position(|c| c == to).unwrap();
            cells[fi * n + ti] =
                MvSet::singleton(l.clone(), m.clone(), l.element(w).unwrap(), m.top()).unwrap();
        }
        MapSpec::new(
            "test",
            concepts.iter().map(|s| s.to_string()).collect(),
            l,
            m,
            init,
            vec![WeightMatrix::new("W1", cells)],
        )
        .unwrap()
    }

    #[test]
    fn all_bottom_weights_zero_the_map() {
        let spec = crisp_spec(&["C1", "C2"], &["bora", "born"], &[("C1", "C2", "0")]);
        let state = MapState::initial(&spec);
        let next = step(&spec, &state, Combine::Join, 0, false).unwrap();
        let l = spec.carrier();
        for v in &next.values {
            assert_eq!(v.support(), vec![l.bottom()]);
        }
    }

    #[test]
    fn crisp_join_update_matches_formula() {
        // with c = f = top the update is exactly the join of w /\ A
        let spec = crisp_spec(
            &["C1", "C2", "C3"],
            &["bora", "born", "0"],
            &[("C1", "C3", "ba0"), ("C2", "C3", "bn0"), ("C3", "C3", "1")],
        );
        let state = MapState::initial(&spec);
        let next = step(&spec, &state, Combine::Join, 0, false).unwrap();
        let l = spec.carrier();
        // C3 <- (ba0 /\ bora) \/ (bn0 /\ born) \/ (1 /\ 0) = ba0 \/ bn0 = aorn
        assert_eq!(next.values[2].support(), vec![l.element("aorn").unwrap()]);
        // concepts without incoming weights drop to bottom
        assert_eq!(next.values[0].support(), vec![l.bottom()]);
    }

    #[test]
    fn monotone_bound_under_join() {
        let spec = crisp_spec(
            &["C1", "C2"],
            &["1", "bora"],
            &[("C1", "C2", "b"), ("C2", "C1", "born"), ("C2", "C2", "ba0")],
        );
        let l = spec.carrier();
        let state = MapState::initial(&spec);
        let next = step(&spec, &state, Combine::Join, 0, false).unwrap();
        let n = spec.len();
        for i in 0..n {
            let mut bound = l.bottom();
            for j in 0..n {
                for (w, _) in spec.matrix(0).unwrap().cell(j, i, n).entries() {
                    bound = l.join(bound, w).unwrap();
                }
            }
            for v in next.values[i].support() {
                assert!(l.leq(v, bound).unwrap());
            }
        }
    }

    #[test]
    fn sum_mode_cancels_equal_contributions() {
        let l = boolean3();
        let m = boolean3();
        let concepts = vec!["C1".to_string(), "C2".to_string(), "C3".to_string()];
        let init = vec![
            MvSet::singleton(l.clone(), m.clone(), l.element("b").unwrap(), m.element("ba0").unwrap())
                .unwrap(),
            MvSet::singleton(l.clone(), m.clone(), l.element("b").unwrap(), m.element("bn0").unwrap())
                .unwrap(),
            MvSet::empty(l.clone(), m.clone()),
        ];
        let mut cells = vec![MvSet::empty(l.clone(), m.clone()); 9];
        for from in [0usize, 1] {
            cells[from * 3 + 2] =
                MvSet::singleton(l.clone(), m.clone(), l.top(), m.top()).unwrap();
        }
        let spec = MapSpec::new(
            "cancel",
            concepts,
            l.clone(),
            m.clone(),
            init,
            vec![WeightMatrix::new("W1", cells)],
        )
        .unwrap();
        let state = MapState::initial(&spec);
        let next = step(&spec, &state, Combine::Sum, 0, false).unwrap();
        // equal values cancel; the two confidences survive as their ring sum
        assert_eq!(next.values[2].support(), vec![l.bottom()]);
        assert_eq!(
            next.values[2].confidence(l.bottom()).unwrap(),
            m.element("aorn").unwrap()
        );
    }

    #[test]
    fn coefficients_examples() {
        // influence below the join of consecutive values forces f = top
        let spec = crisp_spec(
            &["C1"],
            &["bora"],
            &[("C1", "C1", "1")],
        );
        let state = MapState::initial(&spec);
        let next = step(&spec, &state, Combine::Join, 0, false).unwrap();
        let l = spec.carrier();
        // influence = 1 /\ bora = bora = A^1; A^1 \/ A^0 = bora => f = top
        assert_eq!(next.coeffs[0].f, l.top());
        assert_eq!(next.coeffs[0].r, l.top());
        assert_eq!(next.coeffs[0].c, l.top());
    }

    #[test]
    fn coefficient_r_with_disjoint_consecutive_values() {
        // C2's value flips from born to (b /\ born's source): influence and
        // r are the oracle implications
        let spec = crisp_spec(
            &["C1", "C2"],
            &["bora", "born"],
            &[("C1", "C2", "b")],
        );
        let state = MapState::initial(&spec);
        let next = step(&spec, &state, Combine::Join, 0, false).unwrap();
        let l = spec.carrier();
        // A_2^1 = b /\ bora = b; influence (over new values) = b /\ ... wait:
        // antecedent uses new values: w /\ A_1^1; A_1^1 = bottom (no inputs)
        assert_eq!(next.values[1].support(), vec![l.element("b").unwrap()]);
        // antecedent = b /\ bottom = bottom, so f = r = top
        assert_eq!(next.coeffs[1].f, l.top());
        assert_eq!(next.coeffs[1].r, l.top());
    }

    #[test]
    fn looped_step_takes_corrective_c() {
        let spec = crisp_spec(&["C1"], &["bora"], &[("C1", "C1", "b")]);
        let state = MapState::initial(&spec);
        let next = step(&spec, &state, Combine::Join, 0, true).unwrap();
        let l = spec.carrier();
        // c must be f => r, the lower bound of the admissible interval
        assert_eq!(
            next.coeffs[0].c,
            l.heyting_implies(next.coeffs[0].f, next.coeffs[0].r).unwrap()
        );
        // sandwich: f => r <= c <= top holds in both modes
        let free = step(&spec, &state, Combine::Join, 0, false).unwrap();
        assert_eq!(free.coeffs[0].c, l.top());
    }

    #[test]
    fn detect_cycle_cases() {
        let spec = crisp_spec(&["C1"], &["bora"], &[("C1", "C1", "1")]);
        let s0 = MapState::initial(&spec);
        let s1 = step(&spec, &s0, Combine::Join, 0, false).unwrap();
        // identity spec: s1 equals s0, a fixed point has cycle length 1
        assert_eq!(detect_cycle(&[s0.clone(), s1.clone()]), Some(1));
        assert_eq!(detect_cycle(&[s0.clone()]), None);
        // constructed 2-cycle
        let spec2 = crisp_spec(&["C1"], &["b"], &[("C1", "C1", "1")]);
        let t0 = MapState::initial(&spec2);
        assert_ne!(s0, t0);
        assert_eq!(
            detect_cycle(&[s0.clone(), t0.clone(), s0.clone()]),
            Some(2)
        );
        assert_eq!(detect_cycle(&[]), None);
    }

    #[test]
    fn identity_spec_converges_immediately() {
        let spec = crisp_spec(
            &["C1", "C2"],
            &["bora", "born"],
            &[("C1", "C1", "1"), ("C2", "C2", "1")],
        );
        let config = RunConfig::new(Combine::Join, WeightMode::Single(0)).max_iter(10);
        let out = run(&spec, &config).unwrap();
        assert_eq!(out.status, RunStatus::Converged { at: 1 });
        assert_eq!(out.merged[0].support(), vec![spec.carrier().element("bora").unwrap()]);
        // fixed-point soundness: one more step is the identity
        let last = &out.branches[0];
        let again = step(&spec, &last.state, Combine::Join, 0, last.looped).unwrap();
        assert_eq!(again, last.state);
    }

    #[test]
    fn single_concept_top_weight() {
        let spec = crisp_spec(&["C1"], &["born"], &[("C1", "C1", "1")]);
        let config = RunConfig::new(Combine::Join, WeightMode::Single(0)).max_iter(10);
        let out = run(&spec, &config).unwrap();
        assert!(out.converged());
        assert_eq!(
            out.merged[0].support(),
            vec![spec.carrier().element("born").unwrap()]
        );
    }

    #[test]
    fn zero_budget_reports_not_converged() {
        let spec = crisp_spec(&["C1"], &["b"], &[("C1", "C1", "1")]);
        let config = RunConfig::new(Combine::Join, WeightMode::Single(0)).max_iter(0);
        let out = run(&spec, &config).unwrap();
        assert!(!out.converged());
        assert!(matches!(out.status, RunStatus::NotConverged { max_iter: 0 }));
    }

    #[test]
    fn bad_matrix_index() {
        let spec = crisp_spec(&["C1"], &["b"], &[("C1", "C1", "1")]);
        let config = RunConfig::new(Combine::Join, WeightMode::Single(3));
        assert!(matches!(
            run(&spec, &config),
            Err(MvcmError::BadMatrixIndex(3, 1))
        ));
    }

    #[test]
    fn unsuitable_carrier_rejected() {
        // no multiplication on the carrier: the theorem preconditions fail
        let l = crate::lattice::LatticeBuilder::new("bare")
            .elements(["0", "1"])
            .cover("0", "1")
            .build()
            .unwrap();
        let m = boolean3();
        let init = vec![MvSet::singleton(l.clone(), m.clone(), l.top(), m.top()).unwrap()];
        let cells = vec![MvSet::singleton(l.clone(), m.clone(), l.top(), m.top()).unwrap()];
        let spec = MapSpec::new(
            "bare-map",
            vec!["C1".to_string()],
            l,
            m,
            init,
            vec![WeightMatrix::new("W1", cells)],
        )
        .unwrap();
        let config = RunConfig::new(Combine::Join, WeightMode::Single(0));
        assert!(matches!(
            run(&spec, &config),
            Err(MvcmError::UnsuitableCarrier(_, _))
        ));
    }

}
