use std::sync::Arc;

use super::*;

pub(crate) fn chain2() -> Arc<Lattice> {
    LatticeBuilder::new("chain2")
        .elements(["0", "1"])
        .cover("0", "1")
        .mult(MultSpec::Meet)
        .build()
        .unwrap()
}

pub(crate) fn chain3() -> Arc<Lattice> {
    LatticeBuilder::new("chain3")
        .elements(["0", "a", "1"])
        .covers([("0", "a"), ("a", "1")])
        .mult(MultSpec::Meet)
        .build()
        .unwrap()
}

pub(crate) fn diamond() -> Arc<Lattice> {
    LatticeBuilder::new("diamond")
        .elements(["0", "x", "y", "1"])
        .covers([("0", "x"), ("0", "y"), ("x", "1"), ("y", "1")])
        .mult(MultSpec::Meet)
        .build()
        .unwrap()
}

pub(crate) fn pentagon() -> Arc<Lattice> {
    LatticeBuilder::new("n5")
        .elements(["0", "x", "z", "y", "1"])
        .covers([("0", "x"), ("x", "z"), ("z", "1"), ("0", "y"), ("y", "1")])
        .build()
        .unwrap()
}

pub(crate) fn m3() -> Arc<Lattice> {
    LatticeBuilder::new("m3")
        .elements(["0", "x", "y", "z", "1"])
        .covers([
            ("0", "x"),
            ("0", "y"),
            ("0", "z"),
            ("x", "1"),
            ("y", "1"),
            ("z", "1"),
        ])
        .build()
        .unwrap()
}

pub(crate) fn boolean3() -> Arc<Lattice> {
    LatticeBuilder::new("boolean3")
        .elements(["0", "ba0", "b", "bn0", "bora", "born", "aorn", "1"])
        .covers([
            ("0", "ba0"),
            ("0", "b"),
            ("0", "bn0"),
            ("ba0", "bora"),
            ("b", "bora"),
            ("b", "born"),
            ("bn0", "born"),
            ("ba0", "aorn"),
            ("bn0", "aorn"),
            ("bora", "1"),
            ("born", "1"),
            ("aorn", "1"),
        ])
        .mult(MultSpec::Meet)
        .build()
        .unwrap()
}

/// 3-chain with x*y = join(x, y) except that bottom annihilates; unit is the
/// middle element, strictly below top.
fn chain3_join_mult() -> Arc<Lattice> {
    let entries = vec![
        ("0", "0", "0"),
        ("0", "a", "0"),
        ("0", "1", "0"),
        ("a", "0", "0"),
        ("a", "a", "a"),
        ("a", "1", "1"),
        ("1", "0", "0"),
        ("1", "a", "1"),
        ("1", "1", "1"),
    ]
    .into_iter()
    .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
    .collect();
    LatticeBuilder::new("chain3-join-mult")
        .elements(["0", "a", "1"])
        .covers([("0", "a"), ("a", "1")])
        .mult(MultSpec::Table {
            unit: "a".to_string(),
            entries,
        })
        .build()
        .unwrap()
}

// Brute-force oracles, independent of the table construction they check.

fn oracle_lub(l: &Lattice, a: Elem, b: Elem) -> Option<Elem> {
    let ubs: Vec<Elem> = l
        .elements()
        .filter(|&c| l.leq(a, c).unwrap() && l.leq(b, c).unwrap())
        .collect();
    ubs.iter()
        .copied()
        .find(|&u| ubs.iter().all(|&v| l.leq(u, v).unwrap()))
}

fn oracle_glb(l: &Lattice, a: Elem, b: Elem) -> Option<Elem> {
    let lbs: Vec<Elem> = l
        .elements()
        .filter(|&c| l.leq(c, a).unwrap() && l.leq(c, b).unwrap())
        .collect();
    lbs.iter()
        .copied()
        .find(|&u| lbs.iter().all(|&v| l.leq(v, u).unwrap()))
}

/// Largest c with a /\ c = a /\ b, by exhaustive search.
pub(crate) fn oracle_implies(l: &Lattice, a: Elem, b: Elem) -> Option<Elem> {
    let target = l.meet(a, b).unwrap();
    let cands: Vec<Elem> = l
        .elements()
        .filter(|&c| l.meet(a, c).unwrap() == target)
        .collect();
    cands
        .iter()
        .copied()
        .find(|&m| cands.iter().all(|&c| l.leq(c, m).unwrap()))
}

pub(crate) fn oracle_distributive(l: &Lattice) -> bool {
    l.elements().all(|a| {
        l.elements().all(|b| {
            l.elements().all(|c| {
                let lhs = l.meet(a, l.join(b, c).unwrap()).unwrap();
                let rhs = l
                    .join(l.meet(a, b).unwrap(), l.meet(a, c).unwrap())
                    .unwrap();
                lhs == rhs
            })
        })
    })
}

fn labels(l: &Lattice, elems: &[Elem]) -> Vec<String> {
    let mut out: Vec<String> = elems
        .iter()
        .map(|&e| l.label(e).unwrap().to_string())
        .collect();
    out.sort();
    out
}

#[test]
fn two_chain_basics() {
    let l = chain2();
    let zero = l.element("0").unwrap();
    let one = l.element("1").unwrap();
    assert_eq!(l.top(), one);
    assert_eq!(l.bottom(), zero);
    assert_eq!(l.join(zero, one).unwrap(), one);
    assert_eq!(labels(&l, &l.atoms()), ["1"]);
    assert_eq!(labels(&l, &l.generators()), ["1"]);
}

#[test]
fn diamond_bounds() {
    let l = diamond();
    let (x, y) = (l.element("x").unwrap(), l.element("y").unwrap());
    assert_eq!(l.join(x, y).unwrap(), l.top());
    assert_eq!(l.meet(x, y).unwrap(), l.bottom());
    assert!(!l.leq(x, y).unwrap());
    assert!(!l.leq(y, x).unwrap());
    assert_eq!(labels(&l, &l.generators()), ["x", "y"]);
}

#[test]
fn join_meet_tables_match_oracle() {
    for l in [chain3(), diamond(), pentagon(), m3(), boolean3()] {
        for a in l.elements() {
            for b in l.elements() {
                assert_eq!(l.join(a, b).unwrap(), oracle_lub(&l, a, b).unwrap());
                assert_eq!(l.meet(a, b).unwrap(), oracle_glb(&l, a, b).unwrap());
            }
        }
    }
}

#[test]
fn lattice_laws_exhaustive() {
    for l in [chain3(), diamond(), pentagon(), m3(), boolean3()] {
        for a in l.elements() {
            for b in l.elements() {
                assert_eq!(l.join(a, b).unwrap(), l.join(b, a).unwrap());
                assert_eq!(l.meet(a, b).unwrap(), l.meet(b, a).unwrap());
                // absorption
                assert_eq!(l.join(a, l.meet(a, b).unwrap()).unwrap(), a);
                assert_eq!(l.meet(a, l.join(a, b).unwrap()).unwrap(), a);
                // order agrees with both operations
                let le = l.leq(a, b).unwrap();
                assert_eq!(le, l.join(a, b).unwrap() == b);
                assert_eq!(le, l.meet(a, b).unwrap() == a);
                for c in l.elements() {
                    assert_eq!(
                        l.join(l.join(a, b).unwrap(), c).unwrap(),
                        l.join(a, l.join(b, c).unwrap()).unwrap()
                    );
                    assert_eq!(
                        l.meet(l.meet(a, b).unwrap(), c).unwrap(),
                        l.meet(a, l.meet(b, c).unwrap()).unwrap()
                    );
                }
            }
            assert_eq!(l.join(a, a).unwrap(), a);
            assert_eq!(l.meet(a, a).unwrap(), a);
            assert!(l.leq(l.bottom(), a).unwrap());
            assert!(l.leq(a, a).unwrap());
        }
    }
}

#[test]
fn distributivity_matches_oracle() {
    for (l, expected) in [
        (chain3(), true),
        (diamond(), true),
        (pentagon(), false),
        (m3(), false),
        (boolean3(), true),
    ] {
        assert_eq!(l.is_distributive(), expected, "{}", l.name());
        assert_eq!(oracle_distributive(&l), expected, "{}", l.name());
    }
}

#[test]
fn implication_matches_oracle_on_distributive_fixtures() {
    for l in [chain2(), chain3(), diamond(), boolean3()] {
        assert!(l.is_brouwer());
        for a in l.elements() {
            for b in l.elements() {
                let got = l.heyting_implies(a, b).unwrap();
                assert_eq!(got, oracle_implies(&l, a, b).unwrap());
                // the defining property of the largest such c
                assert_eq!(l.meet(a, got).unwrap(), l.meet(a, b).unwrap());
            }
        }
    }
}

#[test]
fn implication_examples() {
    let l = chain3();
    let (zero, a, one) = (
        l.element("0").unwrap(),
        l.element("a").unwrap(),
        l.element("1").unwrap(),
    );
    assert_eq!(l.heyting_implies(a, one).unwrap(), one);
    assert_eq!(l.heyting_implies(a, zero).unwrap(), zero);
    assert_eq!(l.heyting_implies(zero, a).unwrap(), one);
}

#[test]
fn pentagon_is_not_brouwer() {
    let l = pentagon();
    assert!(!l.is_brouwer());
    let (x, y) = (l.element("x").unwrap(), l.element("y").unwrap());
    assert!(matches!(
        l.heyting_implies(x, y),
        Err(LatticeError::NotBrouwer(_))
    ));
}

#[test]
fn atomicity_readings() {
    assert!(boolean3().is_atomic());
    assert!(diamond().is_atomic());
    let c3 = chain3();
    assert_eq!(labels(&c3, &c3.generators()), ["1", "a"]);
    assert!(!c3.is_atomic());
    assert!(boolean3().is_atomistic());
    assert!(!c3.is_atomistic());
    assert!(m3().is_atomic());
    assert!(m3().is_atomistic());
}

#[test]
fn boolean3_atoms() {
    let l = boolean3();
    assert_eq!(labels(&l, &l.atoms()), ["b", "ba0", "bn0"]);
    assert_eq!(labels(&l, &l.generators()), ["b", "ba0", "bn0"]);
}

#[test]
fn residuals_meet_case_equals_implication() {
    for l in [chain2(), chain3(), diamond(), boolean3()] {
        assert!(l.is_residuated());
        for a in l.elements() {
            for b in l.elements() {
                let (right, left) = l.residuals(a, b).unwrap();
                let imp = l.heyting_implies(a, b).unwrap();
                assert_eq!(right, imp);
                assert_eq!(left, imp);
            }
        }
    }
}

#[test]
fn residual_examples() {
    let l = boolean3();
    let b = l.element("born").unwrap();
    assert_eq!(l.residuals(l.top(), b).unwrap(), (b, b));
    assert_eq!(l.residuals(b, l.top()).unwrap(), (l.top(), l.top()));
}

#[test]
fn residuation_law_exhaustive() {
    for l in [chain3(), diamond(), boolean3(), chain3_join_mult()] {
        for x in l.elements() {
            for y in l.elements() {
                for z in l.elements() {
                    let prod = l.leq(l.mult(x, y).unwrap(), z).unwrap();
                    let (xz_r, _) = l.residuals(x, z).unwrap();
                    let (_, zy_l) = l.residuals(y, z).unwrap();
                    assert_eq!(prod, l.leq(y, xz_r).unwrap());
                    assert_eq!(prod, l.leq(x, zy_l).unwrap());
                }
            }
        }
    }
}

#[test]
fn integrality_flags() {
    for l in [chain2(), chain3(), diamond(), boolean3()] {
        assert!(l.is_integrally_closed().unwrap(), "{}", l.name());
        assert!(l.is_integral().unwrap(), "{}", l.name());
        assert_eq!(l.unit(), Some(l.top()));
    }
    let odd = chain3_join_mult();
    assert!(odd.is_residuated());
    assert!(!odd.is_integral().unwrap());
    assert!(!odd.is_integrally_closed().unwrap());
}

#[test]
fn missing_structure_errors() {
    let l = pentagon();
    let x = l.element("x").unwrap();
    assert!(matches!(
        l.mult(x, x),
        Err(LatticeError::NoMultiplication(_))
    ));
    assert!(matches!(
        l.residuals(x, x),
        Err(LatticeError::NoMultiplication(_))
    ));
    assert!(matches!(
        l.ring_sum(x, x),
        Err(LatticeError::NotAtomRepresentable(_, _))
    ));
}

#[test]
fn non_residuated_table_detected_when_unvalidated() {
    // x*x = 0 on the diamond breaks distributivity over join; with the
    // exhaustive sweep on this is a BadMonoid, with it off the residual
    // tables fail to close.
    let entries: Vec<(String, String, String)> = [
        ("0", "0", "0"),
        ("0", "x", "0"),
        ("0", "y", "0"),
        ("0", "1", "0"),
        ("x", "0", "0"),
        ("x", "x", "0"),
        ("x", "y", "0"),
        ("x", "1", "x"),
        ("y", "0", "0"),
        ("y", "x", "0"),
        ("y", "y", "y"),
        ("y", "1", "y"),
        ("1", "0", "0"),
        ("1", "x", "x"),
        ("1", "y", "y"),
        ("1", "1", "1"),
    ]
    .iter()
    .map(|(a, b, c)| (a.to_string(), b.to_string(), c.to_string()))
    .collect();
    let base = || {
        LatticeBuilder::new("diamond-nilpotent")
            .elements(["0", "x", "y", "1"])
            .covers([("0", "x"), ("0", "y"), ("x", "1"), ("y", "1")])
            .mult(MultSpec::Table {
                unit: "1".to_string(),
                entries: entries.clone(),
            })
    };
    assert!(matches!(
        base().build(),
        Err(LatticeError::BadMonoid(_))
    ));
    let l = base().skip_exhaustive(true).build().unwrap();
    assert!(!l.is_residuated());
    let x = l.element("x").unwrap();
    assert!(matches!(
        l.residuals(x, l.bottom()),
        Err(LatticeError::NotResiduated(_, _))
    ));
}

#[test]
fn product_of_chains_is_square() {
    let a = chain2();
    let b = chain2();
    let p = product("square", &a, &b, 256).unwrap();
    assert_eq!(p.len(), 4);
    assert_eq!(p.atoms().len(), 2);
    assert_eq!(p.label(p.top()).unwrap(), "11");
    assert_eq!(p.label(p.bottom()).unwrap(), "0");
    assert!(p.is_distributive());
    assert!(p.is_residuated());
    // atoms are (atom, bottom) and (bottom, atom)
    assert_eq!(labels(&p, &p.atoms()), ["01", "1"]);
}

#[test]
fn atom_repr_examples() {
    let l = boolean3();
    let repr = l.atom_repr().unwrap();
    let bora = l.element("bora").unwrap();
    assert_eq!(
        labels(&l, &repr[&bora]),
        ["b", "ba0"]
    );
    assert!(repr[&l.bottom()].is_empty());
    assert_eq!(repr[&l.top()].len(), 3);

    let c3 = chain3();
    assert!(matches!(
        c3.atom_repr(),
        Err(LatticeError::NotAtomRepresentable(_, _))
    ));
}

#[test]
fn ring_sum_and_difference() {
    let l = boolean3();
    let bora = l.element("bora").unwrap();
    let born = l.element("born").unwrap();
    let aorn = l.element("aorn").unwrap();
    let ba0 = l.element("ba0").unwrap();
    let b = l.element("b").unwrap();
    assert_eq!(l.ring_sum(bora, born).unwrap(), aorn);
    assert_eq!(l.set_difference(bora, b).unwrap(), ba0);
    for a in l.elements() {
        assert_eq!(l.ring_sum(a, a).unwrap(), l.bottom());
        assert_eq!(l.ring_sum(a, l.bottom()).unwrap(), a);
        assert_eq!(l.set_difference(a, a).unwrap(), l.bottom());
        assert_eq!(l.set_difference(a, l.bottom()).unwrap(), a);
    }
}

#[test]
fn ring_axioms_exhaustive() {
    let l = boolean3();
    for a in l.elements() {
        for b in l.elements() {
            assert_eq!(l.ring_sum(a, b).unwrap(), l.ring_sum(b, a).unwrap());
            for c in l.elements() {
                assert_eq!(
                    l.ring_sum(l.ring_sum(a, b).unwrap(), c).unwrap(),
                    l.ring_sum(a, l.ring_sum(b, c).unwrap()).unwrap()
                );
                // meet distributes over the ring sum
                assert_eq!(
                    l.meet(c, l.ring_sum(a, b).unwrap()).unwrap(),
                    l.ring_sum(l.meet(c, a).unwrap(), l.meet(c, b).unwrap())
                        .unwrap()
                );
            }
        }
    }
}

#[test]
fn build_errors() {
    assert!(matches!(
        LatticeBuilder::new("dup")
            .elements(["a", "a"])
            .build(),
        Err(LatticeError::DuplicateLabel(_))
    ));
    assert!(matches!(
        LatticeBuilder::new("cycle")
            .elements(["a", "b"])
            .covers([("a", "b"), ("b", "a")])
            .build(),
        Err(LatticeError::CycleInOrder(_))
    ));
    assert!(matches!(
        LatticeBuilder::new("nolub")
            .elements(["a", "b"])
            .build(),
        Err(LatticeError::NotALattice(_))
    ));
    assert!(matches!(
        LatticeBuilder::new("unknown")
            .elements(["a"])
            .cover("a", "zzz")
            .build(),
        Err(LatticeError::UnknownLabel(_))
    ));
    assert!(matches!(
        LatticeBuilder::new("toobig")
            .elements(["a", "b", "c"])
            .covers([("a", "b"), ("b", "c")])
            .max_elements(2)
            .build(),
        Err(LatticeError::TooLarge { .. })
    ));
}

#[test]
fn foreign_elements_rejected() {
    let l1 = chain2();
    let l2 = chain2();
    let foreign = l2.top();
    assert!(matches!(
        l1.join(l1.top(), foreign),
        Err(LatticeError::ForeignElement(_))
    ));
    assert!(matches!(
        l1.label(foreign),
        Err(LatticeError::ForeignElement(_))
    ));
}

#[test]
fn single_element_lattice() {
    let l = LatticeBuilder::new("point").elements(["p"]).build().unwrap();
    assert_eq!(l.top(), l.bottom());
    assert!(l.atoms().is_empty());
    assert!(l.generators().is_empty());
    assert!(l.is_atomic());
    assert!(l.is_atomistic());
    assert!(l.is_distributive());
}
