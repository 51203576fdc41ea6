//! Brute-force bounded simulation between closed, quantifier-free types.
//!
//! Pairs are explored breadth first, one unfolding level at a time, so a
//! refutation is always reported at the smallest depth that exhibits it.

mod campaign;

use std::collections::{BTreeSet, HashSet};
use std::fmt;

use rayon::prelude::*;
use thiserror::Error;

use crate::rename::{unfold, RenameError};
use crate::subtype::{Checker, Closure, Goal};
use crate::syntax::{Choices, Type};
use crate::variance::Signature;

pub use campaign::{fuzz_bpa, FuzzCase, FuzzConfig, FuzzReport, CAMPAIGN_BUDGET};

pub const DEFAULT_K: usize = 12;
pub const DEFAULT_NODE_CAP: usize = 100_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SimResult {
    /// No mismatch within `k` unfolding levels.
    HoldsUpTo(usize),
    /// Mismatch after `depth` levels, reached by following `path` from the root pair.
    RefutedAt { depth: usize, path: Vec<String>, reason: String },
    /// More than the node cap of pairs would be needed.
    ResourceExceeded(usize),
}

impl SimResult {
    pub fn is_refuted(&self) -> bool {
        matches!(self, SimResult::RefutedAt { .. })
    }

    pub fn holds(&self) -> bool {
        matches!(self, SimResult::HoldsUpTo(_))
    }
}

impl fmt::Display for SimResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SimResult::HoldsUpTo(k) => write!(f, "holds up to {k}"),
            SimResult::RefutedAt { depth, path, reason } => {
                write!(f, "refuted at depth {depth}")?;
                if !path.is_empty() {
                    write!(f, " via {}", path.join("."))?;
                }
                write!(f, ": {reason}")
            }
            SimResult::ResourceExceeded(n) => write!(f, "gave up after {n} pairs"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SimError {
    #[error("quantified type `{0}` is not supported")]
    UnsupportedQuantifier(String),
    #[error("type `{0}` is not closed")]
    Open(String),
    #[error("undefined type name `{0}`")]
    UndefinedName(String),
    #[error("type `{0}` never unfolds to a structural type")]
    NonContractive(String),
}

/// Depth-`k` simulation of `a` by `b`, both over `sig`.
pub fn bounded_sim(sig: &Signature, a: &Type, b: &Type, k: usize, node_cap: usize) -> Result<SimResult, SimError> {
    bounded_sim_between(sig, a, sig, b, k, node_cap)
}

/// Like [`bounded_sim`], with `a` read in `sig_a` and `b` in `sig_b`.
pub fn bounded_sim_between(
    sig_a: &Signature,
    a: &Type,
    sig_b: &Signature,
    b: &Type,
    k: usize,
    node_cap: usize,
) -> Result<SimResult, SimError> {
    struct Node {
        parent: Option<usize>,
        step: String,
    }
    let mut nodes: Vec<Node> = vec![Node { parent: None, step: String::new() }];
    // A flipped pair has its left side from `sig_b`: argument positions of
    // `-o` swap the two sides.
    let mut level: Vec<(Type, Type, bool, usize)> = vec![(a.clone(), b.clone(), false, 0)];
    let path_of = |nodes: &[Node], mut i: usize| {
        let mut path = Vec::new();
        while let Some(p) = nodes[i].parent {
            path.push(nodes[i].step.clone());
            i = p;
        }
        path.reverse();
        path
    };
    for depth in 1..=k {
        let mut seen: HashSet<(Type, Type, bool)> = HashSet::new();
        let mut next = Vec::new();
        for (l, r, flipped, id) in level {
            let (sl, sr) = if flipped { (sig_b, sig_a) } else { (sig_a, sig_b) };
            let l = head(sl, &l)?;
            let r = head(sr, &r)?;
            match children(&l, &r) {
                Ok(kids) => {
                    for (step, x, y, flip) in kids {
                        let f = flipped != flip;
                        if !seen.insert((x.clone(), y.clone(), f)) {
                            continue;
                        }
                        if nodes.len() >= node_cap {
                            return Ok(SimResult::ResourceExceeded(nodes.len()));
                        }
                        nodes.push(Node { parent: Some(id), step });
                        next.push((x, y, f, nodes.len() - 1));
                    }
                }
                Err(reason) => {
                    return Ok(SimResult::RefutedAt { depth, path: path_of(&nodes, id), reason });
                }
            }
        }
        level = next;
    }
    Ok(SimResult::HoldsUpTo(k))
}

const UNFOLD_LIMIT: usize = 10_000;

/// Unfolds to a structural type, rejecting what the oracle cannot decide.
fn head(sig: &Signature, t: &Type) -> Result<Type, SimError> {
    let mut cur = t.clone();
    let mut steps = 0;
    while cur.is_named() {
        cur = unfold(sig, &cur).map_err(|RenameError::UndefinedName(n)| SimError::UndefinedName(n))?;
        steps += 1;
        if steps > UNFOLD_LIMIT {
            return Err(SimError::NonContractive(t.to_string()));
        }
    }
    match cur {
        Type::Exists(..) | Type::Forall(..) | Type::Var(_) => Err(SimError::UnsupportedQuantifier(cur.to_string())),
        Type::Param(_) => Err(SimError::Open(t.to_string())),
        _ => Ok(cur),
    }
}

/// Step label, the two sides, and whether they trade places.
type Step = (String, Type, Type, bool);

/// The pairs that must be related one level down, or why the heads clash.
fn children(l: &Type, r: &Type) -> Result<Vec<Step>, String> {
    match (l, r) {
        (Type::One, Type::One) => Ok(Vec::new()),
        (Type::Plus(ls), Type::Plus(rs)) => branches(ls, rs, ls, "+"),
        (Type::With(ls), Type::With(rs)) => branches(ls, rs, rs, "&"),
        (Type::Tensor(a1, a2), Type::Tensor(b1, b2)) => Ok(vec![
            ("left".into(), (**a1).clone(), (**b1).clone(), false),
            ("right".into(), (**a2).clone(), (**b2).clone(), false),
        ]),
        (Type::Lolli(a1, a2), Type::Lolli(b1, b2)) => Ok(vec![
            ("arg".into(), (**b1).clone(), (**a1).clone(), true),
            ("res".into(), (**a2).clone(), (**b2).clone(), false),
        ]),
        _ => Err(format!("{} against {}", shape(l), shape(r))),
    }
}

/// `needed` is the side whose labels must all appear on both sides.
fn branches(ls: &Choices, rs: &Choices, needed: &Choices, op: &str) -> Result<Vec<Step>, String> {
    let missing: BTreeSet<&String> = needed.keys().filter(|k| !ls.contains_key(*k) || !rs.contains_key(*k)).collect();
    if !missing.is_empty() {
        let show = |c: &Choices| c.keys().cloned().collect::<Vec<_>>().join(", ");
        return Err(format!("{op}{{{}}} against {op}{{{}}}", show(ls), show(rs)));
    }
    Ok(needed.keys().map(|k| (k.clone(), ls[k].clone(), rs[k].clone(), false)).collect())
}

fn shape(t: &Type) -> &'static str {
    match t {
        Type::Plus(_) => "internal choice",
        Type::With(_) => "external choice",
        Type::Tensor(..) => "tensor",
        Type::Lolli(..) => "lolli",
        Type::One => "1",
        _ => "non-structural type",
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleOutcome {
    Sim(SimResult),
    /// The oracle does not apply, for example because of a quantifier.
    Unsupported(String),
}

#[derive(Clone, Debug)]
pub struct CrossEntry {
    pub goal: Goal,
    pub verdict: &'static str,
    pub oracle: OracleOutcome,
}

impl CrossEntry {
    /// The algorithm accepted a goal the oracle refutes.
    pub fn is_violation(&self) -> bool {
        self.verdict == "subtype" && matches!(&self.oracle, OracleOutcome::Sim(s) if s.is_refuted())
    }

    pub fn is_inconclusive(&self) -> bool {
        !matches!(&self.oracle, OracleOutcome::Sim(SimResult::HoldsUpTo(_)) | OracleOutcome::Sim(SimResult::RefutedAt { .. }))
    }
}

#[derive(Clone, Debug, Default)]
pub struct CrossReport {
    pub entries: Vec<CrossEntry>,
}

impl CrossReport {
    pub fn violations(&self) -> Vec<&CrossEntry> {
        self.entries.iter().filter(|e| e.is_violation()).collect()
    }

    pub fn inconclusive(&self) -> usize {
        self.entries.iter().filter(|e| e.is_inconclusive()).count()
    }
}

/// Runs the algorithm and the oracle on every goal and pairs up the results.
pub fn cross_check(sig: &Signature, seeds: &[Closure], goals: &[Goal], k: usize, node_cap: usize) -> CrossReport {
    cross_check_with(&Checker::new(sig, seeds), sig, goals, k, node_cap)
}

/// [`cross_check`] with a configured checker, which must use `sig`.
pub fn cross_check_with(checker: &Checker, sig: &Signature, goals: &[Goal], k: usize, node_cap: usize) -> CrossReport {
    let entries = goals
        .par_iter()
        .map(|g| {
            let verdict = checker.check(g).verdict;
            let oracle = match bounded_sim(sig, &g.lhs, &g.rhs, k, node_cap) {
                Ok(s) => OracleOutcome::Sim(s),
                Err(e) => OracleOutcome::Unsupported(e.to_string()),
            };
            CrossEntry { goal: g.clone(), verdict: verdict.label(), oracle }
        })
        .collect();
    CrossReport { entries }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::parse_program;
    use crate::variance::infer_variances;

    fn sig(src: &str) -> Signature {
        infer_variances(&Signature::from_program(&parse_program(src).unwrap()))
    }

    const NAT: &str = "type nat = +{z : 1, s : nat}\ntype even = +{z : 1, s : odd}\ntype odd = +{s : even}";

    #[test]
    fn even_nat() {
        let s = sig(NAT);
        let (even, nat) = (Type::named("even"), Type::named("nat"));
        assert_eq!(bounded_sim(&s, &even, &nat, 8, DEFAULT_NODE_CAP).unwrap(), SimResult::HoldsUpTo(8));
        match bounded_sim(&s, &nat, &even, 2, DEFAULT_NODE_CAP).unwrap() {
            SimResult::RefutedAt { depth, path, .. } => {
                assert_eq!(depth, 2);
                assert_eq!(path, vec!["s".to_string()]);
            }
            other => panic!("{other:?}"),
        }
        assert_eq!(bounded_sim(&s, &nat, &even, 1, DEFAULT_NODE_CAP).unwrap(), SimResult::HoldsUpTo(1));
    }

    #[test]
    fn identity_holds() {
        let s = sig(&format!("{NAT}\ntype L[a] = +{{nil : 1, cons : a * L[a]}}\ntype F = L[nat] -o &{{x : F, y : 1}}"));
        for t in ["nat", "L[even]", "F"] {
            let t = crate::syntax::parse_type(t, &mut s.scope()).unwrap();
            assert_eq!(bounded_sim(&s, &t, &t, 10, DEFAULT_NODE_CAP).unwrap(), SimResult::HoldsUpTo(10));
        }
    }

    #[test]
    fn with_and_lolli_clauses() {
        let s = sig("type A = &{x : 1, y : 1}\ntype B = &{x : 1}\ntype N = +{z : 1, s : N}\ntype E = +{z : 1}");
        let (a, b) = (Type::named("A"), Type::named("B"));
        assert!(bounded_sim(&s, &a, &b, 3, 100).unwrap().holds());
        assert!(bounded_sim(&s, &b, &a, 3, 100).unwrap().is_refuted());
        let f = Type::lolli(Type::named("N"), Type::One);
        let g = Type::lolli(Type::named("E"), Type::One);
        assert!(bounded_sim(&s, &f, &g, 4, 100).unwrap().holds());
        match bounded_sim(&s, &g, &f, 4, 100).unwrap() {
            SimResult::RefutedAt { depth, path, .. } => {
                assert_eq!(depth, 2);
                assert_eq!(path, vec!["arg".to_string()]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn quantifiers_are_refused() {
        let s = sig("type T = ?x. x * 1");
        let t = Type::named("T");
        assert!(matches!(bounded_sim(&s, &t, &t, 3, 100), Err(SimError::UnsupportedQuantifier(_))));
    }

    #[test]
    fn node_cap() {
        let s = sig("type L[a] = +{nil : 1, cons : L[+{x : a, y : a}]}");
        let t = Type::app("L", vec![("a".into(), Type::One)]);
        let u = Type::app("L", vec![("a".into(), Type::plus([("x", Type::One), ("y", Type::One), ("z", Type::One)]))]);
        assert!(matches!(bounded_sim(&s, &t, &u, 50, 5), Ok(SimResult::ResourceExceeded(_))));
    }

    #[test]
    fn empty_cross_check() {
        let s = sig(NAT);
        assert!(cross_check(&s, &[], &[], 4, 100).entries.is_empty());
    }
}
