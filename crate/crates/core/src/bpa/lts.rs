use std::collections::{BTreeMap, BTreeSet};

use super::{norm_expr, BpaError, BpaExpr, BpaSystem};

/// A trace, one action label per step.
pub type Word = Vec<String>;

/// Renders a word by concatenation when every label is a single character,
/// and with `.` separators otherwise.
pub fn show_word(w: &[String]) -> String {
    if w.iter().all(|l| l.chars().count() == 1) {
        w.concat()
    } else {
        w.join(".")
    }
}

/// All one-step transitions of `e`, ordered by label.
pub fn bpa_step(sys: &BpaSystem, e: &BpaExpr) -> Result<BTreeSet<(String, BpaExpr)>, BpaError> {
    let mut out = BTreeSet::new();
    step_into(sys, e, &mut Vec::new(), &mut out)?;
    Ok(out)
}

fn step_into(
    sys: &BpaSystem,
    e: &BpaExpr,
    unfolding: &mut Vec<String>,
    out: &mut BTreeSet<(String, BpaExpr)>,
) -> Result<(), BpaError> {
    match e {
        BpaExpr::Action(a) => {
            out.insert((a.clone(), BpaExpr::Epsilon));
        }
        BpaExpr::Epsilon => {}
        BpaExpr::Var(x) => {
            // An unguarded cycle contributes no transitions.
            if unfolding.contains(x) {
                return Ok(());
            }
            let body = sys.body(x).ok_or_else(|| BpaError::UnknownVariable(x.clone()))?;
            unfolding.push(x.clone());
            step_into(sys, body, unfolding, out)?;
            unfolding.pop();
        }
        BpaExpr::Choice(p, q) => {
            step_into(sys, p, unfolding, out)?;
            step_into(sys, q, unfolding, out)?;
        }
        BpaExpr::Seq(p, q) => {
            if p.is_epsilon() {
                return step_into(sys, q, unfolding, out);
            }
            let mut head = BTreeSet::new();
            step_into(sys, p, unfolding, &mut head)?;
            for (a, p2) in head {
                out.insert((a, BpaExpr::seq(p2, (**q).clone())));
            }
        }
    }
    Ok(())
}

/// Words of length at most `k` that lead from `e` to `Epsilon`.
pub fn accepted_up_to(sys: &BpaSystem, e: &BpaExpr, k: usize) -> BTreeSet<Word> {
    let norms = sys.norms();
    let mut out = BTreeSet::new();
    let mut frontier = vec![(e.clone(), Word::new())];
    while let Some((cur, word)) = frontier.pop() {
        if cur.is_epsilon() {
            out.insert(word.clone());
        }
        if word.len() >= k {
            continue;
        }
        let Ok(steps) = bpa_step(sys, &cur) else { continue };
        for (a, next) in steps {
            match norm_expr(&next, &norms) {
                Some(n) if word.len() + 1 + n <= k => {}
                _ => continue,
            }
            let mut w = word.clone();
            w.push(a);
            frontier.push((next, w));
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Inclusion {
    Included,
    /// Shortest, then lexicographically least, word accepted on the left only.
    Witness(Word),
}

impl Inclusion {
    pub fn is_included(&self) -> bool {
        matches!(self, Inclusion::Included)
    }
}

/// Bounded language inclusion between two variables of `sys`.
pub fn bounded_inclusion(sys: &BpaSystem, p: &str, q: &str, k: usize) -> Result<Inclusion, BpaError> {
    for x in [p, q] {
        if sys.body(x).is_none() {
            return Err(BpaError::UnknownVariable(x.to_string()));
        }
    }
    Ok(bounded_inclusion_expr(sys, &BpaExpr::var(p), &BpaExpr::var(q), k))
}

/// Bounded inclusion between arbitrary expressions, by a breadth-first walk
/// of the left side that tracks the right side along the same word. Relies
/// on determinism: each word reaches at most one expression on each side.
pub fn bounded_inclusion_expr(sys: &BpaSystem, p: &BpaExpr, q: &BpaExpr, k: usize) -> Inclusion {
    let norms = sys.norms();
    let mut level: Vec<(Word, BpaExpr, Option<BpaExpr>)> = vec![(Word::new(), p.clone(), Some(q.clone()))];
    for len in 0..=k {
        for (word, l, r) in &level {
            if l.is_epsilon() && !r.as_ref().is_some_and(BpaExpr::is_epsilon) {
                return Inclusion::Witness(word.clone());
            }
        }
        if len == k {
            break;
        }
        let mut next = Vec::new();
        for (word, l, r) in level {
            let Ok(ls) = bpa_step(sys, &l) else { continue };
            let rs: BTreeMap<String, BpaExpr> = match &r {
                Some(r) => bpa_step(sys, r).map(|s| s.into_iter().collect()).unwrap_or_default(),
                None => BTreeMap::new(),
            };
            for (a, l2) in ls {
                match norm_expr(&l2, &norms) {
                    Some(n) if len + 1 + n <= k => {}
                    _ => continue,
                }
                let r2 = rs.get(&a).cloned();
                let mut w = word.clone();
                w.push(a);
                next.push((w, l2, r2));
            }
        }
        next.sort_by(|a, b| a.0.cmp(&b.0));
        level = next;
    }
    Inclusion::Included
}

#[cfg(test)]
mod tests {
    use super::super::parse_bpa;
    use super::*;

    fn example() -> BpaSystem {
        parse_bpa("proc X0 = a . X0 . c + b . X1 ;\nproc X1 = a ;\nroot X0").unwrap()
    }

    fn w(s: &str) -> Word {
        s.chars().map(String::from).collect()
    }

    #[test]
    fn steps() {
        let s = example();
        let a = bpa_step(&s, &BpaExpr::action("a")).unwrap();
        assert_eq!(a.into_iter().collect::<Vec<_>>(), vec![("a".to_string(), BpaExpr::Epsilon)]);
        let x0 = bpa_step(&s, &BpaExpr::var("X0")).unwrap();
        let expect: BTreeSet<_> = [
            ("a".to_string(), BpaExpr::seq(BpaExpr::var("X0"), BpaExpr::action("c"))),
            ("b".to_string(), BpaExpr::var("X1")),
        ]
        .into_iter()
        .collect();
        assert_eq!(x0, expect);
        assert!(bpa_step(&s, &BpaExpr::Epsilon).unwrap().is_empty());
        assert!(bpa_step(&s, &BpaExpr::var("Z")).is_err());
    }

    #[test]
    fn accepted_words() {
        let s = example();
        let one: BTreeSet<Word> = [w("a")].into_iter().collect();
        assert_eq!(accepted_up_to(&s, &BpaExpr::var("X1"), 3), one);
        let ba: BTreeSet<Word> = [w("ba")].into_iter().collect();
        assert_eq!(accepted_up_to(&s, &BpaExpr::var("X0"), 2), ba);
        assert!(accepted_up_to(&s, &BpaExpr::var("X0"), 0).is_empty());
        let eps: BTreeSet<Word> = [Word::new()].into_iter().collect();
        assert_eq!(accepted_up_to(&s, &BpaExpr::Epsilon, 0), eps);
        let four: BTreeSet<Word> = [w("ba"), w("abac")].into_iter().collect();
        assert_eq!(accepted_up_to(&s, &BpaExpr::var("X0"), 4), four);
    }

    #[test]
    fn inclusion() {
        let s = example();
        assert_eq!(bounded_inclusion(&s, "X1", "X0", 4).unwrap(), Inclusion::Witness(w("a")));
        assert_eq!(bounded_inclusion(&s, "X0", "X1", 4).unwrap(), Inclusion::Witness(w("ba")));
        assert!(bounded_inclusion(&s, "X0", "X0", 6).unwrap().is_included());
        assert!(bounded_inclusion(&s, "X0", "X1", 1).unwrap().is_included());
        assert!(bounded_inclusion(&s, "X0", "Q", 1).is_err());
    }

    #[test]
    fn nested_languages() {
        let s = parse_bpa("proc X = a . X . b + c ; proc Y = a . Y . b + c + d ;").unwrap();
        for k in 0..8 {
            assert!(bounded_inclusion(&s, "X", "Y", k).unwrap().is_included());
        }
        assert_eq!(bounded_inclusion(&s, "Y", "X", 8).unwrap(), Inclusion::Witness(w("d")));
    }

    #[test]
    fn word_rendering() {
        assert_eq!(show_word(&w("ba")), "ba");
        assert_eq!(show_word(&["a".to_string(), "exit".to_string()]), "a.exit");
        assert_eq!(show_word(&[]), "");
    }
}
