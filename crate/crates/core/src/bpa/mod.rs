//! Basic process algebra: guarded, deterministic, normed systems, their
//! labelled transitions, and their translation into nested types.

mod gen;
mod lts;
mod parse;
mod translate;

use std::collections::BTreeMap;
use std::fmt;

use indexmap::IndexMap;
use thiserror::Error;

pub use gen::{gen_pair, gen_random, EXIT};
pub use lts::{accepted_up_to, bounded_inclusion, bounded_inclusion_expr, bpa_step, show_word, Inclusion, Word};
pub use parse::parse_bpa;
pub use translate::{translate, translate_expr, Translation, ALPHA};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BpaExpr {
    Action(String),
    Var(String),
    Choice(Box<BpaExpr>, Box<BpaExpr>),
    Seq(Box<BpaExpr>, Box<BpaExpr>),
    Epsilon,
}

impl BpaExpr {
    pub fn action(a: impl Into<String>) -> Self {
        BpaExpr::Action(a.into())
    }

    pub fn var(x: impl Into<String>) -> Self {
        BpaExpr::Var(x.into())
    }

    pub fn choice(p: BpaExpr, q: BpaExpr) -> Self {
        BpaExpr::Choice(Box::new(p), Box::new(q))
    }

    /// Sequential composition kept right-nested, with `Epsilon` units removed.
    pub fn seq(p: BpaExpr, q: BpaExpr) -> Self {
        match (p, q) {
            (BpaExpr::Epsilon, q) => q,
            (p, BpaExpr::Epsilon) => p,
            (BpaExpr::Seq(a, b), q) => BpaExpr::seq(*a, BpaExpr::seq(*b, q)),
            (p, q) => BpaExpr::Seq(Box::new(p), Box::new(q)),
        }
    }

    pub fn seq_all(items: impl IntoIterator<Item = BpaExpr>) -> Self {
        let items: Vec<BpaExpr> = items.into_iter().collect();
        items.into_iter().rev().fold(BpaExpr::Epsilon, |acc, e| BpaExpr::seq(e, acc))
    }

    pub fn sum(items: impl IntoIterator<Item = BpaExpr>) -> Option<Self> {
        items.into_iter().reduce(BpaExpr::choice)
    }

    pub fn is_epsilon(&self) -> bool {
        matches!(self, BpaExpr::Epsilon)
    }

    /// Summands of a top-level choice.
    pub fn summands(&self) -> Vec<&BpaExpr> {
        match self {
            BpaExpr::Choice(p, q) => {
                let mut v = p.summands();
                v.extend(q.summands());
                v
            }
            e => vec![e],
        }
    }

    /// Atoms of a sequence, left to right. Choices are returned whole.
    pub fn atoms(&self) -> Vec<&BpaExpr> {
        match self {
            BpaExpr::Seq(p, q) => {
                let mut v = p.atoms();
                v.extend(q.atoms());
                v
            }
            BpaExpr::Epsilon => Vec::new(),
            e => vec![e],
        }
    }
}

impl fmt::Display for BpaExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(f: &mut fmt::Formatter<'_>, e: &BpaExpr, prec: u8) -> fmt::Result {
            match e {
                BpaExpr::Action(a) | BpaExpr::Var(a) => write!(f, "{a}"),
                BpaExpr::Epsilon => write!(f, "1"),
                BpaExpr::Choice(p, q) => {
                    if prec > 0 {
                        write!(f, "(")?;
                    }
                    go(f, p, 0)?;
                    write!(f, " + ")?;
                    go(f, q, 0)?;
                    if prec > 0 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
                BpaExpr::Seq(p, q) => {
                    if prec > 1 {
                        write!(f, "(")?;
                    }
                    go(f, p, 2)?;
                    write!(f, " . ")?;
                    go(f, q, 1)?;
                    if prec > 1 {
                        write!(f, ")")?;
                    }
                    Ok(())
                }
            }
        }
        go(f, self, 0)
    }
}

/// Equations `X = p` and a root variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BpaSystem {
    pub equations: IndexMap<String, BpaExpr>,
    pub root: String,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum BpaError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("duplicate equation for `{0}`")]
    DuplicateVariable(String),
    #[error("`{0}` is not a process variable")]
    UnknownVariable(String),
    #[error("equation for `{0}` is not guarded")]
    NotGuarded(String),
    #[error("equation for `{var}` offers `{action}` more than once")]
    NotDeterministic { var: String, action: String },
    #[error("variable `{0}` has no terminating run")]
    NotNormed(String),
}

impl fmt::Display for BpaSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (x, e) in &self.equations {
            writeln!(f, "proc {x} = {e} ;")?;
        }
        writeln!(f, "root {}", self.root)
    }
}

impl BpaSystem {
    pub fn new(root: impl Into<String>) -> Self {
        BpaSystem { equations: IndexMap::new(), root: root.into() }
    }

    pub fn body(&self, x: &str) -> Option<&BpaExpr> {
        self.equations.get(x)
    }

    /// Shortest terminating run of every variable, `None` if there is none.
    pub fn norms(&self) -> BTreeMap<String, Option<usize>> {
        let mut norms: BTreeMap<String, Option<usize>> = self.equations.keys().map(|x| (x.clone(), None)).collect();
        loop {
            let mut changed = false;
            for (x, e) in &self.equations {
                let n = norm_expr(e, &norms);
                if n != norms[x] && (norms[x].is_none() || n < norms[x]) {
                    norms.insert(x.clone(), n);
                    changed = true;
                }
            }
            if !changed {
                return norms;
            }
        }
    }

    /// Norm of an expression under this system's variable norms.
    pub fn norm(&self, e: &BpaExpr) -> Option<usize> {
        norm_expr(e, &self.norms())
    }

    /// Checks guardedness, determinism of head normal forms, and normedness.
    pub fn validate(&self) -> Result<(), BpaError> {
        if !self.equations.contains_key(&self.root) {
            return Err(BpaError::UnknownVariable(self.root.clone()));
        }
        for (x, e) in &self.equations {
            if !starts_guarded(e) {
                return Err(BpaError::NotGuarded(x.clone()));
            }
        }
        self.head_normal_form()?;
        for (x, n) in self.norms() {
            if n.is_none() {
                return Err(BpaError::NotNormed(x));
            }
        }
        Ok(())
    }

    /// Equivalent system whose bodies are sums `a1 . p1 + ... + an . pn` with
    /// distinct `ai` and each `pi` a sequence of actions and variables.
    /// Choices nested inside sequences become fresh variables.
    pub fn head_normal_form(&self) -> Result<BpaSystem, BpaError> {
        let mut out = BpaSystem::new(self.root.clone());
        let mut pending: Vec<(String, BpaExpr)> = self.equations.iter().map(|(x, e)| (x.clone(), e.clone())).collect();
        let mut fresh = 0;
        let mut i = 0;
        while i < pending.len() {
            let (x, e) = pending[i].clone();
            i += 1;
            let mut summands = Vec::new();
            self.hnf(&e, &mut Vec::new(), &x, &mut summands)?;
            let mut body = Vec::new();
            let mut seen = Vec::new();
            for (a, rest) in summands {
                if seen.contains(&a) {
                    return Err(BpaError::NotDeterministic { var: x.clone(), action: a });
                }
                seen.push(a.clone());
                let mut atoms = vec![BpaExpr::Action(a)];
                for r in rest {
                    if let BpaExpr::Choice(..) = r {
                        let name = loop {
                            fresh += 1;
                            let n = format!("{x}_{fresh}");
                            if !self.equations.contains_key(&n) && !pending.iter().any(|(y, _)| *y == n) {
                                break n;
                            }
                        };
                        pending.push((name.clone(), r));
                        atoms.push(BpaExpr::Var(name));
                    } else {
                        atoms.push(r);
                    }
                }
                body.push(BpaExpr::seq_all(atoms));
            }
            let body = BpaExpr::sum(body).ok_or_else(|| BpaError::NotGuarded(x.clone()))?;
            out.equations.insert(x, body);
        }
        Ok(out)
    }

    fn hnf(
        &self,
        e: &BpaExpr,
        unfolding: &mut Vec<String>,
        owner: &str,
        out: &mut Vec<(String, Vec<BpaExpr>)>,
    ) -> Result<(), BpaError> {
        match e {
            BpaExpr::Action(a) => out.push((a.clone(), Vec::new())),
            BpaExpr::Epsilon => return Err(BpaError::NotGuarded(owner.to_string())),
            BpaExpr::Var(x) => {
                if unfolding.contains(x) {
                    return Err(BpaError::NotGuarded(owner.to_string()));
                }
                let body = self.body(x).ok_or_else(|| BpaError::UnknownVariable(x.clone()))?;
                unfolding.push(x.clone());
                self.hnf(body, unfolding, owner, out)?;
                unfolding.pop();
            }
            BpaExpr::Choice(p, q) => {
                self.hnf(p, unfolding, owner, out)?;
                self.hnf(q, unfolding, owner, out)?;
            }
            BpaExpr::Seq(p, q) => {
                let mut head = Vec::new();
                self.hnf(p, unfolding, owner, &mut head)?;
                let tail: Vec<BpaExpr> = flatten(q);
                for (a, mut rest) in head {
                    rest.extend(tail.iter().cloned());
                    out.push((a, rest));
                }
            }
        }
        Ok(())
    }
}

fn flatten(e: &BpaExpr) -> Vec<BpaExpr> {
    e.atoms().into_iter().cloned().collect()
}

fn starts_guarded(e: &BpaExpr) -> bool {
    match e {
        BpaExpr::Action(_) => true,
        BpaExpr::Var(_) | BpaExpr::Epsilon => false,
        BpaExpr::Choice(p, q) => starts_guarded(p) && starts_guarded(q),
        BpaExpr::Seq(p, _) => starts_guarded(p),
    }
}

fn norm_expr(e: &BpaExpr, norms: &BTreeMap<String, Option<usize>>) -> Option<usize> {
    match e {
        BpaExpr::Action(_) => Some(1),
        BpaExpr::Epsilon => Some(0),
        BpaExpr::Var(x) => norms.get(x).copied().flatten(),
        BpaExpr::Choice(p, q) => match (norm_expr(p, norms), norm_expr(q, norms)) {
            (Some(a), Some(b)) => Some(a.min(b)),
            (a, b) => a.or(b),
        },
        BpaExpr::Seq(p, q) => Some(norm_expr(p, norms)? + norm_expr(q, norms)?),
    }
}
