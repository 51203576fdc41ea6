//! The subtyping algorithm for alternating signatures.
//!
//! Goals are normalized to covariant form. Type-name goals try, in order, a
//! stored closure (`def`), pointwise comparison of arguments for equal heads
//! (`refl`), and one step of unfolding that records the goal as a closure
//! (`expd`). Search is bounded by the budgets in [`Budget`].

mod matching;
mod seeds;
mod trace;

use std::collections::BTreeSet;
use std::fmt;

pub use matching::{match_args, match_type_with, NoMatch};
pub use seeds::{check_eqtypes, seeds_of, validate_eqtypes, InvalidSeed};
pub use trace::{BudgetKind, Derivation, Exhaustion, Refutation, Report, Rule, Stats, Verdict};

use crate::rename::{apply_var_subst, unfold};
use crate::syntax::{free_vars, ParamSubst, Type, VarSubst};
use crate::variance::{Signature, Variance, VarianceContext};

/// A hypothesis `vars ⊢ lhs ≤ rhs` between type names, read at `Co`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Closure {
    pub vars: BTreeSet<String>,
    pub lhs: Type,
    pub rhs: Type,
}

impl fmt::Display for Closure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.vars.is_empty() {
            let vs: Vec<&str> = self.vars.iter().map(String::as_str).collect();
            write!(f, "<{}> ", vs.join(", "))?;
        }
        write!(f, "{} <= {}", self.lhs, self.rhs)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Goal {
    pub vars: BTreeSet<String>,
    pub lhs: Type,
    pub rhs: Type,
    pub variance: Variance,
}

impl Goal {
    pub fn new(lhs: Type, rhs: Type) -> Self {
        Goal { vars: BTreeSet::new(), lhs, rhs, variance: Variance::Co }
    }
}

impl fmt::Display for Goal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} <= {}", self.lhs, self.rhs)?;
        if self.variance != Variance::Co {
            write!(f, " # {}", self.variance)?;
        }
        Ok(())
    }
}

/// Resource limits for one check.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// `expd` steps along one path.
    pub depth: usize,
    /// Nesting of `def` side conditions.
    pub side_conditions: usize,
    /// Goals visited in total.
    pub goals: usize,
}

pub const DEFAULT_DEPTH: usize = 50;

impl Default for Budget {
    fn default() -> Self {
        Budget { depth: DEFAULT_DEPTH, side_conditions: 8, goals: 100_000 }
    }
}

/// Deliberate bugs for checking that the test harness notices them.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Fault {
    /// Internal choice accepts when the right side has fewer labels.
    InvertPlusLabels,
}

#[derive(Clone, Debug)]
pub struct Checker<'a> {
    sig: &'a Signature,
    seeds: &'a [Closure],
    budget: Budget,
    fault: Option<Fault>,
}

impl<'a> Checker<'a> {
    pub fn new(sig: &'a Signature, seeds: &'a [Closure]) -> Self {
        Checker { sig, seeds, budget: Budget::default(), fault: None }
    }

    pub fn with_budget(mut self, budget: Budget) -> Self {
        self.budget = budget;
        self
    }

    pub fn with_fault(mut self, fault: Option<Fault>) -> Self {
        self.fault = fault;
        self
    }

    pub fn check(&self, goal: &Goal) -> Report {
        let mut s = self.search();
        let verdict = s.sub(&goal.vars, &goal.lhs, &goal.rhs, goal.variance, 0, 0);
        Report { verdict, stats: s.stats }
    }

    /// Like [`Checker::check`] on a name-name goal at `Co`, but the first step
    /// must unfold. Used to validate seeds, which may not justify themselves.
    pub fn check_guarded(&self, goal: &Goal) -> Report {
        let mut s = self.search();
        s.stats.goals += 1;
        let verdict = s.expd(&goal.vars, &goal.lhs, &goal.rhs, 0, 0);
        Report { verdict, stats: s.stats }
    }

    fn search(&self) -> Search<'a> {
        Search {
            sig: self.sig,
            budget: self.budget,
            fault: self.fault,
            gamma: self.seeds.to_vec(),
            n_seeds: self.seeds.len(),
            fresh: 0,
            stats: Stats::default(),
        }
    }
}

/// Checks a goal with the default budget.
pub fn check_subtype(sig: &Signature, seeds: &[Closure], goal: &Goal) -> Verdict {
    Checker::new(sig, seeds).check(goal).verdict
}

/// Conjunction of `theta1(p) ≤ theta2(p)` at `at` nested with each parameter's variance.
pub fn check_subst_subtype(
    sig: &Signature,
    seeds: &[Closure],
    vars: &BTreeSet<String>,
    ctx: &VarianceContext,
    theta1: &ParamSubst,
    theta2: &ParamSubst,
    at: Variance,
) -> Verdict {
    let checker = Checker::new(sig, seeds);
    let mut s = checker.search();
    let subs = ctx
        .0
        .iter()
        .map(|(p, v)| {
            let l = theta1.get(p).cloned().unwrap_or(Type::Param(p.clone()));
            let r = theta2.get(p).cloned().unwrap_or(Type::Param(p.clone()));
            Sub { step: format!("[{p}]"), vars: vars.clone(), lhs: l, rhs: r, at: at.nest(*v) }
        })
        .collect();
    s.all(Rule::Refl, &Type::One, &Type::One, subs, 0, 0, false)
}

struct Sub {
    step: String,
    vars: BTreeSet<String>,
    lhs: Type,
    rhs: Type,
    at: Variance,
}

struct Search<'a> {
    sig: &'a Signature,
    budget: Budget,
    fault: Option<Fault>,
    gamma: Vec<Closure>,
    n_seeds: usize,
    fresh: usize,
    stats: Stats,
}

fn refuted(reason: impl Into<String>) -> Verdict {
    Verdict::NotSubtype(Refutation { path: Vec::new(), reason: reason.into() })
}

impl<'a> Search<'a> {
    fn sub(&mut self, vars: &BTreeSet<String>, l: &Type, r: &Type, at: Variance, depth: usize, side: usize) -> Verdict {
        match at {
            Variance::Bot => Verdict::Subtype(Derivation::leaf(Rule::Bot, l, r)),
            Variance::Co => self.sub_co(vars, l, r, depth, side),
            Variance::Contra => match self.sub_co(vars, r, l, depth, side) {
                Verdict::Subtype(d) => Verdict::Subtype(Derivation::node(Rule::Swap, l, r, vec![d])),
                other => other,
            },
            Variance::Top => {
                let subs = vec![
                    Sub { step: "split.left".into(), vars: vars.clone(), lhs: l.clone(), rhs: r.clone(), at: Variance::Co },
                    Sub { step: "split.right".into(), vars: vars.clone(), lhs: r.clone(), rhs: l.clone(), at: Variance::Co },
                ];
                self.all(Rule::Split, l, r, subs, depth, side, false)
            }
        }
    }

    fn sub_co(&mut self, vars: &BTreeSet<String>, l: &Type, r: &Type, depth: usize, side: usize) -> Verdict {
        self.stats.goals += 1;
        if self.stats.goals > self.budget.goals {
            return Verdict::Unknown(Exhaustion { budget: BudgetKind::Goals, frontier: format!("{l} <= {r}") });
        }
        if l.is_named() != r.is_named() {
            // A parameter-bodied name or a variable argument can meet a
            // structural type; unfolding the name side is the identity on meaning.
            let (mut ul, mut ur) = (l.clone(), r.clone());
            while ul.is_named() != ur.is_named() {
                let res = if ul.is_named() { unfold(self.sig, &ul) } else { unfold(self.sig, &ur) };
                match res {
                    Ok(u) if ul.is_named() => ul = u,
                    Ok(u) => ur = u,
                    Err(e) => return refuted(e.to_string()),
                }
            }
            return match self.sub_co(vars, &ul, &ur, depth, side) {
                Verdict::Subtype(d) => Verdict::Subtype(Derivation::node(Rule::Unfold, l, r, vec![d])),
                other => other,
            };
        }
        if l.is_named() {
            self.named(vars, l, r, depth, side)
        } else {
            self.structural(vars, l, r, depth, side)
        }
    }

    fn structural(&mut self, vars: &BTreeSet<String>, l: &Type, r: &Type, depth: usize, side: usize) -> Verdict {
        let cont = |step: String, a: &Type, b: &Type, at: Variance| Sub {
            step,
            vars: vars.clone(),
            lhs: a.clone(),
            rhs: b.clone(),
            at,
        };
        match (l, r) {
            (Type::Plus(a), Type::Plus(b)) => {
                let inverted = self.fault == Some(Fault::InvertPlusLabels);
                let (small, big) = if inverted { (b, a) } else { (a, b) };
                if let Some(missing) = small.keys().find(|k| !big.contains_key(*k)) {
                    return refuted(format!("label `{missing}` of the left internal choice is missing on the right"));
                }
                let subs = a
                    .iter()
                    .filter(|(k, _)| b.contains_key(*k))
                    .map(|(k, t)| cont(format!("+{k}"), t, &b[k], Variance::Co))
                    .collect();
                self.all(Rule::Plus, l, r, subs, depth, side, true)
            }
            (Type::With(a), Type::With(b)) => {
                if let Some(missing) = b.keys().find(|k| !a.contains_key(*k)) {
                    return refuted(format!("label `{missing}` of the right external choice is missing on the left"));
                }
                let subs = b.iter().map(|(k, t)| cont(format!("&{k}"), &a[k], t, Variance::Co)).collect();
                self.all(Rule::With, l, r, subs, depth, side, true)
            }
            (Type::Tensor(a1, a2), Type::Tensor(b1, b2)) => {
                let subs = vec![cont("*.left".into(), a1, b1, Variance::Co), cont("*.right".into(), a2, b2, Variance::Co)];
                self.all(Rule::Tensor, l, r, subs, depth, side, true)
            }
            (Type::Lolli(a1, a2), Type::Lolli(b1, b2)) => {
                let subs =
                    vec![cont("-o.left".into(), a1, b1, Variance::Contra), cont("-o.right".into(), a2, b2, Variance::Co)];
                self.all(Rule::Lolli, l, r, subs, depth, side, true)
            }
            (Type::One, Type::One) => Verdict::Subtype(Derivation::leaf(Rule::One, l, r)),
            (Type::Exists(x, a), Type::Exists(y, b)) | (Type::Forall(x, a), Type::Forall(y, b)) => {
                let z = self.fresh_var(vars);
                let a2 = apply_var_subst(a, &VarSubst::single(x.clone(), Type::Var(z.clone())));
                let b2 = apply_var_subst(b, &VarSubst::single(y.clone(), Type::Var(z.clone())));
                let mut vars2 = vars.clone();
                vars2.insert(z.clone());
                let rule = if matches!(l, Type::Exists(..)) { Rule::Exists } else { Rule::Forall };
                let sub = Sub { step: format!("{rule} {z}"), vars: vars2, lhs: a2, rhs: b2, at: Variance::Co };
                self.all(rule, l, r, vec![sub], depth, side, true)
            }
            (Type::Var(x), Type::Var(y)) | (Type::Param(x), Type::Param(y)) => {
                if x == y {
                    Verdict::Subtype(Derivation::leaf(Rule::Var, l, r))
                } else {
                    refuted(format!("variables `{x}` and `{y}` differ"))
                }
            }
            _ => refuted(format!("constructor clash between `{l}` and `{r}`")),
        }
    }

    fn fresh_var(&mut self, vars: &BTreeSet<String>) -> String {
        loop {
            let z = format!("z{}", self.fresh);
            self.fresh += 1;
            if !vars.contains(&z) {
                return z;
            }
        }
    }

    /// Conjunction: the first refutation wins, otherwise any exhaustion.
    #[allow(clippy::too_many_arguments)]
    fn all(
        &mut self,
        rule: Rule,
        l: &Type,
        r: &Type,
        subs: Vec<Sub>,
        depth: usize,
        side: usize,
        continuations: bool,
    ) -> Verdict {
        let mut children = Vec::with_capacity(subs.len());
        let mut unknown = None;
        for s in subs {
            if continuations && (!s.lhs.is_named() || !s.rhs.is_named()) {
                self.stats.alternation_violations += 1;
            }
            match self.sub(&s.vars, &s.lhs, &s.rhs, s.at, depth, side) {
                Verdict::Subtype(d) => children.push(d),
                Verdict::NotSubtype(mut refutation) => {
                    refutation.path.insert(0, s.step);
                    return Verdict::NotSubtype(refutation);
                }
                Verdict::Unknown(e) => {
                    if unknown.is_none() {
                        unknown = Some(e);
                    }
                }
            }
        }
        match unknown {
            Some(e) => Verdict::Unknown(e),
            None => Verdict::Subtype(Derivation::node(rule, l, r, children)),
        }
    }

    fn named(&mut self, vars: &BTreeSet<String>, l: &Type, r: &Type, depth: usize, side: usize) -> Verdict {
        let (Type::Named(v1, th1), Type::Named(v2, th2)) = (l, r) else {
            unreachable!("named goal with structural side");
        };
        if let Some(d) = self.def(vars, l, r, v1, th1, v2, th2, depth, side) {
            return Verdict::Subtype(d);
        }
        if v1 == v2 {
            let Some(def) = self.sig.get(v1) else {
                return refuted(format!("undefined type name `{v1}`"));
            };
            let subs = def
                .params
                .0
                .iter()
                .map(|(p, pv)| Sub {
                    step: format!("refl {v1}[{p}]"),
                    vars: vars.clone(),
                    lhs: th1.get(p).cloned().unwrap_or(Type::Param(p.clone())),
                    rhs: th2.get(p).cloned().unwrap_or(Type::Param(p.clone())),
                    at: pv.nest(Variance::Co),
                })
                .collect();
            return self.all(Rule::Refl, l, r, subs, depth, side, false);
        }
        self.expd(vars, l, r, depth, side)
    }

    #[allow(clippy::too_many_arguments)]
    fn def(
        &mut self,
        vars: &BTreeSet<String>,
        l: &Type,
        r: &Type,
        v1: &str,
        th1: &ParamSubst,
        v2: &str,
        th2: &ParamSubst,
        depth: usize,
        side: usize,
    ) -> Option<Derivation> {
        if side >= self.budget.side_conditions {
            return None;
        }
        for idx in (0..self.gamma.len()).rev() {
            let heads = (self.gamma[idx].lhs.head(), self.gamma[idx].rhs.head());
            if heads != (Some(v1), Some(v2)) {
                continue;
            }
            let c = self.gamma[idx].clone();
            let (Type::Named(_, cth1), Type::Named(_, cth2)) = (&c.lhs, &c.rhs) else { continue };
            let (_, rhs_vars) = free_vars(&c.rhs);
            let (_, lhs_vars) = free_vars(&c.lhs);
            // Strategy 1: instantiate from the left arguments, check the right.
            if let Ok(sigma) = match_args(cth1, th1, &c.vars) {
                if covers(&sigma, &c.vars, &rhs_vars) {
                    let inst = apply_var_subst(&c.rhs, &sigma);
                    if let Some(d) = self.side_condition(vars, &inst, r, depth, side) {
                        return Some(self.def_node(l, r, idx, &c, &sigma, d));
                    }
                }
            }
            // Strategy 2: instantiate from the right arguments, check the left.
            if let Ok(sigma) = match_args(cth2, th2, &c.vars) {
                if covers(&sigma, &c.vars, &lhs_vars) {
                    let inst = apply_var_subst(&c.lhs, &sigma);
                    if let Some(d) = self.side_condition(vars, l, &inst, depth, side) {
                        return Some(self.def_node(l, r, idx, &c, &sigma, d));
                    }
                }
            }
        }
        None
    }

    fn side_condition(&mut self, vars: &BTreeSet<String>, a: &Type, b: &Type, depth: usize, side: usize) -> Option<Derivation> {
        if a == b {
            return Some(Derivation::leaf(Rule::Refl, a, b).with_note("identical"));
        }
        let saved = self.gamma.len();
        let v = self.sub(vars, a, b, Variance::Co, depth, side + 1);
        self.gamma.truncate(saved);
        match v {
            Verdict::Subtype(d) => Some(d),
            _ => None,
        }
    }

    fn def_node(&self, l: &Type, r: &Type, idx: usize, c: &Closure, sigma: &VarSubst, side: Derivation) -> Derivation {
        let mut note = format!("{c}");
        if !sigma.is_empty() {
            let parts: Vec<String> = sigma.iter().map(|(x, t)| format!("{t}/{x}")).collect();
            note.push_str(&format!(" with {}", parts.join(", ")));
        }
        let mut d = Derivation::node(Rule::Def, l, r, vec![side]).with_note(note);
        if idx < self.n_seeds {
            d.seed = Some(idx);
        }
        d
    }

    fn expd(&mut self, vars: &BTreeSet<String>, l: &Type, r: &Type, depth: usize, side: usize) -> Verdict {
        if depth >= self.budget.depth {
            return Verdict::Unknown(Exhaustion { budget: BudgetKind::Depth, frontier: format!("{l} <= {r}") });
        }
        let (ul, ur) = match (unfold(self.sig, l), unfold(self.sig, r)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return refuted(e.to_string()),
        };
        self.stats.max_depth = self.stats.max_depth.max(depth + 1);
        self.gamma.push(Closure { vars: vars.clone(), lhs: l.clone(), rhs: r.clone() });
        let v = self.sub_co(vars, &ul, &ur, depth + 1, side);
        self.gamma.pop();
        match v {
            Verdict::Subtype(d) => Verdict::Subtype(Derivation::node(Rule::Expd, l, r, vec![d])),
            Verdict::NotSubtype(mut refutation) => {
                refutation.path.insert(0, format!("expd {l} <= {r}"));
                Verdict::NotSubtype(refutation)
            }
            other => other,
        }
    }
}

fn covers(sigma: &VarSubst, closure_vars: &BTreeSet<String>, needed: &BTreeSet<String>) -> bool {
    needed.iter().filter(|x| closure_vars.contains(*x)).all(|x| sigma.get(x).is_some())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rename::internal_rename;
    use crate::syntax::parse_program;
    use crate::variance::infer_variances;

    fn run(src: &str) -> Vec<Verdict> {
        let p = parse_program(src).unwrap();
        let r = internal_rename(&p).unwrap();
        let sig = infer_variances(&r.sig);
        let seeds = seeds_of(&r.eqtypes);
        r.queries
            .iter()
            .map(|q| check_subtype(&sig, &seeds, &Goal::new(q.lhs.clone(), q.rhs.clone())))
            .collect()
    }

    const NAT: &str = "type nat = +{z : 1, s : nat}\ntype even = +{z : 1, s : odd}\ntype odd = +{s : even}\n";

    #[test]
    fn nat_even_odd() {
        let v = run(&format!("{NAT}check even <= nat\ncheck odd <= nat\ncheck nat <= even\ncheck nat <= nat"));
        assert!(v[0].is_subtype());
        assert!(v[1].is_subtype());
        assert!(v[2].is_not_subtype());
        assert!(v[3].is_subtype());
    }

    #[test]
    fn refutation_path_points_at_failure() {
        let v = run(&format!("{NAT}check nat <= even"));
        let Verdict::NotSubtype(r) = &v[0] else { panic!() };
        assert!(r.reason.contains("`z`"), "{r:?}");
        assert!(r.path.iter().any(|s| s.starts_with("+s")), "{r:?}");
    }

    #[test]
    fn quantifiers_use_shared_fresh_variable() {
        let v = run("type H = +{nil : 1, cons : ?x. x * H}\ntype N = +{nil : 1}\ntype C[k] = +{cons : ?x. x * k}\n\
                     check C[N] <= H\ncheck C[C[N]] <= H\ncheck H <= C[H]");
        assert!(v[0].is_subtype());
        assert!(v[1].is_subtype());
        assert!(v[2].is_not_subtype());
    }

    #[test]
    fn top_variance_requires_both_directions() {
        let v = run(&format!(
            "{NAT}type List[a] = +{{nil : 1, cons : a * List[a]}}\ntype Seg[a] = List[a] -o List[a]\n\
             check Seg[even] <= Seg[nat]\ncheck Seg[nat] <= Seg[even]\ncheck Seg[nat] <= Seg[nat]"
        ));
        assert!(v[0].is_not_subtype());
        assert!(v[1].is_not_subtype());
        assert!(v[2].is_subtype());
    }

    #[test]
    fn depth_budget_yields_unknown() {
        let src = "type T[a] = +{L : T[T[a]], R : a}\ntype T'[b] = +{L : T'[T'[b]], R : b}\n\
                   type D = +{L : T[D], $ : 1}\ntype D' = +{L : T'[D'], R : 1, $ : 1}\ncheck D <= D'";
        let v = run(src);
        let Verdict::Unknown(e) = &v[0] else { panic!("{:?}", v[0]) };
        assert_eq!(e.budget, BudgetKind::Depth);
        let v = run(&format!("{src}\neqtype T[x] <= T'[x]"));
        assert!(v[0].is_subtype());
    }

    #[test]
    fn guarded_check_rejects_self_justification() {
        let p = parse_program(&format!("{NAT}eqtype nat <= even")).unwrap();
        let r = internal_rename(&p).unwrap();
        let seeds = seeds_of(&r.eqtypes);
        let goal = Goal::new(r.eqtypes[0].lhs.clone(), r.eqtypes[0].rhs.clone());
        assert!(Checker::new(&r.sig, &seeds).check(&goal).verdict.is_subtype());
        assert!(Checker::new(&r.sig, &seeds).check_guarded(&goal).verdict.is_not_subtype());
    }

    #[test]
    fn subst_subtype_respects_variance() {
        let p = parse_program(NAT).unwrap();
        let r = internal_rename(&p).unwrap();
        let ctx = VarianceContext(vec![("a".into(), Variance::Contra), ("b".into(), Variance::Bot)]);
        let th1 = ParamSubst(vec![("a".into(), Type::named("nat")), ("b".into(), Type::named("nat"))]);
        let th2 = ParamSubst(vec![("a".into(), Type::named("even")), ("b".into(), Type::named("odd"))]);
        let v = check_subst_subtype(&r.sig, &[], &BTreeSet::new(), &ctx, &th1, &th2, Variance::Co);
        assert!(v.is_subtype());
        let v = check_subst_subtype(&r.sig, &[], &BTreeSet::new(), &ctx, &th2, &th1, Variance::Co);
        assert!(v.is_not_subtype());
    }
}
