//! Variance lattice, signatures, variance inference and type validity.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::syntax::{ParamSubst, Program, Scope, Type};

/// Four-point lattice: `Bot` below `Co` and `Contra`, both below `Top`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Variance {
    Bot,
    Co,
    Contra,
    Top,
}

pub use Variance::*;

impl Variance {
    pub const ALL: [Variance; 4] = [Bot, Co, Contra, Top];

    pub fn leq(self, other: Variance) -> bool {
        self == other || self == Bot || other == Top
    }

    /// Variance of an occurrence at `inner` inside a context at `self`.
    pub fn nest(self, inner: Variance) -> Variance {
        match (self, inner) {
            (Bot, _) | (_, Bot) => Bot,
            (Top, _) | (_, Top) => Top,
            (Co, x) => x,
            (Contra, Co) => Contra,
            (Contra, Contra) => Co,
        }
    }

    pub fn neg(self) -> Variance {
        Contra.nest(self)
    }

    pub fn join(self, other: Variance) -> Variance {
        if self.leq(other) {
            other
        } else if other.leq(self) {
            self
        } else {
            Top
        }
    }

    pub fn symbol(self) -> &'static str {
        match self {
            Bot => "⊥",
            Co => "+",
            Contra => "-",
            Top => "⊤",
        }
    }
}

impl fmt::Display for Variance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

impl Serialize for Variance {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.symbol())
    }
}

/// Parameters of a definition with their variances, in declaration order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarianceContext(pub Vec<(String, Variance)>);

impl VarianceContext {
    pub fn get(&self, p: &str) -> Option<Variance> {
        self.0.iter().find(|(q, _)| q == p).map(|(_, v)| *v)
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(p, _)| p.as_str())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Pointwise `outer.nest(v)`.
    pub fn nest(&self, outer: Variance) -> VarianceContext {
        VarianceContext(self.0.iter().map(|(p, v)| (p.clone(), outer.nest(*v))).collect())
    }

    pub fn bottom(params: &[String]) -> VarianceContext {
        VarianceContext(params.iter().map(|p| (p.clone(), Bot)).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDef {
    pub params: VarianceContext,
    pub body: Type,
}

/// Type definitions by name, in definition order.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Signature {
    pub defs: IndexMap<String, TypeDef>,
}

impl Signature {
    pub fn get(&self, name: &str) -> Option<&TypeDef> {
        self.defs.get(name)
    }

    pub fn insert(&mut self, name: impl Into<String>, params: &[String], body: Type) {
        self.defs.insert(name.into(), TypeDef { params: VarianceContext::bottom(params), body });
    }

    /// Definitions of a parsed program, every parameter at `Bot`.
    pub fn from_program(p: &Program) -> Signature {
        let mut sig = Signature::default();
        for d in p.typedefs() {
            sig.insert(d.name.clone(), &d.params, d.body.clone());
        }
        sig
    }

    pub fn variance_of(&self, name: &str, param: &str) -> Option<Variance> {
        self.get(name)?.params.get(param)
    }

    /// A parsing scope knowing every name of this signature.
    pub fn scope(&self) -> Scope {
        Scope::new(self.defs.iter().map(|(n, d)| (n.clone(), d.params.names().map(String::from).collect())).collect())
    }
}

/// Least variance assignment making every body valid, computed by fixpoint from `Bot`.
pub fn infer_variances(sig: &Signature) -> Signature {
    let mut cur = sig.clone();
    for def in cur.defs.values_mut() {
        for (_, v) in def.params.0.iter_mut() {
            *v = Bot;
        }
    }
    loop {
        let mut next = cur.clone();
        for (name, def) in next.defs.iter_mut() {
            let mut acc: Vec<(String, Variance)> = def.params.0.iter().map(|(p, _)| (p.clone(), Bot)).collect();
            occurrences(&cur, &cur.defs[name].body, Co, &mut acc);
            def.params = VarianceContext(acc);
        }
        if next == cur {
            return cur;
        }
        cur = next;
    }
}

fn occurrences(sig: &Signature, t: &Type, at: Variance, acc: &mut [(String, Variance)]) {
    match t {
        Type::Plus(ch) | Type::With(ch) => ch.values().for_each(|b| occurrences(sig, b, at, acc)),
        Type::Tensor(a, b) => {
            occurrences(sig, a, at, acc);
            occurrences(sig, b, at, acc);
        }
        Type::Lolli(a, b) => {
            occurrences(sig, a, at.neg(), acc);
            occurrences(sig, b, at, acc);
        }
        Type::Exists(_, b) | Type::Forall(_, b) => occurrences(sig, b, at, acc),
        Type::Param(p) => {
            if let Some(slot) = acc.iter_mut().find(|(q, _)| q == p) {
                slot.1 = slot.1.join(at);
            }
        }
        Type::Named(v, args) => {
            for (p, a) in args.iter() {
                let inner = sig.variance_of(v, p).unwrap_or(Bot);
                occurrences(sig, a, at.nest(inner), acc);
            }
        }
        Type::One | Type::Var(_) => {}
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ValidityKind {
    ParamVariance { param: String, required: Variance, declared: Variance },
    UnboundParam(String),
    UnboundVar(String),
    UndefinedName(String),
    ArityMismatch { name: String, expected: Vec<String>, found: Vec<String> },
    NonContractive(String),
    DuplicateParam(String),
}

impl fmt::Display for ValidityKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ValidityKind::ParamVariance { param, required, declared } => {
                write!(f, "parameter `{param}` is used at {required} but declared {declared}")
            }
            ValidityKind::UnboundParam(p) => write!(f, "unbound parameter `{p}`"),
            ValidityKind::UnboundVar(x) => write!(f, "unbound quantified variable `{x}`"),
            ValidityKind::UndefinedName(n) => write!(f, "undefined type name `{n}`"),
            ValidityKind::ArityMismatch { name, expected, found } => write!(
                f,
                "`{name}` expects parameters [{}], found [{}]",
                expected.join(", "),
                found.join(", ")
            ),
            ValidityKind::NonContractive(n) => write!(f, "body of `{n}` is a type name"),
            ValidityKind::DuplicateParam(p) => write!(f, "duplicate parameter `{p}`"),
        }
    }
}

/// A validity failure with the path from the root to the offending leaf.
#[derive(Clone, Debug, Error, PartialEq, Eq)]
#[error("{}: {kind}", if path.is_empty() { "<root>".to_string() } else { path.join(" / ") })]
pub struct ValidityError {
    pub path: Vec<String>,
    pub kind: ValidityKind,
}

/// Checks that `t` is valid at variance `at` under quantified variables `vars`
/// and parameter context `ctx`.
pub fn check_type_valid(
    vars: &BTreeSet<String>,
    ctx: &VarianceContext,
    t: &Type,
    at: Variance,
    sig: &Signature,
) -> Result<(), ValidityError> {
    let mut vars = vars.clone();
    let mut path = Vec::new();
    valid(&mut vars, ctx, t, at, sig, &mut path)
}

/// Checks every argument of `name`'s substitution at the callee's variance nested in `at`.
pub fn check_subst_valid(
    vars: &BTreeSet<String>,
    ctx: &VarianceContext,
    name: &str,
    subst: &ParamSubst,
    at: Variance,
    sig: &Signature,
) -> Result<(), ValidityError> {
    let mut vars = vars.clone();
    let mut path = Vec::new();
    valid_subst(&mut vars, ctx, name, subst, at, sig, &mut path)
}

fn fail(path: &[String], kind: ValidityKind) -> Result<(), ValidityError> {
    Err(ValidityError { path: path.to_vec(), kind })
}

fn valid(
    vars: &mut BTreeSet<String>,
    ctx: &VarianceContext,
    t: &Type,
    at: Variance,
    sig: &Signature,
    path: &mut Vec<String>,
) -> Result<(), ValidityError> {
    match t {
        Type::One => Ok(()),
        Type::Plus(ch) | Type::With(ch) => {
            let sym = if matches!(t, Type::Plus(_)) { "+" } else { "&" };
            for (l, b) in ch {
                path.push(format!("{sym}{l}"));
                valid(vars, ctx, b, at, sig, path)?;
                path.pop();
            }
            Ok(())
        }
        Type::Tensor(a, b) | Type::Lolli(a, b) => {
            let (sym, left_at) = if matches!(t, Type::Tensor(..)) { ("*", at) } else { ("-o", at.neg()) };
            path.push(format!("{sym}.left"));
            valid(vars, ctx, a, left_at, sig, path)?;
            path.pop();
            path.push(format!("{sym}.right"));
            valid(vars, ctx, b, at, sig, path)?;
            path.pop();
            Ok(())
        }
        Type::Exists(x, b) | Type::Forall(x, b) => {
            let sym = if matches!(t, Type::Exists(..)) { "?" } else { "!" };
            let fresh = vars.insert(x.clone());
            path.push(format!("{sym}{x}"));
            let r = valid(vars, ctx, b, at, sig, path);
            path.pop();
            if fresh {
                vars.remove(x);
            }
            r
        }
        Type::Var(x) => {
            if vars.contains(x) {
                Ok(())
            } else {
                fail(path, ValidityKind::UnboundVar(x.clone()))
            }
        }
        Type::Param(p) => match ctx.get(p) {
            None => fail(path, ValidityKind::UnboundParam(p.clone())),
            Some(declared) if at.leq(declared) => Ok(()),
            Some(declared) => fail(
                path,
                ValidityKind::ParamVariance { param: p.clone(), required: at, declared },
            ),
        },
        Type::Named(v, args) => valid_subst(vars, ctx, v, args, at, sig, path),
    }
}

fn valid_subst(
    vars: &mut BTreeSet<String>,
    ctx: &VarianceContext,
    name: &str,
    subst: &ParamSubst,
    at: Variance,
    sig: &Signature,
    path: &mut Vec<String>,
) -> Result<(), ValidityError> {
    let Some(def) = sig.get(name) else {
        return fail(path, ValidityKind::UndefinedName(name.to_string()));
    };
    let expected: Vec<String> = def.params.names().map(String::from).collect();
    let found: Vec<String> = subst.iter().map(|(p, _)| p.clone()).collect();
    if expected != found {
        return fail(path, ValidityKind::ArityMismatch { name: name.to_string(), expected, found });
    }
    for ((p, a), (_, pv)) in subst.iter().zip(def.params.0.iter()) {
        path.push(format!("{name}[{p}]"));
        valid(vars, ctx, a, at.nest(*pv), sig, path)?;
        path.pop();
    }
    Ok(())
}

/// Checks contractivity, distinct parameters, name resolution and that every
/// body is valid at `Co` under its own parameters. Errors are reported per definition.
pub fn check_signature_valid(sig: &Signature) -> Result<(), Vec<ValidityError>> {
    let mut errors = Vec::new();
    for (name, def) in &sig.defs {
        let root = vec![name.clone()];
        let mut seen = BTreeSet::new();
        if let Some(dup) = def.params.names().find(|p| !seen.insert(*p)) {
            errors.push(ValidityError { path: root, kind: ValidityKind::DuplicateParam(dup.to_string()) });
            continue;
        }
        if def.body.is_named() {
            errors.push(ValidityError { path: root, kind: ValidityKind::NonContractive(name.clone()) });
            continue;
        }
        if let Err(mut e) = check_type_valid(&BTreeSet::new(), &def.params, &def.body, Co, sig) {
            e.path.insert(0, name.clone());
            errors.push(e);
        }
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}
