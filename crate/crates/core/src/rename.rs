//! Substitution, one-step unfolding and internal renaming.
//!
//! Internal renaming gives every continuation position its own type name so
//! that structural constructors and type names alternate.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::syntax::{free_vars, Choices, Item, ParamSubst, Program, Type, VarSubst};
use crate::variance::{infer_variances, Signature, TypeDef};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RenameError {
    #[error("undefined type name `{0}`")]
    UndefinedName(String),
}

/// One step of definitional unfolding. Non-names are returned unchanged.
pub fn unfold(sig: &Signature, t: &Type) -> Result<Type, RenameError> {
    match t {
        Type::Named(v, args) => {
            let def = sig.get(v).ok_or_else(|| RenameError::UndefinedName(v.clone()))?;
            Ok(apply_param_subst(&def.body, args))
        }
        _ => Ok(t.clone()),
    }
}

/// Unfolds until the result is structural.
pub fn unfold_structural(sig: &Signature, t: &Type) -> Result<Type, RenameError> {
    let mut cur = unfold(sig, t)?;
    while cur.is_named() {
        cur = unfold(sig, &cur)?;
    }
    Ok(cur)
}

/// Simultaneous, capture-avoiding substitution for type parameters.
pub fn apply_param_subst(t: &Type, theta: &ParamSubst) -> Type {
    if theta.is_empty() {
        return t.clone();
    }
    let mut payload_vars = BTreeSet::new();
    for a in theta.types() {
        payload_vars.extend(free_vars(a).1);
    }
    param_subst(t, theta, &payload_vars)
}

fn param_subst(t: &Type, theta: &ParamSubst, avoid: &BTreeSet<String>) -> Type {
    match t {
        Type::Param(p) => theta.get(p).cloned().unwrap_or_else(|| t.clone()),
        Type::One | Type::Var(_) => t.clone(),
        Type::Plus(ch) => Type::Plus(map_choices(ch, |b| param_subst(b, theta, avoid))),
        Type::With(ch) => Type::With(map_choices(ch, |b| param_subst(b, theta, avoid))),
        Type::Tensor(a, b) => Type::tensor(param_subst(a, theta, avoid), param_subst(b, theta, avoid)),
        Type::Lolli(a, b) => Type::lolli(param_subst(a, theta, avoid), param_subst(b, theta, avoid)),
        Type::Exists(x, b) | Type::Forall(x, b) => {
            let (x2, body) = if avoid.contains(x) {
                let fresh = fresh_name(x, avoid, b);
                let renamed = apply_var_subst(b, &VarSubst::single(x.clone(), Type::Var(fresh.clone())));
                (fresh, renamed)
            } else {
                (x.clone(), (**b).clone())
            };
            rebuild_binder(t, x2, param_subst(&body, theta, avoid))
        }
        Type::Named(v, args) => Type::Named(
            v.clone(),
            args.iter().map(|(p, a)| (p.clone(), param_subst(a, theta, avoid))).collect(),
        ),
    }
}

/// Simultaneous, capture-avoiding substitution for quantified variables.
pub fn apply_var_subst(t: &Type, sigma: &VarSubst) -> Type {
    if sigma.is_empty() {
        return t.clone();
    }
    match t {
        Type::Var(x) => sigma.get(x).cloned().unwrap_or_else(|| t.clone()),
        Type::One | Type::Param(_) => t.clone(),
        Type::Plus(ch) => Type::Plus(map_choices(ch, |b| apply_var_subst(b, sigma))),
        Type::With(ch) => Type::With(map_choices(ch, |b| apply_var_subst(b, sigma))),
        Type::Tensor(a, b) => Type::tensor(apply_var_subst(a, sigma), apply_var_subst(b, sigma)),
        Type::Lolli(a, b) => Type::lolli(apply_var_subst(a, sigma), apply_var_subst(b, sigma)),
        Type::Exists(x, b) | Type::Forall(x, b) => {
            let mut inner = sigma.clone();
            inner.0.remove(x);
            let (_, body_free_vars) = free_vars(b);
            // Only entries for variables actually free in the body can capture.
            inner.0.retain(|k, _| body_free_vars.contains(k));
            let mut avoid = BTreeSet::new();
            for (_, a) in inner.iter() {
                avoid.extend(free_vars(a).1);
            }
            if avoid.contains(x) {
                let fresh = fresh_name(x, &avoid, b);
                inner.insert(x.clone(), Type::Var(fresh.clone()));
                rebuild_binder(t, fresh, apply_var_subst(b, &inner))
            } else {
                rebuild_binder(t, x.clone(), apply_var_subst(b, &inner))
            }
        }
        Type::Named(v, args) => {
            Type::Named(v.clone(), args.iter().map(|(p, a)| (p.clone(), apply_var_subst(a, sigma))).collect())
        }
    }
}

fn rebuild_binder(orig: &Type, x: String, body: Type) -> Type {
    match orig {
        Type::Exists(..) => Type::exists(x, body),
        _ => Type::forall(x, body),
    }
}

fn fresh_name(x: &str, avoid: &BTreeSet<String>, body: &Type) -> String {
    let (_, body_vars) = free_vars(body);
    let mut name = format!("{x}'");
    while avoid.contains(&name) || body_vars.contains(&name) {
        name.push('\'');
    }
    name
}

fn map_choices(ch: &Choices, mut f: impl FnMut(&Type) -> Type) -> Choices {
    ch.iter().map(|(l, t)| (l.clone(), f(t))).collect()
}

/// An `eqtype` after renaming: both sides are type names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenamedEq {
    pub vars: Vec<String>,
    pub lhs: Type,
    pub rhs: Type,
    pub bidirectional: bool,
    pub source: (Type, Type),
    pub line: usize,
}

/// A `check` query after renaming: both sides are type names.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RenamedQuery {
    pub lhs: Type,
    pub rhs: Type,
    pub source: (Type, Type),
    pub line: usize,
}

#[derive(Clone, Debug)]
pub struct RenamedProgram {
    /// User definitions first, in source order, then internal ones.
    pub sig: Signature,
    pub user_defs: Vec<String>,
    pub eqtypes: Vec<RenamedEq>,
    pub queries: Vec<RenamedQuery>,
}

/// Renames every definition body, eqtype side and query side, then re-infers variances.
pub fn internal_rename(program: &Program) -> Result<RenamedProgram, RenameError> {
    let sig = Signature::from_program(program);
    let mut r = Renamer::new(&sig)?;
    r.rename_defs(&sig);
    let mut eqtypes = Vec::new();
    let mut queries = Vec::new();
    for item in &program.items {
        match item {
            Item::EqType(e) => {
                let lhs = r.wrap(&e.lhs);
                let rhs = r.wrap(&e.rhs);
                eqtypes.push(RenamedEq {
                    vars: e.vars.clone(),
                    lhs,
                    rhs,
                    bidirectional: e.bidirectional,
                    source: (e.lhs.clone(), e.rhs.clone()),
                    line: e.line,
                });
            }
            Item::Check(c) => {
                let lhs = r.wrap(&c.lhs);
                let rhs = r.wrap(&c.rhs);
                queries.push(RenamedQuery { lhs, rhs, source: (c.lhs.clone(), c.rhs.clone()), line: c.line });
            }
            _ => {}
        }
    }
    Ok(RenamedProgram {
        sig: infer_variances(&r.out),
        user_defs: sig.defs.keys().cloned().collect(),
        eqtypes,
        queries,
    })
}

/// Renames a signature on its own. Applying it to its own output adds nothing.
pub fn rename_signature(sig: &Signature) -> Result<Signature, RenameError> {
    let mut r = Renamer::new(sig)?;
    r.rename_defs(sig);
    Ok(infer_variances(&r.out))
}

/// Wraps `t` as a type name in an already renamed signature, adding
/// definitions to `sig` as needed. Returns the name and the new signature.
pub fn wrap_type(sig: &Signature, t: &Type) -> Result<(Type, Signature), RenameError> {
    let mut r = Renamer::new(sig)?;
    r.out = sig.clone();
    r.next_internal = sig.defs.keys().filter(|k| k.starts_with("%X")).count();
    r.next_query = sig.defs.keys().filter(|k| k.starts_with("%Q")).count();
    let w = r.wrap(t);
    Ok((w, infer_variances(&r.out)))
}

struct Renamer {
    out: Signature,
    table: HashMap<(Vec<String>, Type), String>,
    next_internal: usize,
    next_query: usize,
}

impl Renamer {
    fn new(sig: &Signature) -> Result<Self, RenameError> {
        for def in sig.defs.values() {
            check_names(sig, &def.body)?;
        }
        Ok(Renamer { out: Signature::default(), table: HashMap::new(), next_internal: 0, next_query: 0 })
    }

    fn rename_defs(&mut self, sig: &Signature) {
        for (name, def) in &sig.defs {
            self.out.defs.insert(name.clone(), def.clone());
        }
        for (name, def) in &sig.defs {
            let body = self.structural(&def.body);
            self.out.defs[name] = TypeDef { params: def.params.clone(), body };
        }
    }

    /// Keeps the outermost constructor and names each continuation.
    fn structural(&mut self, t: &Type) -> Type {
        match t {
            Type::Plus(ch) => Type::Plus(map_choices(ch, |b| self.name_of(b))),
            Type::With(ch) => Type::With(map_choices(ch, |b| self.name_of(b))),
            Type::Tensor(a, b) => Type::tensor(self.name_of(a), self.name_of(b)),
            Type::Lolli(a, b) => Type::lolli(self.name_of(a), self.name_of(b)),
            Type::Exists(x, b) => Type::exists(x.clone(), self.name_of(b)),
            Type::Forall(x, b) => Type::forall(x.clone(), self.name_of(b)),
            Type::Named(..) => self.name_of(t),
            Type::One | Type::Var(_) | Type::Param(_) => t.clone(),
        }
    }

    fn arg_of(&mut self, t: &Type) -> Type {
        match t {
            Type::Param(_) | Type::Var(_) => t.clone(),
            _ => self.name_of(t),
        }
    }

    fn name_of(&mut self, t: &Type) -> Type {
        if let Type::Named(v, args) = t {
            return Type::Named(v.clone(), args.iter().map(|(p, a)| (p.clone(), self.arg_of(a))).collect());
        }
        let (params, lifted, body) = lift(t);
        let body = self.structural(&body);
        let key = (params.clone(), body);
        let name = match self.table.get(&key) {
            Some(n) => n.clone(),
            None => {
                self.next_internal += 1;
                let n = format!("%X{}", self.next_internal);
                self.out.insert(n.clone(), &params, key.1.clone());
                self.table.insert(key, n.clone());
                n
            }
        };
        Type::Named(name, ParamSubst(lifted))
    }

    fn wrap(&mut self, t: &Type) -> Type {
        if t.is_named() {
            return self.name_of(t);
        }
        let (params, lifted, body) = lift(t);
        let body = self.structural(&body);
        self.next_query += 1;
        let n = format!("%Q{}", self.next_query);
        self.out.insert(n.clone(), &params, body);
        Type::Named(n, ParamSubst(lifted))
    }
}

/// Free parameters (sorted) then free quantified variables (sorted, turned into
/// parameters). Returns the parameter list, the use-site arguments and the lifted body.
fn lift(t: &Type) -> (Vec<String>, Vec<(String, Type)>, Type) {
    let (fp, fv) = free_vars(t);
    let mut params: Vec<String> = fp.iter().cloned().collect();
    let mut args: Vec<(String, Type)> = fp.iter().map(|p| (p.clone(), Type::Param(p.clone()))).collect();
    let mut sigma = VarSubst::new();
    for x in &fv {
        let mut name = x.clone();
        while params.contains(&name) {
            name.push('\'');
        }
        params.push(name.clone());
        args.push((name.clone(), Type::Var(x.clone())));
        sigma.insert(x.clone(), Type::Param(name));
    }
    (params, args, apply_var_subst(t, &sigma))
}

fn check_names(sig: &Signature, t: &Type) -> Result<(), RenameError> {
    match t {
        Type::Named(v, args) => {
            if sig.get(v).is_none() {
                return Err(RenameError::UndefinedName(v.clone()));
            }
            args.types().try_for_each(|a| check_names(sig, a))
        }
        Type::Plus(ch) | Type::With(ch) => ch.values().try_for_each(|b| check_names(sig, b)),
        Type::Tensor(a, b) | Type::Lolli(a, b) => {
            check_names(sig, a)?;
            check_names(sig, b)
        }
        Type::Exists(_, b) | Type::Forall(_, b) => check_names(sig, b),
        Type::One | Type::Var(_) | Type::Param(_) => Ok(()),
    }
}

/// True if every body is structural and every continuation is a type name.
pub fn alternates(sig: &Signature) -> bool {
    fn conts_named(t: &Type) -> bool {
        match t {
            Type::Plus(ch) | Type::With(ch) => ch.values().all(Type::is_named),
            Type::Tensor(a, b) | Type::Lolli(a, b) => a.is_named() && b.is_named(),
            Type::Exists(_, b) | Type::Forall(_, b) => b.is_named(),
            Type::One | Type::Var(_) | Type::Param(_) => true,
            Type::Named(..) => false,
        }
    }
    sig.defs.values().all(|d| conts_named(&d.body))
}
