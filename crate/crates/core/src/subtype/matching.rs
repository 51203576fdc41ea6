use std::collections::BTreeSet;

use thiserror::Error;

use crate::syntax::{free_vars, ParamSubst, Type, VarSubst};

#[derive(Debug, Error, Clone, Copy, PartialEq, Eq)]
#[error("arguments do not match")]
pub struct NoMatch;

/// First-order matching of `pattern` against `subject`. Variables in
/// `pattern_vars` may be instantiated; everything else must agree exactly.
pub fn match_args(
    pattern: &ParamSubst,
    subject: &ParamSubst,
    pattern_vars: &BTreeSet<String>,
) -> Result<VarSubst, NoMatch> {
    if pattern.len() != subject.len() {
        return Err(NoMatch);
    }
    let mut sigma = VarSubst::new();
    let mut bound = Vec::new();
    for ((p, a), (q, b)) in pattern.iter().zip(subject.iter()) {
        if p != q {
            return Err(NoMatch);
        }
        match_type(a, b, pattern_vars, &mut bound, &mut sigma)?;
    }
    Ok(sigma)
}

/// Matches whole types with the same conventions as [`match_args`].
pub fn match_type_with(
    pattern: &Type,
    subject: &Type,
    pattern_vars: &BTreeSet<String>,
) -> Result<VarSubst, NoMatch> {
    let mut sigma = VarSubst::new();
    match_type(pattern, subject, pattern_vars, &mut Vec::new(), &mut sigma)?;
    Ok(sigma)
}

fn match_type(
    pat: &Type,
    sub: &Type,
    pvars: &BTreeSet<String>,
    bound: &mut Vec<String>,
    sigma: &mut VarSubst,
) -> Result<(), NoMatch> {
    match (pat, sub) {
        (Type::Var(x), _) if pvars.contains(x) && !bound.contains(x) => {
            if free_vars(sub).1.iter().any(|v| bound.contains(v)) {
                return Err(NoMatch);
            }
            match sigma.get(x) {
                Some(prev) if prev != sub => Err(NoMatch),
                Some(_) => Ok(()),
                None => {
                    sigma.insert(x.clone(), sub.clone());
                    Ok(())
                }
            }
        }
        (Type::Var(x), Type::Var(y)) | (Type::Param(x), Type::Param(y)) => eq(x == y),
        (Type::One, Type::One) => Ok(()),
        (Type::Plus(a), Type::Plus(b)) | (Type::With(a), Type::With(b)) => {
            if a.len() != b.len() || a.keys().zip(b.keys()).any(|(k, l)| k != l) {
                return Err(NoMatch);
            }
            a.values().zip(b.values()).try_for_each(|(x, y)| match_type(x, y, pvars, bound, sigma))
        }
        (Type::Tensor(a1, a2), Type::Tensor(b1, b2)) | (Type::Lolli(a1, a2), Type::Lolli(b1, b2)) => {
            match_type(a1, b1, pvars, bound, sigma)?;
            match_type(a2, b2, pvars, bound, sigma)
        }
        (Type::Exists(x, a), Type::Exists(y, b)) | (Type::Forall(x, a), Type::Forall(y, b)) => {
            if x != y {
                return Err(NoMatch);
            }
            bound.push(x.clone());
            let r = match_type(a, b, pvars, bound, sigma);
            bound.pop();
            r
        }
        (Type::Named(v, a), Type::Named(w, b)) => {
            if v != w || a.len() != b.len() {
                return Err(NoMatch);
            }
            for ((p, x), (q, y)) in a.iter().zip(b.iter()) {
                if p != q {
                    return Err(NoMatch);
                }
                match_type(x, y, pvars, bound, sigma)?;
            }
            Ok(())
        }
        _ => Err(NoMatch),
    }
}

fn eq(b: bool) -> Result<(), NoMatch> {
    if b {
        Ok(())
    } else {
        Err(NoMatch)
    }
}
