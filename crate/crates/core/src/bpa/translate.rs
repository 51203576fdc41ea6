use super::{BpaError, BpaExpr, BpaSystem};
use crate::syntax::Type;
use crate::variance::{infer_variances, Signature};

/// Name of the single parameter of every translated definition.
pub const ALPHA: &str = "alpha";

/// A system as nested session types.
#[derive(Clone, Debug)]
pub struct Translation {
    /// The head normal form the signature was built from.
    pub system: BpaSystem,
    pub sig: Signature,
    /// `Root[1]`.
    pub root: Type,
}

impl Translation {
    /// The closed type of a variable, `X[1]`.
    pub fn var_type(&self, x: &str) -> Type {
        Type::app(x, vec![(ALPHA.to_string(), Type::One)])
    }

    /// Surface text of the signature, followed by `check lhs <= rhs` if given.
    pub fn to_surface(&self, check: Option<(&str, &str)>) -> String {
        let mut out = String::new();
        for (name, def) in &self.sig.defs {
            out.push_str(&format!("type {name}[{ALPHA}] = {}\n", def.body));
        }
        if let Some((l, r)) = check {
            out.push_str(&format!("\ncheck {} <= {}\n", self.var_type(l), self.var_type(r)));
        }
        out
    }
}

/// Translates a valid system. Each head-normalized equation `X = a1.p1 + ...`
/// becomes `X[alpha] = +{a1: [p1], ...}`.
pub fn translate(sys: &BpaSystem) -> Result<Translation, BpaError> {
    sys.validate()?;
    let system = sys.head_normal_form()?;
    let alpha = Type::Param(ALPHA.to_string());
    let mut sig = Signature::default();
    for (x, body) in &system.equations {
        let t = translate_expr(body, &alpha).map_err(|_| BpaError::NotGuarded(x.clone()))?;
        sig.insert(x.clone(), &[ALPHA.to_string()], t);
    }
    let root = Type::app(system.root.clone(), vec![(ALPHA.to_string(), Type::One)]);
    Ok(Translation { system, sig: infer_variances(&sig), root })
}

/// `[e]` with `tail` in place of `alpha`. Sums must be guarded by distinct actions.
pub fn translate_expr(e: &BpaExpr, tail: &Type) -> Result<Type, BpaError> {
    match e {
        BpaExpr::Epsilon => Ok(tail.clone()),
        BpaExpr::Action(a) => Ok(Type::plus([(a.clone(), tail.clone())])),
        BpaExpr::Var(x) => Ok(Type::app(x.clone(), vec![(ALPHA.to_string(), tail.clone())])),
        BpaExpr::Seq(p, q) => {
            let rest = translate_expr(q, tail)?;
            translate_expr(p, &rest)
        }
        BpaExpr::Choice(..) => {
            let mut branches = std::collections::BTreeMap::new();
            for s in e.summands() {
                let atoms = s.atoms();
                let (BpaExpr::Action(a), rest) = (atoms[0], &atoms[1..]) else {
                    return Err(BpaError::NotGuarded(s.to_string()));
                };
                let rest = BpaExpr::seq_all(rest.iter().map(|x| (*x).clone()));
                let t = translate_expr(&rest, tail)?;
                if branches.insert(a.clone(), t).is_some() {
                    return Err(BpaError::NotDeterministic { var: e.to_string(), action: a.clone() });
                }
            }
            Ok(Type::Plus(branches))
        }
    }
}
