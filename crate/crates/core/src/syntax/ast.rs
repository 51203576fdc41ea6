use std::collections::{BTreeMap, BTreeSet};

/// Label-indexed branches of an internal or external choice.
pub type Choices = BTreeMap<String, Type>;

/// A session type expression.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Type {
    /// `+{l: A, ...}`
    Plus(Choices),
    /// `&{l: A, ...}`
    With(Choices),
    /// `A * B`
    Tensor(Box<Type>, Box<Type>),
    /// `A -o B`
    Lolli(Box<Type>, Box<Type>),
    /// `1`
    One,
    /// `?x. A`
    Exists(String, Box<Type>),
    /// `!x. A`
    Forall(String, Box<Type>),
    /// A quantified type variable.
    Var(String),
    /// A type parameter of the enclosing definition.
    Param(String),
    /// A defined type name applied to a parameter substitution.
    Named(String, ParamSubst),
}

/// Positional arguments of a type name, keyed by the parameter they instantiate.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ParamSubst(pub Vec<(String, Type)>);

/// Simultaneous substitution for quantified variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct VarSubst(pub BTreeMap<String, Type>);

impl ParamSubst {
    pub fn new() -> Self {
        ParamSubst(Vec::new())
    }

    pub fn get(&self, param: &str) -> Option<&Type> {
        self.0.iter().find(|(p, _)| p == param).map(|(_, t)| t)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = &(String, Type)> {
        self.0.iter()
    }

    pub fn types(&self) -> impl Iterator<Item = &Type> {
        self.0.iter().map(|(_, t)| t)
    }
}

impl FromIterator<(String, Type)> for ParamSubst {
    fn from_iter<I: IntoIterator<Item = (String, Type)>>(iter: I) -> Self {
        ParamSubst(iter.into_iter().collect())
    }
}

impl VarSubst {
    pub fn new() -> Self {
        VarSubst(BTreeMap::new())
    }

    pub fn single(var: impl Into<String>, t: Type) -> Self {
        let mut m = BTreeMap::new();
        m.insert(var.into(), t);
        VarSubst(m)
    }

    pub fn get(&self, var: &str) -> Option<&Type> {
        self.0.get(var)
    }

    pub fn insert(&mut self, var: impl Into<String>, t: Type) -> Option<Type> {
        self.0.insert(var.into(), t)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Type)> {
        self.0.iter()
    }
}

impl Type {
    pub fn named(name: impl Into<String>) -> Type {
        Type::Named(name.into(), ParamSubst::new())
    }

    pub fn app(name: impl Into<String>, args: Vec<(String, Type)>) -> Type {
        Type::Named(name.into(), ParamSubst(args))
    }

    pub fn tensor(a: Type, b: Type) -> Type {
        Type::Tensor(Box::new(a), Box::new(b))
    }

    pub fn lolli(a: Type, b: Type) -> Type {
        Type::Lolli(Box::new(a), Box::new(b))
    }

    pub fn exists(x: impl Into<String>, body: Type) -> Type {
        Type::Exists(x.into(), Box::new(body))
    }

    pub fn forall(x: impl Into<String>, body: Type) -> Type {
        Type::Forall(x.into(), Box::new(body))
    }

    pub fn plus<I, S>(branches: I) -> Type
    where
        I: IntoIterator<Item = (S, Type)>,
        S: Into<String>,
    {
        Type::Plus(branches.into_iter().map(|(l, t)| (l.into(), t)).collect())
    }

    pub fn with<I, S>(branches: I) -> Type
    where
        I: IntoIterator<Item = (S, Type)>,
        S: Into<String>,
    {
        Type::With(branches.into_iter().map(|(l, t)| (l.into(), t)).collect())
    }

    pub fn is_named(&self) -> bool {
        matches!(self, Type::Named(..))
    }

    pub fn is_structural(&self) -> bool {
        !self.is_named()
    }

    pub fn head(&self) -> Option<&str> {
        match self {
            Type::Named(n, _) => Some(n),
            _ => None,
        }
    }

    /// True if no `?`/`!` occurs anywhere, including inside arguments.
    pub fn is_quantifier_free(&self) -> bool {
        match self {
            Type::Exists(..) | Type::Forall(..) => false,
            Type::Plus(ch) | Type::With(ch) => ch.values().all(Type::is_quantifier_free),
            Type::Tensor(a, b) | Type::Lolli(a, b) => a.is_quantifier_free() && b.is_quantifier_free(),
            Type::Named(_, args) => args.types().all(Type::is_quantifier_free),
            Type::One | Type::Var(_) | Type::Param(_) => true,
        }
    }

    pub fn size(&self) -> usize {
        match self {
            Type::Plus(ch) | Type::With(ch) => 1 + ch.values().map(Type::size).sum::<usize>(),
            Type::Tensor(a, b) | Type::Lolli(a, b) => 1 + a.size() + b.size(),
            Type::Exists(_, b) | Type::Forall(_, b) => 1 + b.size(),
            Type::Named(_, args) => 1 + args.types().map(Type::size).sum::<usize>(),
            Type::One | Type::Var(_) | Type::Param(_) => 1,
        }
    }
}

/// Free type parameters and free quantified variables of `t`.
pub fn free_vars(t: &Type) -> (BTreeSet<String>, BTreeSet<String>) {
    let mut params = BTreeSet::new();
    let mut vars = BTreeSet::new();
    collect_free(t, &mut Vec::new(), &mut params, &mut vars);
    (params, vars)
}

fn collect_free(
    t: &Type,
    bound: &mut Vec<String>,
    params: &mut BTreeSet<String>,
    vars: &mut BTreeSet<String>,
) {
    match t {
        Type::Plus(ch) | Type::With(ch) => {
            for b in ch.values() {
                collect_free(b, bound, params, vars);
            }
        }
        Type::Tensor(a, b) | Type::Lolli(a, b) => {
            collect_free(a, bound, params, vars);
            collect_free(b, bound, params, vars);
        }
        Type::Exists(x, b) | Type::Forall(x, b) => {
            bound.push(x.clone());
            collect_free(b, bound, params, vars);
            bound.pop();
        }
        Type::Var(x) => {
            if !bound.contains(x) {
                vars.insert(x.clone());
            }
        }
        Type::Param(p) => {
            params.insert(p.clone());
        }
        Type::Named(_, args) => {
            for a in args.types() {
                collect_free(a, bound, params, vars);
            }
        }
        Type::One => {}
    }
}

/// A `type` definition as written.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TypeDefItem {
    pub name: String,
    pub params: Vec<String>,
    pub body: Type,
    pub line: usize,
}

/// An `eqtype` declaration. `vars` are the identifiers it quantifies over.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EqTypeItem {
    pub vars: Vec<String>,
    pub lhs: Type,
    pub rhs: Type,
    pub bidirectional: bool,
    pub line: usize,
}

/// A `check` query.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckItem {
    pub lhs: Type,
    pub rhs: Type,
    pub line: usize,
}

/// A `decl` line: kept as text, with the channel types extracted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DeclItem {
    pub name: String,
    pub vars: Vec<String>,
    pub raw: String,
    pub types: Vec<Type>,
    pub line: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Item {
    TypeDef(TypeDefItem),
    EqType(EqTypeItem),
    Check(CheckItem),
    ProcDecl(DeclItem),
    /// A `proc` definition; skipped.
    Proc { raw: String, line: usize },
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Program {
    pub items: Vec<Item>,
}

impl Program {
    pub fn typedefs(&self) -> impl Iterator<Item = &TypeDefItem> {
        self.items.iter().filter_map(|i| match i {
            Item::TypeDef(d) => Some(d),
            _ => None,
        })
    }

    pub fn eqtypes(&self) -> impl Iterator<Item = &EqTypeItem> {
        self.items.iter().filter_map(|i| match i {
            Item::EqType(e) => Some(e),
            _ => None,
        })
    }

    pub fn checks(&self) -> impl Iterator<Item = &CheckItem> {
        self.items.iter().filter_map(|i| match i {
            Item::Check(c) => Some(c),
            _ => None,
        })
    }
}
