use std::collections::HashMap;

use thiserror::Error;

use super::ast::*;
use super::lexer::{lex, Tok, Token};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SyntaxError {
    #[error("{line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
    #[error("{line}:{col}: duplicate definition of `{name}`")]
    DuplicateDefinition { name: String, line: usize, col: usize },
    #[error("{line}:{col}: unbound parameter `{name}` in definition of `{def}`")]
    UnboundParameter { name: String, def: String, line: usize, col: usize },
    #[error("{line}:{col}: unbound quantified variable `{name}`")]
    UnboundQuantVar { name: String, line: usize, col: usize },
    #[error("{line}:{col}: undefined type name `{name}`")]
    UndefinedName { name: String, line: usize, col: usize },
    #[error("{line}:{col}: `{name}` expects {expected} argument(s), found {found}")]
    ArityMismatch { name: String, expected: usize, found: usize, line: usize, col: usize },
}

pub type ParseResult<T> = Result<T, SyntaxError>;

const KEYWORDS: [&str; 5] = ["type", "eqtype", "check", "decl", "proc"];

/// Type syntax before identifiers are classified.
#[derive(Clone, Debug)]
enum Raw {
    One,
    Ident { name: String, args: Vec<Raw>, line: usize, col: usize },
    Plus(Vec<(String, Raw)>),
    With(Vec<(String, Raw)>),
    Tensor(Box<Raw>, Box<Raw>),
    Lolli(Box<Raw>, Box<Raw>),
    Exists(String, Box<Raw>),
    Forall(String, Box<Raw>),
}

/// How identifiers that are neither bound, parameters, nor defined names resolve.
#[derive(Clone, Debug)]
pub enum FreeIdents {
    /// Reject them as unbound parameters of the named definition.
    Params(String),
    /// Reject them as unbound quantified variables.
    Reject,
    /// Accept them as quantified variables and record them in order of appearance.
    Collect,
}

/// Names visible while resolving a type.
#[derive(Clone, Debug)]
pub struct Scope {
    /// Defined type names and their parameter lists.
    pub defs: HashMap<String, Vec<String>>,
    /// Parameters of the enclosing definition.
    pub params: Vec<String>,
    /// Quantified variables in scope from outside the type.
    pub vars: Vec<String>,
    pub free: FreeIdents,
}

impl Scope {
    pub fn new(defs: HashMap<String, Vec<String>>) -> Self {
        Scope { defs, params: Vec::new(), vars: Vec::new(), free: FreeIdents::Reject }
    }
}

struct Parser<'s> {
    src: &'s str,
    toks: Vec<Token>,
    pos: usize,
}

impl<'s> Parser<'s> {
    fn new(src: &'s str) -> Self {
        Parser { src, toks: lex(src), pos: 0 }
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn here(&self) -> (usize, usize) {
        match self.toks.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => match self.toks.last() {
                Some(t) => (t.line, t.col + 1),
                None => (1, 1),
            },
        }
    }

    fn error<T>(&self, msg: impl Into<String>) -> ParseResult<T> {
        let (line, col) = self.here();
        Err(SyntaxError::Parse { line, col, msg: msg.into() })
    }

    fn describe(&self) -> String {
        match self.peek() {
            None => "end of input".into(),
            Some(Tok::Ident(s)) | Some(Tok::Number(s)) => format!("`{s}`"),
            Some(t) => format!("{t:?}"),
        }
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok, what: &str) -> ParseResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            self.error(format!("expected {what}, found {}", self.describe()))
        }
    }

    fn ident(&mut self, what: &str) -> ParseResult<String> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            _ => self.error(format!("expected {what}, found {}", self.describe())),
        }
    }

    fn is_keyword_at(&self, pos: usize) -> bool {
        matches!(self.toks.get(pos).map(|t| &t.tok), Some(Tok::Ident(s)) if KEYWORDS.contains(&s.as_str()))
    }

    fn ty(&mut self) -> ParseResult<Raw> {
        let left = self.ttype()?;
        if self.eat(&Tok::Lolli) {
            let right = self.ty()?;
            Ok(Raw::Lolli(Box::new(left), Box::new(right)))
        } else {
            Ok(left)
        }
    }

    fn ttype(&mut self) -> ParseResult<Raw> {
        let left = self.atype()?;
        if self.eat(&Tok::Star) {
            let right = self.ttype()?;
            Ok(Raw::Tensor(Box::new(left), Box::new(right)))
        } else {
            Ok(left)
        }
    }

    fn atype(&mut self) -> ParseResult<Raw> {
        let (line, col) = self.here();
        match self.peek().cloned() {
            Some(Tok::Number(n)) if n == "1" => {
                self.pos += 1;
                Ok(Raw::One)
            }
            Some(Tok::Ident(name)) => {
                if self.is_keyword_at(self.pos) {
                    return self.error(format!("unexpected keyword `{name}`"));
                }
                self.pos += 1;
                let mut args = Vec::new();
                while self.eat(&Tok::LBracket) {
                    args.push(self.ty()?);
                    self.expect(Tok::RBracket, "`]`")?;
                }
                Ok(Raw::Ident { name, args, line, col })
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                Ok(Raw::Plus(self.branches()?))
            }
            Some(Tok::Amp) => {
                self.pos += 1;
                Ok(Raw::With(self.branches()?))
            }
            Some(Tok::Question) | Some(Tok::Bang) => {
                let exists = self.peek() == Some(&Tok::Question);
                self.pos += 1;
                let x = self.ident("a quantified variable")?;
                self.expect(Tok::Dot, "`.`")?;
                let body = Box::new(self.ty()?);
                Ok(if exists { Raw::Exists(x, body) } else { Raw::Forall(x, body) })
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let t = self.ty()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(t)
            }
            _ => self.error(format!("expected a type, found {}", self.describe())),
        }
    }

    fn branches(&mut self) -> ParseResult<Vec<(String, Raw)>> {
        self.expect(Tok::LBrace, "`{`")?;
        let mut out: Vec<(String, Raw)> = Vec::new();
        if self.eat(&Tok::RBrace) {
            return Ok(out);
        }
        loop {
            let label = match self.peek() {
                Some(Tok::Dollar) => {
                    self.pos += 1;
                    "$".to_string()
                }
                _ => self.ident("a label")?,
            };
            if out.iter().any(|(l, _)| *l == label) {
                self.pos -= 1;
                return self.error(format!("duplicate label `{label}`"));
            }
            self.expect(Tok::Colon, "`:`")?;
            let t = self.ty()?;
            out.push((label, t));
            if self.eat(&Tok::Comma) {
                continue;
            }
            self.expect(Tok::RBrace, "`,` or `}`")?;
            return Ok(out);
        }
    }

    fn bracket_idents(&mut self) -> ParseResult<Vec<String>> {
        let mut out = Vec::new();
        while self.eat(&Tok::LBracket) {
            let x = self.ident("an identifier")?;
            if out.contains(&x) {
                self.pos -= 1;
                return self.error(format!("duplicate parameter `{x}`"));
            }
            out.push(x);
            self.expect(Tok::RBracket, "`]`")?;
        }
        Ok(out)
    }
}

enum RawItem {
    TypeDef { name: String, params: Vec<String>, body: Raw, line: usize, col: usize },
    EqType { lhs: Raw, rhs: Raw, bidirectional: bool, line: usize },
    Check { lhs: Raw, rhs: Raw, line: usize },
    Decl { name: String, vars: Vec<String>, raw: String, types: Vec<Raw>, line: usize },
    Proc { raw: String, line: usize },
}

fn parse_items(p: &mut Parser) -> ParseResult<Vec<RawItem>> {
    let mut items = Vec::new();
    while let Some(tok) = p.peek().cloned() {
        let start = p.toks[p.pos].clone();
        let line = start.line;
        let kw = match tok {
            Tok::Ident(s) if KEYWORDS.contains(&s.as_str()) => s,
            Tok::Semi => {
                p.pos += 1;
                continue;
            }
            _ => return p.error(format!("expected an item keyword, found {}", p.describe())),
        };
        p.pos += 1;
        match kw.as_str() {
            "type" => {
                let (line, col) = p.here();
                let name = p.ident("a type name")?;
                let params = p.bracket_idents()?;
                p.expect(Tok::Eq, "`=`")?;
                let body = p.ty()?;
                items.push(RawItem::TypeDef { name, params, body, line, col });
            }
            "eqtype" => {
                let lhs = p.ty()?;
                let bidirectional = if p.eat(&Tok::Le) {
                    false
                } else if p.eat(&Tok::Eq) {
                    true
                } else {
                    return p.error(format!("expected `<=` or `=`, found {}", p.describe()));
                };
                let rhs = p.ty()?;
                items.push(RawItem::EqType { lhs, rhs, bidirectional, line });
            }
            "check" => {
                let lhs = p.ty()?;
                p.expect(Tok::Le, "`<=`")?;
                let rhs = p.ty()?;
                items.push(RawItem::Check { lhs, rhs, line });
            }
            "decl" => {
                let name = p.ident("a process name")?;
                let vars = p.bracket_idents()?;
                p.expect(Tok::Colon, "`:`")?;
                let mut types = Vec::new();
                if !p.eat(&Tok::Dot) {
                    while p.peek() == Some(&Tok::LParen) {
                        types.push(channel(p)?);
                    }
                }
                p.expect(Tok::Turnstile, "`|-`")?;
                types.push(channel(p)?);
                let end = p.toks[p.pos - 1].offset + 1;
                let raw = p.src[start.offset..end].to_string();
                items.push(RawItem::Decl { name, vars, raw, types, line });
            }
            _ => {
                while p.pos < p.toks.len() && !(p.toks[p.pos].first_on_line && p.is_keyword_at(p.pos)) {
                    p.pos += 1;
                }
                let end = p.toks.get(p.pos).map(|t| t.offset).unwrap_or(p.src.len());
                let raw = p.src[start.offset..end].trim_end().to_string();
                items.push(RawItem::Proc { raw, line });
            }
        }
    }
    Ok(items)
}

fn channel(p: &mut Parser) -> ParseResult<Raw> {
    p.expect(Tok::LParen, "`(`")?;
    p.ident("a channel name")?;
    p.expect(Tok::Colon, "`:`")?;
    let t = p.ty()?;
    p.expect(Tok::RParen, "`)`")?;
    Ok(t)
}

/// Parses a whole source file and resolves every identifier.
pub fn parse_program(src: &str) -> ParseResult<Program> {
    let mut p = Parser::new(src);
    let raw = parse_items(&mut p)?;

    let mut defs: HashMap<String, Vec<String>> = HashMap::new();
    for item in &raw {
        if let RawItem::TypeDef { name, params, line, col, .. } = item {
            if defs.insert(name.clone(), params.clone()).is_some() {
                return Err(SyntaxError::DuplicateDefinition { name: name.clone(), line: *line, col: *col });
            }
        }
    }

    let mut items = Vec::new();
    for item in raw {
        let item = match item {
            RawItem::TypeDef { name, params, body, line, .. } => {
                let mut scope = Scope::new(defs.clone());
                scope.params = params.clone();
                scope.free = FreeIdents::Params(name.clone());
                let body = resolve(&body, &mut scope, &mut Vec::new())?;
                Item::TypeDef(TypeDefItem { name, params, body, line })
            }
            RawItem::EqType { lhs, rhs, bidirectional, line } => {
                let mut scope = Scope::new(defs.clone());
                scope.free = FreeIdents::Collect;
                let lhs = resolve(&lhs, &mut scope, &mut Vec::new())?;
                let rhs = resolve(&rhs, &mut scope, &mut Vec::new())?;
                Item::EqType(EqTypeItem { vars: scope.vars, lhs, rhs, bidirectional, line })
            }
            RawItem::Check { lhs, rhs, line } => {
                let mut scope = Scope::new(defs.clone());
                let lhs = resolve(&lhs, &mut scope, &mut Vec::new())?;
                let rhs = resolve(&rhs, &mut scope, &mut Vec::new())?;
                Item::Check(CheckItem { lhs, rhs, line })
            }
            RawItem::Decl { name, vars, raw, types, line } => {
                let mut scope = Scope::new(defs.clone());
                scope.vars = vars.clone();
                let types = types
                    .iter()
                    .map(|t| resolve(t, &mut scope, &mut Vec::new()))
                    .collect::<ParseResult<Vec<_>>>()?;
                Item::ProcDecl(DeclItem { name, vars, raw, types, line })
            }
            RawItem::Proc { raw, line } => Item::Proc { raw, line },
        };
        items.push(item);
    }
    Ok(Program { items })
}

/// Parses a single type in the given scope. Collected free variables are
/// appended to `scope.vars`.
pub fn parse_type(src: &str, scope: &mut Scope) -> ParseResult<Type> {
    let mut p = Parser::new(src);
    let raw = p.ty()?;
    if p.peek().is_some() {
        return p.error(format!("unexpected {} after type", p.describe()));
    }
    resolve(&raw, scope, &mut Vec::new())
}

fn resolve(raw: &Raw, scope: &mut Scope, bound: &mut Vec<String>) -> ParseResult<Type> {
    Ok(match raw {
        Raw::One => Type::One,
        Raw::Plus(bs) => Type::Plus(resolve_branches(bs, scope, bound)?),
        Raw::With(bs) => Type::With(resolve_branches(bs, scope, bound)?),
        Raw::Tensor(a, b) => Type::tensor(resolve(a, scope, bound)?, resolve(b, scope, bound)?),
        Raw::Lolli(a, b) => Type::lolli(resolve(a, scope, bound)?, resolve(b, scope, bound)?),
        Raw::Exists(x, b) | Raw::Forall(x, b) => {
            bound.push(x.clone());
            let body = resolve(b, scope, bound);
            bound.pop();
            let body = Box::new(body?);
            if matches!(raw, Raw::Exists(..)) {
                Type::Exists(x.clone(), body)
            } else {
                Type::Forall(x.clone(), body)
            }
        }
        Raw::Ident { name, args, line, col } => {
            let (line, col) = (*line, *col);
            if args.is_empty() {
                if bound.contains(name) {
                    return Ok(Type::Var(name.clone()));
                }
                if scope.params.contains(name) {
                    return Ok(Type::Param(name.clone()));
                }
                if scope.vars.contains(name) && !matches!(scope.free, FreeIdents::Collect) {
                    return Ok(Type::Var(name.clone()));
                }
            }
            match scope.defs.get(name).cloned() {
                Some(params) => {
                    if params.len() != args.len() {
                        return Err(SyntaxError::ArityMismatch {
                            name: name.clone(),
                            expected: params.len(),
                            found: args.len(),
                            line,
                            col,
                        });
                    }
                    let mut subst = Vec::new();
                    for (p, a) in params.into_iter().zip(args) {
                        subst.push((p, resolve(a, scope, bound)?));
                    }
                    Type::Named(name.clone(), ParamSubst(subst))
                }
                None if !args.is_empty() => {
                    return Err(SyntaxError::UndefinedName { name: name.clone(), line, col })
                }
                None => match &scope.free {
                    FreeIdents::Params(def) => {
                        return Err(SyntaxError::UnboundParameter { name: name.clone(), def: def.clone(), line, col })
                    }
                    FreeIdents::Reject => {
                        return Err(SyntaxError::UnboundQuantVar { name: name.clone(), line, col })
                    }
                    FreeIdents::Collect => {
                        if !scope.vars.contains(name) {
                            scope.vars.push(name.clone());
                        }
                        Type::Var(name.clone())
                    }
                },
            }
        }
    })
}

fn resolve_branches(bs: &[(String, Raw)], scope: &mut Scope, bound: &mut Vec<String>) -> ParseResult<Choices> {
    bs.iter().map(|(l, t)| Ok((l.clone(), resolve(t, scope, bound)?))).collect()
}

/// Names a program defines, with their parameter lists.
pub fn definition_scope(program: &Program) -> HashMap<String, Vec<String>> {
    program.typedefs().map(|d| (d.name.clone(), d.params.clone())).collect()
}

/// Identifiers that may never name a type.
pub fn is_keyword(s: &str) -> bool {
    KEYWORDS.contains(&s)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn nat_program() -> Program {
        parse_program(
            "type nat = +{z : 1, s : nat}\n\
             type even = +{z : 1, s : odd}\n\
             type odd = +{s : even}\n\
             check even <= nat",
        )
        .unwrap()
    }

    #[test]
    fn parses_nat_even_odd() {
        let p = nat_program();
        assert_eq!(p.typedefs().count(), 3);
        let nat = p.typedefs().next().unwrap();
        assert_eq!(nat.body, Type::plus([("z", Type::One), ("s", Type::named("nat"))]));
        let c = p.checks().next().unwrap();
        assert_eq!(c.lhs, Type::named("even"));
    }

    #[test]
    fn parameters_and_application() {
        let p = parse_program("type List[a] = +{nil : 1, cons : a * List[a]}\ntype Seg[a] = List[a] -o List[a]").unwrap();
        let seg = p.typedefs().nth(1).unwrap();
        let la = Type::app("List", vec![("a".into(), Type::Param("a".into()))]);
        assert_eq!(seg.body, Type::lolli(la.clone(), la));
    }

    #[test]
    fn multi_argument_application_is_positional() {
        let p = parse_program("type Cons[a][k] = +{cons : a * k}\ntype N = +{nil:1}\ncheck Cons[1][N] <= N").unwrap();
        let c = p.checks().next().unwrap();
        assert_eq!(
            c.lhs,
            Type::app("Cons", vec![("a".into(), Type::One), ("k".into(), Type::named("N"))])
        );
    }

    #[test]
    fn quantifier_scopes_to_the_right() {
        let p = parse_program("type H = +{nil : 1, cons : ?x. x * H}").unwrap();
        let h = p.typedefs().next().unwrap();
        let expected = Type::plus([
            ("nil", Type::One),
            ("cons", Type::exists("x", Type::tensor(Type::Var("x".into()), Type::named("H")))),
        ]);
        assert_eq!(h.body, expected);
    }

    #[test]
    fn lolli_is_right_associative_and_looser_than_tensor() {
        let mut s = Scope::new(HashMap::new());
        let t = parse_type("1 * 1 -o 1 -o 1", &mut s).unwrap();
        assert_eq!(
            t,
            Type::lolli(Type::tensor(Type::One, Type::One), Type::lolli(Type::One, Type::One))
        );
    }

    #[test]
    fn eqtype_free_identifiers_become_variables() {
        let p = parse_program("type T[a] = +{L : T[T[a]], R : a}\ntype T'[b] = +{L : T'[T'[b]], R : b}\neqtype T[x] <= T'[x]").unwrap();
        let e = p.eqtypes().next().unwrap();
        assert_eq!(e.vars, vec!["x".to_string()]);
        assert_eq!(e.lhs, Type::app("T", vec![("a".into(), Type::Var("x".into()))]));
        assert!(!e.bidirectional);
    }

    #[test]
    fn dollar_label() {
        let p = parse_program("type D = +{$ : 1}").unwrap();
        assert_eq!(p.typedefs().next().unwrap().body, Type::plus([("$", Type::One)]));
    }

    #[test]
    fn decl_is_kept_raw() {
        let src = "type N = +{none : 1}\ntype S[k] = &{pop : k}\ndecl empty : . |- (s : S[N])\ndecl elem[k] : (x : N) (t : S[k]) |- (s : S[k])";
        let p = parse_program(src).unwrap();
        let decls: Vec<_> = p
            .items
            .iter()
            .filter_map(|i| if let Item::ProcDecl(d) = i { Some(d) } else { None })
            .collect();
        assert_eq!(decls[0].raw, "decl empty : . |- (s : S[N])");
        assert_eq!(decls[1].types.len(), 3);
        assert_eq!(decls[1].types[1], Type::app("S", vec![("k".into(), Type::Var("k".into()))]));
    }

    #[test]
    fn proc_lines_are_skipped() {
        let src = "type N = +{none : 1}\nproc p <- q = send x ; wait\n  close\ncheck N <= N";
        let p = parse_program(src).unwrap();
        assert_eq!(p.items.len(), 3);
        assert!(matches!(&p.items[1], Item::Proc { raw, .. } if raw.ends_with("close")));
    }

    #[test]
    fn errors() {
        assert!(matches!(
            parse_program("type V[a] = +{l : b}"),
            Err(SyntaxError::UnboundParameter { ref name, .. }) if name == "b"
        ));
        assert!(matches!(
            parse_program("type N = 1\ntype N = 1"),
            Err(SyntaxError::DuplicateDefinition { .. })
        ));
        assert!(matches!(parse_program("check x <= 1"), Err(SyntaxError::UnboundQuantVar { .. })));
        assert!(matches!(parse_program("type A = +{l : 1, l : 1}"), Err(SyntaxError::Parse { .. })));
        assert!(matches!(parse_program("type A = +{l : 1"), Err(SyntaxError::Parse { .. })));
        assert!(matches!(parse_program("type A = B[1]"), Err(SyntaxError::UndefinedName { .. })));
        assert!(matches!(
            parse_program("type L[a] = +{n : 1}\ntype A = L"),
            Err(SyntaxError::ArityMismatch { .. })
        ));
    }

    #[test]
    fn parse_error_position() {
        match parse_program("type A =\n  +{l 1}") {
            Err(SyntaxError::Parse { line, col, .. }) => assert_eq!((line, col), (2, 7)),
            other => panic!("unexpected {other:?}"),
        }
    }
}
