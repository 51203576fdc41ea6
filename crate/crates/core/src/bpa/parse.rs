use super::{BpaError, BpaExpr, BpaSystem};
use crate::syntax::lexer::{lex, Tok, Token};

enum Raw {
    Name(String),
    Eps,
    Choice(Box<Raw>, Box<Raw>),
    Seq(Box<Raw>, Box<Raw>),
}

struct P {
    toks: Vec<Token>,
    pos: usize,
}

impl P {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.tok)
    }

    fn err<T>(&self, msg: impl Into<String>) -> Result<T, BpaError> {
        let (line, col) = match self.toks.get(self.pos).or(self.toks.last()) {
            Some(t) => (t.line, t.col),
            None => (1, 1),
        };
        Err(BpaError::Parse { line, col, msg: msg.into() })
    }

    fn ident(&mut self) -> Result<String, BpaError> {
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok(s)
            }
            other => self.err(format!("expected an identifier, found {other:?}")),
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

    fn expr(&mut self) -> Result<Raw, BpaError> {
        let mut e = self.term()?;
        while self.eat(&Tok::Plus) {
            let r = self.term()?;
            e = Raw::Choice(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn term(&mut self) -> Result<Raw, BpaError> {
        let mut e = self.factor()?;
        while self.eat(&Tok::Dot) {
            let r = self.factor()?;
            e = Raw::Seq(Box::new(e), Box::new(r));
        }
        Ok(e)
    }

    fn factor(&mut self) -> Result<Raw, BpaError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.pos += 1;
                Ok(Raw::Name(s))
            }
            Some(Tok::Number(n)) if n == "1" => {
                self.pos += 1;
                Ok(Raw::Eps)
            }
            Some(Tok::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(&Tok::RParen) {
                    return self.err("expected `)`");
                }
                Ok(e)
            }
            other => self.err(format!("expected a process expression, found {other:?}")),
        }
    }
}

/// Parses `proc X = p ;` equations and an optional `root X`. Names with an
/// equation are variables, every other name is an action. The root defaults
/// to the first equation.
pub fn parse_bpa(src: &str) -> Result<BpaSystem, BpaError> {
    let mut p = P { toks: lex(src), pos: 0 };
    let mut eqs: Vec<(String, Raw)> = Vec::new();
    let mut root = None;
    while let Some(t) = p.peek().cloned() {
        match t {
            Tok::Ident(k) if k == "proc" => {
                p.pos += 1;
                let x = p.ident()?;
                if !p.eat(&Tok::Eq) {
                    return p.err("expected `=`");
                }
                let e = p.expr()?;
                if !p.eat(&Tok::Semi) {
                    return p.err("expected `;`");
                }
                if eqs.iter().any(|(y, _)| *y == x) {
                    return Err(BpaError::DuplicateVariable(x));
                }
                eqs.push((x, e));
            }
            Tok::Ident(k) if k == "root" => {
                p.pos += 1;
                root = Some(p.ident()?);
                p.eat(&Tok::Semi);
            }
            _ => return p.err("expected `proc` or `root`"),
        }
    }
    let names: Vec<String> = eqs.iter().map(|(x, _)| x.clone()).collect();
    let root = match root.or_else(|| names.first().cloned()) {
        Some(r) => r,
        None => return p.err("no equations"),
    };
    let mut sys = BpaSystem::new(root.clone());
    for (x, e) in eqs {
        sys.equations.insert(x, resolve(&e, &names));
    }
    if !sys.equations.contains_key(&root) {
        return Err(BpaError::UnknownVariable(root));
    }
    Ok(sys)
}

fn resolve(e: &Raw, vars: &[String]) -> BpaExpr {
    match e {
        Raw::Name(n) if vars.contains(n) => BpaExpr::Var(n.clone()),
        Raw::Name(n) => BpaExpr::Action(n.clone()),
        Raw::Eps => BpaExpr::Epsilon,
        Raw::Choice(a, b) => BpaExpr::choice(resolve(a, vars), resolve(b, vars)),
        Raw::Seq(a, b) => BpaExpr::seq(resolve(a, vars), resolve(b, vars)),
    }
}
