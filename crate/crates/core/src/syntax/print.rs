use std::fmt;

use super::ast::{Choices, Type};

/// Renders a type in surface syntax. The output re-parses to the same tree.
pub fn format_type(t: &Type) -> String {
    t.to_string()
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_type(f, self, 0, true)
    }
}

// prec: 0 anywhere, 1 operand of `-o`'s left or `*`'s right, 2 operand of `*`'s left.
// tail: nothing follows at this nesting level, so a quantifier may stay unparenthesised.
fn write_type(f: &mut fmt::Formatter<'_>, t: &Type, prec: u8, tail: bool) -> fmt::Result {
    match t {
        Type::One => write!(f, "1"),
        Type::Var(x) | Type::Param(x) => write!(f, "{x}"),
        Type::Named(n, args) => {
            write!(f, "{n}")?;
            for a in args.types() {
                write!(f, "[")?;
                write_type(f, a, 0, true)?;
                write!(f, "]")?;
            }
            Ok(())
        }
        Type::Plus(ch) => write_choices(f, "+", ch),
        Type::With(ch) => write_choices(f, "&", ch),
        Type::Lolli(a, b) => {
            let paren = prec > 0;
            if paren {
                write!(f, "(")?;
            }
            write_type(f, a, 1, false)?;
            write!(f, " -o ")?;
            write_type(f, b, 0, tail || paren)?;
            if paren {
                write!(f, ")")?;
            }
            Ok(())
        }
        Type::Tensor(a, b) => {
            let paren = prec > 1;
            if paren {
                write!(f, "(")?;
            }
            write_type(f, a, 2, false)?;
            write!(f, " * ")?;
            write_type(f, b, 1, tail || paren)?;
            if paren {
                write!(f, ")")?;
            }
            Ok(())
        }
        Type::Exists(x, b) | Type::Forall(x, b) => {
            let sym = if matches!(t, Type::Exists(..)) { "?" } else { "!" };
            if tail {
                write!(f, "{sym}{x}. ")?;
                write_type(f, b, 0, true)
            } else {
                write!(f, "({sym}{x}. ")?;
                write_type(f, b, 0, true)?;
                write!(f, ")")
            }
        }
    }
}

fn write_choices(f: &mut fmt::Formatter<'_>, sym: &str, ch: &Choices) -> fmt::Result {
    write!(f, "{sym}{{")?;
    for (i, (l, t)) in ch.iter().enumerate() {
        if i > 0 {
            write!(f, ", ")?;
        }
        write!(f, "{l}: ")?;
        write_type(f, t, 0, true)?;
    }
    write!(f, "}}")
}
