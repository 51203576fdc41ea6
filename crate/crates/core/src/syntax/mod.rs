//! Surface syntax: type expressions, programs, parsing and printing.

mod ast;
pub(crate) mod lexer;
mod parser;
mod print;

pub use ast::*;
pub use parser::{definition_scope, is_keyword, parse_program, parse_type, FreeIdents, ParseResult, Scope, SyntaxError};
pub use print::format_type;
