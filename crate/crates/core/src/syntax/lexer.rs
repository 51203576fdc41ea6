#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Number(String),
    Dollar,
    Plus,
    Amp,
    LBrace,
    RBrace,
    LBracket,
    RBracket,
    LParen,
    RParen,
    Colon,
    Comma,
    Star,
    Lolli,
    Question,
    Bang,
    Dot,
    Eq,
    Le,
    Turnstile,
    Semi,
    Other(char),
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
    pub offset: usize,
    pub first_on_line: bool,
}

pub fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

pub fn is_ident_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_' || c == '\''
}

/// Splits `src` into tokens. Never fails: unknown characters become `Tok::Other`.
pub fn lex(src: &str) -> Vec<Token> {
    let chars: Vec<(usize, char)> = src.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut line = 1;
    let mut col = 1;
    let mut first = true;
    while i < chars.len() {
        let (offset, c) = chars[i];
        if c == '\n' {
            line += 1;
            col = 1;
            first = true;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '%' {
            while i < chars.len() && chars[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        let start_col = col;
        let peek = chars.get(i + 1).map(|p| p.1);
        let (tok, len) = if is_ident_start(c) {
            let mut j = i;
            while j < chars.len() && is_ident_char(chars[j].1) {
                j += 1;
            }
            let s: String = chars[i..j].iter().map(|p| p.1).collect();
            (Tok::Ident(s), j - i)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < chars.len() && chars[j].1.is_ascii_digit() {
                j += 1;
            }
            let s: String = chars[i..j].iter().map(|p| p.1).collect();
            (Tok::Number(s), j - i)
        } else {
            match (c, peek) {
                ('-', Some('o')) => (Tok::Lolli, 2),
                ('<', Some('=')) => (Tok::Le, 2),
                ('|', Some('-')) => (Tok::Turnstile, 2),
                ('$', _) => (Tok::Dollar, 1),
                ('+', _) => (Tok::Plus, 1),
                ('&', _) => (Tok::Amp, 1),
                ('{', _) => (Tok::LBrace, 1),
                ('}', _) => (Tok::RBrace, 1),
                ('[', _) => (Tok::LBracket, 1),
                (']', _) => (Tok::RBracket, 1),
                ('(', _) => (Tok::LParen, 1),
                (')', _) => (Tok::RParen, 1),
                (':', _) => (Tok::Colon, 1),
                (',', _) => (Tok::Comma, 1),
                ('*', _) => (Tok::Star, 1),
                ('?', _) => (Tok::Question, 1),
                ('!', _) => (Tok::Bang, 1),
                ('.', _) => (Tok::Dot, 1),
                ('=', _) => (Tok::Eq, 1),
                (';', _) => (Tok::Semi, 1),
                (other, _) => (Tok::Other(other), 1),
            }
        };
        out.push(Token { tok, line, col: start_col, offset, first_on_line: first });
        first = false;
        i += len;
        col += len;
    }
    out
}
