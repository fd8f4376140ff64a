//! Token stream shared by the signature language, term syntax, theory lines,
//! and proof scripts.
//!
//! Lexical rules:
//!   * `--` starts a line comment.
//!   * `(` `)` `[` `]` `,` `.` `;` are always single tokens.
//!   * `'...'` is a quoted identifier (used by theory macros).
//!   * A maximal run of letters, digits, `_` and `'` is a `Name` if it
//!     contains a letter, otherwise a `Nat`. Names may start with a digit
//!     (`0UaddL` is a name).
//!   * Any other maximal run of non-whitespace punctuation is a single
//!     symbol token; the reserved symbols `->` `|>` `|-` `:=` `~` `=` `|`
//!     `:` get dedicated kinds. Operator symbols therefore need whitespace
//!     or a structural delimiter on both sides.
//!   * Unicode aliases: `↣` ⇔ `=>`, `▷` ⇔ `|>`, `⊢` ⇔ `|-`, `≈` ⇔ `~`,
//!     `∂` ⇔ the name `pd`.

use std::fmt;
use thiserror::Error;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Name(String),
    Nat(u64),
    Sym(String),
    Quoted(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Dot,
    Semi,      // ;
    Arrow,     // ->
    Triangle,  // |>
    Turnstile, // |-
    Tilde,     // ~
    Equals,    // =
    Assign,    // :=
    Bar,       // |
    Colon,     // :
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Name(s) => write!(f, "{s}"),
            Tok::Nat(n) => write!(f, "{n}"),
            Tok::Sym(s) => write!(f, "{s}"),
            Tok::Quoted(s) => write!(f, "'{s}'"),
            Tok::LParen => write!(f, "("),
            Tok::RParen => write!(f, ")"),
            Tok::LBrack => write!(f, "["),
            Tok::RBrack => write!(f, "]"),
            Tok::Comma => write!(f, ","),
            Tok::Dot => write!(f, "."),
            Tok::Semi => write!(f, ";"),
            Tok::Arrow => write!(f, "->"),
            Tok::Triangle => write!(f, "|>"),
            Tok::Turnstile => write!(f, "|-"),
            Tok::Tilde => write!(f, "~"),
            Tok::Equals => write!(f, "="),
            Tok::Assign => write!(f, ":="),
            Tok::Bar => write!(f, "|"),
            Tok::Colon => write!(f, ":"),
        }
    }
}

/// A token together with its source position and byte span. The span lets
/// parsers detect adjacency, which is how multi-part spellings like `_+_`
/// are reassembled in notation position.
#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: u32,
    pub col: u32,
    pub start: usize,
    pub end: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {msg}")]
pub struct LexError {
    pub line: u32,
    pub col: u32,
    pub msg: String,
}

fn is_name_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '\''
}

fn is_structural(c: char) -> bool {
    matches!(c, '(' | ')' | '[' | ']' | ',' | '.' | ';')
}

/// Lex a full source text. `line_offset` shifts reported line numbers,
/// used when re-lexing embedded theory lines.
pub fn lex(text: &str, line_offset: u32) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let mut line: u32 = 1 + line_offset;
    let mut col: u32 = 1;
    let bytes = text.char_indices().collect::<Vec<_>>();
    let mut i = 0usize;

    let push = |out: &mut Vec<Token>, tok: Tok, line: u32, col: u32, start: usize, end: usize| {
        out.push(Token { tok, line, col, start, end });
    };

    while i < bytes.len() {
        let (pos, c) = bytes[i];
        if c == '\n' {
            line += 1;
            col = 1;
            i += 1;
            continue;
        }
        if c.is_whitespace() {
            col += 1;
            i += 1;
            continue;
        }
        // line comment
        if c == '-' && i + 1 < bytes.len() && bytes[i + 1].1 == '-' {
            while i < bytes.len() && bytes[i].1 != '\n' {
                i += 1;
            }
            continue;
        }
        let tcol = col;
        if is_structural(c) {
            let tok = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBrack,
                ']' => Tok::RBrack,
                ',' => Tok::Comma,
                '.' => Tok::Dot,
                ';' => Tok::Semi,
                _ => unreachable!(),
            };
            push(&mut out, tok, line, tcol, pos, pos + c.len_utf8());
            col += 1;
            i += 1;
            continue;
        }
        // unicode aliases
        let alias = match c {
            '↣' => Some(Tok::Sym("=>".into())),
            '▷' => Some(Tok::Triangle),
            '⊢' => Some(Tok::Turnstile),
            '≈' => Some(Tok::Tilde),
            '∂' => Some(Tok::Name("pd".into())),
            _ => None,
        };
        if let Some(tok) = alias {
            push(&mut out, tok, line, tcol, pos, pos + c.len_utf8());
            col += 1;
            i += 1;
            continue;
        }
        if c == '\'' {
            // quoted identifier
            let mut j = i + 1;
            let mut s = String::new();
            while j < bytes.len() && bytes[j].1 != '\'' && bytes[j].1 != '\n' {
                s.push(bytes[j].1);
                j += 1;
            }
            if j >= bytes.len() || bytes[j].1 != '\'' {
                return Err(LexError { line, col: tcol, msg: "unterminated quoted name".into() });
            }
            let end = bytes[j].0 + 1;
            push(&mut out, Tok::Quoted(s), line, tcol, pos, end);
            col += (j - i + 1) as u32;
            i = j + 1;
            continue;
        }
        if is_name_char(c) {
            let mut j = i;
            let mut s = String::new();
            while j < bytes.len() && is_name_char(bytes[j].1) {
                s.push(bytes[j].1);
                j += 1;
            }
            let end = if j < bytes.len() { bytes[j].0 } else { text.len() };
            let tok = if s.chars().all(|ch| ch.is_ascii_digit()) {
                Tok::Nat(s.parse::<u64>().map_err(|_| LexError {
                    line,
                    col: tcol,
                    msg: format!("number literal out of range: {s}"),
                })?)
            } else {
                Tok::Name(s)
            };
            push(&mut out, tok, line, tcol, pos, end);
            col += (j - i) as u32;
            i = j;
            continue;
        }
        // punctuation run
        let mut j = i;
        let mut s = String::new();
        while j < bytes.len() {
            let ch = bytes[j].1;
            if ch.is_whitespace() || is_name_char(ch) || is_structural(ch) || ch == '\'' {
                break;
            }
            if matches!(ch, '↣' | '▷' | '⊢' | '≈' | '∂') {
                break;
            }
            // do not swallow a comment that directly follows a symbol
            if ch == '-' && j + 1 < bytes.len() && bytes[j + 1].1 == '-' && j > i {
                break;
            }
            s.push(ch);
            j += 1;
        }
        let end = if j < bytes.len() { bytes[j].0 } else { text.len() };
        let tok = match s.as_str() {
            "->" => Tok::Arrow,
            "|>" => Tok::Triangle,
            "|-" => Tok::Turnstile,
            ":=" => Tok::Assign,
            "~" => Tok::Tilde,
            "=" => Tok::Equals,
            "|" => Tok::Bar,
            ":" => Tok::Colon,
            _ => Tok::Sym(s),
        };
        push(&mut out, tok, line, tcol, pos, end);
        col += (j - i) as u32;
        i = j;
    }
    Ok(out)
}

/// Cursor over a token slice with one-token lookahead helpers.
pub struct Cursor<'a> {
    pub toks: &'a [Token],
    pub pos: usize,
    /// Position reported for errors at end of input.
    pub eof: (u32, u32),
}

impl<'a> Cursor<'a> {
    pub fn new(toks: &'a [Token]) -> Self {
        let eof = toks.last().map(|t| (t.line, t.col + 1)).unwrap_or((1, 1));
        Cursor { toks, pos: 0, eof }
    }

    pub fn peek(&self) -> Option<&'a Token> {
        self.toks.get(self.pos)
    }

    pub fn peek_at(&self, ahead: usize) -> Option<&'a Token> {
        self.toks.get(self.pos + ahead)
    }

    pub fn next(&mut self) -> Option<&'a Token> {
        let t = self.toks.get(self.pos);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.toks.len()
    }

    pub fn here(&self) -> (u32, u32) {
        self.peek().map(|t| (t.line, t.col)).unwrap_or(self.eof)
    }

    /// True when the token at `pos` starts exactly where the previous one
    /// ended (no intervening whitespace).
    pub fn adjacent(&self, pos: usize) -> bool {
        pos > 0
            && pos < self.toks.len()
            && self.toks[pos].start == self.toks[pos - 1].end
            && self.toks[pos].line == self.toks[pos - 1].line
    }

    /// Consume a run of adjacent tokens and return their concatenated
    /// spelling: `_`, `+`, `_` becomes `_+_`. Used for declaration names
    /// and notation symbols.
    pub fn take_spelling(&mut self) -> Option<(String, u32, u32)> {
        let first = self.peek()?;
        let (line, col) = (first.line, first.col);
        let mut s = String::new();
        loop {
            match self.peek() {
                Some(t)
                    if s.is_empty()
                        || (self.adjacent(self.pos)
                            && !matches!(
                                t.tok,
                                Tok::LParen
                                    | Tok::RParen
                                    | Tok::LBrack
                                    | Tok::RBrack
                                    | Tok::Comma
                                    | Tok::Dot
                                    | Tok::Semi
                                    | Tok::Quoted(_)
                            )) =>
                {
                    s.push_str(&t.tok.to_string());
                    self.pos += 1;
                }
                _ => break,
            }
        }
        Some((s, line, col))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_and_nats() {
        let toks = lex("x0 0UaddL 42 foo_bar", 0).unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Name("x0".into()),
                Tok::Name("0UaddL".into()),
                Tok::Nat(42),
                Tok::Name("foo_bar".into()),
            ]
        );
    }

    #[test]
    fn reserved_and_symbols() {
        let toks = lex("a -> b |> |- ~ := => + N=>N", 0).unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Name("a".into()),
                Tok::Arrow,
                Tok::Name("b".into()),
                Tok::Triangle,
                Tok::Turnstile,
                Tok::Tilde,
                Tok::Assign,
                Tok::Sym("=>".into()),
                Tok::Sym("+".into()),
                Tok::Name("N".into()),
                Tok::Sym("=>".into()),
                Tok::Name("N".into()),
            ]
        );
    }

    #[test]
    fn comments_and_positions() {
        let toks = lex("a -- trailing\nb", 0).unwrap();
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[1].line, 2);
        assert_eq!(toks[1].col, 1);
    }

    #[test]
    fn unicode_aliases() {
        let toks = lex("N ↣ N ▷ ⊢ ≈", 0).unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.tok.clone()).collect();
        assert_eq!(
            kinds,
            vec![
                Tok::Name("N".into()),
                Tok::Sym("=>".into()),
                Tok::Name("N".into()),
                Tok::Triangle,
                Tok::Turnstile,
                Tok::Tilde,
            ]
        );
    }

    #[test]
    fn spelling_reassembly() {
        let toks = lex("_+_ l20", 0).unwrap();
        let mut c = Cursor::new(&toks);
        let (s, _, _) = c.take_spelling().unwrap();
        assert_eq!(s, "_+_");
        let (f, _, _) = c.take_spelling().unwrap();
        assert_eq!(f, "l20");
    }

    #[test]
    fn quoted_names() {
        let toks = lex("'zero' unit of 'add'", 0).unwrap();
        assert_eq!(toks[0].tok, Tok::Quoted("zero".into()));
        assert_eq!(toks[3].tok, Tok::Quoted("add".into()));
    }
}
