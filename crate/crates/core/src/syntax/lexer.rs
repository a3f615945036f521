//! Tokenizer shared by model (`.aut`) and rule (`.rul`) files.

use std::fmt;

use crate::diagnostic::{Code, Diagnostic, Location, SourceSpan};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    /// Schema variable, stored with its leading `$`.
    Var(String),
    Semi,
    LBrace,
    RBrace,
    Minus,
    Gt,
    /// `<<`
    OpenMods,
    /// `>>`
    CloseMods,
    /// `[[`
    OpenRepl,
    /// `]]`
    CloseRepl,
    /// `:-`
    Turnstile,
    Comma,
    EqEq,
    NotEq,
    Eof,
}

impl TokenKind {
    pub fn is_word(&self, word: &str) -> bool {
        matches!(self, TokenKind::Ident(w) if w == word)
    }
}

impl fmt::Display for TokenKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TokenKind::Ident(s) | TokenKind::Var(s) => write!(f, "`{s}`"),
            TokenKind::Semi => f.write_str("`;`"),
            TokenKind::LBrace => f.write_str("`{`"),
            TokenKind::RBrace => f.write_str("`}`"),
            TokenKind::Minus => f.write_str("`-`"),
            TokenKind::Gt => f.write_str("`>`"),
            TokenKind::OpenMods => f.write_str("`<<`"),
            TokenKind::CloseMods => f.write_str("`>>`"),
            TokenKind::OpenRepl => f.write_str("`[[`"),
            TokenKind::CloseRepl => f.write_str("`]]`"),
            TokenKind::Turnstile => f.write_str("`:-`"),
            TokenKind::Comma => f.write_str("`,`"),
            TokenKind::EqEq => f.write_str("`==`"),
            TokenKind::NotEq => f.write_str("`!=`"),
            TokenKind::Eof => f.write_str("end of input"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: SourceSpan,
}

struct Cursor<'a> {
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    column: u32,
}

impl Cursor<'_> {
    fn here(&self) -> Location {
        Location::new(self.line, self.column)
    }

    fn peek(&mut self) -> Option<char> {
        self.chars.peek().copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.column = 1;
        } else {
            self.column += 1;
        }
        Some(c)
    }

    fn eat(&mut self, want: char) -> bool {
        if self.peek() == Some(want) {
            self.bump();
            true
        } else {
            false
        }
    }
}

fn is_ident_start(c: char) -> bool {
    c.is_ascii_alphabetic() || c == '_'
}

fn is_ident_continue(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '_'
}

/// Splits `text` into tokens. The returned stream always ends with `Eof`.
pub fn tokenize(text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut cur = Cursor {
        chars: text.chars().peekable(),
        line: 1,
        column: 1,
    };
    let mut tokens = Vec::new();
    loop {
        // whitespace (including the CR of CRLF) and line comments
        while let Some(c) = cur.peek() {
            if c.is_whitespace() {
                cur.bump();
            } else if c == '/' {
                let mut ahead = cur.chars.clone();
                ahead.next();
                if ahead.next() != Some('/') {
                    break;
                }
                while let Some(c) = cur.peek() {
                    if c == '\n' {
                        break;
                    }
                    cur.bump();
                }
            } else {
                break;
            }
        }

        let start = cur.here();
        let Some(c) = cur.bump() else {
            tokens.push(Token {
                kind: TokenKind::Eof,
                span: SourceSpan::new(start, start),
            });
            return Ok(tokens);
        };

        let lex_error = |msg: String| Diagnostic::error(Code::LexError, msg, Some(start));
        let kind = match c {
            ';' => TokenKind::Semi,
            '{' => TokenKind::LBrace,
            '}' => TokenKind::RBrace,
            '-' => TokenKind::Minus,
            ',' => TokenKind::Comma,
            '>' if cur.eat('>') => TokenKind::CloseMods,
            '>' => TokenKind::Gt,
            '<' if cur.eat('<') => TokenKind::OpenMods,
            '[' if cur.eat('[') => TokenKind::OpenRepl,
            ']' if cur.eat(']') => TokenKind::CloseRepl,
            ':' if cur.eat('-') => TokenKind::Turnstile,
            '=' if cur.eat('=') => TokenKind::EqEq,
            '!' if cur.eat('=') => TokenKind::NotEq,
            '$' => {
                let mut name = String::from("$");
                match cur.peek() {
                    Some(c) if is_ident_start(c) => {}
                    _ => return Err(lex_error("`$` must be followed by an identifier".into())),
                }
                while let Some(c) = cur.peek().filter(|c| is_ident_continue(*c)) {
                    name.push(c);
                    cur.bump();
                }
                TokenKind::Var(name)
            }
            c if is_ident_start(c) => {
                let mut name = String::from(c);
                while let Some(c) = cur.peek().filter(|c| is_ident_continue(*c)) {
                    name.push(c);
                    cur.bump();
                }
                TokenKind::Ident(name)
            }
            other => return Err(lex_error(format!("unexpected character {other:?}"))),
        };
        // end is the last character of the token
        let end = Location::new(cur.line, cur.column.saturating_sub(1).max(start.column));
        tokens.push(Token {
            kind,
            span: SourceSpan::new(start, end.max(start)),
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(text: &str) -> Vec<TokenKind> {
        tokenize(text)
            .unwrap()
            .into_iter()
            .map(|t| t.kind)
            .collect()
    }

    #[test]
    fn arrow_with_and_without_spaces() {
        use TokenKind::*;
        let tight = kinds("a -x> b;");
        let loose = kinds("a - x > b ;");
        assert_eq!(tight, loose);
        assert_eq!(
            tight,
            vec![
                Ident("a".into()),
                Minus,
                Ident("x".into()),
                Gt,
                Ident("b".into()),
                Semi,
                Eof
            ]
        );
    }

    #[test]
    fn rule_tokens() {
        use TokenKind::*;
        assert_eq!(
            kinds("<< [[ initial :- ]] >> $v == != ,"),
            vec![
                OpenMods,
                OpenRepl,
                Ident("initial".into()),
                Turnstile,
                CloseRepl,
                CloseMods,
                Var("$v".into()),
                EqEq,
                NotEq,
                Comma,
                Eof
            ]
        );
    }

    #[test]
    fn comments_and_crlf_are_skipped() {
        let toks = tokenize("state a; // trailing\r\nstate b;").unwrap();
        assert_eq!(toks.len(), 7);
        assert_eq!(toks[3].span.start, Location::new(2, 1));
    }

    #[test]
    fn positions_are_one_based() {
        let toks = tokenize("state $a;").unwrap();
        assert_eq!(toks[1].span.start, Location::new(1, 7));
        assert_eq!(toks[1].span.end, Location::new(1, 8));
    }

    #[test]
    fn bad_characters() {
        for (text, at) in [("state a#;", 8), ("a < b", 3), ("$ x", 1), ("[x]", 1)] {
            let err = tokenize(text).unwrap_err();
            assert_eq!(err.code, Code::LexError, "{text}");
            assert_eq!(err.location, Some(Location::new(1, at)), "{text}");
        }
    }
}
