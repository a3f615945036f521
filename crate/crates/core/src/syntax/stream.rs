use crate::diagnostic::{Code, Diagnostic, SourceSpan};

use super::lexer::{Token, TokenKind};

/// Cursor over a token vector terminated by `Eof`.
pub(crate) struct TokenStream {
    tokens: Vec<Token>,
    pos: usize,
}

impl TokenStream {
    pub fn new(tokens: Vec<Token>) -> TokenStream {
        debug_assert!(matches!(
            tokens.last().map(|t| &t.kind),
            Some(TokenKind::Eof)
        ));
        TokenStream { tokens, pos: 0 }
    }

    pub fn peek(&self) -> &Token {
        self.peek_at(0)
    }

    pub fn peek_at(&self, n: usize) -> &Token {
        let i = (self.pos + n).min(self.tokens.len() - 1);
        &self.tokens[i]
    }

    pub fn at(&self, kind: &TokenKind) -> bool {
        &self.peek().kind == kind
    }

    pub fn at_word(&self, word: &str) -> bool {
        self.peek().kind.is_word(word)
    }

    pub fn at_eof(&self) -> bool {
        self.at(&TokenKind::Eof)
    }

    pub fn bump(&mut self) -> Token {
        let tok = self.peek().clone();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    pub fn eat(&mut self, kind: &TokenKind) -> Option<Token> {
        if self.at(kind) {
            Some(self.bump())
        } else {
            None
        }
    }

    pub fn expect(&mut self, kind: &TokenKind) -> Result<Token, Diagnostic> {
        self.eat(kind)
            .ok_or_else(|| self.unexpected(&kind.to_string()))
    }

    pub fn expect_word(&mut self, word: &str) -> Result<Token, Diagnostic> {
        if self.at_word(word) {
            Ok(self.bump())
        } else {
            Err(self.unexpected(&format!("`{word}`")))
        }
    }

    pub fn unexpected(&self, expected: &str) -> Diagnostic {
        let tok = self.peek();
        Diagnostic::error(
            Code::SyntaxError,
            format!("expected {expected}, found {}", tok.kind),
            Some(tok.span.start),
        )
    }

    pub fn span_here(&self) -> SourceSpan {
        self.peek().span
    }
}
