//! Tokenizer shared by the set-expression and polynomial grammars.

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TokenKind<'a> {
    /// A run of ASCII digits, kept as text so each grammar picks its own width.
    Int(&'a str),
    /// Identifier such as `x1`.
    Ident(&'a str),
    LBrace,
    RBrace,
    LParen,
    RParen,
    Plus,
    Star,
    Caret,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Token<'a> {
    pub kind: TokenKind<'a>,
    /// Byte offset of the first character of the token.
    pub offset: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unexpected character {ch:?} at byte {offset}")]
pub struct LexError {
    pub ch: char,
    pub offset: usize,
}

pub fn tokenize(text: &str) -> Result<Vec<Token<'_>>, LexError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        let start = i;
        let kind = match b {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'{' => TokenKind::LBrace,
            b'}' => TokenKind::RBrace,
            b'(' => TokenKind::LParen,
            b')' => TokenKind::RParen,
            b'+' => TokenKind::Plus,
            b'*' => TokenKind::Star,
            b'^' => TokenKind::Caret,
            b'0'..=b'9' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                tokens.push(Token { kind: TokenKind::Int(&text[start..i]), offset: start });
                continue;
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                tokens.push(Token { kind: TokenKind::Ident(&text[start..i]), offset: start });
                continue;
            }
            _ => {
                let ch = text[start..].chars().next().unwrap_or('\u{fffd}');
                return Err(LexError { ch, offset: start });
            }
        };
        tokens.push(Token { kind, offset: start });
        i += 1;
    }
    Ok(tokens)
}

/// Cursor over a token list with end-of-input offset tracking.
#[derive(Debug)]
pub struct Cursor<'a> {
    tokens: Vec<Token<'a>>,
    pos: usize,
    end: usize,
}

impl<'a> Cursor<'a> {
    pub fn new(text: &'a str) -> Result<Self, LexError> {
        Ok(Cursor { tokens: tokenize(text)?, pos: 0, end: text.len() })
    }

    pub fn peek(&self) -> Option<Token<'a>> {
        self.tokens.get(self.pos).copied()
    }

    pub fn next(&mut self) -> Option<Token<'a>> {
        let t = self.peek();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    /// Offset of the next token, or the input length at end of input.
    pub fn offset(&self) -> usize {
        self.peek().map_or(self.end, |t| t.offset)
    }

    pub fn eat(&mut self, kind: TokenKind<'_>) -> bool {
        match self.peek() {
            Some(t) if t.kind == kind => {
                self.pos += 1;
                true
            }
            _ => false,
        }
    }

    pub fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn offsets_and_kinds() {
        let toks = tokenize(" {12}* + x1^2").unwrap();
        let kinds: Vec<_> = toks.iter().map(|t| t.kind).collect();
        assert_eq!(
            kinds,
            vec![
                TokenKind::LBrace,
                TokenKind::Int("12"),
                TokenKind::RBrace,
                TokenKind::Star,
                TokenKind::Plus,
                TokenKind::Ident("x1"),
                TokenKind::Caret,
                TokenKind::Int("2"),
            ]
        );
        assert_eq!(toks[1].offset, 2);
        assert_eq!(toks[5].offset, 9);
    }

    #[test]
    fn rejects_unknown_character() {
        assert_eq!(tokenize("{1} - {2}"), Err(LexError { ch: '-', offset: 4 }));
    }
}
