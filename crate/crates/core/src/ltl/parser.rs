//! Recursive-descent parser.
//!
//! Precedence, loosest first: `->` (right), `|` (left), `&` (left),
//! `U` (right), then the prefix operators `!`, `G`, `F`, `X`.

use super::ast::Formula;
use super::lexer::{tokenize, Token, TokenKind};
use super::ParseError;

struct Parser<'a> {
    tokens: Vec<Token>,
    pos: usize,
    len: usize,
    _src: &'a str,
}

const PRIMARY_START: &[&str] = &["true", "false", "identifier", "(", "!", "G", "F", "X"];

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn offset(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.len, |t| t.offset)
    }

    fn error(&self, expected: &[&str]) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self
                .peek()
                .map_or_else(|| "end of input".to_string(), |k| k.text()),
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn implication(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.disjunction()?;
        if self.eat(&TokenKind::Implies) {
            let rhs = self.implication()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.conjunction()?;
        while self.eat(&TokenKind::Or) {
            let rhs = self.conjunction()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.until()?;
        while self.eat(&TokenKind::And) {
            let rhs = self.until()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn until(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.unary()?;
        if self.eat(&TokenKind::Until) {
            let rhs = self.until()?;
            return Ok(Formula::until(lhs, rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        let wrap: fn(Formula) -> Formula = match self.peek() {
            Some(TokenKind::Not) => Formula::not,
            Some(TokenKind::Globally) => Formula::globally,
            Some(TokenKind::Finally) => Formula::finally,
            Some(TokenKind::Next) => Formula::next,
            _ => return self.primary(),
        };
        self.pos += 1;
        Ok(wrap(self.unary()?))
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let Some(kind) = self.peek().cloned() else {
            return Err(self.error(PRIMARY_START));
        };
        match kind {
            TokenKind::True => {
                self.pos += 1;
                Ok(Formula::True)
            }
            TokenKind::False => {
                self.pos += 1;
                Ok(Formula::falsity())
            }
            TokenKind::Ident(name) => {
                self.pos += 1;
                Ok(Formula::Atom(name))
            }
            TokenKind::LParen => {
                self.pos += 1;
                let inner = self.implication()?;
                if !self.eat(&TokenKind::RParen) {
                    return Err(self.error(&[")", "&", "|", "->", "U"]));
                }
                Ok(inner)
            }
            _ => Err(self.error(PRIMARY_START)),
        }
    }
}

/// Parses LTL text in the `G F X U ! & | -> true false` syntax.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = tokenize(text)?;
    if tokens.is_empty() {
        return Err(ParseError {
            offset: 0,
            expected: PRIMARY_START.iter().map(|s| s.to_string()).collect(),
            found: "end of input".into(),
        });
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        len: text.len(),
        _src: text,
    };
    let f = parser.implication()?;
    if parser.pos != parser.tokens.len() {
        return Err(parser.error(&["end of input", "&", "|", "->", "U"]));
    }
    Ok(f)
}
