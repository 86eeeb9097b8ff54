use super::ParseError;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Globally,
    Finally,
    Next,
    Until,
    LParen,
    RParen,
    /// Only produced by the lenient lexer.
    Unknown(char),
}

impl TokenKind {
    pub fn text(&self) -> String {
        match self {
            TokenKind::Ident(s) => s.clone(),
            TokenKind::True => "true".into(),
            TokenKind::False => "false".into(),
            TokenKind::Not => "!".into(),
            TokenKind::And => "&".into(),
            TokenKind::Or => "|".into(),
            TokenKind::Implies => "->".into(),
            TokenKind::Globally => "G".into(),
            TokenKind::Finally => "F".into(),
            TokenKind::Next => "X".into(),
            TokenKind::Until => "U".into(),
            TokenKind::LParen => "(".into(),
            TokenKind::RParen => ")".into(),
            TokenKind::Unknown(c) => c.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    /// Byte offset of the first character.
    pub offset: usize,
}

pub(crate) fn is_keyword(word: &str) -> bool {
    matches!(word, "G" | "F" | "X" | "U" | "true" | "false")
}

fn keyword_or_ident(word: &str) -> TokenKind {
    match word {
        "G" => TokenKind::Globally,
        "F" => TokenKind::Finally,
        "X" => TokenKind::Next,
        "U" => TokenKind::Until,
        "true" => TokenKind::True,
        "false" => TokenKind::False,
        _ => TokenKind::Ident(word.to_string()),
    }
}

fn lex(text: &str, lenient: bool) -> Result<Vec<Token>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        let start = i;
        let kind = match c {
            b'(' => {
                i += 1;
                TokenKind::LParen
            }
            b')' => {
                i += 1;
                TokenKind::RParen
            }
            b'!' => {
                i += 1;
                TokenKind::Not
            }
            b'&' => {
                i += 1;
                TokenKind::And
            }
            b'|' => {
                i += 1;
                TokenKind::Or
            }
            b'-' if bytes.get(i + 1) == Some(&b'>') => {
                i += 2;
                TokenKind::Implies
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                keyword_or_ident(&text[start..i])
            }
            _ => {
                let ch = text[i..].chars().next().expect("in bounds");
                if !lenient {
                    return Err(ParseError {
                        offset: start,
                        expected: vec!["token".into()],
                        found: ch.to_string(),
                    });
                }
                i += ch.len_utf8();
                TokenKind::Unknown(ch)
            }
        };
        tokens.push(Token {
            kind,
            offset: start,
        });
    }
    Ok(tokens)
}

/// Strict lexer used by the parser.
pub fn tokenize(text: &str) -> Result<Vec<Token>, ParseError> {
    lex(text, false)
}

/// Token texts for scoring. Never fails: unknown characters become
/// single-character tokens.
pub fn token_strings(text: &str) -> Vec<String> {
    lex(text, true)
        .expect("lenient lexing cannot fail")
        .into_iter()
        .map(|t| t.kind.text())
        .collect()
}
