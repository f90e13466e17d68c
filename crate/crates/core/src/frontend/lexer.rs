use std::fmt;

use crate::diagnostic::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum TokenKind {
    Ident,
    Int,
    Op,
    Assign,
    Semi,
    LParen,
    RParen,
    LBrace,
    RBrace,
    If,
    While,
    Eof,
}

impl TokenKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TokenKind::Ident => "ident",
            TokenKind::Int => "int",
            TokenKind::Op => "op",
            TokenKind::Assign => "assign",
            TokenKind::Semi => "semi",
            TokenKind::LParen => "lparen",
            TokenKind::RParen => "rparen",
            TokenKind::LBrace => "lbrace",
            TokenKind::RBrace => "rbrace",
            TokenKind::If => "if",
            TokenKind::While => "while",
            TokenKind::Eof => "eof",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub lexeme: String,
    pub line: usize,
}

impl Token {
    fn new(kind: TokenKind, lexeme: impl Into<String>, line: usize) -> Self {
        Self {
            kind,
            lexeme: lexeme.into(),
            line,
        }
    }
}

/// `LINE:KIND:LEXEME`, the `--emit tokens` line format.
impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.line, self.kind.as_str(), self.lexeme)
    }
}

/// Splits source text into tokens. The stream always ends with an `Eof`
/// token carrying the line of the last real token (or 1 for empty input).
pub fn tokenize(source: &str) -> Result<Vec<Token>, Diagnostic> {
    tokenize_from(source, 1)
}

/// Like [`tokenize`], but numbering lines from `first_line`. Used by the
/// line-at-a-time parser.
pub fn tokenize_from(source: &str, first_line: usize) -> Result<Vec<Token>, Diagnostic> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut line = first_line;
    let mut i = 0;

    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b'\n' => {
                line += 1;
                i += 1;
            }
            b' ' | b'\t' | b'\r' => i += 1,
            b'a'..=b'z' => {
                let start = i;
                while i < bytes.len() && matches!(bytes[i], b'a'..=b'z' | b'0'..=b'9') {
                    i += 1;
                }
                // An identifier running into an uppercase letter or underscore
                // is not a shorter identifier followed by junk.
                if i < bytes.len() && (bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                    return Err(Diagnostic::syntax(line));
                }
                let word = &source[start..i];
                let kind = match word {
                    "if" => TokenKind::If,
                    "while" => TokenKind::While,
                    _ => TokenKind::Ident,
                };
                tokens.push(Token::new(kind, word, line));
            }
            b'0'..=b'9' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                // `20.22` and `3x` are malformed numbers, not two tokens.
                if i < bytes.len() && (bytes[i] == b'.' || bytes[i].is_ascii_alphabetic() || bytes[i] == b'_') {
                    return Err(Diagnostic::syntax(line));
                }
                tokens.push(Token::new(TokenKind::Int, &source[start..i], line));
            }
            b'<' | b'>' | b'=' | b'!' => {
                let two = bytes.get(i + 1) == Some(&b'=');
                let (kind, len) = match (c, two) {
                    (b'=', false) => (TokenKind::Assign, 1),
                    (b'!', false) => return Err(Diagnostic::syntax(line)),
                    (_, true) => (TokenKind::Op, 2),
                    (_, false) => (TokenKind::Op, 1),
                };
                tokens.push(Token::new(kind, &source[i..i + len], line));
                i += len;
            }
            b'+' | b'-' | b'*' | b'/' => {
                tokens.push(Token::new(TokenKind::Op, &source[i..i + 1], line));
                i += 1;
            }
            b';' | b'(' | b')' | b'{' | b'}' => {
                let kind = match c {
                    b';' => TokenKind::Semi,
                    b'(' => TokenKind::LParen,
                    b')' => TokenKind::RParen,
                    b'{' => TokenKind::LBrace,
                    _ => TokenKind::RBrace,
                };
                tokens.push(Token::new(kind, &source[i..i + 1], line));
                i += 1;
            }
            _ => return Err(Diagnostic::syntax(line)),
        }
    }

    let eof_line = tokens.last().map_or(first_line, |t| t.line);
    tokens.push(Token::new(TokenKind::Eof, "", eof_line));
    Ok(tokens)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn kinds(src: &str) -> Vec<(TokenKind, String)> {
        tokenize(src)
            .unwrap()
            .into_iter()
            .map(|t| (t.kind, t.lexeme))
            .collect()
    }

    #[test]
    fn simple_assignment() {
        use TokenKind::*;
        assert_eq!(
            kinds("x = 10;"),
            vec![
                (Ident, "x".into()),
                (Assign, "=".into()),
                (Int, "10".into()),
                (Semi, ";".into()),
                (Eof, "".into()),
            ]
        );
    }

    #[test]
    fn identifier_with_digits() {
        let toks = tokenize("x9 = 3;").unwrap();
        assert_eq!(toks[0].kind, TokenKind::Ident);
        assert_eq!(toks[0].lexeme, "x9");
        assert_eq!(toks[2].lexeme, "3");
    }

    #[test]
    fn decimal_point_is_a_syntax_error() {
        let err = tokenize("x = 20.22;").unwrap_err();
        assert_eq!(err.to_string(), "syntax error at/near line 1");
    }

    #[test]
    fn error_reports_current_line() {
        let err = tokenize("x = 1;\n\ny = 2.5;").unwrap_err();
        assert_eq!(err.line, 3);
    }

    #[test]
    fn maximal_munch_operators() {
        let ops: Vec<_> = tokenize("a <= b >= c == d != e < f > g = h")
            .unwrap()
            .into_iter()
            .filter(|t| matches!(t.kind, TokenKind::Op | TokenKind::Assign))
            .map(|t| t.lexeme)
            .collect();
        assert_eq!(ops, ["<=", ">=", "==", "!=", "<", ">", "="]);
    }

    #[test]
    fn keywords_are_reserved() {
        let toks = tokenize("while if whilex").unwrap();
        assert_eq!(toks[0].kind, TokenKind::While);
        assert_eq!(toks[1].kind, TokenKind::If);
        assert_eq!(toks[2].kind, TokenKind::Ident);
    }

    #[test]
    fn rejects_uppercase_underscore_and_bang() {
        assert!(tokenize("X = 1;").is_err());
        assert!(tokenize("x_y = 1;").is_err());
        assert!(tokenize("xY = 1;").is_err());
        assert!(tokenize("x = !1;").is_err());
        assert!(tokenize("x = 3y;").is_err());
    }

    #[test]
    fn line_numbers_are_non_decreasing_and_eof_takes_last_line() {
        let toks = tokenize("a = 1;\nb = 2;\n\n").unwrap();
        assert!(toks.windows(2).all(|w| w[0].line <= w[1].line));
        assert_eq!(toks.last().unwrap().line, 2);
        assert_eq!(tokenize("").unwrap()[0].line, 1);
    }

    #[test]
    fn display_format() {
        let toks = tokenize("x = 10;").unwrap();
        assert_eq!(toks[0].to_string(), "1:ident:x");
        assert_eq!(toks[4].to_string(), "1:eof:");
    }
}
