//! Recursive-descent parser.
//!
//! ```text
//! program := stmt*
//! stmt    := IDENT '=' expr ';'
//!          | 'if' '(' expr ')' '{' stmt* '}'
//!          | 'while' '(' expr ')' '{' stmt* '}'
//! expr    := binary expression over INT | IDENT | '(' expr ')'
//! ```
//!
//! Binary operators are parsed by precedence climbing: `* /` over `+ -`
//! over comparisons, every level left-associative.

use crate::diagnostic::Diagnostic;

use super::ast::{BinOp, Expr, Program, Stmt};
use super::lexer::{tokenize, tokenize_from, Token, TokenKind};

/// A syntax error plus whether it was caused by running out of input,
/// which the line-at-a-time parser treats as "need more lines".
#[derive(Debug)]
struct ParseError {
    diag: Diagnostic,
    at_eof: bool,
}

type PResult<T> = Result<T, ParseError>;

struct Parser<'t> {
    tokens: &'t [Token],
    pos: usize,
}

impl<'t> Parser<'t> {
    fn peek(&self) -> &'t Token {
        &self.tokens[self.pos.min(self.tokens.len() - 1)]
    }

    fn advance(&mut self) -> &'t Token {
        let tok = self.peek();
        if self.pos < self.tokens.len() - 1 {
            self.pos += 1;
        }
        tok
    }

    fn error_here(&self) -> ParseError {
        let tok = self.peek();
        ParseError {
            diag: Diagnostic::syntax(tok.line),
            at_eof: tok.kind == TokenKind::Eof,
        }
    }

    fn expect(&mut self, kind: TokenKind) -> PResult<&'t Token> {
        if self.peek().kind == kind {
            Ok(self.advance())
        } else {
            Err(self.error_here())
        }
    }

    /// A missing `;` is reported on the line where the statement should
    /// have ended, not on the line of whatever follows it.
    fn expect_semi(&mut self) -> PResult<()> {
        if self.peek().kind == TokenKind::Semi {
            self.advance();
            return Ok(());
        }
        let mut err = self.error_here();
        if self.pos > 0 {
            err.diag = Diagnostic::syntax(self.tokens[self.pos - 1].line);
        }
        Err(err)
    }

    fn program(&mut self) -> PResult<Program> {
        let mut body = Vec::new();
        while self.peek().kind != TokenKind::Eof {
            body.push(self.stmt()?);
        }
        Ok(Program { body })
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let tok = self.peek();
        match tok.kind {
            TokenKind::Ident => {
                self.advance();
                self.expect(TokenKind::Assign)?;
                let value = self.expr(1)?;
                self.expect_semi()?;
                Ok(Stmt::Assign {
                    target: tok.lexeme.clone(),
                    value,
                    line: tok.line,
                })
            }
            TokenKind::If | TokenKind::While => {
                self.advance();
                self.expect(TokenKind::LParen)?;
                let cond = self.expr(1)?;
                self.expect(TokenKind::RParen)?;
                self.expect(TokenKind::LBrace)?;
                let mut body = Vec::new();
                while self.peek().kind != TokenKind::RBrace {
                    if self.peek().kind == TokenKind::Eof {
                        return Err(self.error_here());
                    }
                    body.push(self.stmt()?);
                }
                self.advance();
                let line = tok.line;
                Ok(if tok.kind == TokenKind::If {
                    Stmt::If { cond, body, line }
                } else {
                    Stmt::While { cond, body, line }
                })
            }
            _ => Err(self.error_here()),
        }
    }

    fn expr(&mut self, min_prec: u8) -> PResult<Expr> {
        let mut lhs = self.primary()?;
        loop {
            let tok = self.peek();
            if tok.kind != TokenKind::Op {
                break;
            }
            let op = BinOp::from_lexeme(&tok.lexeme).expect("lexer only emits known operators");
            if op.precedence() < min_prec {
                break;
            }
            self.advance();
            let rhs = self.expr(op.precedence() + 1)?;
            lhs = Expr::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
                line: tok.line,
            };
        }
        Ok(lhs)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let tok = self.peek();
        match tok.kind {
            TokenKind::Int => {
                self.advance();
                let value = tok.lexeme.parse::<u64>().map_err(|_| ParseError {
                    diag: Diagnostic::syntax(tok.line),
                    at_eof: false,
                })?;
                Ok(Expr::Int { value, line: tok.line })
            }
            TokenKind::Ident => {
                self.advance();
                Ok(Expr::Var {
                    name: tok.lexeme.clone(),
                    line: tok.line,
                })
            }
            TokenKind::LParen => {
                self.advance();
                let inner = self.expr(1)?;
                self.expect(TokenKind::RParen)?;
                Ok(inner)
            }
            _ => Err(self.error_here()),
        }
    }
}

/// Parses a token stream (which must end in `Eof`) into a program.
pub fn parse(tokens: &[Token]) -> Result<Program, Diagnostic> {
    parse_inner(tokens).map_err(|e| e.diag)
}

fn parse_inner(tokens: &[Token]) -> PResult<Program> {
    assert!(
        tokens.last().is_some_and(|t| t.kind == TokenKind::Eof),
        "token stream must end with Eof"
    );
    Parser { tokens, pos: 0 }.program()
}

/// Tokenizes and parses in one step.
pub fn parse_source(source: &str) -> Result<Program, Diagnostic> {
    parse(&tokenize(source)?)
}

/// Incremental parser for interactive use: feed one line at a time and get
/// statements back once they are complete.
#[derive(Debug, Default)]
pub struct LineParser {
    pending: String,
    pending_start: usize,
    lines_seen: usize,
}

#[derive(Debug, PartialEq)]
pub enum LineOutcome {
    /// Zero or more complete statements.
    Complete(Vec<Stmt>),
    /// The input so far is a valid prefix; more lines are needed.
    Pending,
}

impl LineParser {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of lines fed so far.
    pub fn line_number(&self) -> usize {
        self.lines_seen
    }

    pub fn is_pending(&self) -> bool {
        !self.pending.is_empty()
    }

    /// Feeds one line. A blank line while a statement is open closes it,
    /// turning an incomplete statement into a syntax error.
    pub fn feed(&mut self, line: &str) -> Result<LineOutcome, Diagnostic> {
        self.lines_seen += 1;
        let blank = line.trim().is_empty();
        if self.pending.is_empty() {
            if blank {
                return Ok(LineOutcome::Complete(Vec::new()));
            }
            self.pending_start = self.lines_seen;
        } else {
            self.pending.push('\n');
        }
        self.pending.push_str(line);

        let result = tokenize_from(&self.pending, self.pending_start)
            .map_err(|diag| ParseError { diag, at_eof: false })
            .and_then(|toks| parse_inner(&toks));
        match result {
            Ok(program) => {
                self.pending.clear();
                Ok(LineOutcome::Complete(program.body))
            }
            Err(e) if e.at_eof && !blank => Ok(LineOutcome::Pending),
            Err(e) => {
                self.pending.clear();
                Err(e.diag)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn int(v: u64) -> Expr {
        Expr::Int { value: v, line: 1 }
    }

    fn var(n: &str) -> Expr {
        Expr::Var { name: n.into(), line: 1 }
    }

    fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Binary { op, lhs: Box::new(l), rhs: Box::new(r), line: 1 }
    }

    fn assign(t: &str, e: Expr) -> Stmt {
        Stmt::Assign { target: t.into(), value: e, line: 1 }
    }

    fn shape(src: &str) -> Program {
        parse_source(src).unwrap()
    }

    #[test]
    fn multiplication_binds_tighter() {
        let expected = Program {
            body: vec![assign("a", bin(BinOp::Add, int(2), bin(BinOp::Mul, int(3), int(4))))],
        };
        assert!(shape("a = 2 + 3 * 4;").same_shape(&expected));
    }

    #[test]
    fn subtraction_is_left_associative() {
        let expected = Program {
            body: vec![assign("a", bin(BinOp::Sub, bin(BinOp::Sub, int(8), int(3)), int(1)))],
        };
        assert!(shape("a = 8 - 3 - 1;").same_shape(&expected));
    }

    #[test]
    fn while_loop_program() {
        let src = "x = 10;\nwhile (x > 0)\n{\n x = x + 1;\n}";
        let expected = Program {
            body: vec![
                assign("x", int(10)),
                Stmt::While {
                    cond: bin(BinOp::Gt, var("x"), int(0)),
                    body: vec![assign("x", bin(BinOp::Add, var("x"), int(1)))],
                    line: 2,
                },
            ],
        };
        let got = shape(src);
        assert!(got.same_shape(&expected));
        assert_eq!(got.body[1].line(), 2);
        let Stmt::While { body, .. } = &got.body[1] else { unreachable!() };
        assert_eq!(body[0].line(), 4);
    }

    #[test]
    fn missing_semicolon_reports_statement_line() {
        let err = parse_source("x = 10;\ny = 20\nz = x + y;").unwrap_err();
        assert_eq!(err.to_string(), "syntax error at/near line 2");
    }

    #[test]
    fn empty_expression_is_rejected() {
        assert_eq!(parse_source("y = ;").unwrap_err().line, 1);
        assert_eq!(parse_source("x = 1;\n\ny = (2 + );").unwrap_err().line, 3);
    }

    #[test]
    fn misc_errors() {
        assert!(parse_source("x = 1 + 2").is_err());
        assert!(parse_source("while x > 0 { x = 1; }").is_err());
        assert!(parse_source("if (x) { x = 1;").is_err());
        assert!(parse_source("= 3;").is_err());
        assert!(parse_source("x = 99999999999999999999999;").is_err());
        assert!(parse_source("x = -1;").is_err());
    }

    #[test]
    fn empty_program_and_empty_blocks() {
        assert!(shape("").body.is_empty());
        assert_eq!(shape("if (1) { }").body.len(), 1);
    }

    #[test]
    fn comparisons_chain_left() {
        let expected = Program {
            body: vec![assign("a", bin(BinOp::Lt, bin(BinOp::Lt, int(1), int(2)), int(3)))],
        };
        assert!(shape("a = 1 < 2 < 3;").same_shape(&expected));
    }

    #[test]
    fn line_parser_single_line() {
        let mut lp = LineParser::new();
        let LineOutcome::Complete(stmts) = lp.feed("x = 3;").unwrap() else { panic!() };
        assert!(stmts[0].same_shape(&assign("x", int(3))));
    }

    #[test]
    fn line_parser_multi_line_matches_file_mode() {
        let lines = ["while (x > 0)", "{", "x = x - 1;", "}"];
        let mut lp = LineParser::new();
        let mut got = Vec::new();
        for l in lines {
            match lp.feed(l).unwrap() {
                LineOutcome::Complete(s) => got.extend(s),
                LineOutcome::Pending => {}
            }
        }
        let file = shape(&lines.join("\n"));
        assert_eq!(got.len(), 1);
        assert_eq!(got, file.body);
    }

    #[test]
    fn line_parser_errors_and_recovers() {
        let mut lp = LineParser::new();
        assert_eq!(lp.feed("x = 1;").unwrap(), LineOutcome::Complete(vec![assign("x", int(1))]));
        let err = lp.feed("y = ;").unwrap_err();
        assert_eq!(err.line, 2);
        assert_eq!(lp.feed("y = 20").unwrap(), LineOutcome::Pending);
        let err = lp.feed("").unwrap_err();
        assert_eq!(err.to_string(), "syntax error at/near line 3");
        assert!(!lp.is_pending());
        assert!(matches!(lp.feed("z = 2;").unwrap(), LineOutcome::Complete(s) if s.len() == 1));
    }
}
