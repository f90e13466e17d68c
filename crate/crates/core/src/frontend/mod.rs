//! Lexing, parsing and printing of the source language.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;

pub use ast::{BinOp, Expr, Program, Stmt};
pub use lexer::{tokenize, Token, TokenKind};
pub use parser::{parse, parse_source, LineOutcome, LineParser};
pub use pretty::{ast_tree, unparse, unparse_expr};
