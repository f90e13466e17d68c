use std::fmt::Write;

use super::ast::{Expr, Program, Stmt};

/// Parenthesized tree dump, one node per line, two-space indentation.
///
/// ```text
/// (program
///   (assign x
///     (int 10)))
/// ```
pub fn ast_tree(program: &Program) -> String {
    let mut out = String::new();
    out.push_str("(program");
    for stmt in &program.body {
        out.push('\n');
        stmt_tree(stmt, 1, &mut out);
    }
    out.push_str(")\n");
    out
}

fn indent(depth: usize, out: &mut String) {
    for _ in 0..depth {
        out.push_str("  ");
    }
}

fn stmt_tree(stmt: &Stmt, depth: usize, out: &mut String) {
    indent(depth, out);
    match stmt {
        Stmt::Assign { target, value, .. } => {
            writeln!(out, "(assign {target}").unwrap();
            expr_tree(value, depth + 1, out);
        }
        Stmt::If { cond, body, .. } | Stmt::While { cond, body, .. } => {
            let kw = if matches!(stmt, Stmt::If { .. }) { "if" } else { "while" };
            writeln!(out, "({kw}").unwrap();
            expr_tree(cond, depth + 1, out);
            out.push('\n');
            indent(depth + 1, out);
            out.push_str("(body");
            for s in body {
                out.push('\n');
                stmt_tree(s, depth + 2, out);
            }
            out.push(')');
        }
    }
    out.push(')');
}

fn expr_tree(expr: &Expr, depth: usize, out: &mut String) {
    indent(depth, out);
    match expr {
        Expr::Int { value, .. } => write!(out, "(int {value})").unwrap(),
        Expr::Var { name, .. } => write!(out, "(var {name})").unwrap(),
        Expr::Binary { op, lhs, rhs, .. } => {
            writeln!(out, "(binop {op}").unwrap();
            expr_tree(lhs, depth + 1, out);
            out.push('\n');
            expr_tree(rhs, depth + 1, out);
            out.push(')');
        }
    }
}

/// Renders a program back to source text with the minimum parentheses
/// needed to reproduce the same tree.
pub fn unparse(program: &Program) -> String {
    let mut out = String::new();
    for stmt in &program.body {
        unparse_stmt(stmt, 0, &mut out);
    }
    out
}

fn unparse_stmt(stmt: &Stmt, depth: usize, out: &mut String) {
    indent(depth, out);
    match stmt {
        Stmt::Assign { target, value, .. } => {
            writeln!(out, "{target} = {};", unparse_expr(value)).unwrap();
        }
        Stmt::If { cond, body, .. } | Stmt::While { cond, body, .. } => {
            let kw = if matches!(stmt, Stmt::If { .. }) { "if" } else { "while" };
            writeln!(out, "{kw} ({}) {{", unparse_expr(cond)).unwrap();
            for s in body {
                unparse_stmt(s, depth + 1, out);
            }
            indent(depth, out);
            out.push_str("}\n");
        }
    }
}

pub fn unparse_expr(expr: &Expr) -> String {
    match expr {
        Expr::Int { value, .. } => value.to_string(),
        Expr::Var { name, .. } => name.clone(),
        Expr::Binary { op, lhs, rhs, .. } => {
            let prec = op.precedence();
            let wrap = |e: &Expr, need_parens: bool| {
                let s = unparse_expr(e);
                if need_parens { format!("({s})") } else { s }
            };
            // Left-associative: a right operand at the same level needs parens.
            let l = wrap(lhs, matches!(**lhs, Expr::Binary { op: o, .. } if o.precedence() < prec));
            let r = wrap(rhs, matches!(**rhs, Expr::Binary { op: o, .. } if o.precedence() <= prec));
            format!("{l} {op} {r}")
        }
    }
}
