//! Symbol table construction and backend support checks.
//!
//! Variables are declared by their first assignment and all live in one
//! global scope.

use indexmap::IndexMap;

use crate::crn::SpeciesId;
use crate::diagnostic::Diagnostic;
use crate::frontend::{BinOp, Expr, Program, Stmt};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymbolInfo {
    pub first_line: usize,
    /// Filled in by codegen once the variable has a species.
    pub species: Option<SpeciesId>,
}

/// Variables in first-assignment order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SymbolTable {
    entries: IndexMap<String, SymbolInfo>,
}

impl SymbolTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &str) -> Option<&SymbolInfo> {
        self.entries.get(name)
    }

    pub fn get_mut(&mut self, name: &str) -> Option<&mut SymbolInfo> {
        self.entries.get_mut(name)
    }

    pub fn contains(&self, name: &str) -> bool {
        self.entries.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.entries.keys().map(String::as_str)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, &SymbolInfo)> {
        self.entries.iter().map(|(k, v)| (k.as_str(), v))
    }

    fn declare(&mut self, name: &str, line: usize) {
        self.entries.entry(name.to_string()).or_insert(SymbolInfo {
            first_line: line,
            species: None,
        });
    }

    /// Checks one statement against the table, declaring its assignment
    /// targets. Uses are checked before the statement's own target is
    /// declared, so `x = x + 1;` needs an earlier `x`.
    pub fn analyze_stmt(&mut self, stmt: &Stmt, errors: &mut Vec<Diagnostic>) {
        match stmt {
            Stmt::Assign { target, value, line } => {
                self.check_uses(value, errors);
                self.declare(target, *line);
            }
            Stmt::If { cond, body, .. } | Stmt::While { cond, body, .. } => {
                self.check_uses(cond, errors);
                for s in body {
                    self.analyze_stmt(s, errors);
                }
            }
        }
    }

    fn check_uses(&self, expr: &Expr, errors: &mut Vec<Diagnostic>) {
        match expr {
            Expr::Int { .. } => {}
            Expr::Var { name, line } => {
                if !self.contains(name) {
                    errors.push(Diagnostic::undeclared(name, *line));
                }
            }
            Expr::Binary { lhs, rhs, .. } => {
                self.check_uses(lhs, errors);
                self.check_uses(rhs, errors);
            }
        }
    }
}

/// Builds the symbol table, reporting every use-before-assignment in
/// source order.
pub fn analyze(program: &Program) -> Result<SymbolTable, Vec<Diagnostic>> {
    let mut table = SymbolTable::new();
    let mut errors = Vec::new();
    for stmt in &program.body {
        table.analyze_stmt(stmt, &mut errors);
    }
    if errors.is_empty() {
        Ok(table)
    } else {
        Err(errors)
    }
}

/// Accepts only what the reaction backend can lower: assignments of
/// expressions built from literals, variables, `+`, `-` and `*`.
pub fn check_supported(program: &Program) -> Result<(), Vec<Diagnostic>> {
    let mut errors = Vec::new();
    for stmt in &program.body {
        check_stmt(stmt, &mut errors);
    }
    if errors.is_empty() {
        Ok(())
    } else {
        Err(errors)
    }
}

pub fn check_stmt(stmt: &Stmt, errors: &mut Vec<Diagnostic>) {
    match stmt {
        Stmt::Assign { value, .. } => check_expr(value, errors),
        // The condition belongs to the construct; only the body is checked further.
        Stmt::If { body, line, .. } => {
            errors.push(Diagnostic::unsupported("if", *line));
            body.iter().for_each(|s| check_stmt(s, errors));
        }
        Stmt::While { body, line, .. } => {
            errors.push(Diagnostic::unsupported("while", *line));
            body.iter().for_each(|s| check_stmt(s, errors));
        }
    }
}

fn check_expr(expr: &Expr, errors: &mut Vec<Diagnostic>) {
    if let Expr::Binary { op, lhs, rhs, line } = expr {
        check_expr(lhs, errors);
        if !matches!(op, BinOp::Add | BinOp::Sub | BinOp::Mul) {
            errors.push(Diagnostic::unsupported(op.symbol(), *line));
        }
        check_expr(rhs, errors);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn table(src: &str) -> Result<SymbolTable, Vec<Diagnostic>> {
        analyze(&parse_source(src).unwrap())
    }

    #[test]
    fn declares_by_assignment_in_order() {
        let t = table("x = 10;\ny = x;").unwrap();
        assert_eq!(t.names().collect::<Vec<_>>(), ["x", "y"]);
        assert_eq!(t.get("x").unwrap().first_line, 1);
        assert_eq!(t.get("y").unwrap().first_line, 2);
    }

    #[test]
    fn undeclared_use() {
        let errs = table("y = x;").unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].to_string(), "undeclared variable 'x' at line 1");
    }

    #[test]
    fn all_errors_reported_in_order() {
        let errs = table("a = b + c;\nd = e;").unwrap_err();
        let msgs: Vec<_> = errs.iter().map(|e| e.to_string()).collect();
        assert_eq!(
            msgs,
            [
                "undeclared variable 'b' at line 1",
                "undeclared variable 'c' at line 1",
                "undeclared variable 'e' at line 2",
            ]
        );
    }

    #[test]
    fn reassignment_and_self_reference() {
        let t = table("x = 10; x = x + 1;").unwrap();
        assert_eq!(t.len(), 1);
        assert_eq!(t.get("x").unwrap().first_line, 1);
        assert!(table("x = x + 1;").is_err());
    }

    #[test]
    fn analyze_is_idempotent() {
        let p = parse_source("x = 1; while (x > 0) { y = x; x = x - 1; }").unwrap();
        assert_eq!(analyze(&p).unwrap(), analyze(&p).unwrap());
    }

    #[test]
    fn supported_subset() {
        let ok = |s: &str| check_supported(&parse_source(s).unwrap()).is_ok();
        assert!(ok("z = 2 * 3;"));
        assert!(ok("z = 2 * 3 + 4 - 1;"));
        let errs = check_supported(&parse_source("z = x / y;").unwrap()).unwrap_err();
        assert_eq!(errs[0].to_string(), "unsupported construct '/' at line 1");
        let errs = check_supported(&parse_source("while (x > 0) { x = x - 1; }").unwrap()).unwrap_err();
        assert_eq!(errs.len(), 1);
        assert_eq!(errs[0].to_string(), "unsupported construct 'while' at line 1");
        let errs = check_supported(&parse_source("if (x) { y = a < b; }").unwrap()).unwrap_err();
        assert_eq!(errs.len(), 2);
        assert_eq!(errs[1].to_string(), "unsupported construct '<' at line 1");
    }
}
