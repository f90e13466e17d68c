//! Reference evaluator over non-negative integers.
//!
//! `-` is monus (`max(a - b, 0)`), matching what annihilation computes;
//! `/` is floor division; comparisons yield 1 or 0; `if`/`while` take any
//! non-zero condition as true.

use indexmap::IndexMap;

use crate::diagnostic::Diagnostic;
use crate::frontend::{BinOp, Expr, Program, Stmt};

pub const DEFAULT_STEP_LIMIT: u64 = 10_000_000;

/// Variable values in first-assignment order.
pub type Env = IndexMap<String, u64>;

pub struct Interpreter {
    pub env: Env,
    steps: u64,
    limit: u64,
}

impl Default for Interpreter {
    fn default() -> Self {
        Self::new()
    }
}

impl Interpreter {
    pub fn new() -> Self {
        Self::with_step_limit(DEFAULT_STEP_LIMIT)
    }

    pub fn with_step_limit(limit: u64) -> Self {
        Self {
            env: Env::new(),
            steps: 0,
            limit,
        }
    }

    pub fn exec_block(&mut self, stmts: &[Stmt]) -> Result<(), Diagnostic> {
        stmts.iter().try_for_each(|s| self.exec(s))
    }

    fn tick(&mut self, line: usize) -> Result<(), Diagnostic> {
        self.steps += 1;
        if self.steps > self.limit {
            Err(Diagnostic::step_limit(self.limit, line))
        } else {
            Ok(())
        }
    }

    pub fn exec(&mut self, stmt: &Stmt) -> Result<(), Diagnostic> {
        self.tick(stmt.line())?;
        match stmt {
            Stmt::Assign { target, value, .. } => {
                let v = self.eval(value)?;
                self.env.insert(target.clone(), v);
            }
            Stmt::If { cond, body, .. } => {
                if self.eval(cond)? != 0 {
                    self.exec_block(body)?;
                }
            }
            Stmt::While { cond, body, line } => {
                while self.eval(cond)? != 0 {
                    self.exec_block(body)?;
                    self.tick(*line)?;
                }
            }
        }
        Ok(())
    }

    pub fn eval(&self, expr: &Expr) -> Result<u64, Diagnostic> {
        match expr {
            Expr::Int { value, .. } => Ok(*value),
            Expr::Var { name, line } => self
                .env
                .get(name)
                .copied()
                .ok_or_else(|| Diagnostic::undeclared(name, *line)),
            Expr::Binary { op, lhs, rhs, line } => {
                let a = self.eval(lhs)?;
                let b = self.eval(rhs)?;
                let overflow = || Diagnostic::insufficient_memory(*line);
                Ok(match op {
                    BinOp::Add => a.checked_add(b).ok_or_else(overflow)?,
                    BinOp::Sub => a.saturating_sub(b),
                    BinOp::Mul => a.checked_mul(b).ok_or_else(overflow)?,
                    BinOp::Div => {
                        if b == 0 {
                            return Err(Diagnostic::division_by_zero(*line));
                        }
                        a / b
                    }
                    BinOp::Lt => u64::from(a < b),
                    BinOp::Gt => u64::from(a > b),
                    BinOp::Le => u64::from(a <= b),
                    BinOp::Ge => u64::from(a >= b),
                    BinOp::Eq => u64::from(a == b),
                    BinOp::Ne => u64::from(a != b),
                })
            }
        }
    }
}

/// Runs a whole program from an empty environment.
pub fn interpret(program: &Program) -> Result<Env, Diagnostic> {
    let mut it = Interpreter::new();
    it.exec_block(&program.body)?;
    Ok(it.env)
}

/// `{name} = {value}` lines in first-assignment order.
pub fn format_env(env: &Env) -> String {
    env.iter().map(|(k, v)| format!("{k} = {v}\n")).collect()
}
