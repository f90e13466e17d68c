#![allow(dead_code)]

use ccx_core::frontend::{unparse, BinOp};
use ccx_core::{Expr, Program, Stmt};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const VARIABLES: [&str; 4] = ["a", "b", "c", "d"];

/// Straight-line programs over `+ - *` with literals `0..=10`.
pub struct ProgramGen {
    rng: ChaCha8Rng,
    /// Largest value any subexpression may take.
    pub bound: u64,
    pub max_statements: usize,
    pub max_operators: usize,
}

impl ProgramGen {
    pub fn new(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
            bound: 100,
            max_statements: 5,
            max_operators: 2,
        }
    }

    fn expr(&mut self, vars: &[&'static str], ops: usize) -> Expr {
        if ops == 0 {
            if !vars.is_empty() && self.rng.random_bool(0.5) {
                let name = vars[self.rng.random_range(0..vars.len())].to_string();
                return Expr::Var { name, line: 1 };
            }
            return Expr::Int {
                value: self.rng.random_range(0..=10),
                line: 1,
            };
        }
        let left = self.rng.random_range(0..ops);
        let op = [BinOp::Add, BinOp::Sub, BinOp::Mul][self.rng.random_range(0..3)];
        Expr::Binary {
            op,
            lhs: Box::new(self.expr(vars, left)),
            rhs: Box::new(self.expr(vars, ops - 1 - left)),
            line: 1,
        }
    }

    /// Next program whose every intermediate value stays within `bound`,
    /// as source text with one statement per line.
    pub fn next_program(&mut self) -> String {
        loop {
            let n = self.rng.random_range(1..=self.max_statements);
            let mut vars: Vec<&'static str> = Vec::new();
            let mut env: Vec<(&'static str, u64)> = Vec::new();
            let mut body = Vec::new();
            let mut ok = true;
            for line in 1..=n {
                let ops = self.rng.random_range(0..=self.max_operators);
                let value = self.expr(&vars, ops);
                match bounded_eval(&value, &env, self.bound) {
                    Some(v) => {
                        let target = VARIABLES[self.rng.random_range(0..VARIABLES.len())];
                        env.retain(|(k, _)| *k != target);
                        env.push((target, v));
                        if !vars.contains(&target) {
                            vars.push(target);
                        }
                        body.push(Stmt::Assign {
                            target: target.to_string(),
                            value,
                            line,
                        });
                    }
                    None => {
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return unparse(&Program { body });
            }
        }
    }
}

/// Evaluates with monus, failing if any intermediate value exceeds `bound`.
pub fn bounded_eval(e: &Expr, env: &[(&str, u64)], bound: u64) -> Option<u64> {
    let v = match e {
        Expr::Int { value, .. } => *value,
        Expr::Var { name, .. } => env.iter().find(|(k, _)| k == name)?.1,
        Expr::Binary { op, lhs, rhs, .. } => {
            let a = bounded_eval(lhs, env, bound)?;
            let b = bounded_eval(rhs, env, bound)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a.saturating_sub(b),
                BinOp::Mul => a * b,
                _ => return None,
            }
        }
    };
    (v <= bound).then_some(v)
}
