use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
}

impl BinOp {
    pub fn from_lexeme(s: &str) -> Option<Self> {
        Some(match s {
            "+" => BinOp::Add,
            "-" => BinOp::Sub,
            "*" => BinOp::Mul,
            "/" => BinOp::Div,
            "<" => BinOp::Lt,
            ">" => BinOp::Gt,
            "<=" => BinOp::Le,
            ">=" => BinOp::Ge,
            "==" => BinOp::Eq,
            "!=" => BinOp::Ne,
            _ => return None,
        })
    }

    pub fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
            BinOp::Lt => "<",
            BinOp::Gt => ">",
            BinOp::Le => "<=",
            BinOp::Ge => ">=",
            BinOp::Eq => "==",
            BinOp::Ne => "!=",
        }
    }

    /// Binding strength; larger binds tighter. All levels are left-associative.
    pub fn precedence(self) -> u8 {
        match self {
            BinOp::Mul | BinOp::Div => 3,
            BinOp::Add | BinOp::Sub => 2,
            _ => 1,
        }
    }

    pub fn is_comparison(self) -> bool {
        self.precedence() == 1
    }
}

impl fmt::Display for BinOp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Expr {
    Int { value: u64, line: usize },
    Var { name: String, line: usize },
    Binary { op: BinOp, lhs: Box<Expr>, rhs: Box<Expr>, line: usize },
}

impl Expr {
    pub fn line(&self) -> usize {
        match self {
            Expr::Int { line, .. } | Expr::Var { line, .. } | Expr::Binary { line, .. } => *line,
        }
    }

    /// Equality ignoring line numbers.
    pub fn same_shape(&self, other: &Expr) -> bool {
        match (self, other) {
            (Expr::Int { value: a, .. }, Expr::Int { value: b, .. }) => a == b,
            (Expr::Var { name: a, .. }, Expr::Var { name: b, .. }) => a == b,
            (
                Expr::Binary { op: o1, lhs: l1, rhs: r1, .. },
                Expr::Binary { op: o2, lhs: l2, rhs: r2, .. },
            ) => o1 == o2 && l1.same_shape(l2) && r1.same_shape(r2),
            _ => false,
        }
    }

    /// Depth of the expression tree; leaves have depth 0.
    pub fn depth(&self) -> usize {
        match self {
            Expr::Binary { lhs, rhs, .. } => 1 + lhs.depth().max(rhs.depth()),
            _ => 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Stmt {
    Assign { target: String, value: Expr, line: usize },
    If { cond: Expr, body: Vec<Stmt>, line: usize },
    While { cond: Expr, body: Vec<Stmt>, line: usize },
}

impl Stmt {
    pub fn line(&self) -> usize {
        match self {
            Stmt::Assign { line, .. } | Stmt::If { line, .. } | Stmt::While { line, .. } => *line,
        }
    }

    pub fn same_shape(&self, other: &Stmt) -> bool {
        match (self, other) {
            (
                Stmt::Assign { target: t1, value: v1, .. },
                Stmt::Assign { target: t2, value: v2, .. },
            ) => t1 == t2 && v1.same_shape(v2),
            (Stmt::If { cond: c1, body: b1, .. }, Stmt::If { cond: c2, body: b2, .. })
            | (Stmt::While { cond: c1, body: b1, .. }, Stmt::While { cond: c2, body: b2, .. }) => {
                c1.same_shape(c2) && same_block(b1, b2)
            }
            _ => false,
        }
    }
}

fn same_block(a: &[Stmt], b: &[Stmt]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.same_shape(y))
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub body: Vec<Stmt>,
}

impl Program {
    pub fn same_shape(&self, other: &Program) -> bool {
        same_block(&self.body, &other.body)
    }
}
