//! Lowers checked programs to a chain of template instances.
//!
//! Assignment `x = e` evaluates `e` first (into `_localz` when it is a
//! binary expression), then clears `x`, then copies the value in; copy is
//! additive, so the destination has to be empty. Nested operands are
//! evaluated into `_localx`/`_localy` at depth one and fresh `_tmp{n}`
//! species below that.

use std::collections::HashMap;

use crate::crn::{Crn, CrnError, RateConfig, ReactionId, SpeciesId, SpeciesKind};
use crate::diagnostic::Diagnostic;
use crate::frontend::{BinOp, Expr, Program, Stmt};
use crate::semantics::SymbolTable;
use crate::templates::{self, ModuleInstance};

/// State of one compilation. Also used incrementally by the REPL, one
/// statement at a time.
#[derive(Debug)]
pub struct CodegenContext {
    pub crn: Crn,
    pub symbols: SymbolTable,
    next_index: u32,
    registers: HashMap<&'static str, SpeciesId>,
    temps: Vec<SpeciesId>,
    constants: HashMap<u64, SpeciesId>,
    /// Top-level modules in emission order.
    pub modules: Vec<ModuleInstance>,
    pub links: Vec<ReactionId>,
}

impl Default for CodegenContext {
    fn default() -> Self {
        Self::new()
    }
}

type CgResult<T> = Result<T, CrnError>;

impl CodegenContext {
    pub fn new() -> Self {
        Self {
            crn: Crn::new(),
            symbols: SymbolTable::new(),
            next_index: 1,
            registers: HashMap::new(),
            temps: Vec::new(),
            constants: HashMap::new(),
            modules: Vec::new(),
            links: Vec::new(),
        }
    }

    fn alloc_index(&mut self) -> u32 {
        let i = self.next_index;
        self.next_index += 1;
        i
    }

    /// Species of a user variable, created (as an observable) on first use.
    pub fn variable(&mut self, name: &str, line: usize) -> CgResult<SpeciesId> {
        if let Some(id) = self.symbols.get(name).and_then(|s| s.species) {
            return Ok(id);
        }
        let id = match self.crn.species_id(name) {
            Some(id) => id,
            None => self.crn.add_species(name, 0, SpeciesKind::UserVariable)?,
        };
        self.crn.add_observable(id);
        let mut errors = Vec::new();
        if !self.symbols.contains(name) {
            // Declared outside `analyze`, e.g. by a direct API user.
            self.symbols.analyze_stmt(
                &Stmt::Assign {
                    target: name.to_string(),
                    value: Expr::Int { value: 0, line },
                    line,
                },
                &mut errors,
            );
        }
        if let Some(info) = self.symbols.get_mut(name) {
            info.species = Some(id);
        }
        Ok(id)
    }

    /// Shared constant species `c{value}` holding `value` molecules. Falls
    /// back to `_c{value}` if a user variable already has that name.
    pub fn const_species(&mut self, value: u64) -> CgResult<SpeciesId> {
        if let Some(&id) = self.constants.get(&value) {
            return Ok(id);
        }
        let plain = format!("c{value}");
        let name = if self.symbols.contains(&plain) || self.crn.species_id(&plain).is_some() {
            format!("_c{value}")
        } else {
            plain
        };
        let id = self.crn.add_species(&name, value, SpeciesKind::Constant)?;
        self.constants.insert(value, id);
        Ok(id)
    }

    fn register(&mut self, name: &'static str) -> CgResult<SpeciesId> {
        if let Some(&id) = self.registers.get(name) {
            return Ok(id);
        }
        let id = self.crn.add_species(name, 0, SpeciesKind::Register)?;
        self.registers.insert(name, id);
        Ok(id)
    }

    fn fresh_temp(&mut self) -> CgResult<SpeciesId> {
        let id = self
            .crn
            .add_species(&format!("_tmp{}", self.temps.len()), 0, SpeciesKind::Register)?;
        self.temps.push(id);
        Ok(id)
    }

    /// Appends a module to the chain. The very first module is armed with
    /// one start molecule.
    fn push(&mut self, module: ModuleInstance) -> CgResult<()> {
        match self.modules.last() {
            Some(prev) => {
                let link = templates::chain(&mut self.crn, prev, &module)?;
                self.links.push(link);
            }
            None => self.crn.set_initial(module.start, 1),
        }
        self.modules.push(module);
        Ok(())
    }

    fn clear(&mut self, target: SpeciesId) -> CgResult<()> {
        let i = self.alloc_index();
        let m = templates::instantiate_clear(&mut self.crn, target, i)?;
        self.push(m)
    }

    fn copy(&mut self, source: SpeciesId, dest: SpeciesId) -> CgResult<()> {
        let i = self.alloc_index();
        let m = templates::instantiate_copy(&mut self.crn, source, dest, i)?;
        self.push(m)
    }

    pub fn compile_stmt(&mut self, stmt: &Stmt) -> Result<(), Diagnostic> {
        match stmt {
            Stmt::Assign { target, value, line } => self
                .compile_assign(target, value, *line)
                .map_err(Diagnostic::internal),
            Stmt::If { line, .. } => Err(Diagnostic::unsupported("if", *line)),
            Stmt::While { line, .. } => Err(Diagnostic::unsupported("while", *line)),
        }
    }

    fn compile_assign(&mut self, target: &str, value: &Expr, line: usize) -> CgResult<()> {
        // Operands are resolved before the target so that a variable's
        // species exists before it is (re)declared.
        let source = match value {
            Expr::Int { value: 0, .. } => None,
            Expr::Binary { .. } => {
                let z = self.register("_localz")?;
                self.compile_expr_into(value, z, 0, false)?;
                Some(z)
            }
            leaf => Some(self.leaf(leaf)?),
        };
        let dest = self.variable(target, line)?;
        if source == Some(dest) {
            return Ok(());
        }
        self.clear(dest)?;
        if let Some(src) = source {
            self.copy(src, dest)?;
        }
        Ok(())
    }

    fn leaf(&mut self, expr: &Expr) -> CgResult<SpeciesId> {
        match expr {
            Expr::Int { value, .. } => self.const_species(*value),
            Expr::Var { name, line } => self.variable(name, *line),
            Expr::Binary { .. } => unreachable!("leaf called on a binary expression"),
        }
    }

    /// Evaluates `expr` and returns the species holding its value.
    pub fn compile_expr(&mut self, expr: &Expr) -> Result<SpeciesId, Diagnostic> {
        match expr {
            Expr::Binary { .. } => {
                let z = self.register("_localz").map_err(Diagnostic::internal)?;
                self.compile_expr_into(expr, z, 0, false).map_err(Diagnostic::internal)?;
                Ok(z)
            }
            leaf => self.leaf(leaf).map_err(Diagnostic::internal),
        }
    }

    fn operand(&mut self, expr: &Expr, depth: usize, left: bool) -> CgResult<SpeciesId> {
        match expr {
            Expr::Binary { .. } => {
                let (dst, fresh) = match (depth, left) {
                    (1, true) => (self.register("_localx")?, false),
                    (1, false) => (self.register("_localy")?, false),
                    _ => (self.fresh_temp()?, true),
                };
                self.compile_expr_into(expr, dst, depth, fresh)?;
                Ok(dst)
            }
            leaf => self.leaf(leaf),
        }
    }

    /// Lowers a binary expression at nesting `depth` into `dst`. `dst_empty`
    /// marks a freshly allocated destination that needs no clearing.
    fn compile_expr_into(&mut self, expr: &Expr, dst: SpeciesId, depth: usize, dst_empty: bool) -> CgResult<()> {
        let Expr::Binary { op, lhs, rhs, .. } = expr else {
            unreachable!("compile_expr_into expects a binary expression");
        };
        let l = self.operand(lhs, depth + 1, true)?;
        let r = self.operand(rhs, depth + 1, false)?;
        if !dst_empty {
            self.clear(dst)?;
        }
        match op {
            BinOp::Add => {
                self.copy(l, dst)?;
                self.copy(r, dst)?;
            }
            BinOp::Sub => {
                self.copy(l, dst)?;
                let temp = self.fresh_temp()?;
                self.copy(r, temp)?;
                let i = self.alloc_index();
                let m = templates::instantiate_subtract(&mut self.crn, dst, temp, i)?;
                self.push(m)?;
                // Leftover subtrahend when it exceeded the minuend.
                self.clear(temp)?;
            }
            BinOp::Mul => {
                let zero = self.const_species(0)?;
                let i = self.alloc_index();
                let m = templates::instantiate_multiply(&mut self.crn, l, r, dst, zero, i, &mut self.next_index)?;
                self.push(m)?;
            }
            other => unreachable!("operator {other} rejected by check_supported"),
        }
        Ok(())
    }

    /// Finishes the network: indicator initial counts follow the final
    /// initial counts, and the structure is validated.
    pub fn finish(mut self) -> Result<Crn, Diagnostic> {
        templates::refresh_indicator_initials(&mut self.crn);
        self.crn
            .validate_structure()
            .map_err(|errs| Diagnostic::internal(&errs[0]))?;
        Ok(self.crn)
    }
}

/// Compiles a program that passed `analyze` and `check_supported`.
///
/// User variables become the observables, in first-assignment order and
/// with the lowest species ids.
pub fn compile_program(program: &Program, symbols: &SymbolTable, rates: &RateConfig) -> Result<Crn, Diagnostic> {
    rates.check().map_err(Diagnostic::internal)?;
    let mut ctx = CodegenContext::new();
    ctx.symbols = symbols.clone();
    for (name, info) in symbols.iter() {
        ctx.variable(name, info.first_line).map_err(Diagnostic::internal)?;
    }
    for stmt in &program.body {
        ctx.compile_stmt(stmt)?;
    }
    ctx.finish()
}
