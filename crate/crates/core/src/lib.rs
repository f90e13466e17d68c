//! Compiles a small imperative integer language into rate-independent
//! chemical reaction networks and checks them by stochastic simulation.

pub mod cli;
pub mod codegen;
pub mod crn;
pub mod diagnostic;
pub mod emitter;
pub mod frontend;
pub mod interpreter;
pub mod semantics;
pub mod simulator;
pub mod templates;

pub use codegen::{compile_program, CodegenContext};
pub use crn::{Crn, CrnError, RateConfig, RateTier, Reaction, ReactionId, Species, SpeciesId, SpeciesKind};
pub use diagnostic::{Diagnostic, Severity};
pub use emitter::{emit_cain_xml, emit_crn_text, parse_cain_xml, EmitError, XmlError};
pub use frontend::{parse, parse_source, tokenize, Expr, Program, Stmt, Token, TokenKind};
pub use interpreter::{interpret, Env, Interpreter};
pub use simulator::{run_ensemble, simulate, EnsembleSummary, SimConfig, SimError, StopReason, Trajectory};

/// Source text to a network: lex, parse, analyze, reject unsupported
/// constructs, then generate code.
pub fn compile_source(source: &str, rates: &RateConfig) -> Result<Crn, Vec<Diagnostic>> {
    let program = parse_source(source).map_err(|d| vec![d])?;
    let symbols = semantics::analyze(&program)?;
    semantics::check_supported(&program)?;
    compile_program(&program, &symbols, rates).map_err(|d| vec![d])
}
