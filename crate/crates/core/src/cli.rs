//! The `ccx` command line: `compile`, `run`, `interpret` and `repl`.
//!
//! Every command writes to caller-supplied streams and returns its exit
//! code: 0 on success, 1 when the program has diagnostics, 2 for I/O and
//! usage failures.

use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::codegen::CodegenContext;
use crate::crn::{Crn, RateConfig};
use crate::diagnostic::Diagnostic;
use crate::emitter::{emit_cain_xml, emit_crn_text, parse_cain_xml, reaction_line};
use crate::frontend::{ast_tree, parse_source, tokenize, LineOutcome, LineParser, Stmt};
use crate::interpreter::{format_env, interpret, Interpreter};
use crate::semantics::check_stmt;
use crate::simulator::{run_ensemble, simulate, write_trace_csv, SimConfig};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTIC: i32 = 1;
pub const EXIT_IO: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "ccx", version, about = "Compile integer programs to chemical reaction networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Translate a program and write the selected artifact.
    Compile(CompileArgs),
    /// Compile (or load a .xml model) and simulate an ensemble.
    Run(RunArgs),
    /// Evaluate a program with the reference interpreter.
    Interpret(SourceArgs),
    /// Interactive session: interpret and compile statement by statement.
    Repl,
}

#[derive(Debug, Args)]
pub struct SourceArgs {
    /// Source file (`.ccx`).
    #[arg(required_unless_present = "code")]
    pub file: Option<PathBuf>,
    /// Inline source text instead of a file.
    #[arg(short = 'c', long, conflicts_with = "file")]
    pub code: Option<String>,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct RateArgs {
    #[arg(long, default_value_t = RateConfig::default().fast)]
    pub fast: f64,
    #[arg(long, default_value_t = RateConfig::default().slow)]
    pub slow: f64,
    #[arg(long, default_value_t = RateConfig::default().veryslow)]
    pub veryslow: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum EmitKind {
    Tokens,
    Ast,
    Crn,
    Xml,
}

#[derive(Debug, Args)]
pub struct CompileArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    /// Output path; `-` for stdout. Defaults to the source path with the
    /// extension swapped (`.xml` / `.crn`).
    #[arg(short, long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = EmitKind::Xml)]
    pub emit: EmitKind,
    #[command(flatten)]
    pub rates: RateArgs,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub source: SourceArgs,
    #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u64).range(1..))]
    pub runs: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = SimConfig::default().horizon)]
    pub horizon: f64,
    #[arg(long, default_value_t = SimConfig::default().max_steps)]
    pub max_steps: u64,
    /// Species to report (comma separated); defaults to the program's variables.
    #[arg(long, value_delimiter = ',')]
    pub observe: Vec<String>,
    /// Write the trajectory of run 0 as CSV.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub rates: RateArgs,
}

struct Streams<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

impl Streams<'_> {
    fn diagnostics(&mut self, diags: &[Diagnostic]) -> i32 {
        for d in diags {
            let _ = writeln!(self.err, "{d}");
        }
        EXIT_DIAGNOSTIC
    }

    fn io_error(&mut self, what: &str, path: &Path, e: std::io::Error) -> i32 {
        let _ = writeln!(self.err, "error: cannot {what} {}: {e}", path.display());
        EXIT_IO
    }
}

impl RateArgs {
    fn config(&self) -> Result<RateConfig, Diagnostic> {
        RateConfig::new(self.fast, self.slow, self.veryslow).map_err(Diagnostic::other)
    }
}

fn read_source(args: &SourceArgs, io: &mut Streams<'_>) -> Result<String, i32> {
    match (&args.code, &args.file) {
        (Some(code), _) => Ok(code.clone()),
        (None, Some(path)) => std::fs::read_to_string(path).map_err(|e| io.io_error("read", path, e)),
        (None, None) => Err(EXIT_IO),
    }
}

fn write_output(path: &Path, text: &str, io: &mut Streams<'_>) -> i32 {
    if path == Path::new("-") {
        return match io.out.write_all(text.as_bytes()) {
            Ok(()) => EXIT_OK,
            Err(e) => io.io_error("write", path, e),
        };
    }
    match std::fs::write(path, text) {
        Ok(()) => EXIT_OK,
        Err(e) => io.io_error("write", path, e),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, stdin: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_IO } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                err.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return code;
        }
    };
    let mut io = Streams { out, err };
    match cli.command {
        Command::Compile(a) => cmd_compile(&a, &mut io),
        Command::Run(a) => cmd_run(&a, &mut io),
        Command::Interpret(a) => cmd_interpret(&a, &mut io),
        Command::Repl => repl(stdin, io.out, io.err),
    }
}

fn cmd_compile(args: &CompileArgs, io: &mut Streams<'_>) -> i32 {
    let source = match read_source(&args.source, io) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let rates = match args.rates.config() {
        Ok(r) => r,
        Err(d) => return io.diagnostics(&[d]),
    };
    let text = match args.emit {
        EmitKind::Tokens => match tokenize(&source) {
            Ok(tokens) => tokens.iter().map(|t| format!("{t}\n")).collect(),
            Err(d) => return io.diagnostics(&[d]),
        },
        EmitKind::Ast => match parse_source(&source) {
            Ok(p) => ast_tree(&p),
            Err(d) => return io.diagnostics(&[d]),
        },
        EmitKind::Crn | EmitKind::Xml => {
            let crn = match crate::compile_source(&source, &rates) {
                Ok(c) => c,
                Err(diags) => return io.diagnostics(&diags),
            };
            let emitted = if args.emit == EmitKind::Xml {
                emit_cain_xml(&crn, &rates)
            } else {
                emit_crn_text(&crn)
            };
            match emitted {
                Ok(t) => t,
                Err(e) => return io.diagnostics(&[Diagnostic::other(e)]),
            }
        }
    };
    let default_path = match (args.emit, &args.source.file) {
        (EmitKind::Xml, Some(f)) => Some(f.with_extension("xml")),
        (EmitKind::Crn, Some(f)) => Some(f.with_extension("crn")),
        _ => None,
    };
    match args.output.clone().or(default_path) {
        Some(path) => write_output(&path, &text, io),
        None => write_output(Path::new("-"), &text, io),
    }
}

fn load_network(args: &RunArgs, rates: &mut RateConfig, io: &mut Streams<'_>) -> Result<Crn, i32> {
    let is_xml = args.source.code.is_none()
        && args
            .source
            .file
            .as_ref()
            .and_then(|f| f.extension())
            .is_some_and(|e| e == "xml");
    let source = read_source(&args.source, io)?;
    if is_xml {
        let (crn, file_rates) = parse_cain_xml(&source).map_err(|e| io.diagnostics(&[Diagnostic::other(e)]))?;
        if args.rates.fast == RateConfig::default().fast
            && args.rates.slow == RateConfig::default().slow
            && args.rates.veryslow == RateConfig::default().veryslow
        {
            *rates = file_rates;
        }
        return Ok(crn);
    }
    crate::compile_source(&source, rates).map_err(|d| io.diagnostics(&d))
}

fn cmd_run(args: &RunArgs, io: &mut Streams<'_>) -> i32 {
    let mut rates = match args.rates.config() {
        Ok(r) => r,
        Err(d) => return io.diagnostics(&[d]),
    };
    let crn = match load_network(args, &mut rates, io) {
        Ok(c) => c,
        Err(code) => return code,
    };
    let config = SimConfig {
        seed: args.seed,
        horizon: args.horizon,
        max_steps: args.max_steps,
        rates,
        observe: (!args.observe.is_empty()).then(|| args.observe.clone()),
    };
    let summary = match run_ensemble(&crn, &config, args.runs as usize) {
        Ok(s) => s,
        Err(e) => return io.diagnostics(&[Diagnostic::other(e)]),
    };
    let _ = io.out.write_all(summary.report().as_bytes());
    if let Some(path) = &args.trace {
        let csv = simulate(&crn, &config).and_then(|t| write_trace_csv(&crn, &t, &summary.observables));
        match csv {
            Ok(text) => return write_output(path, &text, io),
            Err(e) => return io.diagnostics(&[Diagnostic::other(e)]),
        }
    }
    EXIT_OK
}

fn cmd_interpret(args: &SourceArgs, io: &mut Streams<'_>) -> i32 {
    let source = match read_source(args, io) {
        Ok(s) => s,
        Err(code) => return code,
    };
    let result = parse_source(&source).and_then(|p| interpret(&p));
    match result {
        Ok(env) => {
            let _ = io.out.write_all(format_env(&env).as_bytes());
            EXIT_OK
        }
        Err(d) => io.diagnostics(&[d]),
    }
}

fn assigned_names(stmt: &Stmt, names: &mut Vec<String>) {
    match stmt {
        Stmt::Assign { target, .. } => {
            if !names.contains(target) {
                names.push(target.clone());
            }
        }
        Stmt::If { body, .. } | Stmt::While { body, .. } => {
            body.iter().for_each(|s| assigned_names(s, names));
        }
    }
}

/// One REPL session over `input`. Each complete statement is evaluated
/// against a persistent environment and, when it is compilable, appended
/// to a persistent network whose new species and reactions are listed.
pub fn repl(input: &mut dyn BufRead, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let mut parser = LineParser::new();
    let mut interp = Interpreter::new();
    let mut ctx = CodegenContext::new();
    let mut line = String::new();
    loop {
        let _ = write!(out, "ccx> ");
        let _ = out.flush();
        line.clear();
        match input.read_line(&mut line) {
            Ok(0) => break,
            Ok(_) => {}
            Err(e) => {
                let _ = writeln!(err, "error: cannot read input: {e}");
                return EXIT_IO;
            }
        }
        let trimmed = line.trim_end_matches(['\n', '\r']);
        if !parser.is_pending() && trimmed.trim() == "exit" {
            break;
        }
        let stmts = match parser.feed(trimmed) {
            Ok(LineOutcome::Complete(stmts)) => stmts,
            Ok(LineOutcome::Pending) => continue,
            Err(d) => {
                let _ = writeln!(err, "{d}");
                continue;
            }
        };
        for stmt in &stmts {
            repl_stmt(stmt, &mut interp, &mut ctx, out, err);
        }
    }
    EXIT_OK
}

fn repl_stmt(
    stmt: &Stmt,
    interp: &mut Interpreter,
    ctx: &mut CodegenContext,
    out: &mut dyn Write,
    err: &mut dyn Write,
) {
    if let Err(d) = interp.exec(stmt) {
        let _ = writeln!(err, "{d}");
        return;
    }
    let mut names = Vec::new();
    assigned_names(stmt, &mut names);
    for n in names {
        if let Some(v) = interp.env.get(&n) {
            let _ = writeln!(out, "{n} = {v}");
        }
    }

    let mut diags = Vec::new();
    check_stmt(stmt, &mut diags);
    ctx.symbols.analyze_stmt(stmt, &mut diags);
    if !diags.is_empty() {
        for d in diags {
            let _ = writeln!(err, "{d}");
        }
        return;
    }
    let (species_before, reactions_before) = (ctx.crn.species.len(), ctx.crn.reactions.len());
    if let Err(d) = ctx.compile_stmt(stmt) {
        let _ = writeln!(err, "{d}");
        return;
    }
    for s in &ctx.crn.species[species_before..] {
        let _ = writeln!(out, "# species: {}={}", s.name, s.initial_count);
    }
    for r in &ctx.crn.reactions[reactions_before..] {
        let _ = writeln!(out, "{}", reaction_line(&ctx.crn, r));
    }
}
