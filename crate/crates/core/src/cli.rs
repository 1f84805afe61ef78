//! Command-line frontend: the `.tf` input language, its compilation to
//! transition formulas, and the `mp` / `prove` commands.
//!
//! ```text
//! vars x, y;
//! formula x >= 0 && x' == x - y && y' == y;
//! ```
//!
//! or a structured loop
//!
//! ```text
//! vars x, c;
//! loop {
//!   assume(x >= 1 && 2 | x);
//!   x = x / 2;
//!   c = c + 1;
//! }
//! ```

use std::collections::BTreeSet;
use std::io::Write;

use clap::{Parser as ClapParser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_traits::{One, Signed};
use serde_json::{json, Value};

use crate::abstractions::{compose, AffineTS, LinearSimulation, TransitionFormula};
use crate::error::{Error, Result};
use crate::lia::{Formula, LinTerm, Parser, Tok, Var};
use crate::mortal::{mp, MortalReport};
use crate::qlinalg::{QMatrix, Rational, Subspace};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Stmt {
    Assign(Var, LinTerm),
    /// `x = e / k`, rounding toward negative infinity.
    DivAssign(Var, LinTerm, BigInt),
    /// `x = e % k`, the non-negative remainder.
    ModAssign(Var, LinTerm, BigInt),
    Havoc(Var),
    Assume(Formula),
    If(Formula, Vec<Stmt>, Vec<Stmt>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InputProgram {
    Formula { vars: Vec<Var>, body: Formula },
    Loop { vars: Vec<Var>, body: Vec<Stmt> },
}

impl InputProgram {
    pub fn vars(&self) -> &[Var] {
        match self {
            InputProgram::Formula { vars, .. } | InputProgram::Loop { vars, .. } => vars,
        }
    }

    /// The transition formula of one loop iteration.  Intermediate states
    /// introduced by sequencing are eliminated eagerly.
    pub fn to_transition_formula(&self) -> TransitionFormula {
        match self {
            InputProgram::Formula { vars, body } => TransitionFormula::new(vars.clone(), body.clone()),
            InputProgram::Loop { vars, body } => block(vars, body),
        }
    }
}

fn block(vars: &[Var], stmts: &[Stmt]) -> TransitionFormula {
    stmts
        .iter()
        .map(|s| statement(vars, s))
        .reduce(|f, g| compose(&f, &g, true))
        .unwrap_or_else(|| TransitionFormula::identity(vars.to_vec()))
}

/// `x' == x` for every variable except `skip`.
fn frame(vars: &[Var], skip: Option<&Var>) -> Vec<Formula> {
    vars.iter()
        .filter(|v| Some(*v) != skip)
        .map(|v| Formula::eq(LinTerm::var(&v.primed()), LinTerm::var(v)))
        .collect()
}

fn statement(vars: &[Var], s: &Stmt) -> TransitionFormula {
    let tf = |body| TransitionFormula::new(vars.to_vec(), body);
    match s {
        Stmt::Assign(x, e) => {
            let mut c = frame(vars, Some(x));
            c.push(Formula::eq(LinTerm::var(&x.primed()), e.clone()));
            tf(Formula::and(c))
        }
        Stmt::DivAssign(x, e, k) => {
            // k x' <= e <= k x' + k - 1
            let kx = LinTerm::var(&x.primed()).scale(k);
            let mut c = frame(vars, Some(x));
            c.push(Formula::leq(kx.clone(), e.clone()));
            c.push(Formula::leq(e.clone(), kx + LinTerm::constant(k - BigInt::one())));
            tf(Formula::and(c))
        }
        Stmt::ModAssign(x, e, k) => {
            let r = LinTerm::var(&x.primed());
            let mut c = frame(vars, Some(x));
            c.push(Formula::geq(r.clone(), LinTerm::zero()));
            c.push(Formula::leq(r.clone(), LinTerm::constant(k - BigInt::one())));
            c.push(Formula::div(k.clone(), e.clone() - r));
            tf(Formula::and(c))
        }
        Stmt::Havoc(x) => tf(Formula::and(frame(vars, Some(x)))),
        Stmt::Assume(g) => {
            let mut c = frame(vars, None);
            c.push(g.clone());
            tf(Formula::and(c))
        }
        Stmt::If(g, then, els) => {
            let a = block(vars, then);
            let b = block(vars, els);
            tf(Formula::or(vec![
                Formula::and(vec![g.clone(), a.body]),
                Formula::and(vec![Formula::not(g.clone()), b.body]),
            ]))
        }
    }
}

/// Parses a `.tf` program.  Variables outside the header are rejected.
pub fn parse_input(text: &str) -> Result<InputProgram> {
    let mut p = Parser::new(text)?;
    p.expect_keyword("vars")?;
    let mut vars = Vec::new();
    loop {
        let name = p.ident()?;
        let v = Var::new(&name);
        if v.is_primed() {
            return p.error(format!("declared variable `{name}` may not be primed"));
        }
        if vars.contains(&v) {
            return p.error(format!("variable `{name}` declared twice"));
        }
        vars.push(v);
        if !p.eat_sym(",") {
            break;
        }
    }
    p.expect_sym(";")?;
    let declared: BTreeSet<Var> = vars.iter().cloned().collect();
    let prog = if p.is_keyword("formula") {
        p.advance();
        let body = p.formula()?;
        p.expect_sym(";")?;
        let mut allowed = declared.clone();
        allowed.extend(vars.iter().map(Var::primed));
        check_vars(&body.free_vars(), &allowed)?;
        InputProgram::Formula { vars, body }
    } else if p.is_keyword("loop") {
        p.advance();
        let body = stmt_block(&mut p, &declared)?;
        InputProgram::Loop { vars, body }
    } else {
        return p.error("expected `formula` or `loop`");
    };
    if !p.at_eof() {
        return p.error("trailing input after program");
    }
    Ok(prog)
}

/// Parses and compiles a `.tf` program in one step.
pub fn compile(text: &str) -> Result<TransitionFormula> {
    Ok(parse_input(text)?.to_transition_formula())
}

fn check_vars(used: &BTreeSet<Var>, allowed: &BTreeSet<Var>) -> Result<()> {
    match used.iter().find(|v| !allowed.contains(*v)) {
        Some(v) => Err(Error::Undeclared(v.to_string())),
        None => Ok(()),
    }
}

fn stmt_block(p: &mut Parser, declared: &BTreeSet<Var>) -> Result<Vec<Stmt>> {
    p.expect_sym("{")?;
    let mut out = Vec::new();
    while !p.eat_sym("}") {
        if p.at_eof() {
            return p.error("unclosed block");
        }
        out.push(stmt(p, declared)?);
    }
    Ok(out)
}

fn condition(p: &mut Parser, declared: &BTreeSet<Var>) -> Result<Formula> {
    p.expect_sym("(")?;
    let g = p.formula()?;
    p.expect_sym(")")?;
    check_vars(&g.free_vars(), declared)?;
    Ok(g)
}

fn positive_literal(p: &mut Parser) -> Result<BigInt> {
    match p.peek().clone() {
        Tok::Int(k) if k.is_positive() => {
            p.advance();
            Ok(k)
        }
        _ => p.error("expected a positive integer literal"),
    }
}

fn stmt(p: &mut Parser, declared: &BTreeSet<Var>) -> Result<Stmt> {
    if p.is_keyword("assume") {
        p.advance();
        let g = condition(p, declared)?;
        p.expect_sym(";")?;
        return Ok(Stmt::Assume(g));
    }
    if p.is_keyword("if") {
        p.advance();
        let g = condition(p, declared)?;
        let then = stmt_block(p, declared)?;
        let els = if p.is_keyword("else") {
            p.advance();
            if p.is_keyword("if") {
                vec![stmt(p, declared)?]
            } else {
                stmt_block(p, declared)?
            }
        } else {
            Vec::new()
        };
        return Ok(Stmt::If(g, then, els));
    }
    let name = p.ident()?;
    let x = Var::new(&name);
    if !declared.contains(&x) {
        return Err(Error::Undeclared(name));
    }
    p.expect_sym("=")?;
    let s = if p.eat_sym("*") {
        Stmt::Havoc(x)
    } else {
        let e = p.expr()?;
        check_vars(&e.vars().cloned().collect(), declared)?;
        if p.eat_sym("/") {
            Stmt::DivAssign(x, e, positive_literal(p)?)
        } else if p.eat_sym("%") {
            Stmt::ModAssign(x, e, positive_literal(p)?)
        } else {
            Stmt::Assign(x, e)
        }
    };
    p.expect_sym(";")?;
    Ok(s)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Stage {
    Affine,
    Det,
    Reflection,
    Chi,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(ClapParser, Debug)]
#[command(name = "mortal", version, about = "Mortal preconditions of linear integer loops")]
struct Cli {
    /// Print an intermediate stage before the result.
    #[arg(long, global = true, value_enum)]
    dump: Option<Stage>,
    #[arg(long, global = true, value_enum, default_value = "text")]
    format: Format,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the mortal precondition of the program in FILE (`-` for stdin).
    Mp { file: String },
    /// Print VALID if every state of FILE terminates, UNKNOWN otherwise.
    Prove { file: String },
}

fn rat(x: &Rational) -> Value {
    Value::String(x.to_string())
}

fn mat(m: &QMatrix) -> Value {
    Value::Array((0..m.rows()).map(|i| Value::Array(m.row(i).iter().map(rat).collect())).collect())
}

fn sim(s: &LinearSimulation) -> Value {
    json!({ "matrix": mat(&s.matrix), "offset": s.offset.iter().map(rat).collect::<Vec<_>>() })
}

fn system(t: &AffineTS) -> Value {
    json!({
        "dim": t.dim(),
        "empty": t.is_empty(),
        "a": mat(t.a()),
        "b": mat(t.b()),
        "c": t.c().iter().map(rat).collect::<Vec<_>>(),
    })
}

fn subspace(s: &Subspace) -> Value {
    Value::Array(s.basis().iter().map(|v| Value::Array(v.iter().map(rat).collect())).collect())
}

/// The JSON encoding of a report: keys `vars`, `mp`, `stages`, `proved_universal`.
pub fn report_json(r: &MortalReport) -> Value {
    let s = &r.stages;
    let opt = |v: Option<Value>| v.unwrap_or(Value::Null);
    json!({
        "vars": r.vars.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
        "mp": r.mp.to_string(),
        "stages": {
            "affine": system(&s.affine_hull),
            "det": opt(s.det_space.as_ref().map(subspace)),
            "deterministic": opt(s.deterministic.as_ref().map(|(t, d)| json!({"system": system(t), "simulation": sim(d)}))),
            "homogenized": opt(s.homogenized.as_ref().map(system)),
            "reflection": opt(s.reflection.as_ref().map(|(t, q)| json!({"system": system(t), "simulation": sim(q)}))),
            "simulation": opt(s.simulation.as_ref().map(sim)),
            "integer_restriction": opt(s.integer_restriction.as_ref().map(|ir| json!({
                "z_basis": subspace(&ir.z_basis),
                "m": mat(&ir.m),
                "p": mat(&ir.p),
                "c": mat(&ir.cmat),
            }))),
            "guard_vars": s.guard_vars.iter().map(|v| v.to_string()).collect::<Vec<_>>(),
            "guard": opt(s.guard.as_ref().map(|g| Value::String(g.to_string()))),
            "chi": opt(s.chi.as_ref().map(|c| Value::Array(c.formulas().iter().map(|f| Value::String(f.to_string())).collect()))),
        },
        "proved_universal": r.proved_universal,
    })
}

fn fmt_vec(v: &[Rational]) -> String {
    let items: Vec<String> = v.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(", "))
}

/// Human-readable rendering of one stage.
pub fn stage_text(r: &MortalReport, stage: Stage) -> String {
    let s = &r.stages;
    let none = || "(not reached)\n".to_string();
    match stage {
        Stage::Affine => format!("{}", s.affine_hull),
        Stage::Det => match (&s.det_space, &s.deterministic) {
            (Some(lam), Some((t, d))) => {
                let mut out = format!("Det space of dimension {}\n", lam.dim());
                for b in lam.basis() {
                    out += &format!("  {}\n", fmt_vec(b));
                }
                out += &format!("simulation:\n{}\ndeterministic system: {t}", d.matrix);
                out
            }
            _ => none(),
        },
        Stage::Reflection => match (&s.reflection, &s.simulation) {
            (Some((t, _)), Some(sim)) => format!(
                "{t}simulation from the program (scaled to integers):\n{}\noffset {}\n",
                sim.matrix,
                fmt_vec(&sim.offset)
            ),
            _ => none(),
        },
        Stage::Chi => match (&s.guard, &s.chi) {
            (Some(g), Some(c)) => {
                let ws: Vec<String> = s.guard_vars.iter().map(|v| v.to_string()).collect();
                let mut out = format!("guard over ({}): {g}\nperiod {}\n", ws.join(", "), c.period());
                for (i, h) in c.formulas().iter().enumerate() {
                    out += &format!("  H{i} = {h}\n");
                }
                out
            }
            _ => none(),
        },
    }
}

/// Runs the command line `args` (program name first).  Returns the exit code:
/// 0 on success or VALID, 1 on UNKNOWN, 2 on usage, parse or analysis errors.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    let (file, prove) = match &cli.command {
        Command::Mp { file } => (file, false),
        Command::Prove { file } => (file, true),
    };
    let text = if file == "-" {
        let mut s = String::new();
        std::io::Read::read_to_string(&mut std::io::stdin(), &mut s).map(|_| s)
    } else {
        std::fs::read_to_string(file)
    };
    let text = match text {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {file}: {e}");
            return 2;
        }
    };
    let report = match compile(&text).and_then(|f| mp(&f)) {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {file}: {e}");
            return 2;
        }
    };
    let code = if prove && !report.proved_universal { 1 } else { 0 };
    let verdict = if report.proved_universal { "VALID" } else { "UNKNOWN" };
    let res = match cli.format {
        Format::Json => {
            let mut v = report_json(&report);
            if prove {
                v["verdict"] = Value::String(verdict.into());
            }
            writeln!(out, "{}", serde_json::to_string_pretty(&v).expect("json"))
        }
        Format::Text => {
            let mut s = String::new();
            if let Some(stage) = cli.dump {
                s += &stage_text(&report, stage);
            }
            s += &if prove { verdict.to_string() } else { report.mp.to_string() };
            writeln!(out, "{s}")
        }
    };
    if res.is_err() {
        return 2;
    }
    code
}
