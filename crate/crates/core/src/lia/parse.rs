use num_bigint::BigInt;
use num_traits::Zero;

use super::formula::Formula;
use super::term::{LinTerm, Var};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Sym(&'static str),
    Eof,
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub line: usize,
    pub col: usize,
}

const SYMBOLS: [&str; 24] = [
    "&&", "||", "->", "<=", ">=", "==", "!=", "(", ")", "{", "}", ";", ",", ".", "|", "!", "<",
    ">", "+", "-", "*", "=", "/", "%",
];

pub struct Lexer;

impl Lexer {
    pub fn tokenize(src: &str) -> Result<Vec<Token>> {
        let chars: Vec<char> = src.chars().collect();
        let mut out = Vec::new();
        let (mut i, mut line, mut col) = (0usize, 1usize, 1usize);
        while i < chars.len() {
            let ch = chars[i];
            if ch == '\n' {
                i += 1;
                line += 1;
                col = 1;
                continue;
            }
            if ch.is_whitespace() {
                i += 1;
                col += 1;
                continue;
            }
            if ch == '/' && chars.get(i + 1) == Some(&'/') {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            let start_col = col;
            if ch.is_ascii_digit() {
                let s = i;
                while i < chars.len() && chars[i].is_ascii_digit() {
                    i += 1;
                }
                let text: String = chars[s..i].iter().collect();
                col += i - s;
                out.push(Token {
                    tok: Tok::Int(text.parse().expect("digits")),
                    line,
                    col: start_col,
                });
                continue;
            }
            if ch.is_alphabetic() || ch == '_' {
                let s = i;
                while i < chars.len()
                    && (chars[i].is_alphanumeric() || chars[i] == '_' || chars[i] == '#')
                {
                    i += 1;
                }
                while i < chars.len() && chars[i] == '\'' {
                    i += 1;
                }
                let text: String = chars[s..i].iter().collect();
                col += i - s;
                out.push(Token {
                    tok: Tok::Ident(text),
                    line,
                    col: start_col,
                });
                continue;
            }
            let rest: String = chars[i..(i + 2).min(chars.len())].iter().collect();
            let sym = SYMBOLS.iter().find(|s| rest.starts_with(*s));
            match sym {
                Some(s) => {
                    i += s.len();
                    col += s.len();
                    out.push(Token {
                        tok: Tok::Sym(s),
                        line,
                        col: start_col,
                    });
                }
                None => {
                    return Err(Error::Parse {
                        line,
                        col,
                        msg: format!("unexpected character `{ch}`"),
                    })
                }
            }
        }
        out.push(Token {
            tok: Tok::Eof,
            line,
            col,
        });
        Ok(out)
    }
}

/// Recursive-descent parser over a token stream, shared by the formula
/// syntax and the loop language.
pub struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

const COMPARISONS: [&str; 6] = ["<=", "<", ">=", ">", "==", "!="];

impl Parser {
    pub fn new(src: &str) -> Result<Parser> {
        Ok(Parser {
            toks: Lexer::tokenize(src)?,
            pos: 0,
        })
    }

    pub fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    pub fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    pub fn advance(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    pub fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        let t = &self.toks[self.pos];
        Err(Error::Parse {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    pub fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    pub fn is_keyword(&self, k: &str) -> bool {
        matches!(self.peek(), Tok::Ident(x) if x == k)
    }

    pub fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.advance();
            true
        } else {
            false
        }
    }

    pub fn expect_sym(&mut self, s: &str) -> Result<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("expected `{s}`, found {}", describe(self.peek())))
        }
    }

    pub fn expect_keyword(&mut self, k: &str) -> Result<()> {
        if self.is_keyword(k) {
            self.advance();
            Ok(())
        } else {
            self.error(format!("expected `{k}`, found {}", describe(self.peek())))
        }
    }

    pub fn ident(&mut self) -> Result<String> {
        match self.peek().clone() {
            Tok::Ident(s) if !is_reserved(&s) => {
                self.advance();
                Ok(s)
            }
            other => self.error(format!("expected identifier, found {}", describe(&other))),
        }
    }

    pub fn at_eof(&self) -> bool {
        matches!(self.peek(), Tok::Eof)
    }

    pub fn formula(&mut self) -> Result<Formula> {
        let lhs = self.disjunction()?;
        if self.eat_sym("->") {
            let rhs = self.formula()?;
            return Ok(Formula::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> Result<Formula> {
        let mut parts = vec![self.conjunction()?];
        while self.eat_sym("||") {
            parts.push(self.conjunction()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::or(parts)
        })
    }

    fn conjunction(&mut self) -> Result<Formula> {
        let mut parts = vec![self.unary()?];
        while self.eat_sym("&&") {
            parts.push(self.unary()?);
        }
        Ok(if parts.len() == 1 {
            parts.pop().unwrap()
        } else {
            Formula::and(parts)
        })
    }

    fn unary(&mut self) -> Result<Formula> {
        if self.eat_sym("!") {
            return Ok(Formula::not(self.unary()?));
        }
        for q in ["exists", "forall"] {
            if self.is_keyword(q) {
                self.advance();
                let mut vars = vec![Var::new(&self.ident()?)];
                while self.eat_sym(",") {
                    vars.push(Var::new(&self.ident()?));
                }
                self.expect_sym(".")?;
                let body = self.formula()?;
                return Ok(vars.into_iter().rev().fold(body, |b, v| {
                    if q == "exists" {
                        Formula::exists(v, b)
                    } else {
                        Formula::forall(v, b)
                    }
                }));
            }
        }
        self.atom()
    }

    fn atom(&mut self) -> Result<Formula> {
        if self.is_keyword("true") {
            self.advance();
            return Ok(Formula::True);
        }
        if self.is_keyword("false") {
            self.advance();
            return Ok(Formula::False);
        }
        if self.is_sym("(") {
            // Either a parenthesized formula or the start of a term.
            let save = self.pos;
            self.advance();
            if let Ok(f) = self.formula() {
                if self.eat_sym(")") && !self.at_term_continuation() {
                    return Ok(f);
                }
            }
            self.pos = save;
        }
        if let (Tok::Int(n), Tok::Sym("|")) = (self.peek().clone(), self.peek_at(1).clone()) {
            self.advance();
            self.advance();
            if n.is_zero() {
                return self.error("divisibility by zero");
            }
            let t = self.expr()?;
            return Ok(Formula::div(n, t));
        }
        let lhs = self.expr()?;
        let op = match self.peek() {
            Tok::Sym(s) if COMPARISONS.contains(s) => *s,
            other => {
                return self.error(format!(
                    "expected comparison operator, found {}",
                    describe(other)
                ))
            }
        };
        self.advance();
        let rhs = self.expr()?;
        Ok(match op {
            "<=" => Formula::leq(lhs, rhs),
            "<" => Formula::lt(lhs, rhs),
            ">=" => Formula::geq(lhs, rhs),
            ">" => Formula::gt(lhs, rhs),
            "==" => Formula::eq(lhs, rhs),
            _ => Formula::neq(lhs, rhs),
        })
    }

    fn at_term_continuation(&self) -> bool {
        match self.peek() {
            Tok::Sym(s) => COMPARISONS.contains(s) || ["+", "-", "*"].contains(s),
            _ => false,
        }
    }

    /// Linear expression.
    pub fn expr(&mut self) -> Result<LinTerm> {
        let mut acc = self.product()?;
        loop {
            if self.eat_sym("+") {
                acc = acc + self.product()?;
            } else if self.eat_sym("-") {
                acc = acc - self.product()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn product(&mut self) -> Result<LinTerm> {
        let mut acc = self.factor()?;
        while self.is_sym("*") {
            let here = self.pos;
            self.advance();
            let rhs = self.factor()?;
            acc = if acc.is_constant() {
                rhs.scale(acc.constant_part())
            } else if rhs.is_constant() {
                acc.scale(rhs.constant_part())
            } else {
                self.pos = here;
                return Err(Error::Nonlinear(format!("({acc}) * ({rhs})")));
            };
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<LinTerm> {
        match self.peek().clone() {
            Tok::Int(n) => {
                self.advance();
                Ok(LinTerm::constant(n))
            }
            Tok::Ident(s) if !is_reserved(&s) => {
                self.advance();
                Ok(LinTerm::var(&Var::new(&s)))
            }
            Tok::Sym("-") => {
                self.advance();
                Ok(-self.factor()?)
            }
            Tok::Sym("(") => {
                self.advance();
                let t = self.expr()?;
                self.expect_sym(")")?;
                Ok(t)
            }
            other => self.error(format!("expected term, found {}", describe(&other))),
        }
    }
}

fn is_reserved(s: &str) -> bool {
    matches!(
        s,
        "true" | "false" | "exists" | "forall" | "vars" | "formula" | "loop" | "assume" | "if"
            | "else"
    )
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(n) => format!("`{n}`"),
        Tok::Sym(s) => format!("`{s}`"),
        Tok::Eof => "end of input".into(),
    }
}

pub fn parse_formula(src: &str) -> Result<Formula> {
    let mut p = Parser::new(src)?;
    let f = p.formula()?;
    if !p.at_eof() {
        return p.error(format!("unexpected {}", describe(p.peek())));
    }
    Ok(f)
}

pub fn parse_term(src: &str) -> Result<LinTerm> {
    let mut p = Parser::new(src)?;
    let t = p.expr()?;
    if !p.at_eof() {
        return p.error(format!("unexpected {}", describe(p.peek())));
    }
    Ok(t)
}
