use crate::error::{Error, Result};

use super::ast::{Affine, CmpOp, Efo, EfoType, Operand};

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Num(f64),
    LParen,
    RParen,
    LBracket,
    RBracket,
    Ge,
    Le,
    BeforeExt,
    CaretExt,
    And,
    Or,
    Not,
    Dot,
    Plus,
    Minus,
    Star,
    Eof,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Pos {
    line: usize,
    column: usize,
}

fn syntax(pos: Pos, message: impl Into<String>) -> Error {
    Error::Syntax {
        line: pos.line,
        column: pos.column,
        message: message.into(),
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, Pos)>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let pos = Pos { line, column: col };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        let rest: String = chars[i..chars.len().min(i + 4)].iter().collect();
        let (tok, len) = if rest.starts_with("<ext") {
            (Tok::BeforeExt, 4)
        } else if rest.starts_with("^ext") {
            (Tok::CaretExt, 4)
        } else if rest.starts_with(">=") {
            (Tok::Ge, 2)
        } else if rest.starts_with("<=") {
            (Tok::Le, 2)
        } else if c.is_ascii_digit()
            || (c == '.' && chars.get(i + 1).is_some_and(|d| d.is_ascii_digit()))
        {
            let mut j = i;
            while j < chars.len() && (chars[j].is_ascii_digit() || chars[j] == '.') {
                j += 1;
            }
            if j < chars.len() && (chars[j] == 'e' || chars[j] == 'E') {
                let mut k = j + 1;
                if k < chars.len() && (chars[k] == '+' || chars[k] == '-') {
                    k += 1;
                }
                if k < chars.len() && chars[k].is_ascii_digit() {
                    j = k;
                    while j < chars.len() && chars[j].is_ascii_digit() {
                        j += 1;
                    }
                }
            }
            let text: String = chars[i..j].iter().collect();
            let v = text
                .parse::<f64>()
                .map_err(|_| syntax(pos, format!("bad number '{text}'")))?;
            (Tok::Num(v), j - i)
        } else if c.is_alphabetic() || c == '_' {
            let mut j = i;
            while j < chars.len() && (chars[j].is_alphanumeric() || chars[j] == '_') {
                j += 1;
            }
            (Tok::Ident(chars[i..j].iter().collect()), j - i)
        } else {
            let t = match c {
                '(' => Tok::LParen,
                ')' => Tok::RParen,
                '[' => Tok::LBracket,
                ']' => Tok::RBracket,
                '&' => Tok::And,
                '|' => Tok::Or,
                '!' => Tok::Not,
                '.' => Tok::Dot,
                '+' => Tok::Plus,
                '-' => Tok::Minus,
                '*' => Tok::Star,
                _ => return Err(syntax(pos, format!("unexpected character '{c}'"))),
            };
            (t, 1)
        };
        out.push((tok, pos));
        i += len;
        col += len;
    }
    out.push((Tok::Eof, Pos { line, column: col }));
    Ok(out)
}

const KEYWORDS: [&str; 7] = ["true", "false", "exists", "forall", "extagg", "where", "u"];

struct Parser {
    toks: Vec<(Tok, Pos)>,
    at: usize,
    scope: Vec<String>,
}

type Typed = (Efo, EfoType, Pos);

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> Pos {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> (Tok, Pos) {
        let t = self.toks[self.at].clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn expect(&mut self, want: Tok, what: &str) -> Result<Pos> {
        let (t, pos) = self.bump();
        if t == want {
            Ok(pos)
        } else {
            Err(syntax(
                pos,
                format!("expected {what}, found {}", describe(&t)),
            ))
        }
    }

    fn keyword(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Ident(s) if s == kw)
    }

    fn binder(&mut self) -> Result<String> {
        let (t, pos) = self.bump();
        match t {
            Tok::Ident(s) if !KEYWORDS.contains(&s.as_str()) => Ok(s),
            t => Err(syntax(
                pos,
                format!("expected a variable, found {}", describe(&t)),
            )),
        }
    }

    fn bound_var(&mut self) -> Result<String> {
        let pos = self.pos();
        let v = self.binder()?;
        if !self.scope.contains(&v) {
            return Err(syntax(pos, format!("unbound variable '{v}'")));
        }
        Ok(v)
    }

    /// `u[v]` with `v` in scope.
    fn value_ref(&mut self) -> Result<String> {
        let pos = self.pos();
        if !self.keyword("u") {
            let t = self.peek().clone();
            return Err(syntax(
                pos,
                format!("expected 'u[...]', found {}", describe(&t)),
            ));
        }
        self.bump();
        self.expect(Tok::LBracket, "'['")?;
        let v = self.bound_var()?;
        self.expect(Tok::RBracket, "']'")?;
        Ok(v)
    }

    fn number(&mut self) -> Result<f64> {
        let neg = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let (t, pos) = self.bump();
        match t {
            Tok::Num(v) => Ok(if neg { -v } else { v }),
            t => Err(syntax(
                pos,
                format!("expected a number, found {}", describe(&t)),
            )),
        }
    }

    fn want(&self, got: &Typed, ty: EfoType, ctx: &str) -> Result<()> {
        if got.1 == ty {
            Ok(())
        } else {
            Err(Error::TypeMismatch(format!(
                "{}:{}: {ctx} needs a {} operand",
                got.2.line,
                got.2.column,
                if ty == EfoType::Bool {
                    "formula"
                } else {
                    "real-valued"
                }
            )))
        }
    }

    fn expr(&mut self) -> Result<Typed> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            self.want(&lhs, EfoType::Bool, "'|'")?;
            self.want(&rhs, EfoType::Bool, "'|'")?;
            lhs = (Efo::or(lhs.0, rhs.0), EfoType::Bool, lhs.2);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Typed> {
        let mut lhs = self.additive()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.additive()?;
            self.want(&lhs, EfoType::Bool, "'&'")?;
            self.want(&rhs, EfoType::Bool, "'&'")?;
            lhs = (Efo::and(lhs.0, rhs.0), EfoType::Bool, lhs.2);
        }
        Ok(lhs)
    }

    fn additive(&mut self) -> Result<Typed> {
        let mut lhs = self.unary()?;
        loop {
            let add = match self.peek() {
                Tok::Plus => true,
                Tok::Minus => false,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            self.want(&lhs, EfoType::Real, "'+'/'-'")?;
            self.want(&rhs, EfoType::Real, "'+'/'-'")?;
            let (a, b) = (Box::new(lhs.0), Box::new(rhs.0));
            let e = if add { Efo::Add(a, b) } else { Efo::Sub(a, b) };
            lhs = (e, EfoType::Real, lhs.2);
        }
    }

    fn unary(&mut self) -> Result<Typed> {
        let pos = self.pos();
        if *self.peek() == Tok::Not {
            self.bump();
            let inner = self.unary()?;
            self.want(&inner, EfoType::Bool, "'!'")?;
            return Ok((Efo::not(inner.0), EfoType::Bool, pos));
        }
        if self.keyword("exists") || self.keyword("forall") {
            let exists = self.keyword("exists");
            self.bump();
            self.expect(Tok::CaretExt, "'^ext'")?;
            let v = self.binder()?;
            self.expect(Tok::Dot, "'.'")?;
            self.scope.push(v.clone());
            let body = self.expr();
            self.scope.pop();
            let body = body?;
            self.want(&body, EfoType::Bool, "a quantifier")?;
            let e = if exists {
                Efo::exists(&v, body.0)
            } else {
                Efo::forall(&v, body.0)
            };
            return Ok((e, EfoType::Bool, pos));
        }
        self.primary()
    }

    fn primary(&mut self) -> Result<Typed> {
        let pos = self.pos();
        match self.peek().clone() {
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok((inner.0, inner.1, pos))
            }
            Tok::Ident(s) if s == "true" => {
                self.bump();
                Ok((Efo::True, EfoType::Bool, pos))
            }
            Tok::Ident(s) if s == "false" => {
                self.bump();
                Ok((Efo::False, EfoType::Bool, pos))
            }
            Tok::Ident(s) if s == "extagg" => self.extagg(),
            Tok::Ident(s) if s == "u" => {
                let var = self.value_ref()?;
                let op = match self.bump() {
                    (Tok::Ge, _) => CmpOp::Ge,
                    (Tok::Le, _) => CmpOp::Le,
                    (t, p) => {
                        return Err(syntax(
                            p,
                            format!("expected '>=' or '<=', found {}", describe(&t)),
                        ))
                    }
                };
                let rhs = if self.keyword("u") {
                    Operand::Value(self.value_ref()?)
                } else {
                    Operand::Const(self.number()?)
                };
                Ok((Efo::Cmp { var, op, rhs }, EfoType::Bool, pos))
            }
            Tok::Ident(_) => {
                let i = self.bound_var()?;
                self.expect(Tok::BeforeExt, "'<ext'")?;
                let j = self.bound_var()?;
                Ok((Efo::Before(i, j), EfoType::Bool, pos))
            }
            t => Err(syntax(pos, format!("unexpected {}", describe(&t)))),
        }
    }

    /// `extagg v [affine] where cond`; the condition is a unary formula, so
    /// compound conditions need parentheses.
    fn extagg(&mut self) -> Result<Typed> {
        let pos = self.pos();
        self.bump();
        let v = self.binder()?;
        self.scope.push(v.clone());
        let res = (|| {
            self.expect(Tok::LBracket, "'['")?;
            let f = self.affine(&v)?;
            self.expect(Tok::RBracket, "']'")?;
            if !self.keyword("where") {
                let p = self.pos();
                let t = self.peek().clone();
                return Err(syntax(
                    p,
                    format!("expected 'where', found {}", describe(&t)),
                ));
            }
            self.bump();
            let cond = self.unary()?;
            self.want(&cond, EfoType::Bool, "'where'")?;
            Ok(Efo::extagg(&v, f, cond.0))
        })();
        self.scope.pop();
        Ok((res?, EfoType::Real, pos))
    }

    /// Sum of signed terms `c`, `c * u[v]`, `u[v]`.
    fn affine(&mut self, v: &str) -> Result<Affine> {
        let mut f = Affine::constant(0.0);
        let mut first = true;
        loop {
            let sign = match self.peek() {
                Tok::Plus if !first => 1.0,
                Tok::Minus => -1.0,
                _ if first => 0.0,
                _ => return Ok(f),
            };
            if sign != 0.0 {
                self.bump();
            }
            let sign = if sign == 0.0 { 1.0 } else { sign };
            first = false;
            let pos = self.pos();
            let (coef, with_u) = if self.keyword("u") {
                (1.0, Some(self.value_ref()?))
            } else {
                let c = self.number()?;
                if *self.peek() == Tok::Star {
                    self.bump();
                    (c, Some(self.value_ref()?))
                } else {
                    (c, None)
                }
            };
            match with_u {
                Some(w) if w != v => {
                    return Err(Error::Unsupported(format!(
                        "{}:{}: aggregated term may only read u[{v}], not u[{w}]",
                        pos.line, pos.column
                    )))
                }
                Some(_) => f.a += sign * coef,
                None => f.b += sign * coef,
            }
        }
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("'{s}'"),
        Tok::Num(v) => format!("number {v}"),
        Tok::Eof => "end of input".into(),
        other => format!("{other:?}"),
    }
}

/// Parses a closed formula or aggregate term and reports its type.
pub fn parse_efo_typed(src: &str) -> Result<(Efo, EfoType)> {
    let mut p = Parser {
        toks: lex(src)?,
        at: 0,
        scope: Vec::new(),
    };
    let (e, ty, _) = p.expr()?;
    if *p.peek() != Tok::Eof {
        let t = p.peek().clone();
        return Err(syntax(
            p.pos(),
            format!("unexpected {} after expression", describe(&t)),
        ));
    }
    Ok((e, ty))
}

/// Parses a closed formula or aggregate term.
pub fn parse_efo(src: &str) -> Result<Efo> {
    parse_efo_typed(src).map(|(e, _)| e)
}
