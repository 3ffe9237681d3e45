use crate::error::{Error, Result};

use super::ast::{Affine, CmpOp, Efo, Operand};

/// Positions the quantifiers range over, in increasing order.
///
/// Plateaus are compressed into runs. The endpoints `0` and `n` always count;
/// an interior run counts (by its first index) when both neighbouring runs
/// are lower or both are higher.
pub fn extremal_positions(u: &[f64]) -> Vec<usize> {
    let n = u.len();
    if n == 0 {
        return Vec::new();
    }
    let mut runs: Vec<(usize, f64)> = Vec::new();
    for (t, &x) in u.iter().enumerate() {
        if runs.last().is_none_or(|&(_, v)| v != x) {
            runs.push((t, x));
        }
    }
    let mut out = vec![0];
    for w in 1..runs.len().saturating_sub(1) {
        let (prev, (s, x), next) = (runs[w - 1].1, runs[w], runs[w + 1].1);
        if (x > prev && x > next) || (x < prev && x < next) {
            out.push(s);
        }
    }
    if n > 1 {
        out.push(n - 1);
    }
    out
}

/// Result of evaluating a formula or aggregate term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EfoValue {
    Bool(bool),
    Real(f64),
}

impl EfoValue {
    pub fn as_bool(self) -> Result<bool> {
        match self {
            EfoValue::Bool(b) => Ok(b),
            EfoValue::Real(_) => Err(Error::TypeMismatch(
                "expected a formula, got a real term".into(),
            )),
        }
    }

    pub fn as_real(self) -> Result<f64> {
        match self {
            EfoValue::Real(x) => Ok(x),
            EfoValue::Bool(_) => Err(Error::TypeMismatch(
                "expected a real term, got a formula".into(),
            )),
        }
    }
}

struct Ctx<'a> {
    u: &'a [f64],
    positions: Vec<usize>,
    env: Vec<(String, usize)>,
}

impl Ctx<'_> {
    fn lookup(&self, v: &str) -> Result<usize> {
        self.env
            .iter()
            .rev()
            .find(|(name, _)| name == v)
            .map(|&(_, p)| p)
            .ok_or_else(|| Error::InvalidSpec(format!("unbound variable '{v}'")))
    }

    fn with<T>(&mut self, v: &str, p: usize, f: impl FnOnce(&mut Self) -> Result<T>) -> Result<T> {
        self.env.push((v.to_string(), p));
        let out = f(self);
        self.env.pop();
        out
    }

    fn truth(&mut self, e: &Efo) -> Result<bool> {
        self.eval(e)?.as_bool()
    }

    fn real(&mut self, e: &Efo) -> Result<f64> {
        self.eval(e)?.as_real()
    }

    fn eval(&mut self, e: &Efo) -> Result<EfoValue> {
        use EfoValue::{Bool, Real};
        Ok(match e {
            Efo::True => Bool(true),
            Efo::False => Bool(false),
            Efo::Cmp { var, op, rhs } => {
                let x = self.u[self.lookup(var)?];
                let c = match rhs {
                    Operand::Const(c) => *c,
                    Operand::Value(j) => self.u[self.lookup(j)?],
                };
                Bool(match op {
                    CmpOp::Ge => x >= c,
                    CmpOp::Le => x <= c,
                })
            }
            Efo::Before(i, j) => Bool(self.lookup(i)? < self.lookup(j)?),
            Efo::And(a, b) => Bool(self.truth(a)? && self.truth(b)?),
            Efo::Or(a, b) => Bool(self.truth(a)? || self.truth(b)?),
            Efo::Not(a) => Bool(!self.truth(a)?),
            Efo::Exists(v, body) => {
                let mut any = false;
                for p in self.positions.clone() {
                    if self.with(v, p, |c| c.truth(body))? {
                        any = true;
                        break;
                    }
                }
                Bool(any)
            }
            Efo::Forall(v, body) => {
                let mut all = true;
                for p in self.positions.clone() {
                    if !self.with(v, p, |c| c.truth(body))? {
                        all = false;
                        break;
                    }
                }
                Bool(all)
            }
            Efo::ExtAgg { var, f, cond } => {
                let mut sum = 0.0;
                for p in self.positions.clone() {
                    if self.with(var, p, |c| c.truth(cond))? {
                        sum += f.apply(self.u[p]);
                    }
                }
                Real(sum)
            }
            Efo::Add(a, b) => Real(self.real(a)? + self.real(b)?),
            Efo::Sub(a, b) => Real(self.real(a)? - self.real(b)?),
        })
    }
}

/// Evaluates a closed formula or aggregate term on the history `u`.
pub fn eval(e: &Efo, u: &[f64]) -> Result<EfoValue> {
    if u.is_empty() {
        return Err(Error::EmptyMemory);
    }
    Ctx {
        u,
        positions: extremal_positions(u),
        env: Vec::new(),
    }
    .eval(e)
}

pub fn eval_bool(e: &Efo, u: &[f64]) -> Result<bool> {
    eval(e, u)?.as_bool()
}

pub fn eval_real(e: &Efo, u: &[f64]) -> Result<f64> {
    eval(e, u)?.as_real()
}

/// The relay `(alpha, beta)` as a formula: some extremal position reached
/// `alpha` and no later one went down to `beta`.
pub fn relay_as_efo(alpha: f64, beta: f64) -> Efo {
    Efo::exists(
        "t",
        Efo::and(
            Efo::ge("t", alpha),
            Efo::forall(
                "s",
                Efo::or(
                    Efo::not(Efo::before("t", "s")),
                    Efo::not(Efo::le("s", beta)),
                ),
            ),
        ),
    )
}

/// `exists^ext v . body` decided as `ExtAgg v [1] where body > 0`.
pub fn exists_via_threshold(e: &Efo, u: &[f64]) -> Result<bool> {
    let Efo::Exists(v, body) = e else {
        return Err(Error::TypeMismatch(
            "expected an existential formula".into(),
        ));
    };
    let count = eval_real(&Efo::extagg(v, Affine::constant(1.0), (**body).clone()), u)?;
    Ok(relu(count) > 0.0)
}

pub fn relu(x: f64) -> f64 {
    x.max(0.0)
}

pub fn rect_and(r1: f64, r2: f64) -> f64 {
    relu(r1 + r2 - 1.0)
}

pub fn rect_or(r1: f64, r2: f64) -> f64 {
    relu(r1 + r2) - relu(r1 + r2 - 1.0)
}

pub fn rect_not(r: f64) -> f64 {
    1.0 - r
}

/// Evaluates a formula with every connective replaced by its rectifier
/// gadget; existentials clamp a count of witnesses to `{0, 1}`.
pub fn eval_rectified(e: &Efo, u: &[f64]) -> Result<f64> {
    fn go(c: &mut Ctx<'_>, e: &Efo) -> Result<f64> {
        Ok(match e {
            Efo::And(a, b) => rect_and(go(c, a)?, go(c, b)?),
            Efo::Or(a, b) => rect_or(go(c, a)?, go(c, b)?),
            Efo::Not(a) => rect_not(go(c, a)?),
            Efo::Exists(v, body) => {
                let mut count = 0.0;
                for p in c.positions.clone() {
                    count += c.with(v, p, |c| go(c, body))?;
                }
                relu(count) - relu(count - 1.0)
            }
            Efo::Forall(v, body) => {
                let mut misses = 0.0;
                for p in c.positions.clone() {
                    misses += c.with(v, p, |c| go(c, body).map(rect_not))?;
                }
                rect_not(relu(misses) - relu(misses - 1.0))
            }
            atom => {
                if c.truth(atom)? {
                    1.0
                } else {
                    0.0
                }
            }
        })
    }
    if u.is_empty() {
        return Err(Error::EmptyMemory);
    }
    go(
        &mut Ctx {
            u,
            positions: extremal_positions(u),
            env: Vec::new(),
        },
        e,
    )
}
