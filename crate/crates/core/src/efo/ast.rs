use std::fmt;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CmpOp {
    Ge,
    Le,
}

/// Right-hand side of a comparison atom.
#[derive(Debug, Clone, PartialEq)]
pub enum Operand {
    Const(f64),
    /// The value at another bound position, `u[j]`.
    Value(String),
}

/// `a * u[var] + b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
}

impl Affine {
    pub fn constant(b: f64) -> Self {
        Self { a: 0.0, b }
    }

    pub fn identity() -> Self {
        Self { a: 1.0, b: 0.0 }
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.a * x + self.b
    }

    pub fn is_zero(&self) -> bool {
        self.a == 0.0 && self.b == 0.0
    }
}

/// Extremum first-order formulas and the real-valued aggregate terms built
/// on them.
#[derive(Debug, Clone, PartialEq)]
pub enum Efo {
    True,
    False,
    Cmp {
        var: String,
        op: CmpOp,
        rhs: Operand,
    },
    /// `i <ext j`: position `i` strictly precedes position `j`.
    Before(String, String),
    And(Box<Efo>, Box<Efo>),
    Or(Box<Efo>, Box<Efo>),
    Not(Box<Efo>),
    Exists(String, Box<Efo>),
    Forall(String, Box<Efo>),
    ExtAgg {
        var: String,
        f: Affine,
        cond: Box<Efo>,
    },
    Add(Box<Efo>, Box<Efo>),
    Sub(Box<Efo>, Box<Efo>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EfoType {
    Bool,
    Real,
}

impl Efo {
    pub fn and(a: Efo, b: Efo) -> Efo {
        Efo::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Efo, b: Efo) -> Efo {
        Efo::Or(Box::new(a), Box::new(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Efo) -> Efo {
        Efo::Not(Box::new(a))
    }

    pub fn exists(var: &str, body: Efo) -> Efo {
        Efo::Exists(var.to_string(), Box::new(body))
    }

    pub fn forall(var: &str, body: Efo) -> Efo {
        Efo::Forall(var.to_string(), Box::new(body))
    }

    pub fn ge(var: &str, c: f64) -> Efo {
        Efo::Cmp {
            var: var.to_string(),
            op: CmpOp::Ge,
            rhs: Operand::Const(c),
        }
    }

    pub fn le(var: &str, c: f64) -> Efo {
        Efo::Cmp {
            var: var.to_string(),
            op: CmpOp::Le,
            rhs: Operand::Const(c),
        }
    }

    pub fn before(i: &str, j: &str) -> Efo {
        Efo::Before(i.to_string(), j.to_string())
    }

    pub fn extagg(var: &str, f: Affine, cond: Efo) -> Efo {
        Efo::ExtAgg {
            var: var.to_string(),
            f,
            cond: Box::new(cond),
        }
    }
}

fn num(x: f64) -> String {
    if x.fract() == 0.0 && x.abs() < 1e15 {
        format!("{x:.1}")
    } else {
        format!("{x}")
    }
}

impl fmt::Display for Efo {
    /// Fully parenthesised concrete syntax, accepted back by the parser.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Efo::True => write!(f, "true"),
            Efo::False => write!(f, "false"),
            Efo::Cmp { var, op, rhs } => {
                let op = match op {
                    CmpOp::Ge => ">=",
                    CmpOp::Le => "<=",
                };
                match rhs {
                    Operand::Const(c) => write!(f, "u[{var}] {op} {}", num(*c)),
                    Operand::Value(j) => write!(f, "u[{var}] {op} u[{j}]"),
                }
            }
            Efo::Before(i, j) => write!(f, "{i} <ext {j}"),
            Efo::And(a, b) => write!(f, "({a} & {b})"),
            Efo::Or(a, b) => write!(f, "({a} | {b})"),
            Efo::Not(a) => write!(f, "!({a})"),
            Efo::Exists(v, body) => write!(f, "(exists^ext {v} . {body})"),
            Efo::Forall(v, body) => write!(f, "(forall^ext {v} . {body})"),
            Efo::ExtAgg { var, f: g, cond } => {
                write!(
                    f,
                    "(extagg {var} [{} * u[{var}] + {}] where {cond})",
                    num(g.a),
                    num(g.b)
                )
            }
            Efo::Add(a, b) => write!(f, "({a} + {b})"),
            Efo::Sub(a, b) => write!(f, "({a} - {b})"),
        }
    }
}
