use std::collections::{HashMap, HashSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StackOp {
    Pop,
    Push(String),
}

/// One row of the transition table. `input: None` is an epsilon move.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transition {
    pub state: String,
    pub input: Option<String>,
    pub top1: String,
    pub top2: String,
    pub next: String,
    #[serde(default)]
    pub ops1: Vec<StackOp>,
    #[serde(default)]
    pub ops2: Vec<StackOp>,
}

/// Deterministic two-stack pushdown automaton.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PdaSpec {
    pub states: Vec<String>,
    pub input_alphabet: Vec<String>,
    pub stack_alphabet: Vec<String>,
    pub delta: Vec<Transition>,
    pub q0: String,
    pub z0: String,
    pub accept: Vec<String>,
}

/// Transition key over symbol indices; `input` is `None` for epsilon moves.
pub type Key = (usize, Option<usize>, usize, usize);

/// Transition action over indices. Stack ops use stack-symbol indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Action {
    pub next: usize,
    pub ops1: Vec<IndexOp>,
    pub ops2: Vec<IndexOp>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexOp {
    Pop,
    Push(usize),
}

/// Validated spec with every name resolved to an index. Stack symbols are
/// numbered from 1 so they can serve directly as coder slots.
#[derive(Debug, Clone)]
pub struct CompiledPda {
    pub spec: PdaSpec,
    pub table: HashMap<Key, Action>,
    /// Table rows in declaration order, aligned with `table`.
    pub rows: Vec<(Key, Action)>,
    pub q0: usize,
    pub z0: usize,
    pub accept: HashSet<usize>,
}

fn index_of(names: &[String], name: &str, what: &str) -> Result<usize> {
    names
        .iter()
        .position(|n| n == name)
        .ok_or_else(|| Error::InvalidSpec(format!("unknown {what} `{name}`")))
}

fn unique(names: &[String], what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(Error::InvalidSpec(format!("duplicate {what} `{n}`")));
        }
    }
    Ok(())
}

impl PdaSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn compile(&self) -> Result<CompiledPda> {
        unique(&self.states, "state")?;
        unique(&self.input_alphabet, "input symbol")?;
        unique(&self.stack_alphabet, "stack symbol")?;
        let q = |n: &str| index_of(&self.states, n, "state");
        let a = |n: &str| index_of(&self.input_alphabet, n, "input symbol");
        let g = |n: &str| index_of(&self.stack_alphabet, n, "stack symbol").map(|i| i + 1);
        let ops = |ops: &[StackOp]| {
            ops.iter()
                .map(|op| match op {
                    StackOp::Pop => Ok(IndexOp::Pop),
                    StackOp::Push(s) => g(s).map(IndexOp::Push),
                })
                .collect::<Result<Vec<_>>>()
        };
        let mut table = HashMap::new();
        let mut rows = Vec::new();
        for t in &self.delta {
            let key = (
                q(&t.state)?,
                t.input.as_deref().map(a).transpose()?,
                g(&t.top1)?,
                g(&t.top2)?,
            );
            let action = Action {
                next: q(&t.next)?,
                ops1: ops(&t.ops1)?,
                ops2: ops(&t.ops2)?,
            };
            if table.insert(key, action.clone()).is_some() {
                return Err(Error::InvalidSpec(format!(
                    "duplicate transition for {t:?}"
                )));
            }
            rows.push((key, action));
        }
        for &(sq, input, t1, t2) in table.keys() {
            if input.is_some() && table.contains_key(&(sq, None, t1, t2)) {
                return Err(Error::InvalidSpec(format!(
                    "state `{}` has both an epsilon move and an input move on tops ({}, {})",
                    self.states[sq],
                    self.stack_alphabet[t1 - 1],
                    self.stack_alphabet[t2 - 1]
                )));
            }
        }
        let accept = self
            .accept
            .iter()
            .map(|n| q(n))
            .collect::<Result<HashSet<_>>>()?;
        Ok(CompiledPda {
            spec: self.clone(),
            table,
            rows,
            q0: q(&self.q0)?,
            z0: g(&self.z0)?,
            accept,
        })
    }
}

impl CompiledPda {
    pub fn stack_size(&self) -> usize {
        self.spec.stack_alphabet.len()
    }

    pub fn stack_name(&self, i: usize) -> &str {
        &self.spec.stack_alphabet[i - 1]
    }

    pub fn stack_names(&self, stack: &[usize]) -> Vec<String> {
        stack
            .iter()
            .map(|&i| self.stack_name(i).to_string())
            .collect()
    }

    /// Splits a word into input-symbol indices: whitespace-separated tokens if
    /// the word contains whitespace, otherwise one symbol per character.
    pub fn tokenize(&self, word: &str) -> Result<Vec<usize>> {
        let tokens: Vec<String> = if word.chars().any(char::is_whitespace) {
            word.split_whitespace().map(str::to_string).collect()
        } else {
            word.chars().map(|c| c.to_string()).collect()
        };
        tokens
            .iter()
            .map(|t| index_of(&self.spec.input_alphabet, t, "input symbol"))
            .collect()
    }
}

/// Balanced brackets over `(`, `)`; stack 2 stays at its bottom marker.
pub fn bracket_machine() -> PdaSpec {
    let s = |x: &str| x.to_string();
    let t = |input: &str, top1: &str, ops1: Vec<StackOp>| Transition {
        state: s("q"),
        input: Some(s(input)),
        top1: s(top1),
        top2: s("Z"),
        next: s("q"),
        ops1,
        ops2: vec![],
    };
    PdaSpec {
        states: vec![s("q")],
        input_alphabet: vec![s("("), s(")")],
        stack_alphabet: vec![s("Z"), s("X")],
        delta: vec![
            t("(", "Z", vec![StackOp::Push(s("X"))]),
            t("(", "X", vec![StackOp::Push(s("X"))]),
            t(")", "X", vec![StackOp::Pop]),
        ],
        q0: s("q"),
        z0: s("Z"),
        accept: vec![s("q")],
    }
}

/// `a^n b^n c^n`, `n >= 0`: `a`s are counted on stack 1, moved to stack 2 by
/// the `b`s and consumed by the `c`s.
pub fn anbncn_machine() -> PdaSpec {
    let s = |x: &str| x.to_string();
    let t = |state: &str, input: &str, top1: &str, top2: &str, next: &str, ops1, ops2| Transition {
        state: s(state),
        input: Some(s(input)),
        top1: s(top1),
        top2: s(top2),
        next: s(next),
        ops1,
        ops2,
    };
    let push = |x: &str| vec![StackOp::Push(s(x))];
    let pop = || vec![StackOp::Pop];
    PdaSpec {
        states: vec![s("p"), s("q"), s("r")],
        input_alphabet: vec![s("a"), s("b"), s("c")],
        stack_alphabet: vec![s("Z"), s("A"), s("B")],
        delta: vec![
            t("p", "a", "Z", "Z", "p", push("A"), vec![]),
            t("p", "a", "A", "Z", "p", push("A"), vec![]),
            t("p", "b", "A", "Z", "q", pop(), push("B")),
            t("q", "b", "A", "B", "q", pop(), push("B")),
            t("q", "c", "Z", "B", "r", vec![], pop()),
            t("r", "c", "Z", "B", "r", vec![], pop()),
        ],
        q0: s("p"),
        z0: s("Z"),
        accept: vec![s("p"), s("r")],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_round_trip() {
        let spec = anbncn_machine();
        let text = spec.to_json().unwrap();
        assert!(text.contains("\"pop\""));
        assert!(text.contains("\"push\": \"A\""));
        assert_eq!(PdaSpec::from_json(&text).unwrap(), spec);
    }

    #[test]
    fn epsilon_conflict_rejected() {
        let mut spec = bracket_machine();
        let mut eps = spec.delta[0].clone();
        eps.input = None;
        spec.delta.push(eps);
        assert!(matches!(spec.compile(), Err(Error::InvalidSpec(_))));
    }

    #[test]
    fn unknown_names_rejected() {
        let mut spec = bracket_machine();
        spec.delta[0].next = "nowhere".into();
        assert!(spec.compile().is_err());
        let mut spec = bracket_machine();
        spec.delta.push(spec.delta[0].clone());
        assert!(spec.compile().is_err());
    }

    #[test]
    fn tokenize_words() {
        let pda = bracket_machine().compile().unwrap();
        assert_eq!(pda.tokenize("(()").unwrap(), vec![0, 0, 1]);
        assert_eq!(pda.tokenize("( )").unwrap(), vec![0, 1]);
        assert!(pda.tokenize("(x").is_err());
    }
}
