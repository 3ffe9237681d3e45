use crate::error::{Error, Result};

use super::spec::{Action, CompiledPda, IndexOp};

/// Machine configuration; stacks are bottom first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PdaConfig {
    pub state: usize,
    pub pos: usize,
    pub stack1: Vec<usize>,
    pub stack2: Vec<usize>,
}

impl PdaConfig {
    pub fn initial(pda: &CompiledPda) -> Self {
        Self {
            state: pda.q0,
            pos: 0,
            stack1: vec![pda.z0],
            stack2: vec![pda.z0],
        }
    }
}

/// What one small step did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Step {
    /// A transition fired; `input` is the consumed symbol, if any.
    Moved {
        input: Option<usize>,
        action: Action,
    },
    /// No transition applies (or a stack is empty): the run ends.
    Halted,
}

/// Picks the transition for `(state, next input, tops)`. Epsilon moves take
/// priority; determinism guarantees at most one candidate.
pub fn select(
    lookup: impl Fn(usize, Option<usize>, usize, usize) -> Option<Action>,
    state: usize,
    next_input: Option<usize>,
    top1: Option<usize>,
    top2: Option<usize>,
) -> Option<(Option<usize>, Action)> {
    let (t1, t2) = (top1?, top2?);
    if let Some(a) = lookup(state, None, t1, t2) {
        return Some((None, a));
    }
    let sym = next_input?;
    lookup(state, Some(sym), t1, t2).map(|a| (Some(sym), a))
}

fn apply(stack: &mut Vec<usize>, ops: &[IndexOp]) -> bool {
    for op in ops {
        match op {
            IndexOp::Pop => {
                if stack.pop().is_none() {
                    return false;
                }
            }
            IndexOp::Push(a) => stack.push(*a),
        }
    }
    true
}

/// One small step of the plain list-stack interpreter.
pub fn pda_step_reference(pda: &CompiledPda, cfg: &mut PdaConfig, word: &[usize]) -> Step {
    let chosen = select(
        |q, a, t1, t2| pda.table.get(&(q, a, t1, t2)).cloned(),
        cfg.state,
        word.get(cfg.pos).copied(),
        cfg.stack1.last().copied(),
        cfg.stack2.last().copied(),
    );
    let Some((input, action)) = chosen else {
        return Step::Halted;
    };
    let mut next = cfg.clone();
    if !apply(&mut next.stack1, &action.ops1) || !apply(&mut next.stack2, &action.ops2) {
        return Step::Halted;
    }
    next.state = action.next;
    if input.is_some() {
        next.pos += 1;
    }
    *cfg = next;
    Step::Moved { input, action }
}

/// Acceptance at halt: input consumed, accepting state, both stacks back to
/// the bare bottom marker.
pub fn accepts(pda: &CompiledPda, cfg: &PdaConfig, word_len: usize) -> bool {
    cfg.pos == word_len
        && pda.accept.contains(&cfg.state)
        && cfg.stack1 == [pda.z0]
        && cfg.stack2 == [pda.z0]
}

/// Configurations after every step, starting with the initial one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReferenceRun {
    pub configs: Vec<PdaConfig>,
    pub inputs: Vec<Option<usize>>,
    pub accepted: bool,
}

pub fn run_reference(pda: &CompiledPda, word: &[usize], step_limit: usize) -> Result<ReferenceRun> {
    let mut cfg = PdaConfig::initial(pda);
    let mut run = ReferenceRun {
        configs: vec![cfg.clone()],
        inputs: vec![],
        accepted: false,
    };
    loop {
        match pda_step_reference(pda, &mut cfg, word) {
            Step::Halted => break,
            Step::Moved { input, .. } => {
                run.configs.push(cfg.clone());
                run.inputs.push(input);
            }
        }
        if run.inputs.len() > step_limit {
            return Err(Error::StepLimit(step_limit));
        }
    }
    run.accepted = accepts(pda, &cfg, word.len());
    Ok(run)
}
