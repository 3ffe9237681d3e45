use std::io::Write;

use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::memory::ReducedMemory;
use crate::scalar::Rational;

use super::coder::{Channel, NestedIntervalCoder};
use super::reference::{run_reference, select};
use super::spec::{Action, CompiledPda, IndexOp};

/// Tabulated transition function as a rectifier network.
///
/// Inputs are one-hot blocks for state, input symbol (last slot = epsilon),
/// top of stack 1 and top of stack 2. Hidden unit `e` has weight 1 on the four
/// units of table row `e` and bias -3, so it outputs 1 exactly when all four
/// match. The output unit reads `sum_e (e + 1) h_e`.
#[derive(Debug, Clone)]
pub struct TransitionNet {
    n_states: usize,
    n_inputs: usize,
    k: usize,
    weights: Vec<Vec<f64>>,
    actions: Vec<Action>,
}

impl TransitionNet {
    pub fn new(pda: &CompiledPda) -> Self {
        let n_states = pda.spec.states.len();
        let n_inputs = pda.spec.input_alphabet.len() + 1;
        let k = pda.stack_size();
        let width = n_states + n_inputs + 2 * k;
        let mut weights = Vec::with_capacity(pda.rows.len());
        let mut actions = Vec::with_capacity(pda.rows.len());
        for ((q, a, t1, t2), action) in &pda.rows {
            let mut w = vec![0.0; width];
            w[*q] = 1.0;
            w[n_states + a.unwrap_or(n_inputs - 1)] = 1.0;
            w[n_states + n_inputs + t1 - 1] = 1.0;
            w[n_states + n_inputs + k + t2 - 1] = 1.0;
            weights.push(w);
            actions.push(action.clone());
        }
        Self {
            n_states,
            n_inputs,
            k,
            weights,
            actions,
        }
    }

    pub fn hidden_width(&self) -> usize {
        self.weights.len()
    }

    fn encode(&self, q: usize, a: Option<usize>, t1: usize, t2: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.n_states + self.n_inputs + 2 * self.k];
        x[q] = 1.0;
        x[self.n_states + a.unwrap_or(self.n_inputs - 1)] = 1.0;
        x[self.n_states + self.n_inputs + t1 - 1] = 1.0;
        x[self.n_states + self.n_inputs + self.k + t2 - 1] = 1.0;
        x
    }

    /// Index of the matching table row, if any.
    pub fn forward(&self, q: usize, a: Option<usize>, t1: usize, t2: usize) -> Option<usize> {
        let x = self.encode(q, a, t1, t2);
        let out: f64 = self
            .weights
            .iter()
            .enumerate()
            .map(|(e, w)| {
                let pre: f64 = w.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() - 3.0;
                (e + 1) as f64 * pre.max(0.0)
            })
            .sum();
        let id = out.round() as usize;
        (id > 0).then(|| id - 1)
    }

    pub fn lookup(&self, q: usize, a: Option<usize>, t1: usize, t2: usize) -> Option<Action> {
        self.forward(q, a, t1, t2).map(|e| self.actions[e].clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimConfig {
    pub d_max: usize,
    pub step_limit: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            d_max: 64,
            step_limit: 10_000,
        }
    }
}

/// One record of a simulation trace. Step 0 is the initial configuration.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub state: String,
    pub input: Option<String>,
    pub stack1: Vec<String>,
    pub stack2: Vec<String>,
    /// Samples emitted on each stack channel during the step, as exact
    /// rationals `p/q`. For the two-dimensional run both lists have the same
    /// length and are the coordinates of one signal.
    pub signals1: Vec<String>,
    pub signals2: Vec<String>,
    /// Value written to the state channel (absent for the two-dimensional run).
    pub state_signal: Option<String>,
}

impl StepRecord {
    /// The machine-level part of the record: state, consumed input, stacks.
    pub fn logical(&self) -> (&str, Option<&str>, &[String], &[String]) {
        (
            &self.state,
            self.input.as_deref(),
            &self.stack1,
            &self.stack2,
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimTrace {
    pub records: Vec<StepRecord>,
    pub accepted: bool,
}

impl SimTrace {
    /// Writes one JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for r in &self.records {
            serde_json::to_writer(&mut w, r)?;
            writeln!(w)?;
        }
        Ok(())
    }

    /// Equality of the machine-level fields of every record.
    pub fn logically_equal(&self, other: &SimTrace) -> bool {
        self.accepted == other.accepted
            && self.records.len() == other.records.len()
            && self
                .records
                .iter()
                .zip(&other.records)
                .all(|(a, b)| a.logical() == b.logical())
    }
}

fn strings(xs: &[Rational]) -> Vec<String> {
    xs.iter().map(|x| x.to_string()).collect()
}

fn top(ch: &Channel) -> Result<Option<usize>> {
    match ch.top_decode() {
        Ok((i, _)) => Ok(Some(i)),
        Err(Error::EmptyStack) => Ok(None),
        Err(e) => Err(e),
    }
}

fn pops_fit(ch: &Channel, ops: &[IndexOp]) -> bool {
    let mut depth = ch.depth() as isize;
    for op in ops {
        depth += match op {
            IndexOp::Pop => -1,
            IndexOp::Push(_) => 1,
        };
        if depth < 0 {
            return false;
        }
    }
    true
}

fn emit(ch: &mut Channel, ops: &[IndexOp]) -> Result<Vec<Rational>> {
    let mut out = Vec::with_capacity(2 * ops.len());
    for op in ops {
        let s = match op {
            IndexOp::Pop => ch.pop_signals()?,
            IndexOp::Push(a) => ch.push_signals(*a)?,
        };
        out.extend(s);
    }
    Ok(out)
}

/// The stack-carrying part of a simulation: two channels fed either as two
/// scalar signals or as one two-dimensional signal.
trait Stacks {
    fn channels(&self) -> (&Channel, &Channel);
    fn apply(
        &mut self,
        ops1: &[IndexOp],
        ops2: &[IndexOp],
    ) -> Result<(Vec<Rational>, Vec<Rational>)>;
}

/// Two independent scalar channels (Channels 2 and 3).
struct ScalarStacks(Channel, Channel);

impl Stacks for ScalarStacks {
    fn channels(&self) -> (&Channel, &Channel) {
        (&self.0, &self.1)
    }

    fn apply(
        &mut self,
        ops1: &[IndexOp],
        ops2: &[IndexOp],
    ) -> Result<(Vec<Rational>, Vec<Rational>)> {
        Ok((emit(&mut self.0, ops1)?, emit(&mut self.1, ops2)?))
    }
}

/// One head reading a two-dimensional signal, with one reduced memory per
/// coordinate. The idle coordinate repeats its last value, which is a
/// plateau and leaves its memory unchanged.
struct VectorStacks(Channel, Channel);

impl Stacks for VectorStacks {
    fn channels(&self) -> (&Channel, &Channel) {
        (&self.0, &self.1)
    }

    fn apply(
        &mut self,
        ops1: &[IndexOp],
        ops2: &[IndexOp],
    ) -> Result<(Vec<Rational>, Vec<Rational>)> {
        // Plan both coordinates on scratch copies, then feed the joint signal.
        let x = emit(&mut self.0.clone(), ops1)?;
        let y = emit(&mut self.1.clone(), ops2)?;
        let len = x.len().max(y.len());
        let pad = |v: Vec<Rational>, ch: &Channel| {
            let mut last = ch.memory().last().expect("channel is primed").clone();
            (0..len)
                .map(|t| {
                    if let Some(s) = v.get(t) {
                        last = s.clone();
                    }
                    last.clone()
                })
                .collect::<Vec<_>>()
        };
        let (x, y) = (pad(x, &self.0), pad(y, &self.1));
        for (ux, uy) in x.iter().zip(&y) {
            self.0.inject(ux.clone());
            self.1.inject(uy.clone());
        }
        Ok((x, y))
    }
}

/// Machine state carried as a scalar channel: the state index is written as
/// the next sample and read back from the last corner.
struct StateChannel(ReducedMemory<Rational>);

impl StateChannel {
    fn write(&mut self, q: usize) -> Rational {
        let u = Rational::from_integer(q.into());
        self.0.update(u.clone());
        u
    }

    fn read(&self) -> Result<usize> {
        let last = self.0.last().ok_or(Error::EmptyMemory)?;
        last.to_integer()
            .to_usize()
            .filter(|_| last.is_integer())
            .ok_or_else(|| Error::ChannelCorrupted(format!("state channel holds {last}")))
    }
}

fn run<S: Stacks>(
    pda: &CompiledPda,
    word: &[usize],
    cfg: SimConfig,
    mut stacks: S,
    mut state: Option<StateChannel>,
) -> Result<SimTrace> {
    let net = TransitionNet::new(pda);
    let name = |q: usize| pda.spec.states[q].clone();
    let decode = |s: &S| -> Result<(Vec<String>, Vec<String>)> {
        let (a, b) = s.channels();
        Ok((
            pda.stack_names(&a.decode_stack()?),
            pda.stack_names(&b.decode_stack()?),
        ))
    };

    let (s1, s2) = stacks.apply(&[IndexOp::Push(pda.z0)], &[IndexOp::Push(pda.z0)])?;
    let mut q = pda.q0;
    let state_signal = state.as_mut().map(|c| c.write(q).to_string());
    let (d1, d2) = decode(&stacks)?;
    let mut records = vec![StepRecord {
        step: 0,
        state: name(q),
        input: None,
        stack1: d1,
        stack2: d2,
        signals1: strings(&s1),
        signals2: strings(&s2),
        state_signal,
    }];
    let mut pos = 0;
    loop {
        if let Some(c) = &state {
            q = c.read()?;
        }
        let (c1, c2) = stacks.channels();
        let chosen = select(
            |q, a, t1, t2| net.lookup(q, a, t1, t2),
            q,
            word.get(pos).copied(),
            top(c1)?,
            top(c2)?,
        );
        let Some((input, action)) = chosen else { break };
        if !pops_fit(c1, &action.ops1) || !pops_fit(c2, &action.ops2) {
            break;
        }
        if records.len() > cfg.step_limit {
            return Err(Error::StepLimit(cfg.step_limit));
        }
        let (s1, s2) = stacks.apply(&action.ops1, &action.ops2)?;
        q = action.next;
        let state_signal = state.as_mut().map(|c| c.write(q).to_string());
        if input.is_some() {
            pos += 1;
        }
        let (d1, d2) = decode(&stacks)?;
        records.push(StepRecord {
            step: records.len(),
            state: name(q),
            input: input.map(|a| pda.spec.input_alphabet[a].clone()),
            stack1: d1,
            stack2: d2,
            signals1: strings(&s1),
            signals2: strings(&s2),
            state_signal,
        });
    }
    let (c1, c2) = stacks.channels();
    let at_bottom = |c: &Channel| c.decode_stack().is_ok_and(|s| s == [pda.z0]);
    let accepted = pos == word.len() && pda.accept.contains(&q) && at_bottom(c1) && at_bottom(c2);
    Ok(SimTrace { records, accepted })
}

fn coder(pda: &CompiledPda, cfg: SimConfig) -> Result<NestedIntervalCoder> {
    NestedIntervalCoder::new(pda.stack_size(), cfg.d_max)
}

/// Closed-loop run on a state channel and two scalar stack channels; the
/// driver supplies the next input symbol.
pub fn autoregressive_run(pda: &CompiledPda, word: &[usize], cfg: SimConfig) -> Result<SimTrace> {
    let c = coder(pda, cfg)?;
    let stacks = ScalarStacks(Channel::new(c.clone()), Channel::new(c));
    run(
        pda,
        word,
        cfg,
        stacks,
        Some(StateChannel(ReducedMemory::new())),
    )
}

/// Same machine with both stacks carried by one two-dimensional signal; the
/// state is kept by the driver.
pub fn vpal_run(pda: &CompiledPda, word: &[usize], cfg: SimConfig) -> Result<SimTrace> {
    let c = coder(pda, cfg)?;
    let stacks = VectorStacks(Channel::new(c.clone()), Channel::new(c));
    run(pda, word, cfg, stacks, None)
}

/// Runs the channel simulation and the list-stack interpreter side by side
/// and checks state and both stacks after every step, and the verdict.
pub fn check_against_reference(
    pda: &CompiledPda,
    word: &[usize],
    trace: &SimTrace,
    step_limit: usize,
) -> Result<()> {
    let reference = run_reference(pda, word, step_limit)?;
    if reference.configs.len() != trace.records.len() {
        return Err(Error::Divergence {
            step: reference.configs.len().min(trace.records.len()),
            detail: format!(
                "reference ran {} steps, channels ran {}",
                reference.configs.len() - 1,
                trace.records.len() - 1
            ),
        });
    }
    for (step, (c, r)) in reference.configs.iter().zip(&trace.records).enumerate() {
        let want = (
            pda.spec.states[c.state].as_str(),
            pda.stack_names(&c.stack1),
            pda.stack_names(&c.stack2),
        );
        let got = (r.state.as_str(), r.stack1.clone(), r.stack2.clone());
        if want != got {
            return Err(Error::Divergence {
                step,
                detail: format!("expected {want:?}, decoded {got:?}"),
            });
        }
    }
    if reference.accepted != trace.accepted {
        return Err(Error::Divergence {
            step: trace.records.len() - 1,
            detail: format!(
                "reference accepted={}, channels accepted={}",
                reference.accepted, trace.accepted
            ),
        });
    }
    Ok(())
}
