use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::memory::ReducedMemory;
use crate::scalar::Rational;

/// Closed interval `[lo, hi]` with exact bounds.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Interval {
    pub lo: Rational,
    pub hi: Rational,
}

impl Interval {
    pub fn root() -> Self {
        Self {
            lo: Rational::zero(),
            hi: Rational::one(),
        }
    }

    pub fn width(&self) -> Rational {
        &self.hi - &self.lo
    }

    /// Strict containment in the open interval of `other`.
    pub fn strictly_inside(&self, other: &Interval) -> bool {
        self.lo > other.lo && self.hi < other.hi
    }
}

/// Nested-interval code for stack symbols `1..=k`.
///
/// A parent of width `w` is cut into `2k + 1` equal parts; symbol `i` takes
/// part `2i` and the odd parts are margins.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NestedIntervalCoder {
    k: usize,
    d_max: usize,
}

impl NestedIntervalCoder {
    pub fn new(k: usize, d_max: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::InvalidSpec("stack alphabet is empty".into()));
        }
        Ok(Self { k, d_max })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn d_max(&self) -> usize {
        self.d_max
    }

    fn parts(&self) -> Rational {
        Rational::from_integer((2 * self.k + 1).into())
    }

    pub fn encode_interval(&self, parent: &Interval, i: usize) -> Result<Interval> {
        if i == 0 || i > self.k {
            return Err(Error::SymbolOutOfRange {
                index: i,
                k: self.k,
            });
        }
        let step = parent.width() / self.parts();
        let at = |n: usize| &parent.lo + &step * Rational::from_integer(n.into());
        Ok(Interval {
            lo: at(2 * i - 1),
            hi: at(2 * i),
        })
    }

    /// Symbol whose slot in `parent` is exactly `child`.
    pub fn decode_interval(&self, parent: &Interval, child: &Interval) -> Result<usize> {
        let w = parent.width();
        let parts = self.parts();
        let offset = |x: &Rational| (x - &parent.lo) / &w * &parts;
        let (a, b) = (offset(&child.lo), offset(&child.hi));
        if !a.is_integer() || !b.is_integer() {
            return Err(Error::ChannelCorrupted(format!(
                "pair ({}, {}) is off the coder lattice",
                child.hi, child.lo
            )));
        }
        let hi_slot = b.to_integer();
        let one = num_bigint::BigInt::one();
        let two = &one + &one;
        let valid = a.to_integer() + &one == hi_slot
            && (&hi_slot % &two).is_zero()
            && hi_slot >= two
            && hi_slot <= num_bigint::BigInt::from(2 * self.k);
        if !valid {
            return Err(Error::ChannelCorrupted(format!(
                "pair ({}, {}) is not a symbol slot",
                child.hi, child.lo
            )));
        }
        let i: usize = (hi_slot / two).try_into().expect("slot bounded by k");
        Ok(i)
    }
}

/// One stack carried by a rational hysteresis channel.
///
/// The corner list is `[1, 0, hi_1, lo_1, ..., hi_D, lo_D]`: the root pair is
/// written once at construction and every stack level adds its slot bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    rm: ReducedMemory<Rational>,
    coder: NestedIntervalCoder,
}

impl Channel {
    pub fn new(coder: NestedIntervalCoder) -> Self {
        let root = Interval::root();
        let mut rm = ReducedMemory::new();
        rm.update(root.hi);
        rm.update(root.lo);
        Self { rm, coder }
    }

    pub fn coder(&self) -> &NestedIntervalCoder {
        &self.coder
    }

    pub fn memory(&self) -> &ReducedMemory<Rational> {
        &self.rm
    }

    /// Stack depth read off the corner count.
    pub fn depth(&self) -> usize {
        self.rm.len().saturating_sub(2) / 2
    }

    fn top_interval(&self) -> Result<Interval> {
        let c = self.rm.corners();
        let n = c.len();
        if n < 2 || !n.is_multiple_of(2) {
            return Err(Error::ChannelCorrupted(format!(
                "{n} corners do not form interval pairs"
            )));
        }
        Ok(Interval {
            hi: c[n - 2].clone(),
            lo: c[n - 1].clone(),
        })
    }

    /// Emits the two PUSH samples (slot `hi`, then slot `lo`) and feeds them.
    pub fn push_signals(&mut self, i: usize) -> Result<[Rational; 2]> {
        let depth = self.depth();
        if depth >= self.coder.d_max {
            return Err(Error::DepthOverflow(self.coder.d_max));
        }
        let child = self.coder.encode_interval(&self.top_interval()?, i)?;
        let signals = [child.hi, child.lo];
        for s in &signals {
            self.rm.update(s.clone());
        }
        debug_assert_eq!(self.depth(), depth + 1, "push wiped a stored pair");
        Ok(signals)
    }

    /// Emits the two POP samples: half a slot above the top pair, which wipes
    /// it, then the parent's `lo`, which closes the transient loop.
    pub fn pop_signals(&mut self) -> Result<[Rational; 2]> {
        let depth = self.depth();
        if depth == 0 {
            return Err(Error::EmptyStack);
        }
        let c = self.rm.corners();
        let n = c.len();
        let parent = Interval {
            hi: c[n - 4].clone(),
            lo: c[n - 3].clone(),
        };
        let margin = parent.width() / self.coder.parts();
        let u1 = &c[n - 2] + margin / Rational::from_integer(2.into());
        let u2 = parent.lo;
        self.rm.update(u1.clone());
        self.rm.update(u2.clone());
        debug_assert_eq!(
            self.depth(),
            depth - 1,
            "pop removed the wrong number of pairs"
        );
        Ok([u1, u2])
    }

    /// Every level's symbol, bottom first, recovered from the corners alone.
    pub fn decode_stack(&self) -> Result<Vec<usize>> {
        let c = self.rm.corners();
        if c.len() < 2 || !c.len().is_multiple_of(2) || c[0] != Rational::one() || !c[1].is_zero() {
            return Err(Error::ChannelCorrupted("root pair missing".into()));
        }
        let mut parent = Interval::root();
        let mut out = Vec::with_capacity(self.depth());
        for pair in c[2..].chunks(2) {
            let child = Interval {
                hi: pair[0].clone(),
                lo: pair[1].clone(),
            };
            out.push(self.coder.decode_interval(&parent, &child)?);
            parent = child;
        }
        Ok(out)
    }

    /// `(symbol, depth)` of the top of the stack.
    pub fn top_decode(&self) -> Result<(usize, usize)> {
        let stack = self.decode_stack()?;
        stack
            .last()
            .map(|&i| (i, stack.len()))
            .ok_or(Error::EmptyStack)
    }

    /// Feeds a raw sample. PUSH/POP go through [`Self::push_signals`] and
    /// [`Self::pop_signals`]; this is for replaying externally routed signals
    /// and for modelling corruption.
    pub fn inject(&mut self, u: Rational) {
        self.rm.update(u);
    }
}
