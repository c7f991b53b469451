use std::sync::Arc;

use crate::error::{Error, Result};

use super::key::OrderKey;
use super::schedule::FiniteSchedule;

/// Nested sequence of finite schedules `schedule(0) ⊆ schedule(1) ⊆ ...`
/// exhausting an infinite ordered index set. Must be deterministic per level.
pub trait ScheduleGenerator: Send + Sync {
    fn schedule(&self, level: usize) -> FiniteSchedule;

    /// The caller asserts infinitely many disjoint complete intervals.
    fn declared_infinitely_complete(&self) -> bool {
        false
    }

    fn describe(&self) -> String;
}

/// Which end of the index set receives the new points at each level.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Growth {
    /// Point `i` sits at key `1/i`; products grow by left multiplication.
    Left,
    /// Point `i` sits at key `i`; products grow by right multiplication.
    Right,
}

/// Cycles through `pattern`, adding `points_per_level` points per level.
#[derive(Clone, Debug)]
pub struct Alternating {
    pattern: Vec<usize>,
    points_per_level: usize,
    growth: Growth,
}

impl Alternating {
    pub fn new(pattern: Vec<usize>, points_per_level: usize, growth: Growth) -> Result<Self> {
        if pattern.is_empty() || points_per_level == 0 {
            return Err(Error::Invalid("alternation needs a nonempty pattern and a positive point count".into()));
        }
        Ok(Self { pattern, points_per_level, growth })
    }
}

impl ScheduleGenerator for Alternating {
    fn schedule(&self, level: usize) -> FiniteSchedule {
        let count = level * self.points_per_level;
        let label = |i: usize| self.pattern[(i - 1) % self.pattern.len()];
        let entries = match self.growth {
            Growth::Left => (1..=count).rev().map(|i| (OrderKey::new(1, i as u64).expect("nonzero"), label(i))).collect(),
            Growth::Right => (1..=count).map(|i| (OrderKey::integer(i as i64), label(i))).collect(),
        };
        FiniteSchedule::new(entries).expect("keys are monotone by construction")
    }

    fn describe(&self) -> String {
        format!("alternating pattern {:?}, {} points per level, {:?} growth", self.pattern, self.points_per_level, self.growth)
    }
}

/// Dyadic rationals `j / 2^level` in `[0, 1]`; a point first appearing at
/// refinement depth `d` carries `pattern[d mod len]`. Both endpoints are present
/// at every level and carry `pattern[0]`.
#[derive(Clone, Debug)]
pub struct Dyadic {
    pattern: Vec<usize>,
}

impl Dyadic {
    pub fn new(pattern: Vec<usize>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::Invalid("dyadic generator needs a nonempty pattern".into()));
        }
        Ok(Self { pattern })
    }
}

impl ScheduleGenerator for Dyadic {
    fn schedule(&self, level: usize) -> FiniteSchedule {
        let denom = 1u64 << level;
        let entries = (0..=denom)
            .map(|j| {
                let depth = if j == 0 || j == denom { 0 } else { level - j.trailing_zeros() as usize };
                (OrderKey::new(j, denom).expect("nonzero"), self.pattern[depth % self.pattern.len()])
            })
            .collect();
        FiniteSchedule::new(entries).expect("keys are monotone by construction")
    }

    fn describe(&self) -> String {
        format!("dyadic refinement of [0, 1], depth pattern {:?}", self.pattern)
    }
}

/// Rationals `j / b^level` in `[0, 1]` with `b = len + 1`; each refinement fills
/// every cell with one copy of `pattern`, so every cell of level `k` is complete
/// at level `k + 1`. Endpoints carry `pattern[0]`.
#[derive(Clone, Debug)]
pub struct PatternFill {
    pattern: Vec<usize>,
}

impl PatternFill {
    pub fn new(pattern: Vec<usize>) -> Result<Self> {
        if pattern.is_empty() {
            return Err(Error::Invalid("pattern fill needs a nonempty pattern".into()));
        }
        Ok(Self { pattern })
    }

    pub fn base(&self) -> u64 {
        self.pattern.len() as u64 + 1
    }
}

impl ScheduleGenerator for PatternFill {
    fn schedule(&self, level: usize) -> FiniteSchedule {
        let base = self.base();
        let denom = base.pow(level as u32);
        let entries = (0..=denom)
            .map(|j| {
                let label = if j == 0 || j == denom {
                    self.pattern[0]
                } else {
                    let mut digit = j;
                    while digit % base == 0 {
                        digit /= base;
                    }
                    self.pattern[(digit % base - 1) as usize]
                };
                (OrderKey::new(j, denom).expect("nonzero"), label)
            })
            .collect();
        FiniteSchedule::new(entries).expect("keys are monotone by construction")
    }

    fn describe(&self) -> String {
        format!("base-{} pattern fill of [0, 1], pattern {:?}", self.base(), self.pattern)
    }
}

/// The same finite schedule at every level.
#[derive(Clone, Debug)]
pub struct Constant(pub FiniteSchedule);

impl ScheduleGenerator for Constant {
    fn schedule(&self, _level: usize) -> FiniteSchedule {
        self.0.clone()
    }

    fn describe(&self) -> String {
        format!("constant schedule of {} points", self.0.len())
    }
}

/// Generator backed by a closure.
#[derive(Clone)]
pub struct FromFn {
    f: Arc<dyn Fn(usize) -> FiniteSchedule + Send + Sync>,
    name: String,
}

impl FromFn {
    pub fn new(name: &str, f: impl Fn(usize) -> FiniteSchedule + Send + Sync + 'static) -> Self {
        Self { f: Arc::new(f), name: name.to_string() }
    }
}

impl ScheduleGenerator for FromFn {
    fn schedule(&self, level: usize) -> FiniteSchedule {
        (self.f)(level)
    }

    fn describe(&self) -> String {
        self.name.clone()
    }
}

/// Marks the wrapped generator as infinitely complete.
#[derive(Clone, Debug)]
pub struct InfinitelyComplete<G>(pub G);

impl<G: ScheduleGenerator> ScheduleGenerator for InfinitelyComplete<G> {
    fn schedule(&self, level: usize) -> FiniteSchedule {
        self.0.schedule(level)
    }

    fn declared_infinitely_complete(&self) -> bool {
        true
    }

    fn describe(&self) -> String {
        format!("{} (declared infinitely complete)", self.0.describe())
    }
}

impl<G: ScheduleGenerator + ?Sized> ScheduleGenerator for Box<G> {
    fn schedule(&self, level: usize) -> FiniteSchedule {
        (**self).schedule(level)
    }

    fn declared_infinitely_complete(&self) -> bool {
        (**self).declared_infinitely_complete()
    }

    fn describe(&self) -> String {
        (**self).describe()
    }
}
