use serde::Serialize;

use crate::family::MatrixFamily;
use crate::scalar::Scalar;

use super::schedule::FiniteSchedule;

/// Label-set accumulator over a fixed label count.
struct Coverage {
    seen: Vec<bool>,
    missing: usize,
}

impl Coverage {
    fn new(labels: usize) -> Self {
        Self { seen: vec![false; labels], missing: labels }
    }

    /// Adds a label; true once every label has been seen.
    fn add(&mut self, j: usize) -> bool {
        if !self.seen[j] {
            self.seen[j] = true;
            self.missing -= 1;
        }
        self.missing == 0
    }

    fn would_complete(&self, j: usize) -> bool {
        self.missing == 0 || (self.missing == 1 && !self.seen[j])
    }
}

/// Maximal number of disjoint intervals whose labels exhaust the family, by a
/// greedy left-to-right scan.
pub fn complete_interval_count<T: Scalar>(s: &FiniteSchedule, fam: &MatrixFamily<T>) -> usize {
    count_complete(&s.labels(), fam.len())
}

fn count_complete(labels: &[usize], k: usize) -> usize {
    let mut count = 0;
    let mut cover = Coverage::new(k);
    for &j in labels {
        if cover.add(j) {
            count += 1;
            cover = Coverage::new(k);
        }
    }
    count
}

#[derive(Clone, Debug, Serialize)]
pub struct IntervalPart {
    /// Positions `[start, end)` in the schedule.
    pub start: usize,
    pub end: usize,
    pub first_key: String,
    pub last_key: String,
    pub labels: Vec<usize>,
    pub complete: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct IntervalPartition {
    pub parts: Vec<IntervalPart>,
    pub complete_intervals: usize,
}

impl IntervalPartition {
    pub fn all_incomplete(&self) -> bool {
        self.parts.iter().all(|p| !p.complete)
    }

    /// Parts are adjacent, ordered and cover `0..len`.
    pub fn covers(&self, len: usize) -> bool {
        let mut at = 0;
        for p in &self.parts {
            if p.start != at || p.end <= p.start {
                return false;
            }
            at = p.end;
        }
        at == len
    }
}

/// Splits the schedule into adjacent incomplete intervals, at most three per
/// complete interval. Blocks are cut greedily so each holds exactly one complete
/// interval (the tail joins the last block); each block is then cut into maximal
/// incomplete left intervals. A one-label family has no incomplete nonempty
/// interval, so there every point is its own (complete) part.
pub fn partition_incomplete<T: Scalar>(s: &FiniteSchedule, fam: &MatrixFamily<T>) -> IntervalPartition {
    let labels = s.labels();
    let k = fam.len();
    let complete_intervals = count_complete(&labels, k);
    let mut ranges = Vec::new();
    if k == 1 {
        ranges.extend((0..labels.len()).map(|i| (i, i + 1)));
    } else if complete_intervals == 0 {
        if !labels.is_empty() {
            ranges.push((0, labels.len()));
        }
    } else {
        let mut blocks = Vec::with_capacity(complete_intervals);
        let mut start = 0;
        let mut cover = Coverage::new(k);
        for (i, &j) in labels.iter().enumerate() {
            if cover.add(j) {
                blocks.push((start, i + 1));
                start = i + 1;
                cover = Coverage::new(k);
            }
        }
        if start < labels.len() {
            blocks.last_mut().expect("at least one block").1 = labels.len();
        }
        for (b_start, b_end) in blocks {
            let mut at = b_start;
            while at < b_end {
                let mut cover = Coverage::new(k);
                let mut end = at;
                while end < b_end && !cover.would_complete(labels[end]) {
                    cover.add(labels[end]);
                    end += 1;
                }
                ranges.push((at, end));
                at = end;
            }
        }
    }
    let entries = s.entries();
    let key = |i: usize| -> String { entries[i].0.to_string() };
    let parts = ranges
        .into_iter()
        .map(|(start, end)| {
            let mut ls: Vec<usize> = labels[start..end].to_vec();
            ls.sort_unstable();
            ls.dedup();
            IntervalPart { start, end, first_key: key(start), last_key: key(end - 1), complete: ls.len() == k, labels: ls }
        })
        .collect();
    IntervalPartition { parts, complete_intervals }
}
