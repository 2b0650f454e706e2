//! Geometric covering intervals and learning-rate grids.
//!
//! Level `k` holds the intervals `[i·2^k, (i+1)·2^k − 1]` for `i ≥ 1`. Round
//! `t` lies in exactly one interval per level `k ≤ ⌊log₂ t⌋`, so at most
//! `O(log t)` intervals, each carrying `O(log t)` learning rates, are alive at
//! once. Intervals are generated from `(k, i)` arithmetic on demand.

use serde::{Deserialize, Serialize};

/// A geometric covering interval `[start, end]` of length `2^level`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct GcInterval {
    pub start: u64,
    pub end: u64,
    pub level: u32,
}

impl GcInterval {
    /// The level-`level` interval with index `index ≥ 1`.
    pub fn new(level: u32, index: u64) -> Self {
        assert!(index >= 1, "GC interval index starts at 1");
        let len = 1u64 << level;
        GcInterval { start: index * len, end: (index + 1) * len - 1, level }
    }

    pub fn len(&self) -> u64 {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, t: u64) -> bool {
        self.start <= t && t <= self.end
    }

    /// Checks the structural invariants of a GC interval.
    pub fn is_well_formed(&self) -> bool {
        self.level < 63
            && self.end >= self.start
            && self.len() == 1u64 << self.level
            && self.start.is_multiple_of(self.len())
            && self.start >= self.len()
    }
}

/// A sleeping-expert identity: lifetime interval plus a learning rate taken
/// from that interval's grid (`rate_index` orders the grid, 0 = largest).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpertKey {
    pub interval: GcInterval,
    pub rate_index: u32,
    pub eta: f64,
}

pub(crate) fn floor_log2(t: u64) -> u32 {
    assert!(t >= 1);
    63 - t.leading_zeros()
}

/// `⌈½·log₂ n⌉`, computed exactly as the least `m` with `4^m ≥ n`.
pub(crate) fn ceil_half_log2(n: u64) -> u32 {
    assert!(n >= 1);
    let mut m = 0u32;
    while m < 32 && (1u128 << (2 * m)) < n as u128 {
        m += 1;
    }
    m
}

/// GC intervals containing round `t`, ordered by level.
pub fn active_intervals(t: u64) -> Vec<GcInterval> {
    assert!(t >= 1, "rounds start at 1");
    (0..=floor_log2(t)).map(|k| GcInterval::new(k, t >> k)).collect()
}

/// GC intervals that start at round `t`.
pub fn spawned_at(t: u64) -> Vec<GcInterval> {
    assert!(t >= 1, "rounds start at 1");
    (0..=t.trailing_zeros()).map(|k| GcInterval::new(k, t >> k)).collect()
}

/// Learning rates `2^{-i}/(5GD)` for `i = 0..=⌈½log₂L⌉`, descending.
pub fn rate_grid(interval_len: u64, grad_bound: f64, diameter: f64) -> Vec<f64> {
    assert!(interval_len >= 1 && grad_bound > 0.0 && diameter > 0.0);
    let top = 1.0 / (5.0 * grad_bound * diameter);
    (0..=ceil_half_log2(interval_len)).map(|i| top * 0.5f64.powi(i as i32)).collect()
}

/// Number of learning rates in the grid for an interval of length `len`.
pub fn rate_grid_len(interval_len: u64) -> usize {
    1 + ceil_half_log2(interval_len) as usize
}

/// Upper bound `(1+⌊log₂t⌋)(1+⌈½log₂t⌉)` on the experts alive at round `t`.
pub fn active_count_bound(t: u64) -> u64 {
    (1 + floor_log2(t) as u64) * (1 + ceil_half_log2(t) as u64)
}

/// Number of experts actually alive at round `t`.
pub fn alive_count(t: u64) -> u64 {
    active_intervals(t).iter().map(|i| rate_grid_len(i.len()) as u64).sum()
}

/// A tiling of `[p, q]` by consecutive GC intervals, split into a backward
/// sequence (lengths at least doubling up to the split) and a forward
/// sequence (lengths at least halving after it).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringPartition {
    pub intervals: Vec<GcInterval>,
    /// `intervals[..split]` is the backward sequence, `intervals[split..]`
    /// the forward one.
    pub split: usize,
}

impl CoveringPartition {
    pub fn backward(&self) -> &[GcInterval] {
        &self.intervals[..self.split]
    }

    pub fn forward(&self) -> &[GcInterval] {
        &self.intervals[self.split..]
    }
}

/// Greedy covering of `[p, q]`: repeatedly take the longest GC interval that
/// starts at the current round and stays inside `[p, q]`.
pub fn interval_partition(p: u64, q: u64) -> CoveringPartition {
    assert!(1 <= p && p <= q, "need 1 <= p <= q");
    let mut intervals = Vec::new();
    let mut x = p;
    while x <= q {
        let mut k = x.trailing_zeros().min(62);
        while x + (1u64 << k) - 1 > q {
            k -= 1;
        }
        let iv = GcInterval::new(k, x >> k);
        intervals.push(iv);
        x = iv.end + 1;
    }
    // the longest interval closes the backward sequence; first occurrence
    // on ties, since the greedy run can repeat a length only across the split
    let longest = intervals.iter().map(GcInterval::len).max().unwrap_or(0);
    let split = intervals.iter().position(|iv| iv.len() == longest).map_or(0, |i| i + 1);
    CoveringPartition { intervals, split }
}

/// Describes which covering conditions a partition of `[p, q]`
/// violates; `None` when all hold.
pub fn partition_violation(p: u64, q: u64, part: &CoveringPartition) -> Option<String> {
    let ivs = &part.intervals;
    if ivs.is_empty() {
        return Some("empty partition".into());
    }
    if ivs[0].start != p || ivs[ivs.len() - 1].end != q {
        return Some(format!("partition does not span [{p},{q}]"));
    }
    for w in ivs.windows(2) {
        if w[1].start != w[0].end + 1 {
            return Some(format!("gap or overlap between {:?} and {:?}", w[0], w[1]));
        }
    }
    if let Some(bad) = ivs.iter().find(|iv| !iv.is_well_formed()) {
        return Some(format!("malformed interval {bad:?}"));
    }
    let cap = (64 - (q - p + 1).leading_zeros()) as usize; // ⌈log₂(q−p+2)⌉
    let (back, fwd) = (part.backward(), part.forward());
    if back.len() > cap || fwd.len() > cap {
        return Some(format!("sequence sizes {}/{} exceed {cap}", back.len(), fwd.len()));
    }
    if back.windows(2).any(|w| 2 * w[0].len() > w[1].len()) {
        return Some("backward sequence does not at least double".into());
    }
    if fwd.windows(2).any(|w| 2 * w[1].len() > w[0].len()) {
        return Some("forward sequence does not at least halve".into());
    }
    None
}

/// Outcome of an exhaustive scheduler audit.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ScheduleAudit {
    pub max_t: u64,
    pub rounds_checked: u64,
    pub partitions_checked: u64,
    pub violations: Vec<String>,
}

/// Verifies the active-set and covering-partition invariants for every round
/// `t ≤ max_t` and every `[p, q] ⊆ [1, partition_max]`.
pub fn audit(max_t: u64, partition_max: u64) -> ScheduleAudit {
    let mut out = ScheduleAudit { max_t, ..Default::default() };
    for t in 1..=max_t {
        let act = active_intervals(t);
        if act.len() as u32 != 1 + floor_log2(t) {
            out.violations.push(format!("t={t}: {} active intervals", act.len()));
        }
        if act.iter().any(|iv| !iv.contains(t) || !iv.is_well_formed()) {
            out.violations.push(format!("t={t}: active interval does not contain t"));
        }
        for w in act.windows(2) {
            let nested = w[1].start <= w[0].start && w[0].end <= w[1].end;
            if !nested {
                out.violations.push(format!("t={t}: {:?} not nested in {:?}", w[0], w[1]));
            }
        }
        let alive = alive_count(t);
        if alive > active_count_bound(t) {
            out.violations.push(format!("t={t}: {alive} experts exceed bound {}", active_count_bound(t)));
        }
        out.rounds_checked += 1;
        if out.violations.len() > 100 {
            return out;
        }
    }
    for p in 1..=partition_max {
        for q in p..=partition_max {
            let part = interval_partition(p, q);
            if let Some(v) = partition_violation(p, q, &part) {
                out.violations.push(format!("[{p},{q}]: {v}"));
                if out.violations.len() > 100 {
                    return out;
                }
            }
            out.partitions_checked += 1;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Enumerates GC intervals straight from the definition.
    fn brute_force_active(t: u64) -> Vec<[u64; 2]> {
        let mut out = Vec::new();
        for k in 0..=20u32 {
            let len = 1u64 << k;
            for i in 1..=(t / len + 1) {
                let (s, e) = (i * len, (i + 1) * len - 1);
                if s <= t && t <= e {
                    out.push([s, e]);
                }
            }
        }
        out
    }

    fn spans(v: &[GcInterval]) -> Vec<[u64; 2]> {
        v.iter().map(|iv| [iv.start, iv.end]).collect()
    }

    #[test]
    fn active_interval_examples() {
        assert_eq!(spans(&active_intervals(1)), vec![[1, 1]]);
        assert_eq!(spans(&active_intervals(4)), vec![[4, 4], [4, 5], [4, 7]]);
        assert_eq!(spans(&active_intervals(6)), vec![[6, 6], [6, 7], [4, 7]]);
    }

    #[test]
    fn active_intervals_match_enumeration() {
        for t in 1..=3000 {
            assert_eq!(spans(&active_intervals(t)), brute_force_active(t), "t={t}");
        }
    }

    #[test]
    fn spawned_examples_and_filter_identity() {
        assert_eq!(spans(&spawned_at(1)), vec![[1, 1]]);
        assert_eq!(spans(&spawned_at(4)), vec![[4, 4], [4, 5], [4, 7]]);
        assert_eq!(spans(&spawned_at(6)), vec![[6, 6], [6, 7]]);
        for t in 1..=3000 {
            let filtered: Vec<_> = active_intervals(t).into_iter().filter(|iv| iv.start == t).collect();
            assert_eq!(spawned_at(t), filtered);
        }
    }

    #[test]
    fn rate_grid_examples() {
        assert_eq!(rate_grid(1, 1.0, 1.0), vec![0.2]);
        assert_eq!(rate_grid(16, 1.0, 1.0), vec![0.2, 0.1, 0.05]);
        let g = rate_grid(16, 2.0, 5.0);
        for (a, b) in g.iter().zip([0.02, 0.01, 0.005]) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn rate_grid_spans_optimal_range() {
        for len in 1..=5000u64 {
            let g = rate_grid(len, 3.0, 2.0);
            assert_eq!(g.len(), 1 + ((len as f64).log2() / 2.0 - 1e-12).ceil().max(0.0) as usize);
            // 2^m < 2√len and 4^m ≥ len bracket the smallest rate
            let unit = 1.0 / (5.0 * 3.0 * 2.0 * (len as f64).sqrt());
            let last = *g.last().unwrap();
            assert!(last > 0.5 * unit * (1.0 - 1e-12) && last <= unit * (1.0 + 1e-12), "len={len}");
        }
    }

    #[test]
    fn active_count_bound_examples() {
        assert_eq!(active_count_bound(1), 1);
        assert_eq!(active_count_bound(8), 12);
        assert_eq!(active_count_bound(1_000_000), 220);
    }

    #[test]
    fn partition_examples() {
        assert_eq!(spans(&interval_partition(1, 1).intervals), vec![[1, 1]]);
        assert_eq!(spans(&interval_partition(2, 7).intervals), vec![[2, 3], [4, 7]]);
        let p = interval_partition(5, 8);
        assert_eq!(spans(&p.intervals), vec![[5, 5], [6, 7], [8, 8]]);
        assert_eq!(p.split, 2);
        // tie across the split
        let p = interval_partition(2, 5);
        assert_eq!(spans(&p.intervals), vec![[2, 3], [4, 5]]);
        assert!(partition_violation(2, 5, &p).is_none());
    }

    /// Exhaustive search over all GC tilings of small intervals: the greedy
    /// output must be one of the tilings that satisfy those conditions.
    #[test]
    fn greedy_partition_is_a_valid_tiling() {
        fn tilings(x: u64, q: u64, acc: &mut Vec<GcInterval>, out: &mut Vec<Vec<GcInterval>>) {
            if x > q {
                out.push(acc.clone());
                return;
            }
            for k in 0..=x.trailing_zeros().min(10) {
                let iv = GcInterval::new(k, x >> k);
                if iv.end <= q {
                    acc.push(iv);
                    tilings(iv.end + 1, q, acc, out);
                    acc.pop();
                }
            }
        }
        for p in 1..=24 {
            for q in p..=24 {
                let mut all = Vec::new();
                tilings(p, q, &mut Vec::new(), &mut all);
                let valid: Vec<_> = all
                    .into_iter()
                    .filter(|ivs| {
                        (0..=ivs.len()).any(|split| {
                            partition_violation(p, q, &CoveringPartition { intervals: ivs.clone(), split }).is_none()
                        })
                    })
                    .collect();
                let greedy = interval_partition(p, q);
                assert!(valid.contains(&greedy.intervals), "[{p},{q}]");
                assert!(partition_violation(p, q, &greedy).is_none());
            }
        }
    }

    #[test]
    fn exhaustive_audit_small() {
        let a = audit(1 << 12, 256);
        assert!(a.violations.is_empty(), "{:?}", a.violations);
        assert_eq!(a.rounds_checked, 4096);
    }
}
