//! Subshifts of finite type with exactly representable, eventually periodic
//! points.
//!
//! A [`SymbolicPoint`] is a finite core word placed at a fixed offset, padded
//! on each side by a word repeated forever. One-sided points simply omit one
//! of the tails. Every operation here (shift, metric, bracket, leaf
//! membership) is computed on symbols, never on floating-point thresholds.

use std::collections::VecDeque;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Symbols are alphabet indices `0..m`, rendered as base-36 digits.
pub type Symbol = u8;

/// Largest alphabet representable with base-36 digits.
pub const MAX_ALPHABET: usize = 36;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SymbolicError {
    #[error("adjacency must be a nonempty square matrix")]
    NotSquare,
    #[error("alphabet size {0} exceeds {MAX_ALPHABET}")]
    AlphabetTooLarge(usize),
    #[error("adjacency entries must be 0 or 1 (found {0} at row {1})")]
    NotBinary(u8, usize),
    #[error("adjacency row {0} empty")]
    EmptyRow(usize),
    #[error("adjacency column {0} empty")]
    EmptyColumn(usize),
    #[error("adjacency is not irreducible")]
    NotIrreducible,
    #[error("symbol {0:?} is not in the alphabet")]
    BadSymbol(char),
    #[error("inadmissible transition {0}->{1} in {2}")]
    Inadmissible(Symbol, Symbol, &'static str),
    #[error("a point needs at least one infinite tail")]
    NoTail,
    #[error("{0}")]
    Sidedness(String),
    #[error("points do not have the same sidedness")]
    SidednessMismatch,
    #[error("bracket needs matching zeroth symbols (got {0} and {1})")]
    BracketMismatch(Symbol, Symbol),
    #[error("points are not forward asymptotic")]
    NotAsymptotic,
}

/// Adjacency data of a subshift of finite type on `m` symbols.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "SubshiftJson", into = "SubshiftJson")]
pub struct SubshiftSpec {
    adjacency: Vec<Vec<u8>>,
}

#[derive(Serialize, Deserialize)]
struct SubshiftJson {
    m: usize,
    adjacency: Vec<Vec<u8>>,
}

impl TryFrom<SubshiftJson> for SubshiftSpec {
    type Error = SymbolicError;
    fn try_from(j: SubshiftJson) -> Result<Self, SymbolicError> {
        if j.adjacency.len() != j.m {
            return Err(SymbolicError::NotSquare);
        }
        SubshiftSpec::new(j.adjacency)
    }
}

impl From<SubshiftSpec> for SubshiftJson {
    fn from(s: SubshiftSpec) -> Self {
        SubshiftJson {
            m: s.alphabet_size(),
            adjacency: s.adjacency,
        }
    }
}

impl SubshiftSpec {
    /// Validates a 0/1 adjacency matrix: square, no empty row or column,
    /// irreducible.
    pub fn new(adjacency: Vec<Vec<u8>>) -> Result<Self, SymbolicError> {
        let m = adjacency.len();
        if m == 0 || adjacency.iter().any(|r| r.len() != m) {
            return Err(SymbolicError::NotSquare);
        }
        if m > MAX_ALPHABET {
            return Err(SymbolicError::AlphabetTooLarge(m));
        }
        for (i, row) in adjacency.iter().enumerate() {
            if let Some(&v) = row.iter().find(|&&v| v > 1) {
                return Err(SymbolicError::NotBinary(v, i + 1));
            }
            if row.iter().all(|&v| v == 0) {
                return Err(SymbolicError::EmptyRow(i + 1));
            }
        }
        for j in 0..m {
            if adjacency.iter().all(|r| r[j] == 0) {
                return Err(SymbolicError::EmptyColumn(j + 1));
            }
        }
        let spec = Self { adjacency };
        if !spec.is_irreducible() {
            return Err(SymbolicError::NotIrreducible);
        }
        Ok(spec)
    }

    /// Full shift on `m` symbols.
    pub fn full_shift(m: usize) -> Self {
        Self::new(vec![vec![1; m]; m]).expect("full shift is valid")
    }

    /// Golden-mean shift: the word `11` is forbidden.
    pub fn golden_mean() -> Self {
        Self::new(vec![vec![1, 1], vec![1, 0]]).expect("golden mean shift is valid")
    }

    pub fn alphabet_size(&self) -> usize {
        self.adjacency.len()
    }

    pub fn adjacency(&self) -> &[Vec<u8>] {
        &self.adjacency
    }

    pub fn allowed(&self, a: Symbol, b: Symbol) -> bool {
        self.adjacency
            .get(a as usize)
            .and_then(|r| r.get(b as usize))
            .is_some_and(|&v| v == 1)
    }

    pub fn successors(&self, a: Symbol) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.alphabet_size() as Symbol).filter(move |&b| self.allowed(a, b))
    }

    pub fn predecessors(&self, b: Symbol) -> impl Iterator<Item = Symbol> + '_ {
        (0..self.alphabet_size() as Symbol).filter(move |&a| self.allowed(a, b))
    }

    fn is_irreducible(&self) -> bool {
        let m = self.alphabet_size();
        (0..m).all(|s| {
            let mut seen = vec![false; m];
            let mut queue = VecDeque::from([s as Symbol]);
            while let Some(a) = queue.pop_front() {
                for b in self.successors(a) {
                    if !seen[b as usize] {
                        seen[b as usize] = true;
                        queue.push_back(b);
                    }
                }
            }
            seen.iter().all(|&v| v)
        })
    }

    fn in_alphabet(&self, s: Symbol) -> bool {
        (s as usize) < self.alphabet_size()
    }

    pub fn is_admissible_word(&self, word: &[Symbol]) -> bool {
        word.iter().all(|&s| self.in_alphabet(s)) && word.windows(2).all(|w| self.allowed(w[0], w[1]))
    }

    /// All admissible words of the given length, in lexicographic order.
    pub fn words(&self, len: usize) -> Vec<Vec<Symbol>> {
        let mut out = Vec::new();
        let mut stack: Vec<Vec<Symbol>> = if len == 0 {
            return vec![Vec::new()];
        } else {
            (0..self.alphabet_size() as Symbol).rev().map(|s| vec![s]).collect()
        };
        while let Some(w) = stack.pop() {
            if w.len() == len {
                out.push(w);
                continue;
            }
            let last = *w.last().expect("nonempty");
            let next: Vec<Symbol> = self.successors(last).collect();
            for &b in next.iter().rev() {
                let mut w2 = w.clone();
                w2.push(b);
                stack.push(w2);
            }
        }
        out
    }

    /// Shortest closed walk `a -> u_1 -> ... -> u_{p-1} -> a`, returned as
    /// `[a, u_1, ..., u_{p-1}]`.
    pub fn shortest_cycle_through(&self, a: Symbol) -> Vec<Symbol> {
        let m = self.alphabet_size();
        let mut parent: Vec<Option<Symbol>> = vec![None; m];
        let mut queue = VecDeque::new();
        for b in self.successors(a) {
            if b == a {
                return vec![a];
            }
            if parent[b as usize].is_none() {
                parent[b as usize] = Some(a);
                queue.push_back(b);
            }
        }
        while let Some(u) = queue.pop_front() {
            if self.allowed(u, a) {
                let mut path = vec![u];
                let mut cur = u;
                while let Some(p) = parent[cur as usize] {
                    if p == a {
                        break;
                    }
                    path.push(p);
                    cur = p;
                }
                path.push(a);
                path.reverse();
                return path;
            }
            for b in self.successors(u) {
                if b != a && parent[b as usize].is_none() {
                    parent[b as usize] = Some(u);
                    queue.push_back(b);
                }
            }
        }
        unreachable!("irreducible adjacency has a cycle through every symbol")
    }

    /// Checks every transition of a point, including tail junctions and the
    /// wrap-around inside repeated tails.
    pub fn validate(&self, p: &SymbolicPoint) -> Result<(), SymbolicError> {
        let check = |w: &[Symbol], what: &'static str| -> Result<(), SymbolicError> {
            for &s in w {
                if !self.in_alphabet(s) {
                    return Err(SymbolicError::BadSymbol(symbol_char(s)));
                }
            }
            for pair in w.windows(2) {
                if !self.allowed(pair[0], pair[1]) {
                    return Err(SymbolicError::Inadmissible(pair[0], pair[1], what));
                }
            }
            Ok(())
        };
        let cyc = |t: &[Symbol]| -> Vec<Symbol> {
            let mut w = t.to_vec();
            if let Some(&f) = t.first() {
                w.push(f);
            }
            w
        };
        check(&cyc(&p.left_tail), "left tail")?;
        check(&cyc(&p.right_tail), "right tail")?;
        let mut joined = Vec::new();
        joined.extend(p.left_tail.last());
        joined.extend_from_slice(&p.core);
        joined.extend(p.right_tail.first());
        check(&joined, "core")
    }

    /// Validated two-sided point: `left_tail` repeats to the left of index
    /// `offset`, `core` occupies `offset..offset+core.len()`, and `right_tail`
    /// repeats after it.
    pub fn two_sided_point(
        &self,
        left_tail: Vec<Symbol>,
        core: Vec<Symbol>,
        offset: i64,
        right_tail: Vec<Symbol>,
    ) -> Result<SymbolicPoint, SymbolicError> {
        if left_tail.is_empty() || right_tail.is_empty() {
            return Err(SymbolicError::Sidedness("two-sided points need both tails".into()));
        }
        let p = SymbolicPoint {
            left_tail,
            core,
            offset,
            right_tail,
        };
        self.validate(&p)?;
        Ok(p)
    }

    /// Validated point of the one-sided future space (indices `>= 0`).
    pub fn future_point(&self, core: Vec<Symbol>, right_tail: Vec<Symbol>) -> Result<SymbolicPoint, SymbolicError> {
        if right_tail.is_empty() {
            return Err(SymbolicError::NoTail);
        }
        let p = SymbolicPoint {
            left_tail: Vec::new(),
            core,
            offset: 0,
            right_tail,
        };
        self.validate(&p)?;
        Ok(p)
    }

    /// Validated point of the one-sided past space (indices `<= 0`); the last
    /// core symbol sits at index 0.
    pub fn past_point(&self, left_tail: Vec<Symbol>, core: Vec<Symbol>) -> Result<SymbolicPoint, SymbolicError> {
        if left_tail.is_empty() {
            return Err(SymbolicError::NoTail);
        }
        let offset = 1 - core.len() as i64;
        let p = SymbolicPoint {
            left_tail,
            core,
            offset,
            right_tail: Vec::new(),
        };
        self.validate(&p)?;
        Ok(p)
    }

    /// The two-sided periodic point `... w w . w w ...` with `w[0]` at index 0.
    pub fn periodic_point(&self, word: Vec<Symbol>) -> Result<SymbolicPoint, SymbolicError> {
        if word.is_empty() {
            return Err(SymbolicError::NoTail);
        }
        self.two_sided_point(word.clone(), Vec::new(), 0, word)
    }

    /// Two-sided point whose symbols at `offset..offset+core.len()` are
    /// `core`, padded on both sides with shortest cycles through the end
    /// symbols.
    pub fn pad_core(&self, core: Vec<Symbol>, offset: i64) -> Result<SymbolicPoint, SymbolicError> {
        let (&first, &last) = match (core.first(), core.last()) {
            (Some(f), Some(l)) => (f, l),
            _ => return Err(SymbolicError::NoTail),
        };
        let left = self.shortest_cycle_through(first);
        let mut right = self.shortest_cycle_through(last);
        right.rotate_left(1);
        self.two_sided_point(left, core, offset, right)
    }

    /// Extends a one-sided point to a two-sided one by padding the missing
    /// side with the shortest cycle through the boundary symbol.
    pub fn lift_to_two_sided(&self, p: &SymbolicPoint) -> Result<SymbolicPoint, SymbolicError> {
        match p.sidedness() {
            Sidedness::TwoSided => Ok(p.clone()),
            Sidedness::Future => {
                let first = p.symbol(0).expect("future point has index 0");
                let left = self.shortest_cycle_through(first);
                Ok(SymbolicPoint {
                    left_tail: left,
                    ..p.clone()
                })
            }
            Sidedness::Past => {
                let last = p.symbol(0).expect("past point has index 0");
                let mut right = self.shortest_cycle_through(last);
                right.rotate_left(1);
                Ok(SymbolicPoint {
                    right_tail: right,
                    ..p.clone()
                })
            }
        }
    }

    pub fn validate_cylinder(&self, cyl: &CylinderId) -> Result<(), SymbolicError> {
        if let Some(&s) = cyl.word.iter().find(|&&s| !self.in_alphabet(s)) {
            return Err(SymbolicError::BadSymbol(symbol_char(s)));
        }
        for w in cyl.word.windows(2) {
            if !self.allowed(w[0], w[1]) {
                return Err(SymbolicError::Inadmissible(w[0], w[1], "cylinder"));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sidedness {
    TwoSided,
    /// One-sided sequence on indices `>= 0` (the left shift acts on it).
    Future,
    /// One-sided sequence on indices `<= 0`.
    Past,
}

/// An eventually periodic symbol sequence.
#[derive(Clone, Debug, Eq, Hash, PartialEq)]
pub struct SymbolicPoint {
    left_tail: Vec<Symbol>,
    core: Vec<Symbol>,
    offset: i64,
    right_tail: Vec<Symbol>,
}

impl SymbolicPoint {
    pub fn sidedness(&self) -> Sidedness {
        match (self.left_tail.is_empty(), self.right_tail.is_empty()) {
            (false, false) => Sidedness::TwoSided,
            (true, _) => Sidedness::Future,
            (false, true) => Sidedness::Past,
        }
    }

    pub fn left_tail(&self) -> &[Symbol] {
        &self.left_tail
    }

    pub fn core(&self) -> &[Symbol] {
        &self.core
    }

    pub fn core_offset(&self) -> i64 {
        self.offset
    }

    pub fn right_tail(&self) -> &[Symbol] {
        &self.right_tail
    }

    fn core_end(&self) -> i64 {
        self.offset + self.core.len() as i64
    }

    /// Symbol at index `i`, or `None` outside a one-sided point's domain.
    pub fn symbol(&self, i: i64) -> Option<Symbol> {
        let start = self.offset;
        let end = self.core_end();
        if i >= start && i < end {
            Some(self.core[(i - start) as usize])
        } else if i >= end {
            let r = self.right_tail.len() as i64;
            (r > 0).then(|| self.right_tail[(i - end).rem_euclid(r) as usize])
        } else {
            let l = self.left_tail.len() as i64;
            (l > 0).then(|| self.left_tail[(l - 1 - (start - 1 - i).rem_euclid(l)) as usize])
        }
    }

    /// Symbols at indices `lo..=hi`; panics outside the domain.
    pub fn window(&self, lo: i64, hi: i64) -> Vec<Symbol> {
        (lo..=hi)
            .map(|i| self.symbol(i).expect("index inside the point's domain"))
            .collect()
    }

    fn in_domain(&self, i: i64) -> bool {
        match self.sidedness() {
            Sidedness::TwoSided => true,
            Sidedness::Future => i >= 0,
            Sidedness::Past => i <= 0,
        }
    }

    /// Rebuilds a point from a symbol function. Indices below `start` follow
    /// a tail of period `left_period` (0 for none) and indices from `end` on
    /// follow a tail of period `right_period`.
    fn rebuild(
        f: impl Fn(i64) -> Symbol,
        start: i64,
        end: i64,
        left_period: usize,
        right_period: usize,
    ) -> SymbolicPoint {
        let lp = left_period as i64;
        SymbolicPoint {
            left_tail: (0..lp).map(|j| f(start - lp + j)).collect(),
            core: (start..end).map(&f).collect(),
            offset: start,
            right_tail: (0..right_period as i64).map(|j| f(end + j)).collect(),
        }
    }

    /// Applies the shift `steps` times: index `i` of the result is index
    /// `i + steps` of `self`. One-sided future points only shift forward and
    /// past points only backward.
    pub fn shift(&self, steps: i64) -> Result<SymbolicPoint, SymbolicError> {
        match self.sidedness() {
            Sidedness::TwoSided => Ok(SymbolicPoint {
                offset: self.offset - steps,
                ..self.clone()
            }),
            Sidedness::Future => {
                if steps < 0 {
                    return Err(SymbolicError::Sidedness(
                        "a one-sided future point cannot be shifted backward".into(),
                    ));
                }
                let end = (self.core_end() - steps).max(0);
                Ok(Self::rebuild(
                    |i| self.symbol(i + steps).expect("in domain"),
                    0,
                    end,
                    0,
                    self.right_tail.len(),
                ))
            }
            Sidedness::Past => {
                if steps > 0 {
                    return Err(SymbolicError::Sidedness(
                        "a one-sided past point cannot be shifted forward".into(),
                    ));
                }
                let start = (self.offset - steps).min(1);
                Ok(Self::rebuild(
                    |i| self.symbol(i + steps).expect("in domain"),
                    start,
                    1,
                    self.left_tail.len(),
                    0,
                ))
            }
        }
    }

    /// Two-sided shift, for callers that already know the point is two-sided.
    pub fn shifted(&self, steps: i64) -> SymbolicPoint {
        self.shift(steps).expect("two-sided point")
    }

    /// Point equal to `past` on indices `< cut` and to `future` on indices
    /// `>= cut`. No admissibility check is made at the junction.
    pub fn splice(past: &SymbolicPoint, future: &SymbolicPoint, cut: i64) -> SymbolicPoint {
        let start = past.offset.min(cut);
        let end = future.core_end().max(cut);
        let f = |i: i64| {
            if i < cut {
                past.symbol(i).expect("past side defined")
            } else {
                future.symbol(i).expect("future side defined")
            }
        };
        Self::rebuild(f, start, end, past.left_tail.len(), future.right_tail.len())
    }

    /// Restriction to indices `>= 0`.
    pub fn future_part(&self) -> SymbolicPoint {
        let end = self.core_end().max(0);
        Self::rebuild(|i| self.symbol(i).expect("in domain"), 0, end, 0, self.right_tail.len())
    }

    /// Restriction to indices `<= 0`.
    pub fn past_part(&self) -> SymbolicPoint {
        let start = self.offset.min(1);
        Self::rebuild(|i| self.symbol(i).expect("in domain"), start, 1, self.left_tail.len(), 0)
    }

    /// Index window outside of which both points are purely periodic with a
    /// common period: `(lo, hi)` such that agreement on `lo..=hi` forces
    /// agreement everywhere beyond.
    fn comparison_window(&self, other: &SymbolicPoint) -> (i64, i64) {
        let lcm_len = |a: usize, b: usize| -> i64 {
            if a == 0 || b == 0 {
                return (a + b) as i64;
            }
            (a / gcd(a, b) * b) as i64
        };
        let lo = self.offset.min(other.offset) - lcm_len(self.left_tail.len(), other.left_tail.len());
        let hi = self.core_end().max(other.core_end()) + lcm_len(self.right_tail.len(), other.right_tail.len());
        (lo, hi)
    }

    /// Smallest `|n|` with `x_n != y_n`, or `None` for equal sequences.
    pub fn first_disagreement(&self, other: &SymbolicPoint) -> Option<u64> {
        let (lo, hi) = self.comparison_window(other);
        let bound = lo.unsigned_abs().max(hi.unsigned_abs()) as i64 + 1;
        (0..=bound).find_map(|n| {
            let differs = |i: i64| self.in_domain(i) && other.in_domain(i) && self.symbol(i) != other.symbol(i);
            (differs(n) || differs(-n)).then_some(n as u64)
        })
    }

    /// Whether the sequences agree at every index `>= from`.
    pub fn agrees_from(&self, other: &SymbolicPoint, from: i64) -> bool {
        let (lo, hi) = self.comparison_window(other);
        let from = from.max(lo.min(hi));
        (from..=hi.max(from)).all(|i| !(self.in_domain(i) && other.in_domain(i)) || self.symbol(i) == other.symbol(i))
    }

    /// Whether the sequences agree at every index `<= upto`.
    pub fn agrees_up_to(&self, other: &SymbolicPoint, upto: i64) -> bool {
        let (lo, hi) = self.comparison_window(other);
        let upto = upto.min(hi.max(lo));
        (lo.min(upto)..=upto).all(|i| !(self.in_domain(i) && other.in_domain(i)) || self.symbol(i) == other.symbol(i))
    }

    /// Membership in the local stable set of `other` (agreement on `>= 0`).
    pub fn on_local_stable_leaf(&self, other: &SymbolicPoint) -> bool {
        self.agrees_from(other, 0)
    }

    /// Membership in the local unstable set of `other` (agreement on `<= 0`).
    pub fn on_local_unstable_leaf(&self, other: &SymbolicPoint) -> bool {
        self.agrees_up_to(other, 0)
    }

    /// Smallest `n >= 0` with the two sequences agreeing on all indices
    /// `>= n`, or an error if they are not forward asymptotic.
    pub fn stable_merge_time(&self, other: &SymbolicPoint) -> Result<i64, SymbolicError> {
        let (lo, hi) = self.comparison_window(other);
        let tail_start = self.core_end().max(other.core_end());
        if !self.agrees_from(other, tail_start) {
            return Err(SymbolicError::NotAsymptotic);
        }
        let last = (lo..=hi).rev().find(|&i| self.symbol(i) != other.symbol(i));
        Ok(last.map_or(0, |l| (l + 1).max(0)))
    }

    /// Largest `a` with the sequences agreeing on all indices `<= a`;
    /// `Ok(None)` for equal sequences.
    pub fn backward_agreement(&self, other: &SymbolicPoint) -> Result<Option<i64>, SymbolicError> {
        let (lo, hi) = self.comparison_window(other);
        let head_end = self.offset.min(other.offset) - 1;
        if !self.agrees_up_to(other, head_end) {
            return Err(SymbolicError::NotAsymptotic);
        }
        let first = (lo..=hi).find(|&i| self.symbol(i) != other.symbol(i));
        Ok(first.map(|f| f - 1))
    }

    /// Minimal period of an exactly periodic two-sided point.
    pub fn minimal_period(&self) -> Option<usize> {
        if self.sidedness() != Sidedness::TwoSided {
            return None;
        }
        let r = self.right_tail.len();
        let q = (1..=r).find(|&q| r % q == 0 && (0..r).all(|j| self.right_tail[j] == self.right_tail[(j + q) % r]))?;
        self.shifted(q as i64).same_sequence(self).then_some(q)
    }

    pub fn same_sequence(&self, other: &SymbolicPoint) -> bool {
        self.sidedness() == other.sidedness() && self.first_disagreement(other).is_none()
    }
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// The metric `2^{-N}` with `N` the smallest `|n|` where the points differ.
pub fn metric(x: &SymbolicPoint, y: &SymbolicPoint) -> Result<f64, SymbolicError> {
    if x.sidedness() != y.sidedness() {
        return Err(SymbolicError::SidednessMismatch);
    }
    Ok(match x.first_disagreement(y) {
        None => 0.0,
        Some(n) => 2f64.powi(-(n.min(1100) as i32)),
    })
}

/// The bracket `[x, y]`: past of `x` (indices `<= 0`) joined to the future of
/// `y` (indices `>= 1`).
pub fn bracket(x: &SymbolicPoint, y: &SymbolicPoint) -> Result<SymbolicPoint, SymbolicError> {
    if x.sidedness() != Sidedness::TwoSided || y.sidedness() != Sidedness::TwoSided {
        return Err(SymbolicError::Sidedness("bracket needs two-sided points".into()));
    }
    let (a, b) = (x.symbol(0).expect("two-sided"), y.symbol(0).expect("two-sided"));
    if a != b {
        return Err(SymbolicError::BracketMismatch(a, b));
    }
    Ok(SymbolicPoint::splice(x, y, 1))
}

/// Every primitive cycle of length `<= max_period`, once per cyclic rotation
/// class, as a periodic point starting at the lexicographically least
/// rotation.
pub fn periodic_orbits(spec: &SubshiftSpec, max_period: usize) -> Vec<SymbolicPoint> {
    let mut out = Vec::new();
    for q in 1..=max_period {
        for w in spec.words(q) {
            if !spec.allowed(*w.last().expect("q >= 1"), w[0]) {
                continue;
            }
            let is_least_rotation = (1..q).all(|r| {
                let rotated: Vec<Symbol> = w[r..].iter().chain(&w[..r]).cloned().collect();
                rotated > w
            });
            if is_least_rotation {
                out.push(spec.periodic_point(w).expect("cycle is admissible"));
            }
        }
    }
    out
}

/// A cylinder `[offset; a_0, ..., a_k]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct CylinderId {
    pub offset: i64,
    pub word: Vec<Symbol>,
}

impl CylinderId {
    pub fn new(offset: i64, word: Vec<Symbol>) -> Self {
        Self { offset, word }
    }

    pub fn contains(&self, p: &SymbolicPoint) -> bool {
        self.word
            .iter()
            .enumerate()
            .all(|(i, &s)| p.symbol(self.offset + i as i64) == Some(s))
    }
}

pub fn symbol_char(s: Symbol) -> char {
    std::char::from_digit(s as u32, 36).unwrap_or('?')
}

pub fn parse_word(s: &str) -> Result<Vec<Symbol>, SymbolicError> {
    s.chars()
        .map(|c| {
            c.to_digit(36)
                .map(|d| d as Symbol)
                .ok_or(SymbolicError::BadSymbol(c))
        })
        .collect()
}

pub fn format_word(w: &[Symbol]) -> String {
    w.iter().map(|&s| symbol_char(s)).collect()
}

/// JSON shape of a point; an empty tail marks a one-sided point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PointJson {
    pub left_tail: String,
    pub core: String,
    pub core_offset: i64,
    pub right_tail: String,
}

impl From<&SymbolicPoint> for PointJson {
    fn from(p: &SymbolicPoint) -> Self {
        PointJson {
            left_tail: format_word(&p.left_tail),
            core: format_word(&p.core),
            core_offset: p.offset,
            right_tail: format_word(&p.right_tail),
        }
    }
}

impl PointJson {
    pub fn to_point(&self, spec: &SubshiftSpec) -> Result<SymbolicPoint, SymbolicError> {
        let left = parse_word(&self.left_tail)?;
        let core = parse_word(&self.core)?;
        let right = parse_word(&self.right_tail)?;
        match (left.is_empty(), right.is_empty()) {
            (false, false) => spec.two_sided_point(left, core, self.core_offset, right),
            (true, false) => {
                if self.core_offset != 0 {
                    return Err(SymbolicError::Sidedness("future points start at index 0".into()));
                }
                spec.future_point(core, right)
            }
            (false, true) => {
                if self.core_offset != 1 - core.len() as i64 {
                    return Err(SymbolicError::Sidedness("past points end at index 0".into()));
                }
                spec.past_point(left, core)
            }
            (true, true) => Err(SymbolicError::NoTail),
        }
    }
}

impl fmt::Display for SymbolicPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.left_tail.is_empty() {
            write!(f, "({})^inf ", format_word(&self.left_tail))?;
        }
        write!(f, "[{}@{}]", format_word(&self.core), self.offset)?;
        if !self.right_tail.is_empty() {
            write!(f, " ({})^inf", format_word(&self.right_tail))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full2() -> SubshiftSpec {
        SubshiftSpec::full_shift(2)
    }

    #[test]
    fn rejects_bad_adjacency() {
        assert_eq!(SubshiftSpec::new(vec![vec![1, 1], vec![0, 0]]), Err(SymbolicError::EmptyRow(2)));
        assert_eq!(SubshiftSpec::new(vec![vec![1, 0], vec![1, 0]]), Err(SymbolicError::EmptyColumn(2)));
        assert_eq!(SubshiftSpec::new(vec![vec![1, 0], vec![0, 1]]), Err(SymbolicError::NotIrreducible));
        assert_eq!(SubshiftSpec::new(vec![vec![1, 2], vec![1, 1]]), Err(SymbolicError::NotBinary(2, 1)));
        assert_eq!(SubshiftSpec::new(vec![vec![1, 1]]), Err(SymbolicError::NotSquare));
        assert_eq!(
            SubshiftSpec::new(vec![vec![1, 1], vec![0, 0]]).unwrap_err().to_string(),
            "adjacency row 2 empty"
        );
    }

    #[test]
    fn symbol_lookup_across_tails() {
        let s = full2();
        let p = s.two_sided_point(vec![0, 1], vec![1, 1, 0], -1, vec![0, 0, 1]).unwrap();
        assert_eq!(p.window(-5, 5), vec![0, 1, 0, 1, 1, 1, 0, 0, 0, 1, 0]);
    }

    #[test]
    fn validation_catches_junctions() {
        let g = SubshiftSpec::golden_mean();
        assert!(g.two_sided_point(vec![0], vec![1], 0, vec![0]).is_ok());
        assert!(g.two_sided_point(vec![1], vec![0], 0, vec![0]).is_err());
        assert!(g.two_sided_point(vec![0], vec![1], 0, vec![1, 0]).is_err());
        assert!(g.periodic_point(vec![1, 1]).is_err());
    }

    #[test]
    fn shift_of_period_two_swaps_phase() {
        let s = full2();
        let p = s.periodic_point(vec![0, 1]).unwrap();
        let q = p.shifted(1);
        assert_eq!(q.symbol(0), Some(1));
        assert!(q.same_sequence(&s.periodic_point(vec![1, 0]).unwrap()));
        assert!(p.shifted(2).same_sequence(&p));
    }

    #[test]
    fn shift_fixes_fixed_point() {
        let s = full2();
        let p = s.periodic_point(vec![0]).unwrap();
        for k in [-7, -1, 0, 3, 100] {
            assert!(p.shifted(k).same_sequence(&p));
        }
    }

    #[test]
    fn shift_round_trip_is_bitwise() {
        let s = full2();
        let p = s.two_sided_point(vec![1], vec![0, 1, 1, 0], -2, vec![0, 1]).unwrap();
        assert_eq!(p.shifted(3).shifted(-3), p);
    }

    #[test]
    fn one_sided_shift_directions() {
        let s = full2();
        let fut = s.future_point(vec![1, 0, 0], vec![1, 1, 0]).unwrap();
        let f2 = fut.shift(5).unwrap();
        assert_eq!(f2.window(0, 5), fut.window(5, 10));
        assert!(fut.shift(-1).is_err());
        let past = s.past_point(vec![0, 1], vec![1, 1]).unwrap();
        let p2 = past.shift(-4).unwrap();
        assert_eq!(p2.window(-5, 0), past.window(-9, -4));
        assert!(past.shift(1).is_err());
    }

    #[test]
    fn metric_examples() {
        let s = full2();
        let x = s.periodic_point(vec![0]).unwrap();
        assert_eq!(metric(&x, &x).unwrap(), 0.0);
        let y = s.two_sided_point(vec![0], vec![1], 2, vec![0]).unwrap();
        assert_eq!(metric(&x, &y).unwrap(), 0.25);
        let z = s.two_sided_point(vec![0], vec![1], 0, vec![0]).unwrap();
        assert_eq!(metric(&x, &z).unwrap(), 1.0);
        let w = s.two_sided_point(vec![0], vec![1], -3, vec![0]).unwrap();
        assert_eq!(metric(&x, &w).unwrap(), 0.125);
        let f = s.future_point(vec![], vec![0]).unwrap();
        assert!(metric(&x, &f).is_err());
    }

    #[test]
    fn metric_sees_far_tail_differences() {
        let s = full2();
        let x = s.two_sided_point(vec![0], vec![], 0, vec![0, 0, 1]).unwrap();
        let y = s.two_sided_point(vec![0], vec![], 0, vec![0, 0, 0, 0, 0, 1]).unwrap();
        // first difference at index 2
        assert_eq!(metric(&x, &y).unwrap(), 0.25);
        let a = s.two_sided_point(vec![0], vec![0; 40], 0, vec![1]).unwrap();
        let b = s.periodic_point(vec![0]).unwrap();
        assert_eq!(a.first_disagreement(&b), Some(40));
    }

    #[test]
    fn bracket_examples() {
        let s = full2();
        let x = s.two_sided_point(vec![1], vec![0, 1], -1, vec![0, 1, 1]).unwrap();
        assert_eq!(bracket(&x, &x).unwrap().window(-20, 20), x.window(-20, 20));
        let zero = s.periodic_point(vec![0]).unwrap();
        let y = s.two_sided_point(vec![0], vec![0], 0, vec![1]).unwrap();
        let b = bracket(&zero, &y).unwrap();
        assert_eq!(b.window(-5, 5), vec![0, 0, 0, 0, 0, 0, 1, 1, 1, 1, 1]);
        let one = s.periodic_point(vec![1]).unwrap();
        assert_eq!(bracket(&zero, &one), Err(SymbolicError::BracketMismatch(0, 1)));
    }

    #[test]
    fn periodic_orbit_enumeration() {
        let s = full2();
        let p1 = periodic_orbits(&s, 1);
        assert_eq!(p1.len(), 2);
        let p2 = periodic_orbits(&s, 2);
        assert_eq!(p2.len(), 3);
        assert_eq!(p2[2].right_tail(), &[0, 1]);
        let g = periodic_orbits(&SubshiftSpec::golden_mean(), 2);
        let words: Vec<Vec<Symbol>> = g.iter().map(|p| p.right_tail().to_vec()).collect();
        assert_eq!(words, vec![vec![0], vec![0, 1]]);
    }

    #[test]
    fn necklace_counts_full_two_shift() {
        // Number of primitive binary necklaces of length q (Moreau's formula).
        let s = full2();
        let counts: Vec<usize> = (1..=8)
            .map(|q| periodic_orbits(&s, q).len() - if q > 1 { periodic_orbits(&s, q - 1).len() } else { 0 })
            .collect();
        assert_eq!(counts, vec![2, 1, 2, 3, 6, 9, 18, 30]);
    }

    #[test]
    fn minimal_period() {
        let s = full2();
        assert_eq!(s.periodic_point(vec![0, 1, 0, 1]).unwrap().minimal_period(), Some(2));
        let not = s.two_sided_point(vec![0], vec![1], 0, vec![0]).unwrap();
        assert_eq!(not.minimal_period(), None);
    }

    #[test]
    fn merge_time() {
        let s = full2();
        let x = s.two_sided_point(vec![0], vec![1, 0, 1], -1, vec![0]).unwrap();
        let y = s.periodic_point(vec![0]).unwrap();
        assert_eq!(x.stable_merge_time(&y).unwrap(), 2);
        let z = s.periodic_point(vec![1]).unwrap();
        assert_eq!(x.stable_merge_time(&z), Err(SymbolicError::NotAsymptotic));
    }

    #[test]
    fn point_json_round_trip() {
        let s = SubshiftSpec::golden_mean();
        let p = s.two_sided_point(vec![0, 1], vec![0], 3, vec![1, 0]).unwrap();
        let j = PointJson::from(&p);
        let back = j.to_point(&s).unwrap();
        assert_eq!(back, p);
        let text = serde_json::to_string(&j).unwrap();
        assert!(text.contains("\"core_offset\":3"));
    }

    #[test]
    fn spec_json() {
        let s: SubshiftSpec = serde_json::from_str(r#"{"m":2,"adjacency":[[1,1],[1,0]]}"#).unwrap();
        assert_eq!(s, SubshiftSpec::golden_mean());
        assert!(serde_json::from_str::<SubshiftSpec>(r#"{"m":3,"adjacency":[[1,1],[1,0]]}"#).is_err());
    }

    #[test]
    fn cycles_through_symbols() {
        let g = SubshiftSpec::golden_mean();
        assert_eq!(g.shortest_cycle_through(0), vec![0]);
        assert_eq!(g.shortest_cycle_through(1), vec![1, 0]);
        let p = g.pad_core(vec![1, 0, 1], 0).unwrap();
        assert!(g.validate(&p).is_ok());
    }
}
