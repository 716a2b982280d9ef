//! End-game states of the black-peg lower-bound counterstrategy.
//!
//! A state has one row per peg position, holding the colors still possible
//! there. Rows are stored as color bitmasks.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{Code, Color, GameSpec, MAX_COLORS, MAX_PEGS};
use crate::solver::{symmetry::permutations, Limits, Solver};

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EndgameState {
    rows: Vec<u32>,
}

/// The rows in which one color appears.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RowSet {
    pub color: Color,
    pub positions: u8,
}

impl RowSet {
    pub fn len(&self) -> usize {
        self.positions.count_ones() as usize
    }

    pub fn is_empty(&self) -> bool {
        self.positions == 0
    }

    pub fn is_disjoint(&self, other: &RowSet) -> bool {
        self.positions & other.positions == 0
    }
}

impl EndgameState {
    /// A state from explicit rows. Rows may be empty here; the rules and
    /// the solver reject such states.
    pub fn new(rows: &[Vec<Color>]) -> Result<Self> {
        if rows.is_empty() || rows.len() > MAX_PEGS {
            return Err(Error::InvalidState(format!("{} rows", rows.len())));
        }
        let mut masks = Vec::with_capacity(rows.len());
        for row in rows {
            let mut m = 0u32;
            for &k in row {
                if k as usize >= MAX_COLORS {
                    return Err(Error::InvalidState(format!("color {k} out of range")));
                }
                m |= 1 << k;
            }
            masks.push(m);
        }
        Ok(Self { rows: masks })
    }

    pub fn from_masks(rows: Vec<u32>) -> Result<Self> {
        if rows.is_empty() || rows.len() > MAX_PEGS {
            return Err(Error::InvalidState(format!("{} rows", rows.len())));
        }
        Ok(Self { rows })
    }

    pub fn pegs(&self) -> usize {
        self.rows.len()
    }

    pub fn masks(&self) -> &[u32] {
        &self.rows
    }

    pub fn row(&self, i: usize) -> Vec<Color> {
        bits(self.rows[i]).collect()
    }

    fn all_colors(&self) -> u32 {
        self.rows.iter().fold(0, |a, r| a | r)
    }

    /// Largest color present, `c0`.
    pub fn max_color(&self) -> Option<Color> {
        let all = self.all_colors();
        (all != 0).then(|| 31 - all.leading_zeros() as Color)
    }

    pub fn row_set(&self, color: Color) -> RowSet {
        let mut positions = 0u8;
        for (i, r) in self.rows.iter().enumerate() {
            if r & (1 << color) != 0 {
                positions |= 1 << i;
            }
        }
        RowSet { color, positions }
    }

    /// Row sets of every present color, by color.
    pub fn row_sets(&self) -> Vec<RowSet> {
        bits(self.all_colors()).map(|k| self.row_set(k)).collect()
    }

    /// Checks that no row is empty and that at least one secret exists.
    pub fn validate(&self) -> Result<()> {
        if let Some(i) = self.rows.iter().position(|&r| r == 0) {
            return Err(Error::InvalidState(format!("row {i} is empty")));
        }
        if self.secrets().is_empty() {
            return Err(Error::InvalidState("no secret fits the rows".into()));
        }
        Ok(())
    }

    /// Every distinct-color code taking its i-th color from row i.
    pub fn secrets(&self) -> Vec<Code> {
        let mut out = Vec::new();
        let mut cur = Vec::with_capacity(self.rows.len());
        self.collect_secrets(0, &mut cur, &mut out);
        out
    }

    fn collect_secrets(&self, i: usize, cur: &mut Vec<Color>, out: &mut Vec<Code>) {
        if i == self.rows.len() {
            out.push(Code::from_slice(cur));
            return;
        }
        for k in bits(self.rows[i]) {
            if !cur.contains(&k) {
                cur.push(k);
                self.collect_secrets(i + 1, cur, out);
                cur.pop();
            }
        }
    }

    /// Rule 1: drop `color` from `row`.
    pub fn rule1_remove(&self, row: usize, color: Color) -> Result<Self> {
        let r = *self
            .rows
            .get(row)
            .ok_or_else(|| Error::RuleViolation(format!("no row {row}")))?;
        if color as usize >= MAX_COLORS || r & (1 << color) == 0 {
            return Err(Error::RuleViolation(format!("color {color} not in row {row}")));
        }
        if r == 1 << color {
            return Err(Error::RuleViolation(format!("row {row} would become empty")));
        }
        let mut next = self.clone();
        next.rows[row] &= !(1 << color);
        Ok(next)
    }

    /// Rule 2: rename color `k` to `perm[k]`.
    pub fn rule2_permute_colors(&self, perm: &[Color]) -> Result<Self> {
        check_perm(perm.iter().map(|&k| k as usize), perm.len())?;
        if self.max_color().is_some_and(|m| m as usize >= perm.len()) {
            return Err(Error::RuleViolation("permutation does not cover every color".into()));
        }
        let rows = self
            .rows
            .iter()
            .map(|&r| bits(r).fold(0u32, |m, k| m | 1 << perm[k as usize]))
            .collect();
        Ok(Self { rows })
    }

    /// Rule 3: row `i` becomes row `perm[i]`.
    pub fn rule3_permute_rows(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.rows.len() {
            return Err(Error::RuleViolation(format!(
                "row permutation of length {} for {} rows",
                perm.len(),
                self.rows.len()
            )));
        }
        check_perm(perm.iter().copied(), perm.len())?;
        let mut rows = vec![0; self.rows.len()];
        for (i, &r) in self.rows.iter().enumerate() {
            rows[perm[i]] = r;
        }
        Ok(Self { rows })
    }

    /// Rule 4: replace `k2` by `k1`; their row sets must be disjoint.
    pub fn rule4_merge(&self, k1: Color, k2: Color) -> Result<Self> {
        if k1 as usize >= MAX_COLORS || k2 as usize >= MAX_COLORS {
            return Err(Error::RuleViolation("color out of range".into()));
        }
        let (a, b) = (self.row_set(k1), self.row_set(k2));
        if k1 == k2 || !a.is_disjoint(&b) {
            return Err(Error::RuleViolation(format!(
                "row sets of {k1} and {k2} are not disjoint"
            )));
        }
        let rows = self
            .rows
            .iter()
            .map(|&r| {
                if r & (1 << k2) != 0 {
                    (r & !(1 << k2)) | 1 << k1
                } else {
                    r
                }
            })
            .collect();
        Ok(Self { rows })
    }

    /// Canonical representative up to row and color permutation.
    ///
    /// Up to color renaming a state is just the multiset of its row sets, so
    /// the form minimizes the sorted row-set list over all row permutations
    /// and then numbers colors in that order.
    pub fn canonical(&self) -> Self {
        let p = self.rows.len();
        let sets: Vec<u8> = self.row_sets().iter().map(|r| r.positions).collect();
        let mut best: Option<Vec<u8>> = None;
        for perm in permutations(p) {
            let mut mapped: Vec<u8> = sets
                .iter()
                .map(|&s| {
                    (0..p).filter(|&i| s & (1 << i) != 0).fold(0u8, |m, i| m | 1 << perm[i])
                })
                .collect();
            // larger row sets first, then by the rows they cover
            mapped.sort_by_key(|&s| (std::cmp::Reverse(s.count_ones()), s.reverse_bits()));
            if best.as_ref().is_none_or(|b| key_of(&mapped) < key_of(b)) {
                best = Some(mapped);
            }
        }
        let best = best.unwrap_or_default();
        let mut rows = vec![0u32; p];
        for (k, s) in best.iter().enumerate() {
            for (i, row) in rows.iter_mut().enumerate() {
                if s & (1 << i) != 0 {
                    *row |= 1 << k;
                }
            }
        }
        Self { rows }
    }

    pub fn is_isomorphic(&self, other: &Self) -> bool {
        self.rows.len() == other.rows.len() && self.canonical() == other.canonical()
    }
}

fn key_of(sets: &[u8]) -> Vec<(std::cmp::Reverse<u32>, u8)> {
    sets.iter()
        .map(|&s| (std::cmp::Reverse(s.count_ones()), s.reverse_bits()))
        .collect()
}

fn bits(mask: u32) -> impl Iterator<Item = Color> {
    (0..32u8).filter(move |&k| mask & (1 << k) != 0)
}

fn check_perm(items: impl Iterator<Item = usize>, n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    for k in items {
        if k >= n || std::mem::replace(&mut seen[k], true) {
            return Err(Error::RuleViolation("malformed permutation".into()));
        }
    }
    Ok(())
}

/// One line per row, colors separated by spaces.
impl fmt::Display for EndgameState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, &r) in self.rows.iter().enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let row: Vec<String> = bits(r).map(|k| k.to_string()).collect();
            write!(f, "{}", row.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for EndgameState {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let rows = s
            .lines()
            .map(|line| {
                line.split_whitespace()
                    .map(|t| t.parse::<Color>().map_err(|e| Error::Parse(format!("{t:?}: {e}"))))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&rows)
    }
}

/// All states with exactly `r` colors per row, no single row sets and no
/// two colors with disjoint row sets, one canonical state per class.
pub fn enumerate_nonreducible(p: usize, r: usize) -> Result<Vec<EndgameState>> {
    if !(2..=MAX_PEGS).contains(&p) || r < p {
        return Err(Error::InvalidArgument(format!("need 2 <= p <= {MAX_PEGS} and r >= p")));
    }
    let subsets: Vec<u8> = (1u16..1 << p)
        .map(|s| s as u8)
        .filter(|s| s.count_ones() >= 2)
        .collect();
    let mut found = BTreeSet::new();
    let mut chosen = Vec::new();
    let mut counts = vec![0usize; p];
    choose_sets(&subsets, 0, r, &mut counts, &mut chosen, &mut |sets| {
        if sets.len() <= MAX_COLORS {
            let mut rows = vec![0u32; p];
            for (k, s) in sets.iter().enumerate() {
                for (i, row) in rows.iter_mut().enumerate() {
                    if s & (1 << i) != 0 {
                        *row |= 1 << k;
                    }
                }
            }
            found.insert(EndgameState { rows }.canonical());
        }
    });
    Ok(found.into_iter().collect())
}

fn choose_sets(
    subsets: &[u8],
    from: usize,
    r: usize,
    counts: &mut [usize],
    chosen: &mut Vec<u8>,
    emit: &mut impl FnMut(&[u8]),
) {
    if counts.iter().all(|&c| c == r) {
        emit(chosen);
        return;
    }
    for (idx, &s) in subsets.iter().enumerate().skip(from) {
        if chosen.iter().any(|&t| t & s == 0) {
            continue;
        }
        let p = counts.len();
        if (0..p).any(|i| s & (1 << i) != 0 && counts[i] == r) {
            continue;
        }
        for i in (0..p).filter(|&i| s & (1 << i) != 0) {
            counts[i] += 1;
        }
        chosen.push(s);
        choose_sets(subsets, idx, r, counts, chosen, emit);
        chosen.pop();
        for i in (0..p).filter(|&i| s & (1 << i) != 0) {
            counts[i] -= 1;
        }
    }
}

/// Outcome of checking one state against a question budget.
#[derive(Clone, Debug, Serialize)]
pub struct StateVerdict {
    pub state: String,
    pub secrets: usize,
    pub colors: usize,
    pub budget: usize,
    pub unsolvable: bool,
    pub nodes: u64,
}

/// The end-game game for a state: extended questions over `c0 + 2` colors,
/// black-only answers.
pub fn state_spec(state: &EndgameState) -> Result<GameSpec> {
    let c0 = state
        .max_color()
        .ok_or_else(|| Error::InvalidState("no colors".into()))? as usize;
    let spec = GameSpec::endgame(state.pegs(), c0 + 2);
    spec.validate()?;
    Ok(spec)
}

/// Whether no strategy finishes the state within `q` questions.
pub fn state_unsolvable_within(state: &EndgameState, q: usize, limits: Limits) -> Result<StateVerdict> {
    state.validate()?;
    let spec = state_spec(state)?;
    let secrets = state.secrets();
    let solver = Solver::with_secrets(spec, secrets.clone())?.with_limits(limits);
    let solvable = solver.solvable_within(q)?;
    Ok(StateVerdict {
        state: state.to_string(),
        secrets: secrets.len(),
        colors: spec.colors,
        budget: q,
        unsolvable: !solvable,
        nodes: solver.nodes(),
    })
}

/// Worst-case questions to finish a state, found by deepening up to `budget`.
pub fn state_depth(state: &EndgameState, budget: usize) -> Result<Option<usize>> {
    state.validate()?;
    let spec = state_spec(state)?;
    let solver = Solver::with_secrets(spec, state.secrets())?;
    let res = solver.solve_exact(budget)?;
    Ok((res.status == crate::solver::SolveStatus::Exact).then_some(res.value))
}

/// `abb(p,c) >= c - r + q + 1` for every `c >= r`; the colors in
/// `residual` (`p..r`) still need a direct check.
#[derive(Clone, Debug, Serialize)]
pub struct LowerBound {
    pub pegs: usize,
    pub r: usize,
    pub q: usize,
    pub residual: Vec<usize>,
}

impl LowerBound {
    /// The bound for `c` colors, if it covers `c`.
    pub fn at(&self, c: usize) -> Option<usize> {
        (c >= self.r).then(|| c + self.q + 1 - self.r)
    }
}

impl fmt::Display for LowerBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let shift = self.q as isize + 1 - self.r as isize;
        let rhs = match shift {
            0 => "c".to_string(),
            s if s > 0 => format!("c+{s}"),
            s => format!("c{s}"),
        };
        write!(f, "abb({},c) >= {rhs} for c >= {}", self.pegs, self.r)
    }
}

/// Turns verdicts covering every non-reducible state into a bound.
pub fn lower_bound_abb(p: usize, r: usize, q: usize, verified: &[StateVerdict]) -> Result<LowerBound> {
    let mut pending: BTreeSet<EndgameState> = enumerate_nonreducible(p, r)?.into_iter().collect();
    for v in verified {
        if v.budget != q {
            return Err(Error::Unverified(format!("verdict for budget {} not {q}", v.budget)));
        }
        if !v.unsolvable {
            return Err(Error::Unverified(format!("state is solvable within {q}:\n{}", v.state)));
        }
        let state: EndgameState = v.state.parse()?;
        pending.remove(&state.canonical());
    }
    if let Some(s) = pending.first() {
        return Err(Error::Unverified(format!(
            "{} state(s) not verified, e.g.\n{s}",
            pending.len()
        )));
    }
    Ok(LowerBound {
        pegs: p,
        r,
        q,
        residual: (p..r).collect(),
    })
}

/// For a state whose colors all have pairwise intersecting pair row sets:
/// is some row empty or holding every color?
pub fn observation_check(state: &EndgameState) -> Result<bool> {
    let sets = state.row_sets();
    for (i, a) in sets.iter().enumerate() {
        if a.len() != 2 {
            return Err(Error::InvalidState(format!("color {} has no pair row set", a.color)));
        }
        if sets[..i].iter().any(|b| a.is_disjoint(b)) {
            return Err(Error::InvalidState(format!("color {} has a disjoint row set", a.color)));
        }
    }
    let n = sets.len() as u32;
    Ok(state.rows.iter().any(|&r| r == 0 || r.count_ones() == n))
}
