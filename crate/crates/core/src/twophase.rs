//! Two-phase codebreaker for the black-peg game: a reduction phase of
//! cyclic questions followed by an end-game solved exhaustively.

use std::collections::{BTreeMap, HashSet};
use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::game::{enumerate_secrets, grade_unchecked, Code, Color, FeedbackMode, GameSpec};
use crate::solver::{Limits, Solver};

/// The question `<k> = (k, k+1, ..., k+p-1)` with colors taken mod `c`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CyclicQuestion {
    pub k: i64,
}

impl CyclicQuestion {
    pub fn code(&self, p: usize, c: usize) -> Result<Code> {
        if c < p || c == 0 {
            return Err(Error::InvalidArgument(format!("c={c} < p={p}")));
        }
        let pegs: Vec<Color> = (0..p as i64)
            .map(|i| (self.k + i).rem_euclid(c as i64) as Color)
            .collect();
        Code::new(&pegs)
    }
}

/// Black counts received during the reduction phase, in canonical rotation.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct AnswerSequence {
    pub blacks: Vec<u8>,
}

impl AnswerSequence {
    pub fn new(blacks: Vec<u8>) -> Self {
        Self { blacks }
    }

    pub fn len(&self) -> usize {
        self.blacks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blacks.is_empty()
    }

    pub fn total(&self) -> usize {
        self.blacks.iter().map(|&b| b as usize).sum()
    }

    pub fn is_all_zero(&self) -> bool {
        self.blacks.iter().all(|&b| b == 0)
    }

    /// Entries below `p`, total at most `p`, and a nonzero first entry
    /// unless all are zero.
    pub fn is_canonical(&self, p: usize) -> bool {
        self.blacks.iter().all(|&b| (b as usize) < p)
            && self.total() <= p
            && (self.is_all_zero() || self.blacks[0] != 0)
    }
}

impl fmt::Display for AnswerSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.blacks.iter().map(|b| b.to_string()).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Next cyclic question index, or `None` once `x` questions were asked or
/// the last answer was all black.
///
/// The first question is `<0>`. While every answer is zero the codebreaker
/// walks down `<c-1>, <c-2>, ...`; after the first nonzero answer it walks
/// up `<1>, <2>, ...`.
pub fn reduction_question_order(history: &[(usize, u8)], p: usize, c: usize, x: usize) -> Option<usize> {
    if history.len() >= x || history.iter().any(|&(_, b)| b as usize >= p) {
        return None;
    }
    match history.iter().position(|&(_, b)| b != 0) {
        None => Some((c - history.len() % c) % c),
        Some(first) => Some((history.len() - first) % c),
    }
}

/// A history rotated so that the asked questions are `<0>..<x-1>`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CanonicalHistory {
    /// Colors were renamed `k -> (k - shift) mod c`.
    pub shift: usize,
    pub answers: AnswerSequence,
}

impl CanonicalHistory {
    pub fn questions(&self) -> Vec<CyclicQuestion> {
        (0..self.answers.len() as i64).map(|k| CyclicQuestion { k }).collect()
    }
}

pub fn canonicalize_history(history: &[(usize, u8)], c: usize) -> Result<CanonicalHistory> {
    if history.is_empty() || history.len() > c {
        return Err(Error::InvalidArgument(format!("history of length {} for c={c}", history.len())));
    }
    let x = history.len();
    let shift = match history.iter().find(|&&(_, b)| b != 0) {
        Some(&(k, _)) => k,
        None => (c - (x - 1)) % c,
    };
    let mut blacks = vec![None; x];
    for &(k, b) in history {
        if k >= c {
            return Err(Error::InvalidArgument(format!("question <{k}> with c={c}")));
        }
        let idx = (k + c - shift) % c;
        if idx >= x || blacks[idx].replace(b).is_some() {
            return Err(Error::InvalidArgument(
                "asked questions do not rotate onto <0>..<x-1>".into(),
            ));
        }
    }
    Ok(CanonicalHistory {
        shift,
        answers: AnswerSequence::new(blacks.into_iter().map(|b| b.unwrap_or(0)).collect()),
    })
}

/// Plays the reduction phase against `secret` and returns the history.
pub fn play_reduction(secret: &Code, c: usize, x: usize) -> Result<Vec<(usize, u8)>> {
    let p = secret.len();
    let mut history = Vec::new();
    while let Some(k) = reduction_question_order(&history, p, c, x) {
        let q = CyclicQuestion { k: k as i64 }.code(p, c)?;
        let b = grade_unchecked(&q, secret, FeedbackMode::BlackOnly).black;
        history.push((k, b));
    }
    Ok(history)
}

/// Every canonical answer sequence of length `x`, ascending.
pub fn enumerate_answer_sequences(p: usize, x: usize) -> Vec<AnswerSequence> {
    let mut out = vec![AnswerSequence::new(vec![0; x])];
    if x == 0 || p < 2 {
        return out;
    }
    let mut cur = vec![0u8; x];
    for b1 in 1..p as u8 {
        cur[0] = b1;
        fill_tail(&mut cur, 1, p - b1 as usize, p, &mut out);
    }
    out
}

fn fill_tail(cur: &mut [u8], i: usize, left: usize, p: usize, out: &mut Vec<AnswerSequence>) {
    if i == cur.len() {
        out.push(AnswerSequence::new(cur.to_vec()));
        return;
    }
    for b in 0..=left.min(p - 1) {
        cur[i] = b as u8;
        fill_tail(cur, i + 1, left - b, p, out);
    }
    cur[i] = 0;
}

/// Secrets answering `<i>` with `seq[i]` black pegs for every `i`.
pub fn endgame_candidates(p: usize, c: usize, seq: &AnswerSequence) -> Result<Vec<Code>> {
    if seq.len() > c {
        return Err(Error::InvalidArgument(format!("{} questions for c={c}", seq.len())));
    }
    let questions: Vec<Code> = (0..seq.len() as i64)
        .map(|k| CyclicQuestion { k }.code(p, c))
        .collect::<Result<_>>()?;
    let all = enumerate_secrets(&GameSpec::abb(p, c))?;
    let out: Vec<Code> = all
        .into_iter()
        .filter(|s| {
            questions
                .iter()
                .zip(&seq.blacks)
                .all(|(q, &b)| grade_unchecked(q, s, FeedbackMode::BlackOnly).black == b)
        })
        .collect();
    if out.is_empty() {
        return Err(Error::InfeasibleSequence(seq.to_string()));
    }
    Ok(out)
}

fn candidates_or_empty(p: usize, c: usize, seq: &AnswerSequence) -> Result<Vec<Code>> {
    match endgame_candidates(p, c, seq) {
        Err(Error::InfeasibleSequence(_)) => Ok(Vec::new()),
        r => r,
    }
}

/// A position-preserving color bijection carrying `from` onto `to`, if any.
/// Returned as `(color in from, color in to)` pairs, ascending.
pub fn find_color_bijection(from: &[Code], to: &[Code]) -> Option<Vec<(Color, Color)>> {
    if from.len() != to.len() {
        return None;
    }
    if from.is_empty() {
        return Some(Vec::new());
    }
    let p = from[0].len();
    if to[0].len() != p {
        return None;
    }
    let profile = |codes: &[Code]| {
        let mut m: BTreeMap<Color, Vec<u32>> = BTreeMap::new();
        for s in codes {
            for (i, &k) in s.pegs().iter().enumerate() {
                m.entry(k).or_insert_with(|| vec![0; p])[i] += 1;
            }
        }
        m
    };
    let (pa, pb) = (profile(from), profile(to));
    if pa.len() != pb.len() {
        return None;
    }
    let colors_a: Vec<Color> = pa.keys().copied().collect();
    let options: Vec<Vec<Color>> = colors_a
        .iter()
        .map(|k| pb.iter().filter(|(_, v)| **v == pa[k]).map(|(&j, _)| j).collect())
        .collect();
    if options.iter().any(|o| o.is_empty()) {
        return None;
    }
    let target: HashSet<Code> = to.iter().copied().collect();
    let mut map = [u8::MAX; 256];
    let mut used = [false; 256];
    if assign(0, &colors_a, &options, from, &target, &mut map, &mut used) {
        Some(colors_a.iter().map(|&k| (k, map[k as usize])).collect())
    } else {
        None
    }
}

fn assign(
    i: usize,
    colors: &[Color],
    options: &[Vec<Color>],
    from: &[Code],
    target: &HashSet<Code>,
    map: &mut [u8; 256],
    used: &mut [bool; 256],
) -> bool {
    if i == colors.len() {
        return true;
    }
    let k = colors[i];
    for &j in &options[i] {
        if used[j as usize] {
            continue;
        }
        map[k as usize] = j;
        used[j as usize] = true;
        // every code whose colors are all mapped must land in the target
        let consistent = from.iter().all(|s| {
            if !s.pegs().contains(&k) || s.pegs().iter().any(|&t| map[t as usize] == u8::MAX) {
                return true;
            }
            target.contains(&s.map_colors(&map[..]))
        });
        if consistent && assign(i + 1, colors, options, from, target, map, used) {
            return true;
        }
        map[k as usize] = u8::MAX;
        used[j as usize] = false;
    }
    false
}

/// Evidence that an end-game at `c1` colors is a relabeled end-game at `c0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MappingWitness {
    pub compressed: AnswerSequence,
    pub mapping: Vec<(Color, Color)>,
}

/// Looks for a shorter sequence, obtained by deleting `x1 - x0` zero answers
/// and keeping the canonical form, whose end-game at `c0` colors matches the
/// end-game of `seq` at `c1` colors up to a position-preserving color
/// bijection.
pub fn verify_mapping_equivalence(
    p: usize,
    c1: usize,
    c0: usize,
    y: usize,
    seq: &AnswerSequence,
) -> Result<Option<MappingWitness>> {
    if c1 < c0 || c0 < p * p || c0 < y {
        return Err(Error::InvalidArgument(format!(
            "need c1 >= c0 >= p^2 and c0 >= y, got c1={c1} c0={c0} y={y}"
        )));
    }
    let (x1, x0) = (c1 - y, c0 - y);
    if x0 < p * p - p + 1 {
        return Err(Error::InvalidArgument(format!("x0={x0} < p^2-p+1")));
    }
    if seq.len() != x1 || !seq.is_canonical(p) {
        return Err(Error::InvalidArgument(format!("{seq} is not a canonical sequence of length {x1}")));
    }
    let big = candidates_or_empty(p, c1, seq)?;
    let drop = x1 - x0;
    let zeros: Vec<usize> = (1..x1).filter(|&i| seq.blacks[i] == 0).collect();
    let zeros = if seq.is_all_zero() { (0..x1).collect() } else { zeros };
    let mut tried = HashSet::new();
    for del in combinations(&zeros, drop) {
        let blacks: Vec<u8> = (0..x1).filter(|i| !del.contains(i)).map(|i| seq.blacks[i]).collect();
        let compressed = AnswerSequence::new(blacks);
        if !compressed.is_canonical(p) || !tried.insert(compressed.clone()) {
            continue;
        }
        let small = candidates_or_empty(p, c0, &compressed)?;
        if let Some(mapping) = find_color_bijection(&big, &small) {
            return Ok(Some(MappingWitness { compressed, mapping }));
        }
    }
    Ok(None)
}

fn combinations(items: &[usize], k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    if items.len() < k {
        return Vec::new();
    }
    let mut out = Vec::new();
    for (i, &first) in items.iter().enumerate() {
        for mut rest in combinations(&items[i + 1..], k - 1) {
            rest.insert(0, first);
            out.push(rest);
        }
    }
    out
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum UpperMode {
    /// Bound for `c` and, through color mapping, every larger `c`.
    Generalizing,
    /// Bound for this `c` only.
    Fixed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CaseVerdict {
    Solved,
    Failed,
    /// No secret fits the sequence at this `c`.
    Infeasible,
    /// The search budget ran out first.
    Unknown,
}

#[derive(Clone, Debug, Serialize)]
pub struct CaseReport {
    pub sequence: String,
    pub candidates: usize,
    pub budget: usize,
    pub verdict: CaseVerdict,
    pub nodes: u64,
}

#[derive(Clone, Debug, Serialize)]
pub struct UpperBound {
    pub pegs: usize,
    pub colors: usize,
    pub q: usize,
    pub generalizes: bool,
}

impl fmt::Display for UpperBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.generalizes {
            let shift = self.q as isize - self.colors as isize;
            let rhs = match shift {
                0 => "c".to_string(),
                s if s > 0 => format!("c+{s}"),
                s => format!("c{s}"),
            };
            write!(f, "abb({},c) <= {rhs} for c >= {}", self.pegs, self.colors)
        } else {
            write!(f, "abb({},{}) <= {}", self.pegs, self.colors, self.q)
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct UpperBoundReport {
    pub pegs: usize,
    pub colors: usize,
    pub q: usize,
    pub x: usize,
    pub mode: UpperMode,
    pub cases: Vec<CaseReport>,
    /// In generalizing mode: every sequence at `c+1` colors mapped onto a
    /// verified one.
    pub mapping_checked: Option<bool>,
    pub bound: Option<UpperBound>,
}

impl UpperBoundReport {
    pub fn failed(&self) -> impl Iterator<Item = &CaseReport> {
        self.cases.iter().filter(|c| c.verdict == CaseVerdict::Failed)
    }

    pub fn incomplete(&self) -> bool {
        self.cases.iter().any(|c| c.verdict == CaseVerdict::Unknown)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("sequence,candidates,budget,verdict,nodes\n");
        for c in &self.cases {
            let verdict = serde_json::to_value(c.verdict).unwrap_or_default();
            out.push_str(&format!(
                "\"{}\",{},{},{},{}\n",
                c.sequence,
                c.candidates,
                c.budget,
                verdict.as_str().unwrap_or_default(),
                c.nodes
            ));
        }
        out
    }
}

/// Solves the end-game of every answer sequence within `q - x` questions.
pub fn verify_upper_bound(
    p: usize,
    c: usize,
    q: usize,
    x: usize,
    mode: UpperMode,
    limits: Limits,
) -> Result<UpperBoundReport> {
    GameSpec::abb(p, c).validate()?;
    if x > c || x > q {
        return Err(Error::InvalidArgument(format!("need x <= c and x <= q, got x={x}")));
    }
    if mode == UpperMode::Generalizing && (c < p * p || x < p * p - p + 1) {
        return Err(Error::InvalidArgument(format!(
            "generalizing needs c >= {} and x >= {}",
            p * p,
            p * p - p + 1
        )));
    }
    let budget = q - x;
    let cases = enumerate_answer_sequences(p, x)
        .par_iter()
        .map(|seq| solve_case(p, c, budget, seq, limits))
        .collect::<Result<Vec<_>>>()?;

    let mapping_checked = match mode {
        UpperMode::Fixed => None,
        UpperMode::Generalizing => {
            let y = c - x;
            let ok = enumerate_answer_sequences(p, x + 1)
                .par_iter()
                .map(|s| verify_mapping_equivalence(p, c + 1, c, y, s).map(|w| w.is_some()))
                .collect::<Result<Vec<_>>>()?;
            Some(ok.into_iter().all(|b| b))
        }
    };
    let all_ok = cases
        .iter()
        .all(|r| matches!(r.verdict, CaseVerdict::Solved | CaseVerdict::Infeasible));
    let bound = (all_ok && mapping_checked != Some(false)).then_some(UpperBound {
        pegs: p,
        colors: c,
        q,
        generalizes: mode == UpperMode::Generalizing,
    });
    Ok(UpperBoundReport {
        pegs: p,
        colors: c,
        q,
        x,
        mode,
        cases,
        mapping_checked,
        bound,
    })
}

fn solve_case(p: usize, c: usize, budget: usize, seq: &AnswerSequence, limits: Limits) -> Result<CaseReport> {
    let cands = candidates_or_empty(p, c, seq)?;
    let mut report = CaseReport {
        sequence: seq.to_string(),
        candidates: cands.len(),
        budget,
        verdict: CaseVerdict::Infeasible,
        nodes: 0,
    };
    if cands.is_empty() {
        return Ok(report);
    }
    let solver = Solver::with_secrets(GameSpec::abb(p, c), cands)?.with_limits(limits);
    report.verdict = match solver.solvable_within(budget) {
        Ok(true) => CaseVerdict::Solved,
        Ok(false) => CaseVerdict::Failed,
        Err(Error::BudgetExhausted { .. }) => CaseVerdict::Unknown,
        Err(e) => return Err(e),
    };
    report.nodes = solver.nodes();
    Ok(report)
}

/// Groups sequences whose end-games agree up to a position permutation and
/// a color bijection, both of which leave black-only end-games unchanged.
/// Classes keep enumeration order; the first member is the representative.
pub fn dedupe_sequences(sequences: &[AnswerSequence], p: usize, c: usize) -> Result<Vec<Vec<AnswerSequence>>> {
    let perms = crate::solver::symmetry::permutations(p);
    let mut classes: Vec<(Vec<Code>, Vec<AnswerSequence>)> = Vec::new();
    for seq in sequences {
        let cands = candidates_or_empty(p, c, seq)?;
        let images: Vec<Vec<Code>> = perms
            .iter()
            .map(|pi| cands.iter().map(|k| k.permute_positions(pi)).collect())
            .collect();
        match classes.iter_mut().find(|(rep, _)| {
            rep.len() == cands.len() && images.iter().any(|img| find_color_bijection(img, rep).is_some())
        }) {
            Some((_, members)) => members.push(seq.clone()),
            None => classes.push((cands, vec![seq.clone()])),
        }
    }
    Ok(classes.into_iter().map(|(_, m)| m).collect())
}
