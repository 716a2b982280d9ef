//! Exact worst-case solver.
//!
//! The search decides "can the codebreaker always win within `d` questions"
//! for a candidate set, with the codemaker answering adversarially (any
//! answer that leaves at least one consistent secret). Values are found by
//! iterative deepening over `d`.
//!
//! Pruning, all exactness-preserving:
//! - a counting bound on how many secrets `d` questions can resolve,
//! - questions are generated once per orbit of the candidate set's detected
//!   color/position symmetries,
//! - questions are tried in order of their largest answer class,
//! - a transposition cache keyed by a symmetry-reduced form of the
//!   candidate set, holding depth bounds.

pub(crate) mod symmetry;
mod tree;

use std::collections::HashMap;
use std::sync::atomic::{AtomicBool, AtomicU64, AtomicUsize, Ordering};
use std::time::Instant;

use dashmap::DashMap;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::game::{
    enumerate_secrets, fixed_opening_questions, grade_unchecked, Code, Color, Feedback,
    FeedbackMode, GameSpec, QuestionPolicy, MAX_COLORS, MAX_PEGS,
};
use symmetry::{color_rows, generator_positions, permutations, Generator, NodeSymmetry, NO_POS};

pub use tree::{ReplayError, StrategyNode};

type Question = [Color; MAX_PEGS];

/// Candidate sets at least this large fan their questions out over workers.
const PARALLEL_MIN_CANDIDATES: usize = 48;
/// Stop inserting cache entries once keys hold this many words.
const MEMO_WORD_CAP: usize = 1 << 27;
const NO_INDEX: u32 = u32::MAX;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolveStatus {
    /// `value` is the exact worst case; a tree of that depth exists and none shorter.
    Exact,
    /// A strategy with at most `value` questions exists; optimality not proven.
    UpperBoundOnly,
    /// No strategy with fewer than `value` questions exists.
    LowerBoundOnly,
}

#[derive(Clone, Debug)]
pub struct SolveResult {
    pub value: usize,
    pub tree: Option<StrategyNode>,
    pub status: SolveStatus,
    pub nodes: u64,
}

/// Optional guards for long searches. Exceeding one yields
/// [`Error::BudgetExhausted`], never a wrong answer.
#[derive(Clone, Copy, Debug, Default)]
pub struct Limits {
    pub max_nodes: Option<u64>,
    pub deadline: Option<Instant>,
}

#[derive(Clone, Copy, Debug)]
struct Bounds {
    /// Largest depth known to be insufficient.
    fail_max: u8,
    /// Smallest depth known to suffice.
    win_min: u8,
}

#[derive(Debug)]
struct Aborted;

type Search<T> = std::result::Result<T, Aborted>;

struct Scored {
    worst: u32,
    question: Question,
}

enum SecretIndex {
    Table(Vec<u32>),
    Map(HashMap<Code, u32>),
}

/// A solver instance for one game and one root candidate set.
pub struct Solver {
    spec: GameSpec,
    p: usize,
    /// Number of question colors (joker included).
    width: usize,
    secrets: Vec<Code>,
    /// `pos[s * width + k]`: position of color `k` in secret `s`, or `NO_POS`.
    pos: Vec<u8>,
    index: SecretIndex,
    opening: Vec<Code>,
    /// `capacity[d]`: most secrets any strategy can resolve within `d` questions.
    capacity: Vec<u64>,
    answer_space: usize,
    win_code: u8,
    generic_grade: bool,
    generator_perms: Vec<Vec<usize>>,
    key_perms: Vec<Vec<usize>>,
    memo: DashMap<Box<[u64]>, Bounds>,
    memo_words: AtomicUsize,
    nodes: AtomicU64,
    aborted: AtomicBool,
    limits: Limits,
}

impl Solver {
    /// Solver over all secrets of `spec`.
    pub fn new(spec: GameSpec) -> Result<Self> {
        let secrets = enumerate_secrets(&spec)?;
        Self::from_parts(spec, secrets)
    }

    /// Solver over an explicit root candidate set (used for end-games).
    pub fn with_secrets(spec: GameSpec, mut secrets: Vec<Code>) -> Result<Self> {
        spec.validate()?;
        for s in &secrets {
            spec.check_secret(s)?;
        }
        secrets.sort();
        secrets.dedup();
        Self::from_parts(spec, secrets)
    }

    fn from_parts(spec: GameSpec, secrets: Vec<Code>) -> Result<Self> {
        if spec.policy == QuestionPolicy::Extended && spec.opening > 0 {
            return Err(Error::InvalidSpec("fixed opening needs distinct-color questions".into()));
        }
        let p = spec.pegs;
        let width = spec.question_colors();
        let mut pos = vec![NO_POS; secrets.len() * width];
        for (si, s) in secrets.iter().enumerate() {
            for (i, &k) in s.pegs().iter().enumerate() {
                pos[si * width + k as usize] = i as u8;
            }
        }
        let table_len = (width as u64).checked_pow(p as u32).unwrap_or(u64::MAX);
        let index = if table_len <= 1 << 24 {
            let mut t = vec![NO_INDEX; table_len as usize];
            for (si, s) in secrets.iter().enumerate() {
                t[pack_index(s.pegs(), width)] = si as u32;
            }
            SecretIndex::Table(t)
        } else {
            SecretIndex::Map(secrets.iter().enumerate().map(|(i, s)| (*s, i as u32)).collect())
        };
        let fanout = spec.answer_fanout() as u64;
        let mut capacity = vec![0u64];
        for d in 1..=64 {
            let prev: u64 = capacity[d - 1];
            capacity.push(prev.saturating_mul(fanout).saturating_add(1));
        }
        let (answer_space, win_code) = match spec.mode {
            FeedbackMode::BlackWhite => ((p + 1) * (p + 1), (p * (p + 1)) as u8),
            FeedbackMode::BlackOnly => (p + 1, p as u8),
        };
        let opening = fixed_opening_questions(&spec)?;
        Ok(Self {
            spec,
            p,
            width,
            secrets,
            pos,
            index,
            opening,
            capacity,
            answer_space,
            win_code,
            generic_grade: spec.policy == QuestionPolicy::Extended
                && spec.mode == FeedbackMode::BlackWhite,
            generator_perms: generator_positions(p),
            key_perms: if p <= 4 { permutations(p) } else { vec![(0..p).collect()] },
            memo: DashMap::new(),
            memo_words: AtomicUsize::new(0),
            nodes: AtomicU64::new(0),
            aborted: AtomicBool::new(false),
            limits: Limits::default(),
        })
    }

    pub fn with_limits(mut self, limits: Limits) -> Self {
        self.limits = limits;
        self
    }

    pub fn spec(&self) -> &GameSpec {
        &self.spec
    }

    pub fn secrets(&self) -> &[Code] {
        &self.secrets
    }

    /// Search nodes expanded so far.
    pub fn nodes(&self) -> u64 {
        self.nodes.load(Ordering::Relaxed)
    }

    fn root(&self) -> Vec<u32> {
        (0..self.secrets.len() as u32).collect()
    }

    /// Exact worst-case value if it is at most `budget`.
    pub fn solve_exact(&self, budget: usize) -> Result<SolveResult> {
        if budget < 1 {
            return Err(Error::InvalidArgument("budget must be at least 1".into()));
        }
        let root = self.root();
        let lb = depth_lower_bound(root.len() as u64, &self.spec).max(1);
        for d in lb..=budget {
            if self.wrap(self.wins_root(&root, d))? {
                let tree = self.wrap(self.build_root(&root, d))?;
                return Ok(SolveResult {
                    value: d,
                    tree: Some(tree),
                    status: SolveStatus::Exact,
                    nodes: self.nodes(),
                });
            }
        }
        Ok(SolveResult {
            value: budget + 1,
            tree: None,
            status: SolveStatus::LowerBoundOnly,
            nodes: self.nodes(),
        })
    }

    /// Looks for a strategy using at most `q` questions.
    ///
    /// On success the status is [`SolveStatus::UpperBoundOnly`] with value
    /// `q`; otherwise [`SolveStatus::LowerBoundOnly`] with value `q + 1`.
    pub fn prove_upper(&self, q: usize) -> Result<SolveResult> {
        let root = self.root();
        if self.wrap(self.wins_root(&root, q))? {
            let tree = self.wrap(self.build_root(&root, q))?;
            Ok(SolveResult {
                value: q,
                tree: Some(tree),
                status: SolveStatus::UpperBoundOnly,
                nodes: self.nodes(),
            })
        } else {
            Ok(SolveResult {
                value: q + 1,
                tree: None,
                status: SolveStatus::LowerBoundOnly,
                nodes: self.nodes(),
            })
        }
    }

    /// True when no strategy wins within `q - 1` questions, i.e. the worst
    /// case is at least `q`.
    pub fn prove_lower(&self, q: usize) -> Result<bool> {
        if q < 1 {
            return Err(Error::InvalidArgument("q must be at least 1".into()));
        }
        let root = self.root();
        Ok(!self.wrap(self.wins_root(&root, q - 1))?)
    }

    /// Whether the root candidate set can be won within `q` questions.
    pub fn solvable_within(&self, q: usize) -> Result<bool> {
        let root = self.root();
        self.wrap(self.wins_root(&root, q))
    }

    fn wrap<T>(&self, r: Search<T>) -> Result<T> {
        r.map_err(|_| Error::BudgetExhausted {
            nodes: self.nodes(),
        })
    }

    fn tick(&self) -> Search<()> {
        if self.aborted.load(Ordering::Relaxed) {
            return Err(Aborted);
        }
        let n = self.nodes.fetch_add(1, Ordering::Relaxed) + 1;
        let over_nodes = self.limits.max_nodes.is_some_and(|m| n > m);
        let over_time = n.is_multiple_of(1024) && self.limits.deadline.is_some_and(|d| Instant::now() > d);
        if over_nodes || over_time {
            self.aborted.store(true, Ordering::Relaxed);
            return Err(Aborted);
        }
        Ok(())
    }

    // ---- grading -------------------------------------------------------

    #[inline]
    fn answer(&self, q: &[Color], s: u32) -> u8 {
        if self.generic_grade {
            let fb = grade_unchecked(&Code::from_slice(q), &self.secrets[s as usize], self.spec.mode);
            return self.encode(fb);
        }
        let row = &self.pos[s as usize * self.width..(s as usize + 1) * self.width];
        let mut black = 0u8;
        let mut white = 0u8;
        for (i, &k) in q.iter().enumerate() {
            let at = row[k as usize];
            if at as usize == i {
                black += 1;
            } else if at != NO_POS {
                white += 1;
            }
        }
        match self.spec.mode {
            FeedbackMode::BlackWhite => black * (self.p as u8 + 1) + white,
            FeedbackMode::BlackOnly => black,
        }
    }

    fn encode(&self, fb: Feedback) -> u8 {
        match fb.white {
            Some(w) => fb.black * (self.p as u8 + 1) + w,
            None => fb.black,
        }
    }

    fn decode(&self, code: u8) -> Feedback {
        match self.spec.mode {
            FeedbackMode::BlackWhite => {
                let base = self.p as u8 + 1;
                Feedback::black_white(code / base, code % base)
            }
            FeedbackMode::BlackOnly => Feedback::black_only(code),
        }
    }

    fn counts(&self, q: &[Color], cands: &[u32], counts: &mut [u32]) {
        counts[..self.answer_space].fill(0);
        for &s in cands {
            counts[self.answer(q, s) as usize] += 1;
        }
    }

    /// Splits `cands` by answer; classes keep ascending order.
    fn split(&self, q: &[Color], cands: &[u32]) -> Vec<(u8, Vec<u32>)> {
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); self.answer_space];
        for &s in cands {
            buckets[self.answer(q, s) as usize].push(s);
        }
        buckets
            .into_iter()
            .enumerate()
            .filter(|(_, b)| !b.is_empty())
            .map(|(a, b)| (a as u8, b))
            .collect()
    }

    fn lookup(&self, pegs: &[Color]) -> u32 {
        match &self.index {
            SecretIndex::Table(t) => {
                if pegs.iter().any(|&k| k as usize >= self.width) {
                    return NO_INDEX;
                }
                t[pack_index(pegs, self.width)]
            }
            SecretIndex::Map(m) => m.get(&Code::from_slice(pegs)).copied().unwrap_or(NO_INDEX),
        }
    }

    // ---- search --------------------------------------------------------

    fn wins_root(&self, root: &[u32], depth: usize) -> Search<bool> {
        if self.opening.is_empty() {
            self.wins(root, depth)
        } else {
            self.wins_forced(root, depth, 0)
        }
    }

    fn wins_forced(&self, cands: &[u32], depth: usize, k: usize) -> Search<bool> {
        if k == self.opening.len() {
            return self.wins(cands, depth);
        }
        if cands.is_empty() {
            return Ok(true);
        }
        if depth == 0 {
            return Ok(false);
        }
        self.tick()?;
        let q = self.opening[k];
        for (a, class) in self.split(q.pegs(), cands) {
            if a != self.win_code && !self.wins_forced(&class, depth - 1, k + 1)? {
                return Ok(false);
            }
        }
        Ok(true)
    }

    fn wins(&self, cands: &[u32], depth: usize) -> Search<bool> {
        let n = cands.len();
        if n == 0 {
            return Ok(true);
        }
        if depth == 0 {
            return Ok(false);
        }
        if n == 1 {
            return Ok(true);
        }
        if depth == 1 {
            return Ok(false);
        }
        // ask one candidate, then the other
        if n == 2 {
            return Ok(true);
        }
        if n as u64 > self.capacity[depth.min(64)] {
            return Ok(false);
        }
        self.tick()?;
        if depth == 2 && n < 8 {
            return Ok(self.find_split_question(cands)?.is_some());
        }
        let key = self.canonical_key_indices(cands);
        if let Some(b) = self.memo.get(&key) {
            if depth <= b.fail_max as usize {
                return Ok(false);
            }
            if depth >= b.win_min as usize {
                return Ok(true);
            }
        }
        let won = self.search_node(cands, depth)?.is_some();
        self.remember(key, depth, won);
        Ok(won)
    }

    fn remember(&self, key: Box<[u64]>, depth: usize, won: bool) {
        let d = depth.min(u8::MAX as usize - 1) as u8;
        if let Some(mut b) = self.memo.get_mut(&key) {
            if won {
                b.win_min = b.win_min.min(d);
            } else {
                b.fail_max = b.fail_max.max(d);
            }
            return;
        }
        let words = key.len();
        if self.memo_words.load(Ordering::Relaxed) + words > MEMO_WORD_CAP {
            return;
        }
        self.memo_words.fetch_add(words, Ordering::Relaxed);
        let entry = if won {
            Bounds {
                fail_max: 0,
                win_min: d,
            }
        } else {
            Bounds {
                fail_max: d,
                win_min: u8::MAX,
            }
        };
        self.memo
            .entry(key)
            .and_modify(|b| {
                if won {
                    b.win_min = b.win_min.min(d);
                } else {
                    b.fail_max = b.fail_max.max(d);
                }
            })
            .or_insert(entry);
    }

    /// Depth-2 test: a question whose non-winning classes are all singletons.
    fn find_split_question(&self, cands: &[u32]) -> Search<Option<Question>> {
        let sym = self.node_symmetry(cands);
        let mut counts = [0u32; (MAX_PEGS + 1) * (MAX_PEGS + 1)];
        for q in self.canonical_questions(&sym) {
            self.counts(&q[..self.p], cands, &mut counts);
            let ok = counts[..self.answer_space]
                .iter()
                .enumerate()
                .all(|(a, &n)| n <= 1 || a as u8 == self.win_code);
            if ok {
                return Ok(Some(q));
            }
        }
        Ok(None)
    }

    /// Questions worth trying at this node, best first.
    fn ordered_questions(&self, cands: &[u32], depth: usize) -> Vec<Scored> {
        let sym = self.node_symmetry(cands);
        let questions = self.canonical_questions(&sym);
        let child_cap = self.capacity[(depth - 1).min(64)];
        let n = cands.len() as u32;
        let score = |q: &Question| -> Option<Scored> {
            let mut counts = [0u32; (MAX_PEGS + 1) * (MAX_PEGS + 1)];
            self.counts(&q[..self.p], cands, &mut counts);
            let mut worst = 0;
            for (a, &c) in counts[..self.answer_space].iter().enumerate() {
                if a as u8 == self.win_code {
                    continue;
                }
                // a question that does not split the set is never needed
                if c == n || c as u64 > child_cap {
                    return None;
                }
                worst = worst.max(c);
            }
            Some(Scored {
                worst,
                question: *q,
            })
        };
        let mut scored: Vec<Scored> = if cands.len() * questions.len() > 1 << 14 {
            questions.par_iter().filter_map(score).collect()
        } else {
            questions.iter().filter_map(score).collect()
        };
        scored.sort_by(|a, b| a.worst.cmp(&b.worst).then(a.question.cmp(&b.question)));
        scored
    }

    /// First question (in search order) that wins within `depth`.
    fn search_node(&self, cands: &[u32], depth: usize) -> Search<Option<Question>> {
        if depth == 2 {
            return self.find_split_question(cands);
        }
        let scored = self.ordered_questions(cands, depth);
        let try_question = |s: &Scored| -> Search<bool> {
            let mut classes = self.split(&s.question[..self.p], cands);
            classes.sort_by(|a, b| b.1.len().cmp(&a.1.len()).then(a.0.cmp(&b.0)));
            for (a, class) in &classes {
                if *a != self.win_code && !self.wins(class, depth - 1)? {
                    return Ok(false);
                }
            }
            Ok(true)
        };
        if cands.len() >= PARALLEL_MIN_CANDIDATES && scored.len() > 1 {
            let hit = scored
                .par_iter()
                .map(|s| try_question(s).map(|w| w.then_some(s.question)))
                .find_first(|r| !matches!(r, Ok(None)));
            match hit {
                Some(r) => r,
                None => Ok(None),
            }
        } else {
            for s in &scored {
                if try_question(s)? {
                    return Ok(Some(s.question));
                }
            }
            Ok(None)
        }
    }

    /// Smallest depth `<= max` that wins, if any.
    fn min_depth(&self, cands: &[u32], max: usize) -> Search<Option<usize>> {
        let lb = depth_lower_bound(cands.len() as u64, &self.spec).max(1);
        for d in lb..=max {
            if self.wins(cands, d)? {
                return Ok(Some(d));
            }
        }
        Ok(None)
    }

    // ---- strategy trees ------------------------------------------------

    fn build_root(&self, root: &[u32], depth: usize) -> Search<StrategyNode> {
        if self.opening.is_empty() {
            self.build(root, depth)
        } else {
            self.build_forced(root, depth, 0)
        }
    }

    fn build_forced(&self, cands: &[u32], depth: usize, k: usize) -> Search<StrategyNode> {
        if k == self.opening.len() {
            let d = self.min_depth(cands, depth)?.expect("forced branch solvable");
            return self.build(cands, d);
        }
        let q = self.opening[k];
        let mut node = StrategyNode::new(q, false);
        for (a, class) in self.split(q.pegs(), cands) {
            if a == self.win_code {
                node.wins = true;
            } else {
                node.children
                    .insert(self.decode(a), self.build_forced(&class, depth - 1, k + 1)?);
            }
        }
        Ok(node)
    }

    /// Strategy tree for `cands` of depth at most `depth`; every subtree is
    /// itself depth-optimal for its candidate set.
    fn build(&self, cands: &[u32], depth: usize) -> Search<StrategyNode> {
        if cands.len() == 1 {
            return Ok(StrategyNode::new(self.secrets[cands[0] as usize], true));
        }
        let q = if cands.len() == 2 {
            Code::from_slice(self.secrets[cands[0] as usize].pegs())
        } else {
            let q = self
                .search_node(cands, depth)?
                .expect("build called on a solvable node");
            Code::from_slice(&q[..self.p])
        };
        let mut node = StrategyNode::new(q, false);
        for (a, class) in self.split(q.pegs(), cands) {
            if a == self.win_code {
                node.wins = true;
            } else {
                let d = self.min_depth(&class, depth - 1)?.expect("child solvable");
                node.children.insert(self.decode(a), self.build(&class, d)?);
            }
        }
        Ok(node)
    }

    // ---- symmetry ------------------------------------------------------

    fn member_bits(&self, cands: &[u32]) -> Vec<u64> {
        let mut bits = vec![0u64; self.secrets.len().div_ceil(64)];
        for &s in cands {
            bits[s as usize / 64] |= 1 << (s % 64);
        }
        bits
    }

    fn is_member(bits: &[u64], idx: u32) -> bool {
        idx != NO_INDEX && bits[idx as usize / 64] & (1 << (idx % 64)) != 0
    }

    #[allow(clippy::needless_range_loop)]
    fn node_symmetry(&self, cands: &[u32]) -> NodeSymmetry {
        let p = self.p;
        let width = self.width;
        let codes: Vec<&[Color]> = cands.iter().map(|&s| self.secrets[s as usize].pegs()).collect();
        let rows = color_rows(&codes, p, width);
        let row = |k: usize| &rows[k * p..(k + 1) * p];
        let joker = self.spec.joker().map(|j| j as usize);
        let bits = self.member_bits(cands);

        let mut dead = 0u64;
        for k in 0..width {
            if Some(k) != joker && row(k).iter().all(|&x| x == 0) {
                dead |= 1 << k;
            }
        }

        let mut class_of = [u8::MAX; MAX_COLORS];
        let mut classes: Vec<Vec<Color>> = Vec::new();
        if dead != 0 {
            let members: Vec<Color> = (0..width as Color).filter(|&k| dead & (1 << k) != 0).collect();
            for &k in &members {
                class_of[k as usize] = 0;
            }
            classes.push(members);
        }
        for k in 0..width {
            if dead & (1 << k) != 0 {
                continue;
            }
            if Some(k) != joker {
                let found = classes.iter().position(|cl| {
                    let r = cl[0] as usize;
                    dead & (1 << r) == 0
                        && Some(r) != joker
                        && row(r) == row(k)
                        && self.swap_preserves(&codes, &bits, r as Color, k as Color)
                });
                if let Some(ci) = found {
                    classes[ci].push(k as Color);
                    class_of[k] = ci as u8;
                    continue;
                }
            }
            class_of[k] = classes.len() as u8;
            classes.push(vec![k as Color]);
        }

        let mut generators = Vec::new();
        let mut by_row: HashMap<&[u32], Vec<Color>> = HashMap::new();
        for k in 0..width {
            if dead & (1 << k) == 0 && Some(k) != joker {
                by_row.entry(row(k)).or_default().push(k as Color);
            }
        }
        'perm: for perm in &self.generator_perms {
            let mut colors = [0 as Color; MAX_COLORS];
            for (k, c) in colors.iter_mut().enumerate() {
                *c = k as Color;
            }
            let mut image = vec![0u32; p];
            for (r, group) in &by_row {
                for i in 0..p {
                    image[perm[i]] = r[i];
                }
                let Some(target) = by_row.get(image.as_slice()) else {
                    continue 'perm;
                };
                if target.len() != group.len() {
                    continue 'perm;
                }
                for (a, b) in group.iter().zip(target) {
                    colors[*a as usize] = *b;
                }
            }
            let mut positions = [0u8; MAX_PEGS];
            for i in 0..p {
                positions[i] = perm[i] as u8;
            }
            let g = Generator { positions, colors };
            let mut buf = [0 as Color; MAX_PEGS];
            let ok = codes.iter().all(|s| {
                g.apply(s, &mut buf);
                Self::is_member(&bits, self.lookup(&buf[..p]))
            });
            if ok {
                generators.push(g);
            }
        }

        NodeSymmetry {
            class_of,
            classes,
            dead,
            generators,
        }
    }

    fn swap_preserves(&self, codes: &[&[Color]], bits: &[u64], a: Color, b: Color) -> bool {
        let mut buf = [0 as Color; MAX_PEGS];
        for s in codes {
            if !s.contains(&a) && !s.contains(&b) {
                continue;
            }
            for (i, &k) in s.iter().enumerate() {
                buf[i] = if k == a {
                    b
                } else if k == b {
                    a
                } else {
                    k
                };
            }
            if !Self::is_member(bits, self.lookup(&buf[..s.len()])) {
                return false;
            }
        }
        true
    }

    /// One representative question per detected symmetry orbit, ascending.
    fn canonical_questions(&self, sym: &NodeSymmetry) -> Vec<Question> {
        let mut out = Vec::new();
        let mut buf = [0 as Color; MAX_PEGS];
        self.gen_questions(sym, 0, &mut buf, 0, &mut out);
        if sym.generators.is_empty() {
            return out;
        }
        let p = self.p;
        out.retain(|q| {
            let mut img = [0 as Color; MAX_PEGS];
            sym.generators.iter().all(|g| {
                g.apply(&q[..p], &mut img);
                let canon = self.class_canonical(sym, &img[..p]);
                q[..p] <= canon[..p]
            })
        });
        out
    }

    fn gen_questions(
        &self,
        sym: &NodeSymmetry,
        at: usize,
        buf: &mut Question,
        used: u64,
        out: &mut Vec<Question>,
    ) {
        let p = self.p;
        if at == p {
            if let Some(j) = self.spec.joker() {
                if buf[..p].iter().all(|&k| k == j) {
                    return;
                }
            }
            out.push(*buf);
            return;
        }
        let joker = self.spec.joker();
        let extended = self.spec.policy == QuestionPolicy::Extended;
        for k in 0..self.width as Color {
            let is_used = used & (1 << k) != 0;
            if Some(k) == joker {
                buf[at] = k;
                self.gen_questions(sym, at + 1, buf, used, out);
                continue;
            }
            if is_used && !extended {
                continue;
            }
            if sym.is_dead(k) {
                match self.spec.policy {
                    // a dead color answers exactly like the joker
                    QuestionPolicy::Joker => continue,
                    // any dead color answers like any other, repeats allowed
                    QuestionPolicy::Extended => {
                        if Some(k) != sym.dead_min() {
                            continue;
                        }
                    }
                    QuestionPolicy::Distinct => {
                        if !self.first_unused_in_class(sym, k, used) {
                            continue;
                        }
                    }
                }
            } else if !is_used && sym.class_size(k) > 1 && !self.first_unused_in_class(sym, k, used) {
                continue;
            }
            buf[at] = k;
            self.gen_questions(sym, at + 1, buf, used | (1 << k), out);
        }
    }

    fn first_unused_in_class(&self, sym: &NodeSymmetry, k: Color, used: u64) -> bool {
        let cl = &sym.classes[sym.class_of[k as usize] as usize];
        cl.iter().find(|&&m| used & (1 << m) == 0) == Some(&k)
    }

    /// Lexicographically least image of `q` under relabeling within classes.
    fn class_canonical(&self, sym: &NodeSymmetry, q: &[Color]) -> Question {
        let mut out = [0 as Color; MAX_PEGS];
        let mut next = vec![0usize; sym.classes.len()];
        let mut map = [u8::MAX; MAX_COLORS];
        let extended = self.spec.policy == QuestionPolicy::Extended;
        for (i, &k) in q.iter().enumerate() {
            out[i] = if Some(k) == self.spec.joker() {
                k
            } else if extended && sym.is_dead(k) {
                sym.dead_min().unwrap()
            } else if sym.class_size(k) > 1 {
                if map[k as usize] == u8::MAX {
                    let ci = sym.class_of[k as usize] as usize;
                    map[k as usize] = sym.classes[ci][next[ci]];
                    next[ci] += 1;
                }
                map[k as usize]
            } else {
                k
            };
        }
        out
    }

    /// Symmetry-reduced form of a candidate set: the least, over position
    /// permutations, of the sorted codes after relabeling colors by their
    /// occurrence profile. Equal keys imply the sets are images of each
    /// other under a color/position relabeling, hence equally hard.
    fn canonical_key_indices(&self, cands: &[u32]) -> Box<[u64]> {
        let codes: Vec<&[Color]> = cands.iter().map(|&s| self.secrets[s as usize].pegs()).collect();
        canonical_key_of(&codes, self.p, self.width, &self.key_perms)
    }

    // ---- public helpers over codes --------------------------------------

    /// Symmetry-reduced key of an arbitrary candidate list for this game.
    pub fn canonical_key(&self, cands: &[Code]) -> Vec<u64> {
        let codes: Vec<&[Color]> = cands.iter().map(|c| c.pegs()).collect();
        canonical_key_of(&codes, self.p, self.width, &self.key_perms).into_vec()
    }

    /// Questions searched at the node `cands` (one per detected orbit).
    pub fn reduced_questions(&self, cands: &[Code]) -> Vec<Code> {
        let idx: Vec<u32> = cands.iter().map(|c| self.lookup(c.pegs())).collect();
        assert!(idx.iter().all(|&i| i != NO_INDEX), "candidate outside the secret set");
        let sym = self.node_symmetry(&idx);
        self.canonical_questions(&sym)
            .iter()
            .map(|q| Code::from_slice(&q[..self.p]))
            .collect()
    }
}

fn pack_index(pegs: &[Color], width: usize) -> usize {
    pegs.iter().fold(0usize, |acc, &k| acc * width + k as usize)
}

fn canonical_key_of(codes: &[&[Color]], p: usize, width: usize, perms: &[Vec<usize>]) -> Box<[u64]> {
    let rows = color_rows(codes, p, width);
    let mut best: Option<Vec<u64>> = None;
    let mut permuted = vec![0u32; width * p];
    let mut order: Vec<usize> = Vec::with_capacity(width);
    let mut relabel = vec![0u64; width];
    let mut packed: Vec<u64> = Vec::with_capacity(codes.len());
    for perm in perms {
        for k in 0..width {
            for i in 0..p {
                permuted[k * p + perm[i]] = rows[k * p + i];
            }
        }
        order.clear();
        order.extend((0..width).filter(|&k| permuted[k * p..(k + 1) * p].iter().any(|&x| x > 0)));
        order.sort_by(|&a, &b| {
            permuted[b * p..(b + 1) * p]
                .cmp(&permuted[a * p..(a + 1) * p])
                .then(a.cmp(&b))
        });
        for (rank, &k) in order.iter().enumerate() {
            relabel[k] = rank as u64;
        }
        packed.clear();
        for s in codes {
            let mut out = [0u64; MAX_PEGS];
            for (i, &k) in s.iter().enumerate() {
                out[perm[i]] = relabel[k as usize];
            }
            packed.push(out[..p].iter().fold(0u64, |acc, &k| (acc << 5) | k));
        }
        packed.sort_unstable();
        if best.as_ref().is_none_or(|b| packed < *b) {
            best = Some(packed.clone());
        }
    }
    best.unwrap_or_default().into_boxed_slice()
}

/// Secrets of `candidates` whose grade against `question` equals `answer`.
pub fn filter(candidates: &[Code], question: &Code, answer: Feedback, spec: &GameSpec) -> Vec<Code> {
    candidates
        .iter()
        .filter(|s| grade_unchecked(question, s, spec.mode) == answer)
        .copied()
        .collect()
}

/// Answer classes of `question` over `candidates`, sorted by answer.
pub fn partition_signature(question: &Code, candidates: &[Code], spec: &GameSpec) -> Vec<(Feedback, usize)> {
    let mut classes: std::collections::BTreeMap<Feedback, usize> = Default::default();
    for s in candidates {
        *classes.entry(grade_unchecked(question, s, spec.mode)).or_default() += 1;
    }
    classes.into_iter().collect()
}

/// Secrets resolvable within `q` questions when each question has at most
/// `fanout` non-winning answers: `sum_{i<q} fanout^i` (saturating).
pub fn resolvable_secrets(fanout: u64, q: usize) -> u64 {
    let mut total = 0u64;
    let mut term = 1u64;
    for _ in 0..q {
        total = total.saturating_add(term);
        term = term.saturating_mul(fanout);
    }
    total
}

/// Fewest questions that can possibly resolve `n` candidates under `spec`.
pub fn depth_lower_bound(n: u64, spec: &GameSpec) -> usize {
    let fanout = spec.answer_fanout() as u64;
    let mut q = 0;
    while resolvable_secrets(fanout, q) < n {
        q += 1;
        if fanout <= 1 && q as u64 >= n {
            break;
        }
    }
    q
}

/// Solves `spec` exactly if its value is at most `budget`.
pub fn solve_exact(spec: GameSpec, budget: usize) -> Result<SolveResult> {
    Solver::new(spec)?.solve_exact(budget)
}

pub fn prove_upper(spec: GameSpec, q: usize) -> Result<SolveResult> {
    Solver::new(spec)?.prove_upper(q)
}

pub fn prove_lower(spec: GameSpec, q: usize) -> Result<bool> {
    Solver::new(spec)?.prove_lower(q)
}

/// Symmetry-reduced key of `candidates` under color relabeling (joker fixed)
/// and simultaneous position permutation.
pub fn canonical_key(candidates: &[Code], spec: &GameSpec) -> Vec<u64> {
    let codes: Vec<&[Color]> = candidates.iter().map(|c| c.pegs()).collect();
    let perms = if spec.pegs <= 4 {
        permutations(spec.pegs)
    } else {
        vec![(0..spec.pegs).collect()]
    };
    canonical_key_of(&codes, spec.pegs, spec.question_colors(), &perms).into_vec()
}
