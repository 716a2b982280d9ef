//! Codes, grading and code enumeration for every game variant.
//!
//! Colors are dense integers `0..c`. The joker color used by the
//! [`QuestionPolicy::Joker`] variant is represented by the value `c`, one past
//! the last real color, and prints as `J`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest peg count supported by the fixed-size [`Code`] representation.
pub const MAX_PEGS: usize = 8;

/// Largest color count (including a joker or a dead question color).
pub const MAX_COLORS: usize = 32;

pub type Color = u8;

/// An ordered tuple of colors, used both for secrets and for questions.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Code {
    len: u8,
    pegs: [Color; MAX_PEGS],
}

impl Code {
    pub fn new(pegs: &[Color]) -> Result<Self> {
        if pegs.is_empty() || pegs.len() > MAX_PEGS {
            return Err(Error::InvalidCode(format!(
                "length {} outside 1..={MAX_PEGS}",
                pegs.len()
            )));
        }
        let mut arr = [0; MAX_PEGS];
        arr[..pegs.len()].copy_from_slice(pegs);
        Ok(Self {
            len: pegs.len() as u8,
            pegs: arr,
        })
    }

    /// Builds a code from a slice known to be short enough.
    pub(crate) fn from_slice(pegs: &[Color]) -> Self {
        debug_assert!(!pegs.is_empty() && pegs.len() <= MAX_PEGS);
        let mut arr = [0; MAX_PEGS];
        arr[..pegs.len()].copy_from_slice(pegs);
        Self {
            len: pegs.len() as u8,
            pegs: arr,
        }
    }

    pub fn pegs(&self) -> &[Color] {
        &self.pegs[..self.len as usize]
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn contains(&self, color: Color) -> bool {
        self.pegs().contains(&color)
    }

    pub fn has_distinct_colors(&self) -> bool {
        let mut seen = 0u64;
        for &k in self.pegs() {
            if seen & (1 << k) != 0 {
                return false;
            }
            seen |= 1 << k;
        }
        true
    }

    /// Applies a color relabeling `k -> map[k]` to every peg.
    pub fn map_colors(&self, map: &[Color]) -> Self {
        let mut out = *self;
        for k in out.pegs[..self.len as usize].iter_mut() {
            *k = map[*k as usize];
        }
        out
    }

    /// Moves the peg at position `i` to position `perm[i]`.
    pub fn permute_positions(&self, perm: &[usize]) -> Self {
        let mut out = *self;
        for (i, &k) in self.pegs().iter().enumerate() {
            out.pegs[perm[i]] = k;
        }
        out
    }

    /// Renders the code, printing `joker` (if any) as `J`.
    pub fn display_with_joker(&self, joker: Option<Color>) -> String {
        let parts: Vec<String> = self
            .pegs()
            .iter()
            .map(|&k| {
                if Some(k) == joker {
                    "J".to_string()
                } else {
                    k.to_string()
                }
            })
            .collect();
        format!("({})", parts.join(","))
    }

    /// Parses `(0,1,2)`; `J` is replaced by `joker`.
    pub fn parse_with_joker(s: &str, joker: Option<Color>) -> Result<Self> {
        let inner = s
            .trim()
            .strip_prefix('(')
            .and_then(|t| t.strip_suffix(')'))
            .ok_or_else(|| Error::Parse(format!("code must be parenthesised: {s:?}")))?;
        let mut pegs = Vec::new();
        for tok in inner.split(',') {
            let tok = tok.trim();
            if tok == "J" {
                let j = joker.ok_or_else(|| Error::Parse("joker not allowed here".into()))?;
                pegs.push(j);
            } else {
                let k: Color = tok
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad color {tok:?} in {s:?}")))?;
                pegs.push(k);
            }
        }
        Self::new(&pegs)
    }
}

impl fmt::Display for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with_joker(None))
    }
}

impl fmt::Debug for Code {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Code {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_with_joker(s, None)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FeedbackMode {
    BlackWhite,
    BlackOnly,
}

/// Which questions the codebreaker may ask.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuestionPolicy {
    /// `p` pairwise-distinct colors from `0..c`.
    Distinct,
    /// Colors `0..=c`, where `c` is a joker that may repeat and never occurs
    /// in a secret. The all-joker question is excluded.
    Joker,
    /// Any `p`-tuple over `0..c`, repeats allowed.
    Extended,
}

/// The answer to a question: black pegs and, in black-white mode, white pegs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Feedback {
    pub black: u8,
    pub white: Option<u8>,
}

impl Feedback {
    pub fn black_white(black: u8, white: u8) -> Self {
        Self {
            black,
            white: Some(white),
        }
    }

    pub fn black_only(black: u8) -> Self {
        Self { black, white: None }
    }

    pub fn is_win(&self, pegs: usize) -> bool {
        self.black as usize == pegs
    }
}

impl fmt::Display for Feedback {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.white {
            Some(w) => write!(f, "({},{})", self.black, w),
            None => write!(f, "{}", self.black),
        }
    }
}

impl FromStr for Feedback {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Parse(format!("bad feedback {s:?}"));
        if let Some(inner) = s.strip_prefix('(').and_then(|t| t.strip_suffix(')')) {
            let (b, w) = inner.split_once(',').ok_or_else(bad)?;
            Ok(Self::black_white(
                b.trim().parse().map_err(|_| bad())?,
                w.trim().parse().map_err(|_| bad())?,
            ))
        } else {
            Ok(Self::black_only(s.parse().map_err(|_| bad())?))
        }
    }
}

/// Parameters of one game variant.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GameSpec {
    pub pegs: usize,
    pub colors: usize,
    pub mode: FeedbackMode,
    pub policy: QuestionPolicy,
    /// Number of fixed opening questions (`x` of `AB^*(p,c,x)`), 0 if unused.
    pub opening: usize,
}

impl GameSpec {
    /// `AB(p,c)`.
    pub fn ab(pegs: usize, colors: usize) -> Self {
        Self {
            pegs,
            colors,
            mode: FeedbackMode::BlackWhite,
            policy: QuestionPolicy::Distinct,
            opening: 0,
        }
    }

    /// `ABB(p,c)`.
    pub fn abb(pegs: usize, colors: usize) -> Self {
        Self {
            mode: FeedbackMode::BlackOnly,
            ..Self::ab(pegs, colors)
        }
    }

    /// `AB_*(p,c)`: one extra joker color in questions.
    pub fn ab_joker(pegs: usize, colors: usize) -> Self {
        Self {
            policy: QuestionPolicy::Joker,
            ..Self::ab(pegs, colors)
        }
    }

    /// `AB^*(p,c,x)`: the first `x` questions are fixed.
    pub fn ab_fixed(pegs: usize, colors: usize, opening: usize) -> Self {
        Self {
            opening,
            ..Self::ab(pegs, colors)
        }
    }

    /// Black-only game over `colors` question colors with unrestricted
    /// questions, as used for end-game states.
    pub fn endgame(pegs: usize, colors: usize) -> Self {
        Self {
            pegs,
            colors,
            mode: FeedbackMode::BlackOnly,
            policy: QuestionPolicy::Extended,
            opening: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let p = self.pegs;
        let c = self.colors;
        if p == 0 || p > MAX_PEGS {
            return Err(Error::InvalidSpec(format!("pegs {p} outside 1..={MAX_PEGS}")));
        }
        if c < p {
            return Err(Error::InvalidSpec(format!("colors {c} < pegs {p}")));
        }
        if c + 1 > MAX_COLORS {
            return Err(Error::InvalidSpec(format!("colors {c} exceed {}", MAX_COLORS - 1)));
        }
        if self.opening > 0 && p * self.opening > c {
            return Err(Error::InvalidSpec(format!(
                "opening of {} questions needs {} colors, only {c} available",
                self.opening,
                p * self.opening
            )));
        }
        Ok(())
    }

    pub fn joker(&self) -> Option<Color> {
        (self.policy == QuestionPolicy::Joker).then_some(self.colors as Color)
    }

    /// Number of distinct colors a question may contain (the joker included).
    pub fn question_colors(&self) -> usize {
        match self.policy {
            QuestionPolicy::Joker => self.colors + 1,
            _ => self.colors,
        }
    }

    /// Answer reported for a winning question.
    pub fn win(&self) -> Feedback {
        match self.mode {
            FeedbackMode::BlackWhite => Feedback::black_white(self.pegs as u8, 0),
            FeedbackMode::BlackOnly => Feedback::black_only(self.pegs as u8),
        }
    }

    pub fn format_code(&self, code: &Code) -> String {
        code.display_with_joker(self.joker())
    }

    pub fn parse_code(&self, s: &str) -> Result<Code> {
        Code::parse_with_joker(s, self.joker())
    }

    /// Checks that `code` is a legal secret: right length, colors in range,
    /// pairwise distinct, no joker.
    pub fn check_secret(&self, code: &Code) -> Result<()> {
        self.check_len(code)?;
        if let Some(&k) = code.pegs().iter().find(|&&k| k as usize >= self.colors) {
            return Err(Error::InvalidCode(format!("secret color {k} out of range")));
        }
        if !code.has_distinct_colors() {
            return Err(Error::InvalidCode(format!("secret {code} repeats a color")));
        }
        Ok(())
    }

    /// Checks that `code` is a legal question under the spec's policy.
    pub fn check_question(&self, code: &Code) -> Result<()> {
        self.check_len(code)?;
        let limit = self.question_colors();
        if let Some(&k) = code.pegs().iter().find(|&&k| k as usize >= limit) {
            return Err(Error::InvalidCode(format!("question color {k} out of range")));
        }
        match self.policy {
            QuestionPolicy::Distinct => {
                if !code.has_distinct_colors() {
                    return Err(Error::InvalidCode(format!("question {code} repeats a color")));
                }
            }
            QuestionPolicy::Joker => {
                let joker = self.colors as Color;
                let mut seen = 0u64;
                let mut jokers = 0;
                for &k in code.pegs() {
                    if k == joker {
                        jokers += 1;
                    } else if seen & (1 << k) != 0 {
                        return Err(Error::InvalidCode(format!(
                            "question {} repeats color {k}",
                            self.format_code(code)
                        )));
                    } else {
                        seen |= 1 << k;
                    }
                }
                if jokers == self.pegs {
                    return Err(Error::InvalidCode("all-joker question".into()));
                }
            }
            QuestionPolicy::Extended => {}
        }
        Ok(())
    }

    fn check_len(&self, code: &Code) -> Result<()> {
        if code.len() != self.pegs {
            return Err(Error::InvalidCode(format!(
                "code {code} has {} pegs, expected {}",
                code.len(),
                self.pegs
            )));
        }
        Ok(())
    }

    /// Number of non-winning answers a single question can receive. Used as
    /// the branching factor of the counting bound, so it never undercounts.
    pub fn answer_fanout(&self) -> usize {
        let p = self.pegs;
        let c = self.colors;
        let distinct = self.policy == QuestionPolicy::Distinct;
        match self.mode {
            FeedbackMode::BlackOnly => {
                if distinct && c == p {
                    p - 1
                } else {
                    p
                }
            }
            FeedbackMode::BlackWhite => {
                // b + w is at least the forced overlap of two p-subsets of c colors
                let min_sum = if distinct { (2 * p).saturating_sub(c) } else { 0 };
                let mut n = 0;
                for b in 0..=p {
                    for w in 0..=(p - b) {
                        if b + w < min_sum || b == p || (b == p - 1 && w == 1) {
                            continue;
                        }
                        n += 1;
                    }
                }
                n
            }
        }
    }
}

/// Grades `question` against `secret`.
///
/// Black pegs count position-and-color matches; white pegs count the
/// remaining color matches. Both codes are validated against `spec`.
pub fn grade(question: &Code, secret: &Code, spec: &GameSpec) -> Result<Feedback> {
    spec.check_question(question)?;
    spec.check_secret(secret)?;
    Ok(grade_unchecked(question, secret, spec.mode))
}

pub(crate) fn grade_unchecked(question: &Code, secret: &Code, mode: FeedbackMode) -> Feedback {
    let q = question.pegs();
    let s = secret.pegs();
    let black = q.iter().zip(s).filter(|(a, b)| a == b).count() as u8;
    match mode {
        FeedbackMode::BlackOnly => Feedback::black_only(black),
        FeedbackMode::BlackWhite => {
            // secrets never repeat a color, so each secret color matches at most once
            let common = s.iter().filter(|k| q.contains(k)).count() as u8;
            Feedback::black_white(black, common - black)
        }
    }
}

/// All secrets: distinct-color `p`-tuples over `0..c`, in lexicographic order.
pub fn enumerate_secrets(spec: &GameSpec) -> Result<Vec<Code>> {
    spec.validate()?;
    let mut out = Vec::new();
    let mut buf = Vec::with_capacity(spec.pegs);
    distinct_tuples(spec.pegs, spec.colors, &mut buf, 0, &mut out);
    Ok(out)
}

fn distinct_tuples(p: usize, c: usize, buf: &mut Vec<Color>, used: u64, out: &mut Vec<Code>) {
    if buf.len() == p {
        out.push(Code::from_slice(buf));
        return;
    }
    for k in 0..c {
        if used & (1 << k) == 0 {
            buf.push(k as Color);
            distinct_tuples(p, c, buf, used | (1 << k), out);
            buf.pop();
        }
    }
}

/// All questions the policy allows, in lexicographic order.
pub fn enumerate_questions(spec: &GameSpec) -> Result<Vec<Code>> {
    spec.validate()?;
    let p = spec.pegs;
    let mut out = Vec::new();
    match spec.policy {
        QuestionPolicy::Distinct => {
            let mut buf = Vec::with_capacity(p);
            distinct_tuples(p, spec.colors, &mut buf, 0, &mut out);
        }
        QuestionPolicy::Joker => {
            let joker = spec.colors as Color;
            let all = spec.colors + 1;
            for_each_tuple(p, all, |t| {
                let code = Code::from_slice(t);
                let mut seen = 0u64;
                let mut ok = !t.iter().all(|&k| k == joker);
                for &k in t {
                    if k != joker {
                        ok &= seen & (1 << k) == 0;
                        seen |= 1 << k;
                    }
                }
                if ok {
                    out.push(code);
                }
            });
        }
        QuestionPolicy::Extended => {
            for_each_tuple(p, spec.colors, |t| out.push(Code::from_slice(t)));
        }
    }
    Ok(out)
}

fn for_each_tuple(p: usize, base: usize, mut f: impl FnMut(&[Color])) {
    let mut t = vec![0 as Color; p];
    loop {
        f(&t);
        let mut i = p;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            t[i] += 1;
            if (t[i] as usize) < base {
                break;
            }
            t[i] = 0;
        }
    }
}

/// The fixed opening of `AB^*(p,c,x)`: question `k` is
/// `(pk, pk+1, ..., pk+p-1)` for `k = 0..x`.
pub fn fixed_opening_questions(spec: &GameSpec) -> Result<Vec<Code>> {
    spec.validate()?;
    let p = spec.pegs;
    Ok((0..spec.opening)
        .map(|k| {
            let pegs: Vec<Color> = (0..p).map(|i| (p * k + i) as Color).collect();
            Code::from_slice(&pegs)
        })
        .collect())
}

/// Falling factorial `c (c-1) ... (c-p+1)`.
pub fn falling_factorial(c: usize, p: usize) -> u64 {
    (0..p).map(|i| (c - i) as u64).product()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn code(s: &str) -> Code {
        s.parse().unwrap()
    }

    #[test]
    fn grade_examples() {
        let s4 = GameSpec::ab(4, 4);
        assert_eq!(
            grade(&code("(0,1,2,3)"), &code("(0,1,2,3)"), &s4).unwrap(),
            Feedback::black_white(4, 0)
        );
        let s = GameSpec::ab(3, 9);
        assert_eq!(
            grade(&code("(3,4,5)"), &code("(0,1,2)"), &s).unwrap(),
            Feedback::black_white(0, 0)
        );
        assert_eq!(
            grade(&code("(1,0,2)"), &code("(0,1,2)"), &s).unwrap(),
            Feedback::black_white(1, 2)
        );
        let s = GameSpec::ab(2, 3);
        assert_eq!(
            grade(&code("(0,2)"), &code("(0,1)"), &s).unwrap(),
            Feedback::black_white(1, 0)
        );
    }

    #[test]
    fn grade_black_only_drops_white() {
        let s = GameSpec::abb(3, 9);
        assert_eq!(
            grade(&code("(1,0,2)"), &code("(0,1,2)"), &s).unwrap(),
            Feedback::black_only(1)
        );
    }

    #[test]
    fn grade_rejects_invalid_codes() {
        let s = GameSpec::ab(3, 5);
        assert!(grade(&code("(0,1)"), &code("(0,1,2)"), &s).is_err());
        assert!(grade(&code("(0,1,5)"), &code("(0,1,2)"), &s).is_err());
        assert!(grade(&code("(0,0,1)"), &code("(0,1,2)"), &s).is_err());
        assert!(grade(&code("(0,1,2)"), &code("(1,1,2)"), &s).is_err());
        // joker is not a legal secret color
        let j = GameSpec::ab_joker(3, 5);
        assert!(grade(&code("(0,1,2)"), &code("(0,1,5)"), &j).is_err());
        assert!(grade(&code("(5,5,5)"), &code("(0,1,2)"), &j).is_err());
        assert!(grade(&code("(5,5,1)"), &code("(0,1,2)"), &j).is_ok());
    }

    #[test]
    fn joker_never_matches() {
        let s = GameSpec::ab_joker(3, 4);
        let q = s.parse_code("(J,J,2)").unwrap();
        assert_eq!(
            grade(&q, &code("(2,1,0)"), &s).unwrap(),
            Feedback::black_white(0, 1)
        );
        assert_eq!(s.format_code(&q), "(J,J,2)");
    }

    #[test]
    fn secret_counts() {
        let two = enumerate_secrets(&GameSpec::ab(2, 2)).unwrap();
        assert_eq!(two, vec![code("(0,1)"), code("(1,0)")]);
        assert_eq!(enumerate_secrets(&GameSpec::ab(4, 4)).unwrap().len(), 24);
        assert_eq!(enumerate_secrets(&GameSpec::ab(3, 9)).unwrap().len(), 504);
        for p in 1..=4 {
            for c in p..=13 {
                let n = enumerate_secrets(&GameSpec::ab(p, c)).unwrap().len() as u64;
                assert_eq!(n, falling_factorial(c, p), "p={p} c={c}");
            }
        }
    }

    #[test]
    fn question_counts() {
        assert_eq!(enumerate_questions(&GameSpec::ab(2, 2)).unwrap().len(), 2);
        assert_eq!(enumerate_questions(&GameSpec::endgame(3, 6)).unwrap().len(), 216);
        // joker, p=2, c=3: brute force over {0,1,2,J}^2 versus direct count.
        let spec = GameSpec::ab_joker(2, 3);
        let qs = enumerate_questions(&spec).unwrap();
        let brute = (0..4u8)
            .flat_map(|a| (0..4u8).map(move |b| [a, b]))
            .filter(|t| spec.check_question(&Code::from_slice(t)).is_ok())
            .count();
        // m real colors in ordered positions: sum_m C(p,m) * c!/(c-m)!, minus all-joker
        let direct = 1 + 2 * 3 + 6 - 1;
        assert_eq!(qs.len(), brute);
        assert_eq!(qs.len(), direct);
        assert_eq!(qs.len(), 12);
        let mut sorted = qs.clone();
        sorted.sort();
        assert_eq!(sorted, qs);
    }

    #[test]
    fn opening_questions() {
        let q = fixed_opening_questions(&GameSpec::ab_fixed(2, 5, 2)).unwrap();
        assert_eq!(q, vec![code("(0,1)"), code("(2,3)")]);
        let q = fixed_opening_questions(&GameSpec::ab_fixed(3, 14, 3)).unwrap();
        assert_eq!(q, vec![code("(0,1,2)"), code("(3,4,5)"), code("(6,7,8)")]);
        assert!(fixed_opening_questions(&GameSpec::ab(3, 5)).unwrap().is_empty());
        assert!(fixed_opening_questions(&GameSpec::ab_fixed(3, 8, 3)).is_err());
    }

    #[test]
    fn code_text_round_trip() {
        let s = GameSpec::ab_joker(3, 7);
        let c = s.parse_code("(0, J,6)").unwrap();
        assert_eq!(s.format_code(&c), "(0,J,6)");
        assert!("0,1".parse::<Code>().is_err());
        assert!("(0,x)".parse::<Code>().is_err());
        assert_eq!("(1,2)".parse::<Feedback>().unwrap(), Feedback::black_white(1, 2));
        assert_eq!("3".parse::<Feedback>().unwrap(), Feedback::black_only(3));
    }

    #[test]
    fn fanout() {
        assert_eq!(GameSpec::abb(4, 4).answer_fanout(), 3);
        assert_eq!(GameSpec::ab(4, 4).answer_fanout(), 3);
        assert_eq!(GameSpec::ab(2, 9).answer_fanout(), 4);
        assert_eq!(GameSpec::ab(4, 10).answer_fanout(), 13);
    }
}
