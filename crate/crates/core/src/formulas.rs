//! Closed-form values and bounds for `ab(p,c)` and `abb(p,c)`, and the
//! counting lower bound for `ab(p,p)`.
//!
//! All floors and ceilings are exact integer arithmetic; only
//! [`stirling_lower`] returns a float, and it is informational.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundKind {
    Exact,
    Lower,
    Upper,
}

/// A one-sided or exact bound on a worst-case question count.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BoundValue {
    pub kind: BoundKind,
    pub value: usize,
    pub source: &'static str,
}

impl BoundValue {
    pub fn holds_for(&self, actual: usize) -> bool {
        match self.kind {
            BoundKind::Exact => actual == self.value,
            BoundKind::Lower => actual >= self.value,
            BoundKind::Upper => actual <= self.value,
        }
    }
}

/// Closed interval known to contain a worst-case value.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Interval {
    pub lower: usize,
    pub upper: usize,
    pub source: &'static str,
}

impl Interval {
    fn exact(value: usize, source: &'static str) -> Self {
        Self {
            lower: value,
            upper: value,
            source,
        }
    }

    fn range(lower: usize, upper: usize, source: &'static str) -> Self {
        debug_assert!(lower <= upper);
        Self { lower, upper, source }
    }

    pub fn is_exact(&self) -> bool {
        self.lower == self.upper
    }

    pub fn contains(&self, v: usize) -> bool {
        self.lower <= v && v <= self.upper
    }

    pub fn lower_bound(&self) -> BoundValue {
        BoundValue {
            kind: if self.is_exact() { BoundKind::Exact } else { BoundKind::Lower },
            value: self.lower,
            source: self.source,
        }
    }

    pub fn upper_bound(&self) -> BoundValue {
        BoundValue {
            kind: if self.is_exact() { BoundKind::Exact } else { BoundKind::Upper },
            value: self.upper,
            source: self.source,
        }
    }
}

/// `ab(2,c) = ceil(c/2) + 1`; `ab(3,c) = floor(c/3) + 3` for `c <= 7`,
/// `floor((c+1)/3) + 3` beyond.
pub fn ab_formula(p: usize, c: usize) -> Result<Interval> {
    if c < p {
        return Err(Error::InvalidArgument(format!("c={c} < p={p}")));
    }
    match p {
        2 => Ok(Interval::exact(c.div_ceil(2) + 1, "ab2")),
        3 if c <= 7 => Ok(Interval::exact(c / 3 + 3, "ab3")),
        3 => Ok(Interval::exact((c + 1) / 3 + 3, "ab3")),
        _ => Err(Error::InvalidArgument(format!("no closed form for p={p}"))),
    }
}

/// Value or bracket for `ab(4,c)`.
pub fn ab4_bounds(c: usize) -> Result<Interval> {
    match c {
        0..=3 => Err(Error::InvalidArgument(format!("c={c} < 4"))),
        4..=11 => Ok(Interval::exact(c.div_ceil(3) + 3, "ab4-exact")),
        12 | 13 => Ok(Interval::exact(8, "ab4-exact")),
        _ => Ok(Interval::range(c.div_ceil(4) + 4, c.div_ceil(4) + 5, "ab4-bounds")),
    }
}

/// Any of the above for `p` in 2..=4.
pub fn ab_bounds(p: usize, c: usize) -> Result<Interval> {
    if p == 4 {
        ab4_bounds(c)
    } else {
        ab_formula(p, c)
    }
}

/// `abb(2,c) = c`, `abb(3,c) = c+1`, `c+1 <= abb(4,c) <= c+1` (`c <= 10`)
/// or `c+2` (`c >= 11`).
pub fn abb_bounds(p: usize, c: usize) -> Result<Interval> {
    if c < p {
        return Err(Error::InvalidArgument(format!("c={c} < p={p}")));
    }
    match p {
        2 => Ok(Interval::exact(c, "abb2")),
        3 => Ok(Interval::exact(c + 1, "abb3")),
        4 if c <= 10 => Ok(Interval::exact(c + 1, "abb4")),
        4 => Ok(Interval::range(c + 1, c + 2, "abb4")),
        _ => Err(Error::InvalidArgument(format!("no bounds for p={p}"))),
    }
}

/// Lower bound `ab(p,c) >= floor((c-c0)/p) + ab_*(p,c0)`.
pub fn chain_lower(p: usize, c: usize, c0: usize, base: usize) -> Result<BoundValue> {
    if c < c0 || p == 0 {
        return Err(Error::InvalidArgument(format!("need c >= c0, got c={c} c0={c0}")));
    }
    Ok(BoundValue {
        kind: BoundKind::Lower,
        value: (c - c0) / p + base,
        source: "chain-lower",
    })
}

/// Upper bound `ab(p,px+m) <= x - p + ab^*(p,p^2+m,p)` for `x >= p`.
pub fn chain_upper(p: usize, x: usize, m: usize, base: usize) -> Result<(usize, BoundValue)> {
    if x < p {
        return Err(Error::InvalidArgument(format!("need x >= p, got x={x} p={p}")));
    }
    let _ = m;
    Ok((
        p * x + m,
        BoundValue {
            kind: BoundKind::Upper,
            value: x - p + base,
            source: "chain-upper",
        },
    ))
}

/// Secrets resolvable within `q` questions when `p = c`:
/// `T(p,q) = sum_{i<q} (p-1)^i`, with `T(2,q) = q`.
pub fn counting_bound(p: usize, q: usize) -> Result<u128> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("p={p} < 2")));
    }
    let base = (p - 1) as u128;
    let mut total = 0u128;
    let mut term = 1u128;
    for _ in 0..q {
        total = total.saturating_add(term);
        term = term.saturating_mul(base);
    }
    Ok(total)
}

/// Smallest `q` with `p! <= T(p,q)`.
pub fn qmin(p: usize) -> Result<usize> {
    let secrets: u128 = (1..=p as u128).product();
    let mut q = 0;
    while counting_bound(p, q)? < secrets {
        q += 1;
    }
    Ok(q)
}

/// The asymptotic bound `ab(p,p) > p (1 - 1/ln p)`. Informational.
pub fn stirling_lower(p: usize) -> Result<f64> {
    if p < 3 {
        return Err(Error::InvalidArgument(format!("p={p} < 3")));
    }
    let p = p as f64;
    Ok(p * (1.0 - 1.0 / p.ln()))
}

/// One computed cell: `None` prints as a dash.
pub type Cells = BTreeMap<(usize, usize), Option<usize>>;

/// Renders `ab(p,c)` values in the layout of the computed-values table:
/// one row per `p`, one column per `c`.
pub fn render_ab_table_text(cells: &Cells) -> String {
    let cs: Vec<usize> = cells.keys().map(|&(_, c)| c).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let ps: Vec<usize> = cells.keys().map(|&(p, _)| p).collect::<std::collections::BTreeSet<_>>().into_iter().collect();
    let mut out = String::new();
    let _ = write!(out, "{:>4} |", "p\\c");
    for c in &cs {
        let _ = write!(out, "{c:>4}");
    }
    out.push('\n');
    out.push_str(&"-".repeat(6 + 4 * cs.len()));
    out.push('\n');
    for p in &ps {
        let _ = write!(out, "{p:>4} |");
        for c in &cs {
            match cells.get(&(*p, *c)) {
                Some(Some(v)) => {
                    let _ = write!(out, "{v:>4}");
                }
                Some(None) => {
                    let _ = write!(out, "{:>4}", "-");
                }
                None => out.push_str("    "),
            }
        }
        out.push('\n');
    }
    out
}

/// CSV rows `p,c,value` (empty value for missing cells).
pub fn render_ab_table_csv(cells: &Cells) -> String {
    let mut out = String::from("p,c,value\n");
    for (&(p, c), v) in cells {
        let v = v.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{p},{c},{v}");
    }
    out
}

/// The equal-pegs-and-colors table: `ab(p,p)` next to `qmin(p)`.
pub fn render_equal_table_text(values: &BTreeMap<usize, Option<usize>>) -> Result<String> {
    let mut head = format!("{:<10}|", "p");
    let mut ab = format!("{:<10}|", "ab(p,p)");
    let mut qm = format!("{:<10}|", "q_min(p)");
    for (&p, v) in values {
        let _ = write!(head, "{p:>4}");
        match v {
            Some(v) => {
                let _ = write!(ab, "{v:>4}");
            }
            None => {
                let _ = write!(ab, "{:>4}", "-");
            }
        }
        let _ = write!(qm, "{:>4}", qmin(p)?);
    }
    Ok(format!("{head}\n{ab}\n{qm}\n"))
}

pub fn render_equal_table_csv(values: &BTreeMap<usize, Option<usize>>) -> Result<String> {
    let mut out = String::from("p,ab_pp,qmin\n");
    for (&p, v) in values {
        let v = v.map(|v| v.to_string()).unwrap_or_default();
        let _ = writeln!(out, "{p},{v},{}", qmin(p)?);
    }
    Ok(out)
}
