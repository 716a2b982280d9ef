use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use abgame::endgame::{enumerate_nonreducible, lower_bound_abb, state_unsolvable_within};
use abgame::formulas::{self, Cells};
use abgame::solver::Limits;
use abgame::twophase::{verify_upper_bound, UpperMode};
use abgame::{Error, GameSpec, Result, SolveStatus, Solver};
use serde_json::json;

use crate::manifest::RunManifest;
use crate::{Format, Guards, Mode, Variant, EXIT_BUDGET, EXIT_UNVERIFIED};

// a closed pipe (`abgame ... | head`) is not an error worth a panic
macro_rules! out {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = write!(std::io::stdout().lock(), $($t)*);
    }};
}

macro_rules! outln {
    ($($t:tt)*) => {{
        use std::io::Write;
        let _ = writeln!(std::io::stdout().lock(), $($t)*);
    }};
}

pub struct Context {
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: Option<usize>,
}

impl Context {
    fn save(&self, manifest: &mut RunManifest, started: Instant, files: &[(&str, &str)]) -> Result<()> {
        let Some(dir) = &self.out else {
            return Ok(());
        };
        for (name, contents) in files {
            manifest.write_artifact(dir, name, contents)?;
        }
        manifest.finish(started);
        let path = manifest.save(dir)?;
        eprintln!("manifest: {}", path.display());
        Ok(())
    }
}

fn limits(guards: &Guards) -> Result<Limits> {
    let deadline = match guards.time_limit {
        Some(t) if !(t.is_finite() && t >= 0.0) => {
            return Err(Error::InvalidArgument(format!("bad time limit {t}")))
        }
        Some(t) => Some(Instant::now() + Duration::from_secs_f64(t)),
        None => None,
    };
    Ok(Limits {
        max_nodes: guards.max_nodes,
        deadline,
    })
}

fn game(variant: Variant, p: usize, c: usize, opening: Option<usize>) -> Result<GameSpec> {
    let spec = match variant {
        Variant::Ab => GameSpec::ab(p, c),
        Variant::Abb => GameSpec::abb(p, c),
        Variant::AbStar => GameSpec::ab_joker(p, c),
        Variant::AbFixed => {
            let x = opening.ok_or_else(|| Error::InvalidArgument("ab-fixed needs --opening".into()))?;
            GameSpec::ab_fixed(p, c, x)
        }
    };
    if variant != Variant::AbFixed && opening.is_some() {
        return Err(Error::InvalidArgument("--opening only applies to ab-fixed".into()));
    }
    spec.validate()?;
    Ok(spec)
}

fn label(variant: Variant, p: usize, c: usize, opening: Option<usize>) -> String {
    match variant {
        Variant::Ab => format!("ab({p},{c})"),
        Variant::Abb => format!("abb({p},{c})"),
        Variant::AbStar => format!("ab_*({p},{c})"),
        Variant::AbFixed => format!("ab^*({p},{c},{})", opening.unwrap_or(0)),
    }
}

fn status_name(s: SolveStatus) -> &'static str {
    match s {
        SolveStatus::Exact => "exact",
        SolveStatus::UpperBoundOnly => "upper-bound-only",
        SolveStatus::LowerBoundOnly => "lower-bound-only",
    }
}

pub fn solve(
    ctx: &Context,
    p: usize,
    c: usize,
    variant: Variant,
    opening: Option<usize>,
    budget: usize,
    guards: &Guards,
) -> Result<u8> {
    let started = Instant::now();
    let spec = game(variant, p, c, opening)?;
    let mut manifest = RunManifest::new(
        "solve",
        json!({"pegs": p, "colors": c, "variant": variant, "opening": opening,
               "budget": budget, "guards": guards, "workers": ctx.workers}),
    );
    let solver = Solver::new(spec)?.with_limits(limits(guards)?);
    let result = match solver.solve_exact(budget) {
        Err(Error::BudgetExhausted { nodes }) => {
            manifest.outcome = json!({"status": "budget-exhausted"});
            manifest.nodes = nodes;
            ctx.save(&mut manifest, started, &[])?;
            eprintln!("{}: search budget exhausted after {nodes} nodes", label(variant, p, c, opening));
            return Ok(EXIT_BUDGET);
        }
        r => r?,
    };
    let mut tree_json = None;
    if let Some(tree) = &result.tree {
        if let Err(e) = tree.replay(solver.secrets(), &spec, result.value) {
            eprintln!("strategy tree failed replay: {e}");
            return Ok(EXIT_UNVERIFIED);
        }
        tree_json = Some(tree.to_json(&spec));
    }
    let status = status_name(result.status);
    match ctx.format {
        Format::Text => {
            let rel = if result.status == SolveStatus::LowerBoundOnly { ">=" } else { "=" };
            outln!(
                "{} {rel} {} ({status}, {} nodes)",
                label(variant, p, c, opening),
                result.value,
                result.nodes
            );
        }
        Format::Csv => {
            outln!("pegs,colors,variant,opening,value,status,nodes");
            outln!(
                "{p},{c},{},{},{},{status},{}",
                variant_name(variant),
                opening.map(|x| x.to_string()).unwrap_or_default(),
                result.value,
                result.nodes
            );
        }
        Format::Tree => match &tree_json {
            Some(t) => outln!("{t}"),
            None => outln!("null"),
        },
    }
    manifest.outcome = json!({"value": result.value, "status": status});
    manifest.nodes = result.nodes;
    let files: Vec<(&str, &str)> = tree_json.iter().map(|t| ("tree.json", t.as_str())).collect();
    ctx.save(&mut manifest, started, &files)?;
    Ok(0)
}

fn variant_name(v: Variant) -> &'static str {
    match v {
        Variant::Ab => "ab",
        Variant::Abb => "abb",
        Variant::AbStar => "ab-star",
        Variant::AbFixed => "ab-fixed",
    }
}

/// `3` or `2-13`; an inverted range is empty.
fn parse_range(s: &str) -> Result<std::ops::RangeInclusive<usize>> {
    let bad = || Error::InvalidArgument(format!("bad range {s:?}"));
    let (a, b) = match s.split_once('-') {
        Some((a, b)) => (a, b),
        None => (s, s),
    };
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    Ok(a..=b)
}

#[allow(clippy::too_many_arguments)]
pub fn table(
    ctx: &Context,
    pegs: &str,
    colors: Option<&str>,
    variant: Variant,
    opening: Option<usize>,
    budget: usize,
    equal: bool,
    guards: &Guards,
) -> Result<u8> {
    let started = Instant::now();
    let ps = parse_range(pegs)?;
    let cs = match colors {
        Some(colors) => parse_range(colors)?,
        None => ps.clone(),
    };
    if (variant == Variant::AbFixed) != opening.is_some() {
        return Err(Error::InvalidArgument("--opening goes with ab-fixed and only ab-fixed".into()));
    }
    let mut manifest = RunManifest::new(
        "table",
        json!({"pegs": pegs, "colors": colors, "variant": variant, "opening": opening,
               "budget": budget, "equal": equal, "guards": guards, "workers": ctx.workers}),
    );
    let mut cells = Cells::new();
    let mut reasons = BTreeMap::new();
    let mut nodes = 0;
    for p in ps.clone() {
        for c in cs.clone() {
            if equal && c != p {
                continue;
            }
            let Ok(spec) = game(variant, p, c, opening) else {
                continue;
            };
            let solver = Solver::new(spec)?.with_limits(limits(guards)?);
            let value = match solver.solve_exact(budget) {
                Ok(r) if r.status == SolveStatus::Exact => Some(r.value),
                Ok(r) => {
                    reasons.insert(format!("{p},{c}"), format!("needs more than {} questions", r.value - 1));
                    None
                }
                Err(Error::BudgetExhausted { nodes }) => {
                    reasons.insert(format!("{p},{c}"), format!("search budget exhausted after {nodes} nodes"));
                    None
                }
                Err(e) => return Err(e),
            };
            nodes += solver.nodes();
            cells.insert((p, c), value);
        }
    }
    let (text, csv) = if equal {
        let values: BTreeMap<usize, Option<usize>> = cells
            .iter()
            .filter(|((p, c), _)| p == c)
            .map(|(&(p, _), &v)| (p, v))
            .collect();
        (formulas::render_equal_table_text(&values)?, formulas::render_equal_table_csv(&values)?)
    } else {
        (formulas::render_ab_table_text(&cells), formulas::render_ab_table_csv(&cells))
    };
    match ctx.format {
        Format::Csv => out!("{csv}"),
        _ => out!("{text}"),
    }
    for (cell, why) in &reasons {
        eprintln!("({cell}): {why}");
    }
    manifest.outcome = json!({
        "cells": cells.iter().map(|(&(p, c), v)| json!({"pegs": p, "colors": c, "value": v})).collect::<Vec<_>>(),
        "missing": reasons,
    });
    manifest.nodes = nodes;
    ctx.save(&mut manifest, started, &[("table.csv", &csv), ("table.txt", &text)])?;
    Ok(0)
}

pub fn lower(ctx: &Context, p: usize, r: usize, q: usize, guards: &Guards) -> Result<u8> {
    let started = Instant::now();
    let mut manifest = RunManifest::new(
        "lower",
        json!({"pegs": p, "r": r, "q": q, "guards": guards, "workers": ctx.workers}),
    );
    let lim = limits(guards)?;
    let states = enumerate_nonreducible(p, r)?;
    let mut verdicts = Vec::new();
    let mut csv = String::from("state,secrets,colors,budget,verdict,nodes\n");
    let mut text = String::new();
    for (i, s) in states.iter().enumerate() {
        let v = match state_unsolvable_within(s, q, lim) {
            Err(Error::BudgetExhausted { nodes }) => {
                manifest.outcome = json!({"status": "budget-exhausted", "state": i});
                manifest.nodes += nodes;
                ctx.save(&mut manifest, started, &[])?;
                eprintln!("state {i}: search budget exhausted after {nodes} nodes");
                return Ok(EXIT_BUDGET);
            }
            r => r?,
        };
        let verdict = if v.unsolvable { "unsolvable" } else { "solvable" };
        let _ = writeln!(csv, "{i},{},{},{},{verdict},{}", v.secrets, v.colors, v.budget, v.nodes);
        let _ = writeln!(
            text,
            "state {i}: {} secrets, {} colors, {verdict} within {} ({} nodes)\n  {}",
            v.secrets,
            v.colors,
            v.budget,
            v.nodes,
            v.state.replace('\n', "\n  ")
        );
        manifest.nodes += v.nodes;
        verdicts.push(v);
    }
    let mut failed = verdicts.iter().any(|v| !v.unsolvable);
    let mut residual = Vec::new();
    for c in p..r {
        let need = (c + q + 1).saturating_sub(r);
        let solver = Solver::new(GameSpec::abb(p, c))?.with_limits(lim);
        let holds = need <= 1 || solver.prove_lower(need)?;
        failed |= !holds;
        manifest.nodes += solver.nodes();
        let _ = writeln!(text, "direct: abb({p},{c}) >= {need}: {}", if holds { "holds" } else { "FAILS" });
        residual.push(json!({"colors": c, "bound": need, "holds": holds}));
    }
    let bound = if failed { None } else { Some(lower_bound_abb(p, r, q, &verdicts)?) };
    match &bound {
        Some(b) => {
            let _ = writeln!(text, "bound: {b}");
        }
        None => text.push_str("bound: not established\n"),
    }
    match ctx.format {
        Format::Csv => out!("{csv}"),
        _ => out!("{text}"),
    }
    manifest.outcome = json!({
        "states": verdicts,
        "residual": residual,
        "bound": bound.as_ref().map(|b| b.to_string()),
    });
    ctx.save(&mut manifest, started, &[("lower.csv", &csv), ("lower.txt", &text)])?;
    Ok(if failed { EXIT_UNVERIFIED } else { 0 })
}

pub fn upper(ctx: &Context, p: usize, c: usize, q: usize, x: usize, mode: Mode, guards: &Guards) -> Result<u8> {
    let started = Instant::now();
    let upper_mode = match mode {
        Mode::Generalizing => UpperMode::Generalizing,
        Mode::Fixed => UpperMode::Fixed,
    };
    let mut manifest = RunManifest::new(
        "upper",
        json!({"pegs": p, "colors": c, "q": q, "x": x, "mode": upper_mode,
               "guards": guards, "workers": ctx.workers}),
    );
    let report = verify_upper_bound(p, c, q, x, upper_mode, limits(guards)?)?;
    let csv = report.to_csv();
    let mut text = String::new();
    for case in &report.cases {
        let _ = writeln!(
            text,
            "{:<32} {:>6} candidates  budget {}  {:<10} {} nodes",
            case.sequence,
            case.candidates,
            case.budget,
            serde_json::to_value(case.verdict).ok().and_then(|v| v.as_str().map(str::to_string)).unwrap_or_default(),
            case.nodes
        );
    }
    if let Some(m) = report.mapping_checked {
        let _ = writeln!(text, "color mapping from {} colors: {}", c + 1, if m { "holds" } else { "FAILS" });
    }
    match &report.bound {
        Some(b) => {
            let _ = writeln!(text, "{} cases, bound: {b}", report.cases.len());
        }
        None => {
            let _ = writeln!(text, "{} cases, bound: not established", report.cases.len());
        }
    }
    match ctx.format {
        Format::Csv => out!("{csv}"),
        _ => out!("{text}"),
    }
    manifest.nodes = report.cases.iter().map(|c| c.nodes).sum();
    manifest.outcome = json!({
        "cases": report.cases,
        "mapping_checked": report.mapping_checked,
        "bound": report.bound.as_ref().map(|b| b.to_string()),
    });
    ctx.save(&mut manifest, started, &[("upper.csv", &csv), ("upper.txt", &text)])?;
    let failed = report.failed().next().is_some() || report.mapping_checked == Some(false);
    Ok(if failed {
        EXIT_UNVERIFIED
    } else if report.incomplete() {
        EXIT_BUDGET
    } else {
        0
    })
}
