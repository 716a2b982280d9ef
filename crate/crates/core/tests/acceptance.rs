//! Acceptance checks. Each criterion prints one PASS/FAIL line; all
//! tolerances are exact unless a time limit is stated.
//!
//! `cargo test --test acceptance -- --nocapture` shows the lines; the
//! ignored tests are the long-running extended targets
//! (`-- --ignored --nocapture`).

use std::collections::BTreeMap;
use std::io::Write;
use std::time::{Duration, Instant};

use abgame::endgame::{enumerate_nonreducible, lower_bound_abb, state_unsolvable_within, EndgameState};
use abgame::formulas::qmin;
use abgame::game::{enumerate_secrets, grade};
use abgame::solver::Limits;
use abgame::twophase::{dedupe_sequences, enumerate_answer_sequences, verify_upper_bound, CaseVerdict, UpperMode};
use abgame::{Color, GameSpec, SolveStatus, Solver};

const TABLE1: [(usize, &[usize]); 3] = [
    (2, &[2, 3, 3, 4, 4, 5, 5, 6, 6, 7, 7, 8]),
    (3, &[4, 4, 4, 5, 5, 6, 6, 6, 7, 7, 7]),
    (4, &[5, 5, 5, 6, 6, 6, 7, 7, 8, 8]),
];
const TABLE2_AB: [usize; 5] = [2, 4, 5, 6, 7];
const TABLE2_QMIN: [usize; 5] = [2, 3, 4, 5, 5];

fn rows(text: &str) -> EndgameState {
    text.trim().replace(" / ", "\n").parse().unwrap()
}

fn catalog_p2() -> Vec<EndgameState> {
    vec![rows("0 1 / 0 1")]
}

fn catalog_p3() -> Vec<EndgameState> {
    vec![
        rows("0 1 2 3 4 / 0 1 2 3 4 / 0 1 2 3 4"),
        rows("0 1 2 3 4 / 0 1 2 3 5 / 0 1 2 4 5"),
        rows("0 1 2 3 4 / 0 1 2 5 6 / 0 3 4 5 6"),
    ]
}

fn catalog_p4() -> Vec<EndgameState> {
    vec![
        rows("0 1 2 3 4 / 0 1 2 3 4 / 0 1 2 3 4 / 0 1 2 3 4"),
        rows("0 1 2 3 4 / 0 1 2 3 4 / 0 1 2 3 5 / 0 1 2 4 5"),
        rows("0 1 2 3 4 / 0 1 2 3 5 / 0 1 2 3 6 / 0 1 4 5 6"),
        rows("0 1 2 3 4 / 0 1 2 3 5 / 0 1 2 4 5 / 0 1 3 4 5"),
        rows("0 1 2 3 4 / 0 1 2 3 4 / 0 1 2 5 6 / 0 3 4 5 6"),
        rows("0 1 2 3 4 / 0 1 2 3 5 / 0 1 2 4 6 / 0 3 4 5 6"),
        rows("0 1 2 3 4 / 0 1 2 3 5 / 0 1 2 6 7 / 3 4 5 6 7"),
        rows("0 1 2 3 4 / 0 1 2 3 5 / 0 1 4 5 6 / 2 3 4 5 6"),
    ]
}

struct Report {
    failures: Vec<String>,
}

impl Report {
    fn new() -> Self {
        Self { failures: Vec::new() }
    }

    fn line(&mut self, id: &str, ok: bool, what: &str) {
        // straight to stdout so the verdicts show up without --nocapture
        let mut out = std::io::stdout().lock();
        let _ = writeln!(out, "{} [{id}] {what}", if ok { "PASS" } else { "FAIL" });
        let _ = out.flush();
        if !ok {
            self.failures.push(format!("[{id}] {what}"));
        }
    }

    fn finish(self) {
        assert!(self.failures.is_empty(), "failed criteria:\n{}", self.failures.join("\n"));
    }
}

/// Solves exactly and replays the emitted tree against every secret.
fn solve(spec: GameSpec) -> (usize, bool) {
    let r = Solver::new(spec).unwrap().solve_exact(16).unwrap();
    let replay_ok = match (&r.tree, r.status) {
        (Some(tree), SolveStatus::Exact) => {
            let secrets = enumerate_secrets(&spec).unwrap();
            tree.replay(&secrets, &spec, r.value).is_ok()
        }
        _ => false,
    };
    (r.value, replay_ok)
}

fn table_cells(p: usize, cmax: usize) -> Vec<(usize, usize, usize)> {
    let (_, row) = TABLE1.iter().find(|(q, _)| *q == p).unwrap();
    row.iter()
        .enumerate()
        .map(|(i, &v)| (p, p + i, v))
        .filter(|&(_, c, _)| c <= cmax)
        .collect()
}

fn matches_catalog(found: &[EndgameState], published: &[EndgameState]) -> bool {
    let canon: std::collections::BTreeSet<_> = published.iter().map(|s| s.canonical()).collect();
    canon.len() == published.len() && found.len() == published.len() && canon.iter().all(|s| found.contains(s))
}

#[test]
fn acceptance() {
    let mut report = Report::new();
    let mut replays = Vec::new();
    let mut computed: BTreeMap<(usize, usize), usize> = BTreeMap::new();

    // 1. core table cells
    let started = Instant::now();
    let cells: Vec<_> = [table_cells(2, 13), table_cells(3, 10), table_cells(4, 7)].concat();
    let mut wrong = Vec::new();
    for &(p, c, want) in &cells {
        let (got, replay) = solve(GameSpec::ab(p, c));
        replays.push(replay);
        computed.insert((p, c), got);
        if got != want {
            wrong.push(format!("ab({p},{c})={got}, table {want}"));
        }
    }
    let secs = started.elapsed().as_secs_f64();
    report.line(
        "1",
        wrong.is_empty() && secs <= 600.0,
        &format!(
            "table cells ab(2,2..13), ab(3,3..10), ab(4,4..7): {}/{} exact (tolerance 0) in {secs:.1}s (limit 600s) {wrong:?}",
            cells.len() - wrong.len(),
            cells.len()
        ),
    );

    // 2. equal pegs and colors
    let mut ok = true;
    let mut got_ab = Vec::new();
    for p in 2..=6 {
        let (v, replay) = solve(GameSpec::ab(p, p));
        replays.push(replay);
        got_ab.push(v);
        if p <= 4 {
            let (w, replay) = solve(GameSpec::abb(p, p));
            replays.push(replay);
            ok &= v == w;
        }
    }
    let got_qmin: Vec<usize> = (2..=6).map(|p| qmin(p).unwrap()).collect();
    ok &= got_ab == TABLE2_AB && got_qmin == TABLE2_QMIN;
    ok &= got_ab.iter().zip(&got_qmin).all(|(a, q)| q <= a);
    report.line(
        "2",
        ok,
        &format!("ab(p,p) p=2..6 = {got_ab:?} (table {TABLE2_AB:?}), equal to abb(p,p) for p<=4; qmin = {got_qmin:?} (table {TABLE2_QMIN:?})"),
    );

    // 3. auxiliary games, each within five minutes
    let aux = [
        ("ab_*(2,3)", GameSpec::ab_joker(2, 3), 3),
        ("ab^*(2,5,2)", GameSpec::ab_fixed(2, 5, 2), 4),
        ("ab^*(2,6,2)", GameSpec::ab_fixed(2, 6, 2), 4),
        ("ab_*(3,8)", GameSpec::ab_joker(3, 8), 6),
    ];
    let mut lines = Vec::new();
    let mut ok = true;
    for (name, spec, want) in aux {
        let t = Instant::now();
        let (got, replay) = solve(spec);
        replays.push(replay);
        let secs = t.elapsed().as_secs_f64();
        ok &= got == want && secs <= 300.0;
        lines.push(format!("{name}={got} (want {want}, {secs:.2}s)"));
    }
    report.line("3", ok, &format!("auxiliary games, limit 300s each: {}", lines.join(", ")));

    // 4. lower-bound pipeline
    let mut ok = true;
    let mut notes = Vec::new();
    for (p, r, q, published) in [(2, 2, 1, catalog_p2()), (3, 5, 5, catalog_p3()), (4, 5, 5, catalog_p4())] {
        let found = enumerate_nonreducible(p, r).unwrap();
        let same = matches_catalog(&found, &published);
        let verdicts: Vec<_> = found
            .iter()
            .map(|s| state_unsolvable_within(s, q, Limits::default()).unwrap())
            .collect();
        let all_unsolvable = verdicts.iter().all(|v| v.unsolvable);
        let bound = lower_bound_abb(p, r, q, &verdicts);
        ok &= same && all_unsolvable && bound.is_ok();
        notes.push(format!(
            "p={p}: {} states (published {}), catalog match {same}, unsolvable in {q}: {all_unsolvable}, {}",
            found.len(),
            published.len(),
            bound.map(|b| b.to_string()).unwrap_or_else(|e| e.to_string())
        ));
    }
    let mut direct = Vec::new();
    for (p, c, want) in [(2, 2, 2), (2, 3, 3), (2, 4, 4), (2, 5, 5), (2, 6, 6), (3, 3, 4), (3, 4, 5), (3, 5, 6), (4, 4, 5)] {
        let (got, replay) = solve(GameSpec::abb(p, c));
        replays.push(replay);
        ok &= got == want;
        direct.push(format!("abb({p},{c})={got}"));
    }
    notes.push(format!("direct: {}", direct.join(" ")));
    report.line("4", ok, &format!("lower-bound pipeline: {}", notes.join("; ")));

    // 5. upper-bound pipeline
    let counts: Vec<usize> = [(2, 3), (3, 7), (4, 13)]
        .iter()
        .map(|&(p, x)| enumerate_answer_sequences(p, x).len())
        .collect();
    let mut ok = counts == [4, 36, 560];
    let mut notes = vec![format!("sequence counts {counts:?} (want [4, 36, 560])")];
    for (p, c, q, x, cases) in [(2, 5, 5, 3, 4), (3, 9, 10, 7, 36)] {
        let r = verify_upper_bound(p, c, q, x, UpperMode::Generalizing, Limits::default()).unwrap();
        let solved = r.cases.iter().filter(|c| c.verdict == CaseVerdict::Solved).count();
        ok &= r.cases.len() == cases && solved == cases && r.bound.is_some();
        notes.push(format!(
            "p={p} c={c}: {solved}/{} end-games within {}, {}",
            r.cases.len(),
            q - x,
            r.bound.map(|b| b.to_string()).unwrap_or_else(|| "no bound".into())
        ));
    }
    // class counts are informational; the verification above covers every sequence
    let classes: Vec<usize> = [(3, 9, 7), (4, 16, 13)]
        .iter()
        .map(|&(p, c, x)| dedupe_sequences(&enumerate_answer_sequences(p, x), p, c).unwrap().len())
        .collect();
    notes.push(format!("sequence classes {classes:?} (published 17 and 117)"));
    report.line("5", ok, &format!("upper-bound pipeline: {}", notes.join("; ")));

    // 6. property spot checks; the full suites live in the other test targets
    let mut ok = replays.iter().all(|&r| r);
    let mut notes = vec![format!("{} emitted trees replayed", replays.len())];
    let mut grading_ok = true;
    for p in 2..=4 {
        let spec = GameSpec::ab(p, p);
        let all = enumerate_secrets(&spec).unwrap();
        for a in &all {
            for b in &all {
                let fb = grade(a, b, &spec).unwrap();
                grading_ok &= fb.black + fb.white.unwrap() == p as u8 && fb.black as usize != p - 1;
            }
        }
    }
    ok &= grading_ok;
    notes.push(format!("p=c grading exhaustive p<=4: {grading_ok}"));
    let mono = computed
        .iter()
        .all(|(&(p, c), &v)| computed.get(&(p, c + 1)).is_none_or(|&w| v <= w));
    ok &= mono;
    notes.push(format!("monotone in c: {mono}"));
    let sandwich = [(2, 5), (2, 8), (3, 7)].iter().all(|&(p, c)| {
        let v = computed[&(p, c)];
        solve(GameSpec::ab_joker(p, c)).0 <= v && v <= solve(GameSpec::ab_fixed(p, c, 2)).0
    });
    ok &= sandwich;
    notes.push(format!("ab_* <= ab <= ab^*: {sandwich}"));
    let determinism = [1, 2].map(|threads| {
        let pool = rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap();
        pool.install(|| {
            let spec = GameSpec::ab(4, 6);
            Solver::new(spec).unwrap().solve_exact(8).unwrap().tree.unwrap().to_json(&spec)
        })
    });
    let same = determinism[0] == determinism[1];
    ok &= same;
    notes.push(format!("identical trees at 1 and 2 workers: {same}"));
    let base = rows("0 1 2 / 0 1 3 / 1 2 3");
    let depth = |s: &EndgameState| abgame::endgame::state_depth(s, 10).unwrap();
    let rule_ok = depth(&base.rule3_permute_rows(&[2, 0, 1]).unwrap()) == depth(&base)
        && depth(&base.rule2_permute_colors(&[3 as Color, 1, 0, 2]).unwrap()) == depth(&base)
        && depth(&rows("0 1 / 0 2").rule4_merge(1, 2).unwrap()) <= depth(&rows("0 1 / 0 2"));
    ok &= rule_ok;
    notes.push(format!("rules 2-4 on small states: {rule_ok}"));
    report.line("6", ok, &format!("properties: {}", notes.join(", ")));

    report.finish();
}

#[test]
#[ignore = "extended target: larger table cells"]
fn extended_table_cells() {
    let mut report = Report::new();
    for (p, lo, hi) in [(3, 11, 13), (4, 8, 13)] {
        for (p, c, want) in table_cells(p, hi).into_iter().filter(|&(_, c, _)| c >= lo) {
            let t = Instant::now();
            let (got, replay) = solve(GameSpec::ab(p, c));
            report.line(
                "1x",
                got == want && replay,
                &format!("ab({p},{c}) = {got} (table {want}) in {:.1}s", t.elapsed().as_secs_f64()),
            );
        }
    }
    report.finish();
}

#[test]
#[ignore = "extended target: auxiliary games"]
fn extended_auxiliary() {
    let mut report = Report::new();
    let t = Instant::now();
    let (got, replay) = solve(GameSpec::ab_fixed(3, 14, 3));
    report.line("3x", got == 8 && replay, &format!("ab^*(3,14,3) = {got} (want 8) in {:.1}s", t.elapsed().as_secs_f64()));
    let t = Instant::now();
    let solver = Solver::new(GameSpec::ab_joker(4, 13)).unwrap();
    let lower = solver.prove_lower(8).unwrap();
    report.line("3x", lower, &format!("ab_*(4,13) >= 8: {lower} in {:.1}s", t.elapsed().as_secs_f64()));
    report.finish();
}

#[test]
#[ignore = "extended target: four-peg upper bounds"]
fn extended_four_peg_upper() {
    let mut report = Report::new();
    for (c, cases) in [(8, 35), (9, 56), (10, 84)] {
        let t = Instant::now();
        let r = verify_upper_bound(4, c, c + 1, c - 4, UpperMode::Fixed, Limits::default()).unwrap();
        let solved = r.cases.iter().filter(|c| c.verdict == CaseVerdict::Solved).count();
        report.line(
            "5x",
            r.cases.len() == cases && r.bound.is_some(),
            &format!("p=4 c={c} fixed: {solved}/{} solved in {:.1}s", r.cases.len(), t.elapsed().as_secs_f64()),
        );
    }
    let limits = Limits {
        max_nodes: None,
        deadline: Some(Instant::now() + Duration::from_secs(4 * 3600)),
    };
    let t = Instant::now();
    let r = verify_upper_bound(4, 16, 18, 13, UpperMode::Generalizing, limits).unwrap();
    let count = |v: CaseVerdict| r.cases.iter().filter(|c| c.verdict == v).count();
    report.line(
        "5x",
        r.bound.is_some(),
        &format!(
            "p=4 c=16 generalizing: {} solved, {} infeasible, {} failed, {} unknown of {}, mapping {:?}, in {:.0}s",
            count(CaseVerdict::Solved),
            count(CaseVerdict::Infeasible),
            count(CaseVerdict::Failed),
            count(CaseVerdict::Unknown),
            r.cases.len(),
            r.mapping_checked,
            t.elapsed().as_secs_f64()
        ),
    );
    report.finish();
}

#[test]
#[ignore = "extended target: four-peg opening bounds"]
fn extended_four_peg_openings() {
    let mut report = Report::new();
    for (name, spec, q) in [
        ("ab(4,14)", GameSpec::ab(4, 14), 9),
        ("ab^*(4,17,4)", GameSpec::ab_fixed(4, 17, 4), 10),
    ] {
        let t = Instant::now();
        let r = Solver::new(spec).unwrap().prove_upper(q).unwrap();
        report.line(
            "1x",
            r.status == SolveStatus::UpperBoundOnly,
            &format!("{name} <= {q}: {:?} in {:.0}s", r.status, t.elapsed().as_secs_f64()),
        );
    }
    report.finish();
}
