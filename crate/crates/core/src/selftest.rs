//! The acceptance checks, runnable at full size or as a quick subset.

use num_bigint::BigUint;
use rand::Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::ackermann::{ackermann, ackermann_exact, alpha2, alpha2_exact, table, AckValue};
use crate::bounds::{
    best_upper_bound, check_feather_ineqs, check_happiness, double_feather_bound, feather_bound, upper_bound_blocked,
};
use crate::constructions::{predict_stats, ConstructionStats, s4, s5, DEFAULT_MAX_SYMBOLS};
use crate::envelope::{lower_envelope, random_lines, random_segments, transcript_order_check};
use crate::error::{Error, Result};
use crate::oracle::{
    lambda_blocked_exact, min_double_feathers_permissible, min_feathers_exact, verify_known, SearchBudget,
};
use crate::random::{random_ds_blocked, random_widths, rng};
use crate::sequence::{order_violation, verify_decomposition_orders, BlockedSequence};
use crate::tree::{build_ensemble, build_tree, check_nesting, check_nesting5, count_feathers, Strategy};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scale {
    Quick,
    Full,
}

#[derive(Clone, Debug, Serialize)]
pub struct Outcome {
    pub id: u32,
    pub name: &'static str,
    pub pass: bool,
    pub detail: String,
}

pub const NAMES: [&str; 9] = [
    "exact orders 1-2",
    "construction validity",
    "nesting lemmas",
    "feather and double-feather bounds",
    "appendix regression",
    "bound/oracle/construction consistency",
    "decomposition orders",
    "envelope realizability",
    "ackermann and alpha",
];

/// Runs criterion `id` (1 to 9).
pub fn run(id: u32, scale: Scale, seed: u64) -> Outcome {
    let quick = scale == Scale::Quick;
    let res = match id {
        1 => exact_small(quick),
        2 => constructions(quick),
        3 => nesting(quick, seed),
        4 => feathers(quick, seed),
        5 => appendices(quick),
        6 => consistency(quick),
        7 => decompositions(quick, seed),
        8 => envelopes(quick, seed),
        9 => alpha(quick),
        _ => Err(Error::InvalidArgument(format!("no criterion {id}"))),
    };
    let name = NAMES.get(id.wrapping_sub(1) as usize).copied().unwrap_or("unknown");
    match res {
        Ok((pass, detail)) => Outcome { id, name, pass, detail },
        Err(e) => Outcome { id, name, pass: false, detail: format!("error: {e}") },
    }
}

type Check = Result<(bool, String)>;

fn summarize(failures: &[String], ok_msg: String) -> (bool, String) {
    if failures.is_empty() {
        (true, ok_msg)
    } else {
        let shown: Vec<&str> = failures.iter().take(5).map(|s| s.as_str()).collect();
        (false, format!("{} failures: {}", failures.len(), shown.join("; ")))
    }
}

fn exact_small(quick: bool) -> Check {
    let (nmax, bmax) = if quick { (5, 4) } else { (7, 5) };
    let r = verify_known(nmax, bmax, SearchBudget::default())?;
    Ok(summarize(&r.failures, format!("{} values reproduced", r.checks.len())))
}

/// A generated construction.
pub struct Fixture {
    pub s: u32,
    pub i: u32,
    pub j: u64,
    pub seq: BlockedSequence,
}

impl Fixture {
    pub fn name(&self) -> String {
        format!("s{}({},{})", self.s, self.i, self.j)
    }
}

/// Grid points of the construction checks.
pub fn fixture_grid(quick: bool) -> Vec<(u32, u32, u64)> {
    let (i4, j4, i5, j5) = if quick { (2, 2, 2, 1) } else { (3, 4, 3, 3) };
    let mut out = Vec::new();
    for i in 1..=i4 {
        for j in 1..=j4 {
            out.push((4, i, j));
        }
    }
    for i in 1..=i5 {
        for j in 1..=j5 {
            out.push((5, i, j));
        }
    }
    out
}

/// Predicted statistics if the construction fits the symbol cap.
fn within_cap(s: u32, i: u32, j: u64) -> Result<Option<ConstructionStats>> {
    match predict_stats(s, i, j) {
        Ok(st) if st.length <= BigUint::from(DEFAULT_MAX_SYMBOLS) => Ok(Some(st)),
        Ok(_) | Err(Error::ResourceLimit(_)) => Ok(None),
        Err(e) => Err(e),
    }
}

/// Generates the grid fixtures within the symbol cap; returns the skipped
/// points too.
pub fn fixtures(quick: bool) -> Result<(Vec<Fixture>, Vec<String>)> {
    let mut out = Vec::new();
    let mut skipped = Vec::new();
    for (s, i, j) in fixture_grid(quick) {
        if within_cap(s, i, j)?.is_none() {
            skipped.push(format!("s{s}({i},{j})"));
            continue;
        }
        let seq = if s == 4 { s4(i, j, DEFAULT_MAX_SYMBOLS)? } else { s5(i, j, DEFAULT_MAX_SYMBOLS)? };
        out.push(Fixture { s, i, j, seq });
    }
    Ok((out, skipped))
}

fn constructions(quick: bool) -> Check {
    let (fx, skipped) = fixtures(quick)?;
    let mut failures = Vec::new();
    let mut order_failures = Vec::new();
    for f in &fx {
        let st = predict_stats(f.s, f.i, f.j)?;
        let b = &f.seq;
        let name = f.name();
        if let Some(w) = order_violation(b.flat(), f.s as usize) {
            order_failures.push(format!("{name} has order above {} (pair {},{} alternates {})", f.s, w.a, w.b, w.length));
        }
        let mult = b.uniform_multiplicity().map(BigUint::from);
        if mult.as_ref() != Some(&st.mult) {
            failures.push(format!("{name}: multiplicity {mult:?}, expected {}", st.mult));
        }
        if BigUint::from(b.alphabet_size()) != st.n
            || BigUint::from(b.num_blocks()) != st.b
            || BigUint::from(b.len()) != st.length
        {
            failures.push(format!("{name}: stats differ from prediction"));
        }
        if f.s == 4 && b.uniform_block_length() != Some(f.j as usize) {
            failures.push(format!("{name}: block length is not {}", f.j));
        }
        if f.s == 5 && !st.alphabet_lower_bound_holds() {
            failures.push(format!("{name}: N < j B / xi"));
        }
    }
    let clause_msg = if failures.is_empty() { "all other clauses hold".to_string() } else { failures.join("; ") };
    let skip = if skipped.is_empty() { String::new() } else { format!("; skipped beyond cap: {}", skipped.join(" ")) };
    if order_failures.is_empty() && failures.is_empty() {
        return Ok((true, format!("{} fixtures valid{skip}", fx.len())));
    }
    let mut all = order_failures;
    all.push(clause_msg);
    Ok((false, format!("{}{skip}", all.join("; "))))
}

const FIXTURE_STRATEGIES: [Strategy; 3] =
    [Strategy::Halving, Strategy::Ackermann { i: 2, c: 3 }, Strategy::Permissible { r: 2 }];

fn random_strategy<R: Rng>(r: &mut R, k: usize) -> Strategy {
    match k {
        0 => Strategy::Halving,
        1 => Strategy::Ackermann { i: r.gen_range(1..=3), c: 3 },
        _ => Strategy::Permissible { r: r.gen_range(1..=3) },
    }
}

/// Nesting violations of the plain and the ensemble check on one instance.
fn nesting_on(b: &BlockedSequence, s: Strategy) -> Result<Option<String>> {
    let t = build_tree(b, s)?;
    let r4 = check_nesting(&t);
    let e = build_ensemble(b, s)?;
    let r5 = check_nesting5(&e);
    Ok((!r4.ok() || !r5.ok()).then(|| format!("{s}: {} plain, {} ensemble violations", r4.violation_count, r5.violation_count)))
}

fn nesting(quick: bool, seed: u64) -> Check {
    let (fx, _) = fixtures(quick)?;
    let mut failures = Vec::new();
    for f in &fx {
        for s in FIXTURE_STRATEGIES {
            if let Some(msg) = nesting_on(&f.seq, s)? {
                failures.push(format!("{} {msg}", f.name()));
            }
        }
    }
    let per_order = if quick { 30 } else { 500 };
    let mut r = rng(seed);
    let mut cases = Vec::new();
    for order in 3..=5 {
        for _ in 0..per_order {
            let n = r.gen_range(2..=12);
            let b = random_ds_blocked(&mut r, n, order, 32).drop_rare(2);
            let strategies: Vec<Strategy> = (0..3).map(|k| random_strategy(&mut r, k)).collect();
            cases.push((order, b, strategies));
        }
    }
    let random_failures: Vec<String> = cases
        .par_iter()
        .filter(|(_, b, _)| b.num_blocks() >= 2)
        .flat_map_iter(|(order, b, strategies)| {
            strategies.iter().filter_map(move |&s| match nesting_on(b, s) {
                Ok(None) => None,
                Ok(Some(msg)) => Some(format!("order {order} random: {msg}")),
                Err(e) => Some(format!("order {order} random: {e}")),
            })
        })
        .collect();
    failures.extend(random_failures);
    Ok(summarize(
        &failures,
        format!("{} fixtures and {} random sequences, 3 strategies each", fx.len(), cases.len()),
    ))
}

fn feathers(quick: bool, seed: u64) -> Check {
    let (fx, _) = fixtures(quick)?;
    let mut failures = Vec::new();
    let mut checked = 0;
    for f in &fx {
        let (n, m) = (f.seq.alphabet_size() as u64, f.seq.num_blocks() as u64);
        for i in 1..=3 {
            let strat = Strategy::Ackermann { i, c: 3 };
            let got = count_feathers(&build_tree(&f.seq, strat)?).total();
            let bound = feather_bound(5, n, m, 3, i)?;
            checked += 1;
            if BigUint::from(got) > bound {
                failures.push(format!("{} {strat}: {got} feathers > {bound}", f.name()));
            }
            if f.s == 5 {
                let got = build_ensemble(&f.seq, strat)?.report.double_feathers;
                let bound = double_feather_bound(n, m, i);
                checked += 1;
                if BigUint::from(got) > bound {
                    failures.push(format!("{} {strat}: {got} double-feathers > {bound}", f.name()));
                }
            }
        }
    }

    // tiny instances: exhaustive optimum against every strategy
    let per_order = if quick { 8 } else { 60 };
    let mut r = rng(seed ^ 0x4f);
    let mut tiny: Vec<(usize, BlockedSequence)> =
        fx.iter().filter(|f| f.seq.num_blocks() <= 10).map(|f| (f.s as usize, f.seq.clone())).collect();
    for order in 3..=5 {
        for _ in 0..per_order {
            let n = r.gen_range(2..=8);
            let b = random_ds_blocked(&mut r, n, order, 10).drop_rare(2);
            if b.num_blocks() >= 2 {
                tiny.push((order, b));
            }
        }
    }
    let mut strategies = vec![Strategy::Halving];
    for k in 1..=3 {
        strategies.push(Strategy::Ackermann { i: k, c: 3 });
        strategies.push(Strategy::Permissible { r: k });
    }
    let results: Vec<Result<Vec<String>>> = tiny
        .par_iter()
        .map(|(order, b)| {
            let mut bad = Vec::new();
            let Some(min) = min_feathers_exact(b, 1 << 26)? else {
                return Ok(vec![format!("min_feathers_exact budget exhausted on {} blocks", b.num_blocks())]);
            };
            for &s in &strategies {
                let got = count_feathers(&build_tree(b, s)?).total();
                if min > got {
                    bad.push(format!("order {order}: optimum {min} > {s} count {got}"));
                }
            }
            let (n, m) = (b.alphabet_size() as u64, b.num_blocks() as u64);
            for i in 1..=3 {
                if BigUint::from(min) > feather_bound(5, n, m, 3, i)? {
                    bad.push(format!("order {order}: optimum {min} above the level-{i} bound"));
                }
            }
            if *order == 5 {
                let dmin = min_double_feathers_permissible(b)?;
                for k in 1..=3 {
                    let got = build_ensemble(b, Strategy::Permissible { r: k })?.report.double_feathers;
                    if dmin > got {
                        bad.push(format!("order 5: double-feather optimum {dmin} > permissible:{k} count {got}"));
                    }
                }
            }
            Ok(bad)
        })
        .collect();
    for r in results {
        failures.extend(r?);
    }
    Ok(summarize(&failures, format!("{checked} fixture bounds, {} exhaustive optima", tiny.len())))
}

fn appendices(quick: bool) -> Check {
    let (smax, imax, fmax) = if quick { (8, 6, 10) } else { (12, 12, 20) };
    let h = check_happiness(smax, imax)?;
    let f = check_feather_ineqs(fmax)?;
    let mut failures = h.failures.clone();
    failures.extend(f.failures.iter().cloned());
    Ok(summarize(&failures, format!("{} inequalities hold", h.checked + f.checked)))
}

fn consistency(quick: bool) -> Check {
    let (smax, nmax, mmax) = if quick { (3, 5, 6) } else { (4, 6, 8) };
    let mut points = Vec::new();
    for s in 1..=smax {
        for n in 1..=nmax {
            for m in 1..=mmax {
                points.push((s, n, m));
            }
        }
    }
    let results: Vec<Result<(bool, Option<String>)>> = points
        .par_iter()
        .map(|&(s, n, m)| {
            let r = lambda_blocked_exact(s, n, m, SearchBudget::default())?;
            if !r.exact {
                return Ok((false, None));
            }
            let b = best_upper_bound(s as u32, n as u64, m as u64)?.bound;
            Ok((true, (BigUint::from(r.value) > b).then(|| format!("lambda_{s}({n},{m}) = {} > bound {b}", r.value))))
        })
        .collect();
    let mut failures = Vec::new();
    let mut exact = 0;
    for r in results {
        let (ex, bad) = r?;
        exact += ex as usize;
        failures.extend(bad);
    }
    let mut coherence = 0;
    for (s, i, j) in fixture_grid(quick) {
        let Some(st) = within_cap(s, i, j)? else { continue };
        let (n, m) = (u64::try_from(&st.n), u64::try_from(&st.b));
        let (Ok(n), Ok(m)) = (n, m) else { continue };
        let c = if s == 4 { 2 } else { 3 };
        let bound = upper_bound_blocked(s, n, m, c, i)?;
        coherence += 1;
        if bound < &st.mult * &st.n {
            failures.push(format!("s{s}({i},{j}): bound {bound} < mult * N = {}", &st.mult * &st.n));
        }
    }
    Ok(summarize(
        &failures,
        format!("{exact}/{} grid points exact, {coherence} construction coherence checks", points.len()),
    ))
}

fn decompositions(quick: bool, seed: u64) -> Check {
    let per_order = if quick { 100 } else { 1000 };
    let mut r = rng(seed ^ 0x7d);
    let mut failures = Vec::new();
    for order in 3..=5usize {
        for _ in 0..per_order {
            let n = r.gen_range(2..=12);
            let b = random_ds_blocked(&mut r, n, order, 32);
            if b.num_blocks() == 0 {
                continue;
            }
            let widths = random_widths(&mut r, b.num_blocks());
            let rep = verify_decomposition_orders(&b, &widths, order)?;
            failures.extend(rep.violations.into_iter().map(|v| format!("order {order}: {v}")));
        }
    }
    Ok(summarize(&failures, format!("{} pairs checked", 3 * per_order)))
}

fn envelopes(quick: bool, seed: u64) -> Check {
    let (trials, nmax) = if quick { (20, 100) } else { (200, 500) };
    let mut r = rng(seed ^ 0xe5);
    let mut failures = Vec::new();
    for t in 0..trials {
        let n = r.gen_range(1..=nmax);
        let lines = random_lines(&mut r, n);
        let tr = lower_envelope(&lines)?.transcript();
        if !transcript_order_check(&tr, 1) || tr.sequence().len() > n {
            failures.push(format!("line instance {t} (n = {n}): length {}", tr.sequence().len()));
        }
    }
    for t in 0..trials {
        let n = r.gen_range(1..=nmax);
        let segs = random_segments(&mut r, n);
        let tr = lower_envelope(&segs)?.transcript();
        let bound = best_upper_bound(3, n as u64, 2 * n as u64 - 1)?.bound;
        if !transcript_order_check(&tr, 3) || BigUint::from(tr.sequence().len()) > bound {
            failures.push(format!("segment instance {t} (n = {n}): length {}, bound {bound}", tr.sequence().len()));
        }
    }
    Ok(summarize(&failures, format!("{trials} line and {trials} segment instances")))
}

fn alpha(quick: bool) -> Check {
    let side: u32 = if quick { 10 } else { 32 };
    let mut failures = Vec::new();
    let max: f64 = 1e6;
    let grid = |k: u32| (max.powf(k as f64 / (side - 1) as f64)).round() as u64;
    let mut points = 0;
    for a in 0..side {
        for b in 0..side {
            let (n, m) = (grid(a).max(1), grid(b).max(1));
            points += 1;
            let (x, y) = (alpha2(n, m)?, alpha2_exact(n, m));
            if x != y {
                failures.push(format!("alpha({n},{m}): saturating {x}, exact {y}"));
            }
        }
    }
    for (i, j, v) in table(5, 64, u64::MAX)? {
        if let AckValue::Exact(v) = v {
            if !v.is_power_of_two() {
                failures.push(format!("a({i},{j}) = {v} is not a power of two"));
            }
        }
    }
    for i in 1..=4 {
        for j in 1..=6 {
            if let Some(v) = ackermann_exact(i, j, 1 << 16) {
                if v.count_ones() != 1 {
                    failures.push(format!("a({i},{j}) (exact) is not a power of two"));
                }
                if let AckValue::Exact(s) = ackermann(i, j, u64::MAX)? {
                    if BigUint::from(s) != v {
                        failures.push(format!("a({i},{j}): routes disagree"));
                    }
                }
            }
        }
    }
    Ok(summarize(&failures, format!("{points} alpha points, powers of two")))
}
