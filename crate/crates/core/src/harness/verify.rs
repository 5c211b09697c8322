//! Verification driver: compares oracle answers against brute force and
//! checks the structural invariants of the families.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::brute::brute_force;
use super::query::Query;
use crate::error::{Error, Result};
use crate::family::FlowFamily;
use crate::flow::{check_feasible, max_flow_value_in, UnitFlow};
use crate::graph::{EdgeId, FlowNetwork};
use crate::mincut::{CutPartition, WORD_BOUND_FACTOR};
use crate::oracle::{FlowDiff, SensitivityOracle};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Profile {
    Exhaustive1,
    Exhaustive2,
    ExhaustiveK { k: usize, n_cap: usize },
    /// `seed` overrides the driver's seed when given.
    Sampled { count: usize, seed: Option<u64> },
    Invariants,
}

impl FromStr for Profile {
    type Err = Error;

    /// `exhaustive-1`, `exhaustive-2`, `exhaustive-k(K,NCAP)`,
    /// `sampled(COUNT[,SEED])`, `invariants`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Precondition(format!("unknown profile `{s}`"));
        let args = |inner: &str| -> Result<Vec<u64>> {
            inner
                .split(',')
                .map(|x| x.trim().parse::<u64>().map_err(|_| bad()))
                .collect()
        };
        if let Some(rest) = s.strip_prefix("exhaustive-k(").and_then(|r| r.strip_suffix(')')) {
            return match args(rest)?[..] {
                [k, n_cap] => Ok(Profile::ExhaustiveK {
                    k: k as usize,
                    n_cap: n_cap as usize,
                }),
                _ => Err(bad()),
            };
        }
        if let Some(rest) = s.strip_prefix("sampled(").and_then(|r| r.strip_suffix(')')) {
            return match args(rest)?[..] {
                [count] => Ok(Profile::Sampled {
                    count: count as usize,
                    seed: None,
                }),
                [count, seed] => Ok(Profile::Sampled {
                    count: count as usize,
                    seed: Some(seed),
                }),
                _ => Err(bad()),
            };
        }
        match s {
            "exhaustive-1" => Ok(Profile::Exhaustive1),
            "exhaustive-2" => Ok(Profile::Exhaustive2),
            "invariants" => Ok(Profile::Invariants),
            _ => Err(bad()),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    /// Query line in the CLI query language.
    pub query: String,
    pub expected: String,
    pub got: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct InvariantResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug)]
pub struct VerificationReport {
    /// The graph in file format, for replaying mismatches.
    pub graph_text: String,
    pub profile: Profile,
    pub checked: BTreeMap<&'static str, usize>,
    pub mismatches: Vec<Mismatch>,
    pub invariants: Vec<InvariantResult>,
    pub elapsed: Duration,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        self.mismatches.is_empty() && self.invariants.iter().all(|i| i.passed)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "profile {:?}", self.profile)?;
        for (kind, count) in &self.checked {
            writeln!(f, "  {kind:<5} {count} queries checked")?;
        }
        for inv in &self.invariants {
            let mark = if inv.passed { "pass" } else { "FAIL" };
            writeln!(f, "  [{mark}] {} {}", inv.name, inv.detail)?;
        }
        for m in &self.mismatches {
            writeln!(f, "  MISMATCH {} => {} (expected {})", m.query, m.got, m.expected)?;
        }
        if !self.mismatches.is_empty() {
            writeln!(f, "  replay with this graph:")?;
            for line in self.graph_text.lines() {
                writeln!(f, "    {line}")?;
            }
        }
        writeln!(
            f,
            "{} mismatches, {:.2?} elapsed",
            self.mismatches.len(),
            self.elapsed
        )
    }
}

/// Flow of a diff must be feasible in `G - failed` with the claimed value.
fn diff_flow_value(net: &FlowNetwork, oracle: &SensitivityOracle, diff: &FlowDiff, failed: &[EdgeId]) -> Option<u64> {
    let f = oracle.apply_diff(diff);
    let caps: Vec<u32> = net.graph.edge_ids().map(|e| u32::from(!failed.contains(&e))).collect();
    let value = check_feasible(&net.graph, net.source, net.sink, &caps, &f.as_int()).ok()?;
    (value == u64::from(diff.new_value)).then_some(value)
}

/// Compares one query with brute force. Returns the query kind and an
/// optional mismatch.
pub fn check_query(net: &FlowNetwork, oracle: &SensitivityOracle, q: &Query) -> (&'static str, Option<Mismatch>) {
    let mismatch = |expected: String, got: String| {
        Some(Mismatch {
            query: q.to_string(),
            expected,
            got,
        })
    };
    let show = |r: Result<String>| r.unwrap_or_else(|e| format!("error: {e}"));
    match q {
        Query::Mf(e) => {
            let want = brute_force(net, &[*e]).value;
            let got = oracle.max_flow_single(*e);
            ("MF", (got.as_ref().ok() != Some(&want)).then(|| mismatch(want.to_string(), show(got.map(|v| v.to_string())))).flatten())
        }
        Query::Mfx(e, x) => {
            let got = oracle.query_edge_flow(*e, *x);
            let want = oracle
                .report_flow_diff_single(*e)
                .map(|d| oracle.apply_diff(&d).on(*x));
            let ok = matches!((&got, &want), (Ok(a), Ok(b)) if a == b);
            ("MFX", (!ok).then(|| mismatch(show(want.map(|b| u8::from(b).to_string())), show(got.map(|b| u8::from(b).to_string())))).flatten())
        }
        Query::Mfd(e) => {
            let want = brute_force(net, &[*e]).value;
            let got = oracle.report_flow_diff_single(*e);
            let ok = got
                .as_ref()
                .ok()
                .and_then(|d| diff_flow_value(net, oracle, d, &[*e]))
                == Some(u64::from(want));
            ("MFD", (!ok).then(|| mismatch(format!("feasible flow of value {want}"), show(got.map(|d| format!("{d:?}"))))).flatten())
        }
        Query::Mf2(e, e2) => {
            let want = brute_force(net, &[*e, *e2]).value;
            let got = oracle.report_flow_diff_dual(*e, *e2);
            let ok = got
                .as_ref()
                .ok()
                .and_then(|d| diff_flow_value(net, oracle, d, &[*e, *e2]))
                == Some(u64::from(want));
            ("MF2", (!ok).then(|| mismatch(format!("feasible flow of value {want}"), show(got.map(|d| format!("{d:?}"))))).flatten())
        }
        Query::Mc2(e, e2) => {
            let want = brute_force(net, &[*e, *e2]).value;
            let got = oracle.mincut_size_dual(*e, *e2);
            ("MC2", (got.as_ref().ok() != Some(&want)).then(|| mismatch(want.to_string(), show(got.map(|v| v.to_string())))).flatten())
        }
        Query::Mck(es) => {
            let want = brute_force(net, es).value;
            let got = oracle.mincut_size_k(es);
            ("MCK", (got.as_ref().ok() != Some(&want)).then(|| mismatch(want.to_string(), show(got.map(|v| v.to_string())))).flatten())
        }
        Query::Mckp(es) => {
            let want = brute_force(net, es).value;
            let got = oracle.mincut_partition_k(es);
            let ok = got.as_ref().is_ok_and(|cut| valid_cut(net, cut, es, want));
            ("MCKP", (!ok).then(|| mismatch(format!("cut of size {want}"), show(got.map(|c| format!("{c:?}"))))).flatten())
        }
        Query::Rq(es) => {
            let want = brute_force(net, es).value >= 1;
            let got = oracle.reachable_under_failures(es);
            ("RQ", (got.as_ref().ok() != Some(&want)).then(|| mismatch(want.to_string(), show(got.map(|v| v.to_string())))).flatten())
        }
    }
}

/// `cut` separates `s` from `t` and has exactly `size` crossing edges in
/// `G - failed`.
pub fn valid_cut(net: &FlowNetwork, cut: &CutPartition, failed: &[EdgeId], size: u32) -> bool {
    let mut side = fixedbitset::FixedBitSet::with_capacity(net.vertex_count());
    for v in &cut.source_side {
        side.insert(v.index());
    }
    if !side.contains(net.source.index()) || side.contains(net.sink.index()) {
        return false;
    }
    let recomputed = CutPartition::from_side(&net.graph, &side, |e| failed.contains(&e));
    recomputed.crossing == cut.crossing && cut.size() == size as usize
}

/// All failure sets of size `0..=k` in lexicographic order.
pub fn failure_sets(m: usize, k: usize) -> Vec<Vec<EdgeId>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..k {
        let mut next = Vec::new();
        for set in &frontier {
            let start = set.last().map_or(0, |e: &EdgeId| e.index() + 1);
            for x in start..m {
                let mut s = set.clone();
                s.push(EdgeId(x as u32));
                next.push(s);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

fn run_queries(net: &FlowNetwork, oracle: &SensitivityOracle, queries: &[Query], report: &mut VerificationReport) {
    let results: Vec<(&'static str, Option<Mismatch>)> =
        queries.par_iter().map(|q| check_query(net, oracle, q)).collect();
    for (kind, mismatch) in results {
        *report.checked.entry(kind).or_default() += 1;
        report.mismatches.extend(mismatch);
    }
}

/// Builds the oracle for `profile` and runs its comparison suite.
pub fn verify(net: &FlowNetwork, profile: &Profile, seed: u64) -> Result<VerificationReport> {
    let start = Instant::now();
    let k = match profile {
        Profile::ExhaustiveK { k, n_cap } => {
            if net.vertex_count() > *n_cap {
                return Err(Error::TooLarge(format!(
                    "graph has {} vertices, profile cap is {n_cap}",
                    net.vertex_count()
                )));
            }
            Some(*k)
        }
        _ => None,
    };
    let oracle = SensitivityOracle::build(net, k)?;
    let m = net.edge_count();
    let ids = || (0..m as u32).map(EdgeId);
    let mut report = VerificationReport {
        graph_text: net.to_text(),
        profile: profile.clone(),
        checked: BTreeMap::new(),
        mismatches: Vec::new(),
        invariants: Vec::new(),
        elapsed: Duration::ZERO,
    };
    let queries: Vec<Query> = match profile {
        Profile::Exhaustive1 => ids()
            .flat_map(|e| {
                let bits = ids().filter(move |&x| x != e).map(move |x| Query::Mfx(e, x));
                [Query::Mf(e), Query::Mfd(e)].into_iter().chain(bits)
            })
            .collect(),
        Profile::Exhaustive2 => ids()
            .flat_map(|e| {
                ids()
                    .filter(move |&x| x > e)
                    .flat_map(move |x| [Query::Mf2(e, x), Query::Mc2(e, x)])
            })
            .collect(),
        Profile::ExhaustiveK { k, .. } => failure_sets(m, *k)
            .into_iter()
            .flat_map(|f| [Query::Mck(f.clone()), Query::Mckp(f.clone()), Query::Rq(f)])
            .collect(),
        Profile::Sampled { count, seed: own } => {
            let mut rng = ChaCha8Rng::seed_from_u64(own.unwrap_or(seed));
            let mut out = Vec::with_capacity(*count);
            if m >= 2 {
                while out.len() < *count {
                    let e = EdgeId(rng.gen_range(0..m) as u32);
                    let x = EdgeId(rng.gen_range(0..m) as u32);
                    let q = match rng.gen_range(0..4) {
                        0 => Query::Mf(e),
                        1 => Query::Mfd(e),
                        _ if e == x => continue,
                        2 => Query::Mf2(e, x),
                        _ => Query::Mc2(e, x),
                    };
                    out.push(q);
                }
            }
            out
        }
        Profile::Invariants => {
            report.invariants = check_invariants(net, &oracle);
            Vec::new()
        }
    };
    run_queries(net, &oracle, &queries, &mut report);
    report.elapsed = start.elapsed();
    Ok(report)
}

fn listing(edges: &[EdgeId]) -> String {
    if edges.is_empty() {
        String::new()
    } else {
        let ids: Vec<String> = edges.iter().map(|e| (e.0 + 1).to_string()).collect();
        format!(" [{}]", ids.join(" "))
    }
}

fn inv(name: &'static str, passed: bool, detail: impl Into<String>) -> InvariantResult {
    InvariantResult {
        name,
        passed,
        detail: detail.into(),
    }
}

fn family_checks(net: &FlowNetwork, fam: &FlowFamily, label: &'static str, out: &mut Vec<InvariantResult>) {
    let lambda = fam.lambda;
    let caps: Vec<u32> = net.graph.edge_ids().map(|e| u32::from(fam.scope.contains(e))).collect();
    let feasible = |f: &UnitFlow| {
        check_feasible(&net.graph, net.source, net.sink, &caps, &f.as_int()).ok() == Some(u64::from(f.value))
    };
    out.push(inv(
        label,
        fam.a().len() == lambda as usize + 1 && fam.a().iter().all(|f| f.value == lambda && feasible(f)),
        format!("|A| = {} (λ+1 = {}), members feasible max-flows", fam.a().len(), lambda + 1),
    ));
    let sum_ok = net.graph.edge_ids().all(|e| {
        fam.a().iter().map(|f| u32::from(f.on(e))).sum::<u32>() == fam.auxiliary.flow.assignment[e.index()]
    });
    out.push(inv(label, sum_ok, "Σ f_i = f_H edgewise"));
    let h = fam.auxiliary.flow.value;
    out.push(inv(
        label,
        h == u64::from(lambda) * u64::from(lambda + 1),
        format!("H max-flow {h} = λ(λ+1)"),
    ));
    out.push(inv(
        label,
        fam.members.len() == 2 * lambda as usize + 1 && fam.b_extra().iter().all(|f| f.value + 1 == lambda && feasible(f)),
        format!("|B| = {} (2λ+1 = {})", fam.members.len(), 2 * lambda + 1),
    ));
}

/// Structural checks on the families, calibration, and min-cut oracle.
pub fn check_invariants(net: &FlowNetwork, oracle: &SensitivityOracle) -> Vec<InvariantResult> {
    let mut out = Vec::new();
    let n = oracle.pruning().kept_vertex_count();
    let lambda = oracle.lambda();
    let cal = oracle.calibrated();
    let cal_fam = oracle.calibrated_family();
    let labels = oracle.calibrated_labels();
    family_checks(net, cal_fam, "calibrated family", &mut out);
    family_checks(net, oracle.family(), "pruned family", &mut out);

    let uncovered: Vec<EdgeId> = cal
        .kept
        .iter()
        .filter(|&e| !labels.is_critical(e) && cal_fam.a().iter().all(|f| f.on(e)))
        .collect();
    out.push(inv(
        "coverage",
        uncovered.is_empty(),
        format!("non-critical edges carried by all of A: {}{}", uncovered.len(), listing(&uncovered)),
    ));

    let canon_bad: Vec<EdgeId> = cal
        .kept
        .iter()
        .filter(|&e| {
            let want = brute_force(net, &[e]).value;
            cal_fam.canonical_for_edge(e).map(|i| cal_fam.members[i].value) != Some(want)
        })
        .collect();
    out.push(inv(
        "canonical flows",
        canon_bad.is_empty(),
        format!("edges with a wrong canonical value: {}{}", canon_bad.len(), listing(&canon_bad)),
    ));

    let mut sub_ok = max_flow_value_in(net, &cal.kept) == u64::from(lambda);
    for e in net.graph.edge_ids() {
        let mut sub = cal.kept.clone();
        sub.remove(e);
        sub_ok &= max_flow_value_in(net, &sub) == u64::from(brute_force(net, &[e]).value);
    }
    out.push(inv("calibration", sub_ok, "max-flow(𝒢 - e) = max-flow(G - e) for every e"));

    let edge_bound = lambda as usize * n + 2 * n * (lambda as usize + 1);
    out.push(inv(
        "calibrated size",
        cal.kept.len() <= edge_bound,
        format!("|E(𝒢)| = {} <= {edge_bound}", cal.kept.len()),
    ));

    let max_null = cal_fam.nullsets.iter().map(|s| s.len()).max().unwrap_or(0);
    let max_min1 = cal_fam.nullmin1[..=lambda as usize].iter().map(|s| s.len()).max().unwrap_or(0);
    out.push(inv("null sets", max_null <= 3 * n, format!("max |null(f)| = {max_null} <= 3n = {}", 3 * n)));
    out.push(inv(
        "min+1 null sets",
        max_min1 <= 2 * n,
        format!("max |null(f, min+1)| = {max_min1} <= 2n = {}", 2 * n),
    ));
    let mut max_disagree = 0;
    for (i, f) in cal_fam.members.iter().enumerate() {
        for g in &cal_fam.members[..i] {
            max_disagree = max_disagree.max(f.carries.symmetric_difference(&g.carries).len());
        }
    }
    out.push(inv(
        "pairwise disagreement",
        max_disagree <= 6 * n,
        format!("max {max_disagree} <= 6n = {}", 6 * n),
    ));

    let words = oracle.mincut().stored_words();
    let word_bound = WORD_BOUND_FACTOR * (lambda.max(1) as usize) * net.vertex_count();
    out.push(inv(
        "min-cut oracle size",
        words <= word_bound,
        format!("{words} words <= {WORD_BOUND_FACTOR}·λ·n = {word_bound}"),
    ));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::gen::{bottleneck, diamond};

    #[test]
    fn profiles_parse() {
        assert_eq!("exhaustive-1".parse::<Profile>().unwrap(), Profile::Exhaustive1);
        assert_eq!(
            "exhaustive-k(3,15)".parse::<Profile>().unwrap(),
            Profile::ExhaustiveK { k: 3, n_cap: 15 }
        );
        assert_eq!(
            "sampled(100)".parse::<Profile>().unwrap(),
            Profile::Sampled { count: 100, seed: None }
        );
        assert_eq!(
            "sampled(100,7)".parse::<Profile>().unwrap(),
            Profile::Sampled { count: 100, seed: Some(7) }
        );
        assert!("sampled(x)".parse::<Profile>().is_err());
    }

    #[test]
    fn failure_set_enumeration() {
        assert_eq!(failure_sets(4, 2).len(), 1 + 4 + 6);
    }

    #[test]
    fn bottleneck_pairs() {
        let r = verify(&bottleneck(2).unwrap(), &Profile::Exhaustive2, 0).unwrap();
        assert_eq!(r.checked["MC2"], 10);
        assert!(r.passed(), "{r}");
    }

    #[test]
    fn diamond_invariants() {
        let r = verify(&diamond(), &Profile::Invariants, 0).unwrap();
        assert!(r.passed(), "{r}");
        assert!(r.invariants.iter().any(|i| i.detail.starts_with("|A| = 3")));
        assert!(r.invariants.iter().any(|i| i.detail.starts_with("|B| = 5")));
    }
}
