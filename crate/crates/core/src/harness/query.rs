//! Text query language shared by the CLI and the verification driver.
//!
//! One query per line, 1-based edge ids:
//!
//! ```text
//! MF <e>              max-flow after failing e
//! MFX <e> <x>         flow on x after failing e (0/1)
//! MFD <e>             edges whose flow changes after failing e
//! MF2 <e> <e'>        max-flow and changed edges after failing both
//! MC2 <e> <e'>        min-cut size after failing both
//! MCK <j> <e1>..<ej>  min-cut size after failing j edges
//! MCKP <j> <e1>..<ej> source side of a min-cut after failing j edges
//! RQ <j> <e1>..<ej>   1 iff t is still reachable from s
//! ```

use std::fmt;

use crate::error::{Error, Result};
use crate::graph::EdgeId;
use crate::oracle::SensitivityOracle;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Query {
    Mf(EdgeId),
    Mfx(EdgeId, EdgeId),
    Mfd(EdgeId),
    Mf2(EdgeId, EdgeId),
    Mc2(EdgeId, EdgeId),
    Mck(Vec<EdgeId>),
    Mckp(Vec<EdgeId>),
    Rq(Vec<EdgeId>),
}

fn edge_token(tok: Option<&str>) -> Result<EdgeId> {
    let tok = tok.ok_or_else(|| Error::Precondition("missing edge id".into()))?;
    let raw: u32 = tok
        .parse()
        .map_err(|_| Error::Precondition(format!("invalid edge id `{tok}`")))?;
    if raw == 0 {
        return Err(Error::UnknownEdge(0));
    }
    Ok(EdgeId(raw - 1))
}

pub fn parse_query(line: &str) -> Result<Query> {
    let mut toks = line.split_whitespace();
    let kind = toks.next().ok_or_else(|| Error::Precondition("empty query".into()))?;
    let list = |toks: &mut std::str::SplitWhitespace<'_>| -> Result<Vec<EdgeId>> {
        let j: usize = toks
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| Error::Precondition("missing failure count".into()))?;
        (0..j).map(|_| edge_token(toks.next())).collect()
    };
    let q = match kind {
        "MF" => Query::Mf(edge_token(toks.next())?),
        "MFX" => Query::Mfx(edge_token(toks.next())?, edge_token(toks.next())?),
        "MFD" => Query::Mfd(edge_token(toks.next())?),
        "MF2" => Query::Mf2(edge_token(toks.next())?, edge_token(toks.next())?),
        "MC2" => Query::Mc2(edge_token(toks.next())?, edge_token(toks.next())?),
        "MCK" => Query::Mck(list(&mut toks)?),
        "MCKP" => Query::Mckp(list(&mut toks)?),
        "RQ" => Query::Rq(list(&mut toks)?),
        other => return Err(Error::Precondition(format!("unknown query type `{other}`"))),
    };
    if toks.next().is_some() {
        return Err(Error::Precondition("trailing tokens in query".into()));
    }
    Ok(q)
}

fn one_based(ids: impl IntoIterator<Item = u32>) -> String {
    let parts: Vec<String> = ids.into_iter().map(|x| (x + 1).to_string()).collect();
    format!("[{}]", parts.join(" "))
}

impl fmt::Display for Query {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let list = |f: &mut fmt::Formatter<'_>, name: &str, es: &[EdgeId]| {
            write!(f, "{name} {}", es.len())?;
            for e in es {
                write!(f, " {}", e.0 + 1)?;
            }
            Ok(())
        };
        match self {
            Query::Mf(e) => write!(f, "MF {}", e.0 + 1),
            Query::Mfx(e, x) => write!(f, "MFX {} {}", e.0 + 1, x.0 + 1),
            Query::Mfd(e) => write!(f, "MFD {}", e.0 + 1),
            Query::Mf2(e, e2) => write!(f, "MF2 {} {}", e.0 + 1, e2.0 + 1),
            Query::Mc2(e, e2) => write!(f, "MC2 {} {}", e.0 + 1, e2.0 + 1),
            Query::Mck(es) => list(f, "MCK", es),
            Query::Mckp(es) => list(f, "MCKP", es),
            Query::Rq(es) => list(f, "RQ", es),
        }
    }
}

/// Answer text for one query.
pub fn answer(oracle: &SensitivityOracle, q: &Query) -> Result<String> {
    Ok(match q {
        Query::Mf(e) => oracle.max_flow_single(*e)?.to_string(),
        Query::Mfx(e, x) => u8::from(oracle.query_edge_flow(*e, *x)?).to_string(),
        Query::Mfd(e) => one_based(oracle.report_flow_diff_single(*e)?.toggled.iter().map(|e| e.0)),
        Query::Mf2(e, e2) => {
            let d = oracle.report_flow_diff_dual(*e, *e2)?;
            format!("{} {}", d.new_value, one_based(d.toggled.iter().map(|e| e.0)))
        }
        Query::Mc2(e, e2) => oracle.mincut_size_dual(*e, *e2)?.to_string(),
        Query::Mck(es) => oracle.mincut_size_k(es)?.to_string(),
        Query::Mckp(es) => one_based(oracle.mincut_partition_k(es)?.source_side.iter().map(|v| v.0)),
        Query::Rq(es) => u8::from(oracle.reachable_under_failures(es)?).to_string(),
    })
}
