//! "PGS v1" text format.
//!
//! ```text
//! PGS 1 <|V|> <|S|> <|P|>
//! <node> <supernode>        |V| lines
//! <superA> <superB>         |P| lines, superA <= superB
//! ```
//!
//! `#` lines are comments. The writer emits the canonical numbering, so equal
//! summaries produce byte-identical files.

use std::io::{BufRead, Write};

use super::SummaryGraph;
use crate::{Error, Result, SupernodeId};

pub fn write_pgs(summary: &SummaryGraph, mut out: impl Write) -> std::io::Result<()> {
    let c = summary.canonical();
    writeln!(
        out,
        "PGS 1 {} {} {}",
        c.node_count(),
        c.supernode_count(),
        c.superedge_count()
    )?;
    for (u, a) in c.membership().iter().enumerate() {
        writeln!(out, "{u} {a}")?;
    }
    for (a, b) in c.superedges() {
        writeln!(out, "{a} {b}")?;
    }
    Ok(())
}

pub fn read_pgs(reader: impl BufRead) -> Result<SummaryGraph> {
    let mut lines = reader.lines().enumerate().filter_map(|(i, l)| match l {
        Ok(l) => {
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                None
            } else {
                Some(Ok((i + 1, t.to_owned())))
            }
        }
        Err(e) => Some(Err(Error::Parse {
            line: i + 1,
            message: e.to_string(),
        })),
    });

    let (line, header) = lines.next().ok_or(Error::Parse {
        line: 0,
        message: "missing PGS header".into(),
    })??;
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() != 5 || fields[0] != "PGS" || fields[1] != "1" {
        return Err(Error::Parse {
            line,
            message: format!("expected `PGS 1 <V> <S> <P>`, found {header:?}"),
        });
    }
    let num = |t: &str| -> Result<usize> {
        t.parse().map_err(|_| Error::Parse {
            line,
            message: format!("invalid count {t:?}"),
        })
    };
    let (nodes, supernodes, superedges) = (num(fields[2])?, num(fields[3])?, num(fields[4])?);

    let mut pair = |what: &str| -> Result<(usize, u64, u64)> {
        let (line, text) = lines.next().ok_or(Error::Parse {
            line: 0,
            message: format!("unexpected end of file while reading {what}"),
        })??;
        let t: Vec<&str> = text.split_whitespace().collect();
        let parse = |s: &str| {
            s.parse::<u64>().map_err(|_| Error::Parse {
                line,
                message: format!("invalid id {s:?}"),
            })
        };
        if t.len() != 2 {
            return Err(Error::Parse {
                line,
                message: format!("expected two ids in {what}"),
            });
        }
        Ok((line, parse(t[0])?, parse(t[1])?))
    };

    let mut membership = vec![SupernodeId::MAX; nodes];
    for _ in 0..nodes {
        let (line, u, a) = pair("membership")?;
        if u >= nodes as u64 || a >= supernodes as u64 {
            return Err(Error::Parse {
                line,
                message: format!("membership {u} -> {a} out of range"),
            });
        }
        if membership[u as usize] != SupernodeId::MAX {
            return Err(Error::Parse {
                line,
                message: format!("node {u} listed twice"),
            });
        }
        membership[u as usize] = a as SupernodeId;
    }
    let mut edges = Vec::with_capacity(superedges);
    for _ in 0..superedges {
        let (line, a, b) = pair("superedges")?;
        if a >= supernodes as u64 || b >= supernodes as u64 {
            return Err(Error::Parse {
                line,
                message: format!("superedge ({a}, {b}) out of range"),
            });
        }
        edges.push((a.min(b) as SupernodeId, a.max(b) as SupernodeId));
    }
    if let Some(r) = lines.next() {
        let (line, _) = r?;
        return Err(Error::Parse {
            line,
            message: "trailing data after superedges".into(),
        });
    }
    let summary = SummaryGraph::from_parts(membership, &edges)?;
    if summary.supernode_count() != supernodes {
        return Err(Error::InvalidSummary(format!(
            "header declares {supernodes} supernodes but {} are used",
            summary.supernode_count()
        )));
    }
    Ok(summary)
}
